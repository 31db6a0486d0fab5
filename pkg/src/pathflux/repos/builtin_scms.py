"""SCMs shipped with pathflux, addressable by name from the CLI and experiment specs."""

from collections.abc import Callable

from pathflux.model.scm import DiscreteScm, NoisePmfs, ScmName

BINARY = (0, 1)


def t0() -> DiscreteScm:
    """W and Z and M constant, A a fair coin, Y = A."""
    return DiscreteScm(
        name=ScmName("t0"),
        card_w=1,
        card_a=2,
        card_z=1,
        card_m=1,
        noise=NoisePmfs(u_w=[1.0], u_a=[0.5, 0.5], u_z=[1.0], u_m=[1.0], u_y=[1.0]),
        f_w=[0],
        f_a=[[0, 1]],
        f_z=[[[0]], [[0]]],
        f_m=[[[[0]], [[0]]]],
        f_y=[[[[[0.0]], [[1.0]]]]],
    )


def _t1_outcome(m: int, z: int, a: int, w: int, u: int) -> float:
    return a + 0.5 * z + 2.0 * m + 0.5 * w - a * m + u


def t1() -> DiscreteScm:
    """Binary chain with every conditional bounded away from zero.

    W = U_W, A = W xor U_A, Z = A xor U_Z, M = (Z or (A and W)) xor U_M and
    Y = A + Z/2 + 2M + W/2 - AM + U_Y, with U_W, U_A, U_Z, U_M, U_Y Bernoulli(.4, .3, .1, .2, .3).
    """
    return DiscreteScm(
        name=ScmName("t1"),
        card_w=2,
        card_a=2,
        card_z=2,
        card_m=2,
        noise=NoisePmfs(u_w=[0.6, 0.4], u_a=[0.7, 0.3], u_z=[0.9, 0.1], u_m=[0.8, 0.2], u_y=[0.7, 0.3]),
        f_w=list(BINARY),
        f_a=[[w ^ u for u in BINARY] for w in BINARY],
        f_z=[[[a ^ u for u in BINARY] for _w in BINARY] for a in BINARY],
        f_m=[[[[(z | (a & w)) ^ u for u in BINARY] for w in BINARY] for a in BINARY] for z in BINARY],
        f_y=[
            [[[[_t1_outcome(m, z, a, w, u) for u in BINARY] for w in BINARY] for a in BINARY] for z in BINARY]
            for m in BINARY
        ],
    )


BUILTINS: dict[str, Callable[[], DiscreteScm]] = {"t0": t0, "t1": t1}
