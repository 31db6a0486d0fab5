from pathflux.model.scm import DiscreteScm, NoisePmfs, ScmName


def ternary_treatment_scm() -> DiscreteScm:
    """A uniform over three levels, everything else constant, Y = A."""
    return DiscreteScm(
        name=ScmName("ternary"),
        card_w=1,
        card_a=3,
        card_z=1,
        card_m=1,
        noise=NoisePmfs(u_w=[1.0], u_a=[1 / 3, 1 / 3, 1 / 3], u_z=[1.0], u_m=[1.0], u_y=[1.0]),
        f_w=[0],
        f_a=[[0, 1, 2]],
        f_z=[[[0]], [[0]], [[0]]],
        f_m=[[[[0]], [[0]], [[0]]]],
        f_y=[[[[[0.0]], [[1.0]], [[2.0]]]]],
    )


def scm_with(base: DiscreteScm, **changes: object) -> DiscreteScm:
    """Copy of base with fields replaced, skipping validation so broken models can be built."""
    fields = {name: getattr(base, name) for name in DiscreteScm.model_fields}
    return DiscreteScm.model_construct(**{**fields, **changes})
