import argparse
import logging
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import wireup

from pathflux import repos, services
from pathflux.common.error_handler import handle_exception
from pathflux.common.errors import ExitCode
from pathflux.config.config import config
from pathflux.logging.logs_manager import init_logging, with_run_id
from pathflux.model.targets import ZUnderlineMode
from pathflux.services import EstimationService, OracleService, SimulationService, VerificationService
from pathflux.views import envelope, estimation_table, experiment_table, oracle_table, render

logger = logging.getLogger(__name__)

Command = Callable[[argparse.Namespace, wireup.SyncContainer], ExitCode]


def _positive(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError as e:
        msg = f"{raw!r} is not an integer"
        raise argparse.ArgumentTypeError(msg) from e
    if value < 1:
        msg = f"{value} must be at least 1"
        raise argparse.ArgumentTypeError(msg)
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathflux", description="Path-specific causal influence: simulate, oracle, estimate, verify."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive, help="worker cap (default: PATHFLUX_THREADS or the CPU count)")
    reporting = argparse.ArgumentParser(add_help=False)
    reporting.add_argument("--out", type=Path, help="report file (default: stdout)")
    reporting.add_argument("--format", choices=("json", "table"), default="json", dest="output_format")

    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", parents=[common], help="sample a dataset from an SCM")
    simulate.add_argument("--scm", required=True, help="builtin SCM name or SCM JSON file")
    simulate.add_argument("-n", "--rows", type=_positive, required=True)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", type=Path, required=True, help="CSV file to write")

    oracle = commands.add_parser("oracle", parents=[common, reporting], help="exact decomposition of an SCM")
    oracle.add_argument("--scm", required=True, help="builtin SCM name or SCM JSON file")
    oracle.add_argument("--mode", type=ZUnderlineMode, choices=list(ZUnderlineMode), default=ZUnderlineMode.coupled)
    oracle.add_argument("--ate", action="store_true", help="also decompose the average treatment effect")

    estimate = commands.add_parser("estimate", parents=[common, reporting], help="cross-fitted one-step estimates")
    estimate.add_argument("--data", type=Path, required=True, help="CSV with header w,a,z,m,y")
    estimate.add_argument("--config", type=Path, help="run configuration JSON")
    estimate.add_argument("--seed", type=int, help="overrides the configured seed")
    estimate.add_argument("--ate", action="store_true", help="also decompose the average treatment effect")

    verify = commands.add_parser("verify", parents=[common, reporting], help="run an experiment spec")
    verify.add_argument("spec", type=Path, help="experiment spec JSON")
    verify.add_argument("--seed", type=int, help="overrides the spec seed")

    return parser


def create_container(threads: int | None = None) -> wireup.SyncContainer:
    parameters = config()
    if threads is not None:
        parameters = {**parameters, "threads": threads}
    return wireup.create_sync_container(service_modules=[services, repos], parameters=parameters)


def _threads(args: argparse.Namespace) -> int:
    return args.threads or config()["threads"]


def _provenance(args: argparse.Namespace, **fields: Any) -> dict[str, Any]:  # noqa: ANN401
    return {"command": args.command, "threads": _threads(args), **fields}


def simulate(args: argparse.Namespace, container: wireup.SyncContainer) -> ExitCode:
    service = container.get(SimulationService)
    scm = service.load(args.scm)
    data = service.simulate(scm, args.rows, args.seed, args.out)
    logger.info("simulated", extra={"scm": scm.name, "n": data.n, "seed": args.seed, "out": str(args.out)})
    return ExitCode.SUCCESS


def oracle(args: argparse.Namespace, container: wireup.SyncContainer) -> ExitCode:
    service = container.get(OracleService)
    scm = service.load(args.scm)
    result = service.decompose(scm, args.mode, include_ate=args.ate)
    provenance = _provenance(
        args,
        seed=None,
        config={"mode": args.mode.value, "ate": args.ate},
        scm={"name": scm.name, "fingerprint": scm.fingerprint},
    )
    document = envelope("oracle", provenance, result)
    container.get(repos.ReportRepo).write(render(document, oracle_table(result), args.output_format), args.out)
    return ExitCode.SUCCESS


def estimate(args: argparse.Namespace, container: wireup.SyncContainer) -> ExitCode:
    cfg = container.get(repos.SpecRepo).run_config(args.config)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    service = container.get(EstimationService)
    data = service.load(args.data, cfg)
    result = service.estimate(data, cfg, include_ate=args.ate)
    provenance = _provenance(
        args,
        seed=cfg.seed,
        config=cfg.model_dump(mode="json", by_alias=True),
        data={"path": str(args.data), "n": data.n, "cards": list(data.cards.shape)},
        codebook=data.codebook,
    )
    document = envelope("estimate", provenance, result)
    container.get(repos.ReportRepo).write(render(document, estimation_table(result), args.output_format), args.out)
    return ExitCode.SUCCESS


def verify(args: argparse.Namespace, container: wireup.SyncContainer) -> ExitCode:
    service = container.get(VerificationService)
    spec = service.load(args.spec)
    if args.seed is not None:
        spec = spec.model_copy(update={"seed": args.seed})
    report = service.verify(spec)
    provenance = _provenance(args, seed=spec.seed, config=spec.model_dump(mode="json", by_alias=True))
    document = envelope("verify", provenance, report)
    container.get(repos.ReportRepo).write(render(document, experiment_table(report), args.output_format), args.out)
    return ExitCode.SUCCESS if report.passed else ExitCode.FAILED


COMMANDS: dict[str, Command] = {"simulate": simulate, "oracle": oracle, "estimate": estimate, "verify": verify}


@with_run_id()
def run(args: argparse.Namespace) -> ExitCode:
    try:
        container = create_container(_threads(args))
        code = COMMANDS[args.command](args, container)
    except Exception as e:  # noqa: BLE001
        return handle_exception(e)
    logger.info("command finished", extra={"command": args.command, "exit_code": int(code)})
    return code


def main(argv: Sequence[str] | None = None) -> int:
    init_logging()
    args = build_parser().parse_args(argv)
    return int(run(args))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
