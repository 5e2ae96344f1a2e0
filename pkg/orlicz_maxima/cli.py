from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from typing import Any, Callable, Sequence

import numpy as np

from .config import Settings
from .distributions import DistributionModel, parse_model
from .errors import OrliczMaximaError
from .mc import McConfig, expected_max_product, expected_max_single
from .orlicz import (
    CoefficientMatrix,
    InnerNorm,
    Lq,
    OrliczInner,
    PowerOrlicz,
    luxemburg_norm,
    mixed_norm,
    paired_orlicz,
    parse_orlicz,
)
from .store import (
    read_manifest,
    read_matrix_csv,
    tool_version,
    write_estimate,
    write_manifest,
    write_study,
    write_table,
)
from .types import ManifestRecord
from .verify import (
    PRODUCT_THRESHOLD,
    T1_THRESHOLD,
    RatioStudy,
    T2Proof,
    T3Proof,
    gaussian_unit_maxima,
    study_function_equiv,
    study_gaussian_control,
    study_gaussian_not_l2,
    study_product,
    study_thm1,
    t2,
    t3,
    t5,
    t6,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_DOMAIN = 3

THEOREMS = ("t1", "t2", "t3", "corollary", "t5", "t6", "gauss-not-l2", "func-t2", "func-t3")
WORKER_COMMANDS = ("estimate", "verify")

MATRIX_LAYOUT = (
    "Matrix CSV layout: no header, one line per row index i (law xi, inner norm),\n"
    "one column per index j (law eta, outer norm), so the mixed norm is\n"
    "||( ||(a_ij)_{i=1..n}||_inner )_{j=1..m}||_p."
)

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, Settings, list[str]], int]


def _floats(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _shapes(text: str) -> list[tuple[int, int]]:
    shapes: list[tuple[int, int]] = []
    for item in text.split(","):
        if not item.strip():
            continue
        rows, sep, cols = item.strip().lower().partition("x")
        try:
            if not sep:
                raise ValueError
            shapes.append((int(rows), int(cols)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected shapes like 4x4,8x8, got {text!r}") from None
    return shapes


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be >= 0, got {value}")
    return value


def _parse_inner(text: str, settings: Settings) -> InnerNorm:
    name, _, argument = text.strip().partition(":")
    if name == "lq":
        try:
            q = float(argument)
        except ValueError:
            raise ValueError(f"Malformed inner norm: {text!r}") from None
        return Lq(q)
    if name == "orlicz":
        return OrliczInner(
            parse_orlicz(
                argument, settings.quadrature_spec(), settings.stable_calibration_size
            )
        )
    raise ValueError(f"Unknown inner norm {text!r}; use lq:<q> or orlicz:<M>")


def _model(text: str, settings: Settings) -> DistributionModel:
    return parse_model(text, calibration_size=settings.stable_calibration_size)


def _coefficients(args: argparse.Namespace) -> CoefficientMatrix:
    if args.x is not None and args.matrix is not None:
        raise ValueError("Give either --x or --matrix, not both")
    if args.x is not None:
        if not args.x:
            raise ValueError("--x needs at least one number")
        return CoefficientMatrix.from_vector(args.x)
    if args.matrix is not None:
        return read_matrix_csv(args.matrix)
    raise ValueError("Coefficients missing; give --x or --matrix")


def _print_value(value: float) -> None:
    print(f"{value:#.12g}")


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def _manifest(
    args: argparse.Namespace,
    argv: list[str],
    master_seed: int | None,
    started: float,
    outputs: list[str],
) -> ManifestRecord:
    parameters = {
        key: _jsonable(value)
        for key, value in sorted(vars(args).items())
        if key not in ("handler",)
    }
    return {
        "command": args.command,
        "argv": argv,
        "parameters": parameters,
        "master_seed": master_seed,
        "tool_version": tool_version(),
        "duration_seconds": time.perf_counter() - started,
        "outputs": outputs,
    }


def cmd_norm(args: argparse.Namespace, settings: Settings, argv: list[str]) -> int:
    coefficients = _coefficients(args)
    if coefficients.m == 1 and args.inner is None:
        if args.M is None:
            raise ValueError("--M is required for a vector norm")
        M = parse_orlicz(args.M, settings.quadrature_spec(), settings.stable_calibration_size)
        value = luxemburg_norm(M, coefficients)
    else:
        if args.outer is None or args.inner is None:
            raise ValueError("A matrix norm needs --outer and --inner")
        value = mixed_norm(coefficients, args.outer, _parse_inner(args.inner, settings))
    _print_value(value)
    return EXIT_OK


def cmd_estimate(args: argparse.Namespace, settings: Settings, argv: list[str]) -> int:
    started = time.perf_counter()
    seed = args.seed
    effective_argv = list(argv)
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
        effective_argv += ["--seed", str(seed)]
        logger.info("No --seed given; using entropy seed=%s", seed)
    cfg = McConfig(
        samples=args.samples,
        replicates=args.replicates,
        master_seed=seed,
        workers=args.workers,
    )
    coefficients = _coefficients(args)
    if args.dist is not None:
        if args.dist1 is not None or args.dist2 is not None:
            raise ValueError("Give either --dist or --dist1/--dist2")
        estimate = expected_max_single(
            _model(args.dist, settings), coefficients, cfg, args.estimator
        )
    elif args.dist1 is not None and args.dist2 is not None:
        estimate = expected_max_product(
            _model(args.dist1, settings),
            _model(args.dist2, settings),
            coefficients,
            cfg,
            estimator=args.estimator,
        )
    else:
        raise ValueError("Distribution missing; give --dist or both --dist1 and --dist2")

    output = args.output or os.path.join(settings.output_dir, f"estimate.{args.format}")
    write_estimate(estimate, output, args.format)
    write_manifest(_manifest(args, effective_argv, seed, started, [output]), output)
    print(f"{estimate.value:#.12g} +/- {estimate.spread:#.12g}")
    return EXIT_OK


def _thm1_study(
    args: argparse.Namespace, settings: Settings, cfg: McConfig
) -> RatioStudy:
    if args.theorem == "corollary":
        model = _model("loggamma:2", settings)
        return study_thm1(
            model, PowerOrlicz(2.0), args.ns or [2, 8, 32, 128], args.trials, cfg,
            theorem_id="Corollary",
        )
    model = _model(args.dist, settings)
    threshold = PRODUCT_THRESHOLD if model.kind == "SymmetricStable" else T1_THRESHOLD
    return study_thm1(
        model, paired_orlicz(model), args.ns or [2, 8, 32, 128], args.trials, cfg,
        threshold=threshold,
    )


def _default_grid(low: float, high: float, points: int = 12) -> list[float]:
    return [float(s) for s in np.geomspace(low, high, points)]


def cmd_verify(args: argparse.Namespace, settings: Settings, argv: list[str]) -> int:
    started = time.perf_counter()
    cfg = McConfig(
        samples=args.samples,
        replicates=args.replicates,
        master_seed=args.seed,
        workers=args.workers,
    )
    theorem = args.theorem
    studies: list[tuple[str, RatioStudy]] = []
    shapes = args.shapes or [(4, 4), (8, 8), (16, 16)]

    if theorem in ("t1", "corollary"):
        studies.append((theorem, _thm1_study(args, settings, cfg)))
    elif theorem == "t2":
        product = t2(args.p if args.p is not None else 1.2, args.q if args.q is not None else 1.8)
        studies.append((theorem, study_product(product, shapes, args.trials, cfg)))
    elif theorem == "t3":
        product = t3(args.p if args.p is not None else 1.5)
        studies.append((theorem, study_product(product, shapes, args.trials, cfg)))
    elif theorem == "t5":
        product = t5(args.p if args.p is not None else 1.5)
        studies.append((theorem, study_product(product, shapes, args.trials, cfg)))
    elif theorem == "t6":
        studies.append((theorem, study_product(t6(), shapes, args.trials, cfg)))
    elif theorem == "gauss-not-l2":
        ns = args.ns or [4, 16, 64, 256, 1024]
        estimates = gaussian_unit_maxima(ns, cfg)
        studies.append((theorem, study_gaussian_not_l2(ns, cfg, estimates)))
        studies.append((f"{theorem}-control", study_gaussian_control(ns, cfg, estimates)))
    elif theorem == "func-t2":
        kind_t2 = T2Proof(args.p if args.p is not None else 1.2, args.q if args.q is not None else 1.8)
        grid = args.s_grid or _default_grid(0.05, 1.0)
        studies.append((theorem, study_function_equiv(kind_t2, grid)))
    else:
        kind_t3 = T3Proof(args.p if args.p is not None else 1.5)
        grid = args.s_grid or _default_grid(0.3, 3.0)
        studies.append((theorem, study_function_equiv(kind_t3, grid)))

    outputs: list[str] = []
    passed = True
    for stem, study in studies:
        csv_path = os.path.join(args.output_dir, f"{stem}.csv")
        json_path = os.path.join(args.output_dir, f"{stem}.json")
        outputs += write_study(study, csv_path, json_path)
        verdict = "PASS" if study.passed else "FAIL"
        passed = passed and study.passed
        print(
            f"{stem}: {verdict} criterion={study.criterion} "
            f"ratio_min={study.ratio_min:#.12g} ratio_max={study.ratio_max:#.12g} "
            f"ratio_spread={study.ratio_spread:#.12g} threshold={study.threshold:g}"
        )
    manifest_target = os.path.join(args.output_dir, f"{theorem}.csv")
    write_manifest(_manifest(args, list(argv), args.seed, started, outputs), manifest_target)
    print("PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_table(args: argparse.Namespace, settings: Settings, argv: list[str]) -> int:
    started = time.perf_counter()
    if not 0.0 < args.s_min < args.s_max:
        raise ValueError("Need 0 < --s-min < --s-max")
    if args.points < 2:
        raise ValueError("--points must be >= 2")
    M = parse_orlicz(args.M, settings.quadrature_spec(), settings.stable_calibration_size)
    grid = np.geomspace(args.s_min, args.s_max, args.points)
    points = [(float(s), M(float(s))) for s in grid]
    output = args.output or os.path.join(settings.output_dir, "table.csv")
    write_table(M.label, points, output)
    write_manifest(_manifest(args, list(argv), None, started, [output]), output)
    return EXIT_OK


def cmd_replay(args: argparse.Namespace, settings: Settings, argv: list[str]) -> int:
    manifest = read_manifest(args.manifest)
    replay_argv = list(manifest["argv"])
    if not replay_argv or replay_argv[0] == "replay":
        raise ValueError(f"Manifest {args.manifest} does not record a replayable command")
    if args.workers is not None and replay_argv[0] in WORKER_COMMANDS:
        replay_argv += ["--workers", str(args.workers)]
    logger.info("Replaying manifest=%s argv=%s", args.manifest, replay_argv)
    return run_cli(replay_argv, settings)


def _add_mc_options(parser: argparse.ArgumentParser, settings: Settings) -> None:
    parser.add_argument("--samples", type=int, default=settings.default_samples)
    parser.add_argument("--replicates", type=int, default=settings.default_replicates)
    parser.add_argument("--workers", type=int, default=settings.workers)


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orlicz-maxima",
        description="Orlicz norms and Monte Carlo checks for expected maxima of weighted random variables.",
        epilog=MATRIX_LAYOUT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    norm = subparsers.add_parser(
        "norm",
        help="Luxemburg norm of a vector or mixed norm of a matrix",
        epilog=MATRIX_LAYOUT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    norm.add_argument("--M", help="gaussian | loggamma:<p> | power:<p> | quad:<dist>")
    norm.add_argument("--x", type=_floats, help="inline vector, e.g. 3,4")
    norm.add_argument("--matrix", help="coefficient CSV file")
    norm.add_argument("--outer", type=float, help="outer l_p exponent over j")
    norm.add_argument("--inner", help="lq:<q> | orlicz:<M>, the norm over i")
    norm.set_defaults(handler=cmd_norm)

    estimate = subparsers.add_parser(
        "estimate",
        help="Monte Carlo estimate of an expected maximum",
        epilog=MATRIX_LAYOUT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    estimate.add_argument("--dist", help="gaussian | loggamma:<p> | stable:<p>")
    estimate.add_argument("--dist1", help="law of xi, carries the row index i")
    estimate.add_argument("--dist2", help="law of eta, carries the column index j")
    estimate.add_argument("--x", type=_floats)
    estimate.add_argument("--matrix")
    estimate.add_argument("--seed", type=_seed)
    estimate.add_argument(
        "--estimator", choices=("MedianOfMeans", "Mean"), default="MedianOfMeans"
    )
    estimate.add_argument("--output")
    estimate.add_argument("--format", choices=("json", "csv"), default="json")
    _add_mc_options(estimate, settings)
    estimate.set_defaults(handler=cmd_estimate)

    verify = subparsers.add_parser(
        "verify",
        help="ratio study for one order-equivalence claim",
        epilog=MATRIX_LAYOUT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    verify.add_argument("theorem", choices=THEOREMS)
    verify.add_argument("--seed", type=_seed, required=True)
    verify.add_argument("--dist", default="loggamma:2")
    verify.add_argument("--ns", type=_ints)
    verify.add_argument("--shapes", type=_shapes, help="e.g. 4x4,8x8 (n rows x m columns)")
    verify.add_argument("--trials", type=int, default=5)
    verify.add_argument("--p", type=float)
    verify.add_argument("--q", type=float)
    verify.add_argument("--s-grid", dest="s_grid", type=_floats)
    verify.add_argument("--output-dir", dest="output_dir", default=settings.output_dir)
    _add_mc_options(verify, settings)
    verify.set_defaults(handler=cmd_verify)

    table = subparsers.add_parser("table", help="dump M(s) on a geometric grid as CSV")
    table.add_argument("--M", required=True)
    table.add_argument("--s-min", dest="s_min", type=float, default=0.01)
    table.add_argument("--s-max", dest="s_max", type=float, default=10.0)
    table.add_argument("--points", type=int, default=50)
    table.add_argument("--output")
    table.set_defaults(handler=cmd_table)

    replay = subparsers.add_parser("replay", help="re-run the command recorded in a manifest")
    replay.add_argument("manifest")
    replay.add_argument("--workers", type=int)
    replay.set_defaults(handler=cmd_replay)
    return parser


def run_cli(argv: Sequence[str] | None, settings: Settings) -> int:
    arguments = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser(settings)
    try:
        args = parser.parse_args(arguments)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    handler: Handler = args.handler
    try:
        return handler(args, settings, arguments)
    except OrliczMaximaError as exc:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, OSError) as exc:
        logger.debug("Command %s rejected its input", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
