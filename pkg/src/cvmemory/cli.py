"""Command-line entry point.

Exit codes: 0 success, 1 failing check, 2 usage or configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checks, protocol, svg, sweeps
from .gaussian import ConfigurationError
from .memory import coefficients
from .protocol import ProtocolConfig, Stage

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_verify(args) -> int:
    results = checks.run_checks(tol_override=args.tol)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        print("failing: " + ", ".join(f"{r.module}.{r.name}" for r in failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_sweep_coefficients(args) -> int:
    spec = sweeps.SweepSpec("kappa", args.kappa_min, args.kappa_max, args.step)
    records = sweeps.coefficient_sweep(spec)
    _write(args.out, sweeps.to_csv(records, "kappa"))
    if args.svg:
        xs = [r.abscissa for r in records]
        series = [svg.Series(k, xs, [r.series[k] for r in records]) for k in ("C1", "C2", "C3")]
        _write(args.svg, svg.render([svg.Panel("Coefficients vs coupling strength", "kappa", "coefficient", series)]))
    print(f"wrote {len(records)} rows to {args.out}")
    return EXIT_OK


def _suffixed(path: str, kappa: float) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_kappa{kappa:g}{p.suffix}")


def cmd_sweep_variances(args) -> int:
    if not args.kappa:
        raise UsageError("sweep-variances needs at least one --kappa")
    if len(args.kappa) > 2:
        raise UsageError("at most two --kappa values (main panel and inset)")
    stages = tuple(Stage(s) for s in args.stages.split(","))
    panels = []
    for kappa in args.kappa:
        spec = sweeps.SweepSpec("r", args.r_min, args.r_max, args.step, {"kappa": kappa}, stages)
        records = sweeps.variance_sweep(spec)
        out = Path(args.out) if len(args.kappa) == 1 else _suffixed(args.out, kappa)
        _write(out, sweeps.to_csv(records, "r"))
        print(f"wrote {len(records)} rows to {out}")
        series = []
        for which in args.series.split(","):
            for stage in stages:
                rows = [r for r in records if r.stage == stage.value]
                series.append(svg.Series(f"{which} {stage.value}", [r.abscissa for r in rows],
                                         [r.series[which] for r in rows], svg.DASHES[stage.value]))
        panels.append(svg.Panel(f"kappa = {kappa:g}", "r", "variance", series))
    if args.svg:
        _write(args.svg, svg.render(panels))
    return EXIT_OK


def build_report(config: ProtocolConfig) -> dict:
    result = protocol.run_protocol(config)
    c = coefficients(config.kappa)
    witness = protocol.entanglement_report(
        result.final_state, protocol.stage_nullifiers(Stage.RETRIEVED)
    )
    return {
        "config": {"kappa": config.kappa, "r": list(config.profile), "snapshots": config.track_stage_snapshots},
        "coefficients": {"C1": c.c1, "C2": c.c2, "C3": c.c3},
        "stages": {stage.value: rep.to_dict() for stage, rep in result.reports.items()},
        "max_deviation": result.max_deviation,
        "entanglement": [e.to_dict() for e in witness if e.informative],
        "snapshots": {
            stage.value: {"modes": [str(m) for m in st.ordering.modes], "mean": st.mean.tolist(), "cov": st.cov.tolist()}
            for stage, st in result.snapshots.items()
        },
    }


def load_config(path: str) -> ProtocolConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return ProtocolConfig.from_dict(doc)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def cmd_protocol(args) -> int:
    config = load_config(args.config)
    report = build_report(config)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        _write(args.out, text)
        print(f"wrote report to {args.out}; max deviation {report['max_deviation']:.3e}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvmemory", description="Cluster-state quantum memory simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--tol", type=float, default=None, help="override every check tolerance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep-coefficients", help="C1, C2, C3 versus kappa")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--kappa-min", type=float, default=0.0)
    p.add_argument("--kappa-max", type=float, default=3.0)
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_sweep_coefficients)

    p = sub.add_parser("sweep-variances", help="nullifier variances versus r at fixed kappa")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--kappa", type=float, action="append", help="repeat for a second panel")
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=3.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--stages", default="input,stored,retrieved")
    p.add_argument("--series", default="V1,V2", help="nullifiers drawn in the SVG")
    p.set_defaults(func=cmd_sweep_variances)

    p = sub.add_parser("protocol", help="run one storage/retrieval and write a JSON report")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_protocol)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
