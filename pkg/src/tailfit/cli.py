"""Command-line front end: tailfit simulate | fit | diagnose | probe | detect.

Exit codes (documented contract):
  0  success (for detect: nothing flagged)
  2  usage error (bad flags, unknown distribution kind, traffic factor < 1)
  3  input error (unparseable log, minimum-sample floor, probe environment)
  4  fit did not converge (or a required baseline fit is unconverged)
  5  detect flagged at least one observation

Every subcommand writes a manifest.txt with its fully resolved configuration;
rerunning from that manifest reproduces the outputs byte-for-byte.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import build_report, ks_statistic, render_svg, summary_text, write_report
from .errors import (
    DegenerateSampleError,
    DomainError,
    LogFormatError,
    NotConvergedError,
    ParameterError,
    ProbeError,
    StderrUnavailableError,
)
from .fitting import FitOptions, FitResult, Sample, fit_mle
from .gev import GevParams, gev_cdf
from .ingest import LatencyLog, parse_log, write_log, write_manifest
from .probe import ProbeConfig, records_to_log_rows, run_probe
from .simulate import LatencyModel, SimConfig, simulate_campaign

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NO_CONVERGENCE = 4
EXIT_FLAGGED = 5


def fit_to_json(fit: FitResult) -> str:
    doc = {
        "loc": fit.params.loc,
        "scale": fit.params.scale,
        "shape": fit.params.shape,
        "stderr": list(fit.stderr) if fit.stderr is not None else None,
        "covariance": np.asarray(fit.covariance).tolist() if fit.covariance is not None else None,
        "nll": fit.nll,
        "n": fit.n,
        "converged": fit.converged,
        "grad_norm": fit.grad_norm,
        "n_iter": fit.n_iter,
        "stderr_method": fit.stderr_method,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def fit_from_json(path) -> FitResult:
    try:
        doc = json.loads(Path(path).read_text())
        return FitResult(
            params=GevParams(doc["loc"], doc["scale"], doc["shape"]),
            stderr=tuple(doc["stderr"]) if doc["stderr"] is not None else None,
            covariance=np.asarray(doc["covariance"]) if doc["covariance"] is not None else None,
            nll=doc["nll"],
            n=doc["n"],
            converged=doc["converged"],
            grad_norm=doc.get("grad_norm", float("nan")),
            n_iter=doc.get("n_iter", 0),
            stderr_method=doc.get("stderr_method"),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise LogFormatError(f"cannot load fit result from {path}: {exc}") from None


def _select_rows(path, phase: str | None, skip_bad_rows: bool = False) -> LatencyLog:
    """Parse a log and narrow it to one phase when a phase column exists."""
    log = parse_log(path, skip_bad_rows=skip_bad_rows)
    if log.has_phases:
        if phase is None:
            labels = log.phase_labels()
            if len(labels) != 1:
                raise LogFormatError(
                    f"{path} has phases {', '.join(labels)}; select one with --phase"
                )
            phase = labels[0]
        return log.for_phase(phase)
    if phase is not None:
        raise LogFormatError(f"{path} has no phase column but --phase was given")
    return log


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out: Path, subcommand: str, pairs: list[tuple[str, object]]) -> None:
    entries = {"tool": "tailfit", "version": __version__, "subcommand": subcommand}
    for key, value in pairs:
        entries[key] = str(value)
    write_manifest(out / "manifest.txt", entries)


def cmd_simulate(args) -> int:
    model = LatencyModel.from_spec(args.dist)
    config = SimConfig(
        model=model,
        nodes=args.nodes,
        traffic_factor=args.kt,
        runs=args.runs,
        seed=args.seed,
        meta_overhead=args.meta_overhead,
    )
    out = _outdir(args)
    obs = simulate_campaign(config)
    write_log(out / "observations.csv", obs.durations)
    _manifest(out, "simulate", [
        ("nodes", args.nodes),
        ("kt", repr(float(args.kt))),
        ("runs", args.runs),
        ("dist", model.spec),
        ("seed", args.seed),
        ("meta_overhead", repr(float(args.meta_overhead))),
        ("out", args.out),
    ])
    print(f"wrote {obs.durations.size} observations to {out / 'observations.csv'}")
    return EXIT_OK


def _fit_manifest_pairs(args) -> list[tuple[str, object]]:
    pairs = [("input", args.input)]
    if args.phase is not None:
        pairs.append(("phase", args.phase))
    pairs.extend([
        ("bins", args.bins),
        ("level", repr(float(args.level))),
        ("bootstrap", args.bootstrap),
        ("seed", args.seed),
        ("min_n", args.min_n),
        ("bootstrap_se", args.bootstrap_se),
        ("svg", "true" if args.svg else "false"),
        ("skip_bad_rows", "true" if args.skip_bad_rows else "false"),
        ("out", args.out),
    ])
    return pairs


def cmd_fit(args) -> int:
    rows = _select_rows(args.input, args.phase, args.skip_bad_rows)
    out = _outdir(args)
    sample = Sample(rows.durations, label=Path(args.input).name)
    options = FitOptions(
        min_n=args.min_n,
        stderr_fallback_b=args.bootstrap_se,
        stderr_fallback_seed=args.seed,
    )
    fit = fit_mle(sample, options)
    (out / "fit.json").write_text(fit_to_json(fit))
    ks = ks_statistic(sample, fit.params)
    (out / "summary.txt").write_text(summary_text(fit, ks, args.level))
    _manifest(out, "fit", _fit_manifest_pairs(args))
    if not fit.converged:
        print(f"fit did not converge after {fit.n_iter} iterations; see {out / 'fit.json'}",
              file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    report = build_report(
        sample, fit, level=args.level, bins=args.bins, bootstrap_b=args.bootstrap, seed=args.seed
    )
    write_report(report, out)
    if args.svg:
        render_svg(report, out / "diagnostics.svg")
    print((out / "summary.txt").read_text(), end="")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    rows = _select_rows(args.input, args.phase)
    fit = fit_from_json(args.fit)
    if not fit.converged:
        raise NotConvergedError(f"baseline fit {args.fit} is unconverged; refusing to diagnose")
    out = _outdir(args)
    sample = Sample(rows.durations, label=Path(args.input).name)
    report = build_report(
        sample, fit, level=args.level, bins=args.bins, bootstrap_b=args.bootstrap, seed=args.seed
    )
    write_report(report, out)
    (out / "summary.txt").write_text(summary_text(fit, report.ks, args.level))
    if args.svg:
        render_svg(report, out / "diagnostics.svg")
    pairs = [("input", args.input), ("fit", args.fit)]
    if args.phase is not None:
        pairs.append(("phase", args.phase))
    pairs.extend([
        ("bins", args.bins),
        ("level", repr(float(args.level))),
        ("bootstrap", args.bootstrap),
        ("seed", args.seed),
        ("svg", "true" if args.svg else "false"),
        ("out", args.out),
    ])
    _manifest(out, "diagnose", pairs)
    return EXIT_OK


def cmd_probe(args) -> int:
    config = ProbeConfig(
        targets=tuple(args.target),
        total_bytes=args.total_bytes,
        stripe_bytes=args.stripe_bytes,
        runs=args.runs,
        sync_mode=args.sync_mode,
        seed=args.seed,
    )
    out = _outdir(args)
    records = run_probe(config)
    runs, durations, phases = records_to_log_rows(records)
    write_log(out / "probe.csv", durations, runs=runs, phases=phases)
    _manifest(out, "probe", [
        ("targets", ",".join(str(t) for t in config.targets)),
        ("total_bytes", args.total_bytes),
        ("stripe_bytes", args.stripe_bytes),
        ("runs", args.runs),
        ("sync_mode", args.sync_mode),
        ("seed", args.seed),
        ("out", args.out),
    ])
    print(f"wrote {len(records)} probe records to {out / 'probe.csv'}")
    return EXIT_OK


def cmd_detect(args) -> int:
    if not 0.0 < args.threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {args.threshold}")
    rows = _select_rows(args.input, args.phase)
    baseline = fit_from_json(args.baseline)
    if not baseline.converged:
        raise NotConvergedError(f"baseline fit {args.baseline} is unconverged; refusing to score")
    out = _outdir(args)
    tail = 1.0 - np.atleast_1d(gev_cdf(rows.durations, baseline.params))
    flagged = tail < args.threshold
    lines = ["run,duration_s,tail_prob,flagged"]
    for r, d, t, f in zip(rows.runs, rows.durations, tail, flagged):
        lines.append(f"{int(r)},{float(d)!r},{float(t)!r},{int(f)}")
    (out / "detect.csv").write_text("\n".join(lines) + "\n")
    pairs = [("input", args.input), ("baseline", args.baseline)]
    if args.phase is not None:
        pairs.append(("phase", args.phase))
    pairs.extend([("threshold", repr(float(args.threshold))), ("out", args.out)])
    _manifest(out, "detect", pairs)
    n_flagged = int(flagged.sum())
    print(f"{n_flagged} of {flagged.size} observations flagged at threshold {args.threshold}")
    return EXIT_FLAGGED if n_flagged else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailfit",
        description="Model parallel-task duration variability with extreme-value statistics.",
    )
    parser.add_argument("--version", action="version", version=f"tailfit {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sim = subs.add_parser("simulate", help="generate max-of-nodes durations")
    sim.add_argument("--nodes", type=int, default=16, help="storage node count (default 16)")
    sim.add_argument("--kt", type=float, default=1.0,
                     help="background traffic factor, >= 1 (default 1)")
    sim.add_argument("--runs", type=int, default=400, help="observation count (default 400)")
    sim.add_argument("--dist", default="exponential:1.0",
                     help="node service-time model, kind:params (default exponential:1.0)")
    sim.add_argument("--seed", type=int, default=0, help="campaign seed (default 0)")
    sim.add_argument("--meta-overhead", dest="meta_overhead", type=float, default=0.0,
                     help="fixed seconds added outside the max (default 0)")
    sim.add_argument("--out", default="tailfit-out", help="output directory")
    sim.set_defaults(func=cmd_simulate)

    fit = subs.add_parser("fit", help="fit durations by maximum likelihood and diagnose")
    fit.add_argument("input", help="latency log CSV (run,duration_s[,phase])")
    fit.add_argument("--phase", default=None, help="phase label to select from the log")
    fit.add_argument("--bins", type=int, default=20, help="histogram bin count (default 20)")
    fit.add_argument("--level", type=float, default=0.95,
                     help="confidence level for intervals and bands (default 0.95)")
    fit.add_argument("--bootstrap", type=int, default=1000,
                     help="bootstrap replicates for quantile-plot bands (default 1000)")
    fit.add_argument("--seed", type=int, default=0, help="bootstrap seed (default 0)")
    fit.add_argument("--min-n", dest="min_n", type=int, default=30,
                     help="minimum-sample floor for fitting (default 30)")
    fit.add_argument("--bootstrap-se", dest="bootstrap_se", type=int, default=0,
                     help="bootstrap replicates for standard errors when the Hessian "
                          "is unusable (default 0 = report unavailable)")
    fit.add_argument("--svg", action="store_true", help="render diagnostics.svg")
    fit.add_argument("--skip-bad-rows", dest="skip_bad_rows", action="store_true",
                     help="skip malformed rows instead of failing")
    fit.add_argument("--out", default="tailfit-out", help="output directory")
    fit.set_defaults(func=cmd_fit)

    diag = subs.add_parser("diagnose", help="rebuild diagnostics from data and a stored fit")
    diag.add_argument("input", help="latency log CSV")
    diag.add_argument("--fit", required=True, help="fit.json from a prior tailfit fit")
    diag.add_argument("--phase", default=None)
    diag.add_argument("--bins", type=int, default=20)
    diag.add_argument("--level", type=float, default=0.95)
    diag.add_argument("--bootstrap", type=int, default=1000)
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--svg", action="store_true")
    diag.add_argument("--out", default="tailfit-out")
    diag.set_defaults(func=cmd_diagnose)

    probe = subs.add_parser("probe", help="run the local timed-write harness")
    probe.add_argument("--target", action="append", required=True,
                       help="target directory; repeat once per stand-in storage node")
    probe.add_argument("--total-bytes", dest="total_bytes", type=int, default=512 * 2**20,
                       help="total bytes per run, split across targets (default 512 MiB)")
    probe.add_argument("--stripe-bytes", dest="stripe_bytes", type=int, default=2**20,
                       help="chunk size per write call (default 1 MiB)")
    probe.add_argument("--runs", type=int, default=400, help="recorded runs (default 400)")
    probe.add_argument("--sync-mode", dest="sync_mode", default="synchronous-flush",
                       choices=["synchronous-flush", "best-effort"])
    probe.add_argument("--seed", type=int, default=0, help="payload fill seed (default 0)")
    probe.add_argument("--out", default="tailfit-out")
    probe.set_defaults(func=cmd_probe)

    det = subs.add_parser("detect", help="flag unlikely durations against a baseline fit")
    det.add_argument("input", help="latency log CSV with new observations")
    det.add_argument("--baseline", required=True, help="fit.json from a prior tailfit fit")
    det.add_argument("--threshold", type=float, default=0.001,
                     help="upper-tail probability below which to flag (default 0.001)")
    det.add_argument("--phase", default=None)
    det.add_argument("--out", default="tailfit-out")
    det.set_defaults(func=cmd_detect)
    return parser


# manifest key -> argv reconstruction, per subcommand: (key, flag, kind)
_ARG_LAYOUT = {
    "simulate": [
        ("nodes", "--nodes", "value"), ("kt", "--kt", "value"), ("runs", "--runs", "value"),
        ("dist", "--dist", "value"), ("seed", "--seed", "value"),
        ("meta_overhead", "--meta-overhead", "value"), ("out", "--out", "value"),
    ],
    "fit": [
        ("input", None, "positional"), ("phase", "--phase", "value"),
        ("bins", "--bins", "value"), ("level", "--level", "value"),
        ("bootstrap", "--bootstrap", "value"), ("seed", "--seed", "value"),
        ("min_n", "--min-n", "value"), ("bootstrap_se", "--bootstrap-se", "value"),
        ("svg", "--svg", "bool"), ("skip_bad_rows", "--skip-bad-rows", "bool"),
        ("out", "--out", "value"),
    ],
    "diagnose": [
        ("input", None, "positional"), ("fit", "--fit", "value"),
        ("phase", "--phase", "value"), ("bins", "--bins", "value"),
        ("level", "--level", "value"), ("bootstrap", "--bootstrap", "value"),
        ("seed", "--seed", "value"), ("svg", "--svg", "bool"), ("out", "--out", "value"),
    ],
    "probe": [
        ("targets", "--target", "multi"), ("total_bytes", "--total-bytes", "value"),
        ("stripe_bytes", "--stripe-bytes", "value"), ("runs", "--runs", "value"),
        ("sync_mode", "--sync-mode", "value"), ("seed", "--seed", "value"),
        ("out", "--out", "value"),
    ],
    "detect": [
        ("input", None, "positional"), ("baseline", "--baseline", "value"),
        ("phase", "--phase", "value"), ("threshold", "--threshold", "value"),
        ("out", "--out", "value"),
    ],
}


def manifest_argv(entries: dict) -> list[str]:
    """Rebuild the argv that reproduces a run from its manifest entries."""
    sub = entries.get("subcommand")
    if sub not in _ARG_LAYOUT:
        raise LogFormatError(f"manifest has unknown subcommand {sub!r}")
    argv = [sub]
    for key, flag, kind in _ARG_LAYOUT[sub]:
        if key not in entries:
            continue
        value = entries[key]
        if kind == "positional":
            argv.append(value)
        elif kind == "bool":
            if value == "true":
                argv.append(flag)
        elif kind == "multi":
            for item in value.split(","):
                argv.extend([flag, item])
        else:
            argv.extend([flag, value])
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LogFormatError, DomainError, DegenerateSampleError, ProbeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotConvergedError, StderrUnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
