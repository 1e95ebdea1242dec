"""Fit diagnostics: probability plot, quantile plot with bootstrap bands and
outlier flags, binned histogram with fitted density overlay, and a KS summary
statistic. All plot products are returned as data and serialized as CSV; SVG
rendering is optional.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSampleError, DomainError, NotConvergedError
from .fitting import FitResult, Sample, confidence_interval
from .gev import GevParams, gev_cdf, gev_pdf, gev_quantile, gev_sample, support
from .errors import StderrUnavailableError


def _require_converged(fit: FitResult, what: str) -> None:
    if not fit.converged:
        raise NotConvergedError(f"{what} requires a converged fit")


def plotting_positions(n: int) -> np.ndarray:
    """Weibull plotting positions i/(n+1), i = 1..n."""
    return np.arange(1, n + 1) / (n + 1.0)


def probability_plot(sample: Sample, fit: FitResult) -> np.ndarray:
    """(empirical probability, model probability) pairs for the sorted sample."""
    _require_converged(fit, "probability plot")
    xs = np.sort(sample.values)
    emp = plotting_positions(xs.size)
    model = gev_cdf(xs, fit.params)
    return np.column_stack([emp, model])


def quantile_plot(
    sample: Sample,
    fit: FitResult,
    level: float = 0.95,
    bootstrap_b: int = 1000,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Model quantiles vs observed order statistics, with pointwise
    parametric-bootstrap bands and per-rank outlier flags.

    Returns (qq_points, band, flags): qq_points[:, 0] are model quantiles at
    the plotting positions, qq_points[:, 1] the sorted observations; band is
    (n, 2) low/high; flags marks observations outside their rank's band.
    Bands are pointwise per rank, so ~ (1 - level) of ranks exceed them even
    under a perfect fit.
    """
    _require_converged(fit, "quantile plot")
    if bootstrap_b < 100:
        raise DomainError(f"bootstrap replicate count must be >= 100, got {bootstrap_b}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"band level must lie in (0, 1), got {level}")
    xs = np.sort(sample.values)
    n = xs.size
    model_q = gev_quantile(plotting_positions(n), fit.params)

    order_stats = np.empty((bootstrap_b, n))
    for b in range(bootstrap_b):
        order_stats[b] = np.sort(gev_sample(fit.params, n, [seed, b]))
    lo, hi = np.quantile(order_stats, [0.5 * (1.0 - level), 0.5 * (1.0 + level)], axis=0)
    flags = (xs < lo) | (xs > hi)
    return np.column_stack([model_q, xs]), np.column_stack([lo, hi]), flags


def histogram_density(
    sample: Sample, fit: FitResult, bins: int = 20
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Equal-width histogram over [min, max] plus the fitted density curve.

    Returns (edges, counts, curve): edges has bins+1 entries, counts sums to
    n (last bin right-closed), curve is (K, 2) sampled where the data range
    extended by 4 fitted scales meets the fitted support.
    """
    if bins < 1:
        raise DomainError(f"bins must be >= 1, got {bins}")
    x = sample.values
    xmin, xmax = float(np.min(x)), float(np.max(x))
    if xmin == xmax:
        raise DegenerateSampleError("all observations are equal; histogram range is empty")
    counts, edges = np.histogram(x, bins=bins, range=(xmin, xmax))

    sup = support(fit.params)
    pad = 4.0 * fit.params.scale
    lo = max(sup.lower, xmin - pad)
    hi = min(sup.upper, xmax + pad)
    if not lo < hi:
        lo, hi = xmin, xmax
    grid = np.linspace(lo, hi, 256)
    curve = np.column_stack([grid, gev_pdf(grid, fit.params)])
    return edges, counts, curve


def ks_statistic(sample: Sample, params: GevParams) -> float:
    """Sup-norm distance between the empirical CDF and the model CDF."""
    xs = np.sort(sample.values)
    n = xs.size
    cdf = np.atleast_1d(gev_cdf(xs, params))
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


@dataclass(frozen=True)
class DiagnosticsReport:
    """The three diagnostic panels as data, plus the KS statistic."""

    pp_points: np.ndarray
    qq_points: np.ndarray
    qq_band: np.ndarray
    outlier_flags: np.ndarray
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    density_curve: np.ndarray
    ks: float
    level: float


def build_report(
    sample: Sample,
    fit: FitResult,
    level: float = 0.95,
    bins: int = 20,
    bootstrap_b: int = 1000,
    seed: int = 0,
) -> DiagnosticsReport:
    pp = probability_plot(sample, fit)
    qq, band, flags = quantile_plot(sample, fit, level=level, bootstrap_b=bootstrap_b, seed=seed)
    edges, counts, curve = histogram_density(sample, fit, bins=bins)
    return DiagnosticsReport(
        pp_points=pp,
        qq_points=qq,
        qq_band=band,
        outlier_flags=flags,
        hist_edges=edges,
        hist_counts=counts,
        density_curve=curve,
        ks=ks_statistic(sample, fit.params),
        level=level,
    )


def summary_text(fit: FitResult, ks: float, level: float = 0.95) -> str:
    """Human-readable fit summary block."""
    lines = [f"n={fit.n}", f"converged={'true' if fit.converged else 'false'}"]
    se = fit.stderr if fit.stderr is not None else (None, None, None)
    for name, value, err in zip(
        ("loc", "scale", "shape"),
        (fit.params.loc, fit.params.scale, fit.params.shape),
        se,
    ):
        err_txt = repr(err) if err is not None else "unavailable"
        lines.append(f"{name}={value!r} stderr={err_txt}")
    try:
        lo, hi = confidence_interval(fit, "shape", level)
        lines.append(f"shape_ci_{level}=({lo!r},{hi!r})")
    except StderrUnavailableError:
        lines.append(f"shape_ci_{level}=unavailable")
    if fit.stderr_method is not None:
        lines.append(f"stderr_method={fit.stderr_method}")
    lines.append(f"nll={fit.nll!r}")
    lines.append(f"ks_statistic={ks!r}")
    return "\n".join(lines) + "\n"


def write_report(report: DiagnosticsReport, outdir) -> dict[str, Path]:
    """Write one CSV per panel; returns the paths keyed by panel name."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}

    pp_lines = ["rank,empirical,model"]
    for rank, (emp, model) in enumerate(report.pp_points, start=1):
        pp_lines.append(f"{rank},{float(emp)!r},{float(model)!r}")
    paths["pp"] = outdir / "pp.csv"
    paths["pp"].write_text("\n".join(pp_lines) + "\n")

    qq_lines = ["rank,model_q,observed,band_lo,band_hi,outlier"]
    for rank in range(report.qq_points.shape[0]):
        mq, obs = report.qq_points[rank]
        lo, hi = report.qq_band[rank]
        flag = int(report.outlier_flags[rank])
        qq_lines.append(
            f"{rank + 1},{float(mq)!r},{float(obs)!r},{float(lo)!r},{float(hi)!r},{flag}"
        )
    paths["qq"] = outdir / "qq.csv"
    paths["qq"].write_text("\n".join(qq_lines) + "\n")

    hist_lines = ["bin_lo,bin_hi,count"]
    for i in range(report.hist_counts.size):
        hist_lines.append(
            f"{float(report.hist_edges[i])!r},{float(report.hist_edges[i + 1])!r},"
            f"{int(report.hist_counts[i])}"
        )
    paths["hist"] = outdir / "hist.csv"
    paths["hist"].write_text("\n".join(hist_lines) + "\n")

    dens_lines = ["x,density"]
    for xv, dv in report.density_curve:
        dens_lines.append(f"{float(xv)!r},{float(dv)!r}")
    paths["density"] = outdir / "density.csv"
    paths["density"].write_text("\n".join(dens_lines) + "\n")
    return paths


def render_svg(report: DiagnosticsReport, path, title: str = "") -> None:
    """Self-contained three-panel SVG (probability, quantile, histogram+density).

    Rendering is byte-deterministic for identical reports.
    """
    import matplotlib

    matplotlib.use("svg", force=False)
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "tailfit"}):
        fig, axes = plt.subplots(3, 1, figsize=(5.5, 10.5))
        ax = axes[0]
        ax.plot([0, 1], [0, 1], color="0.6", lw=1)
        ax.plot(report.pp_points[:, 0], report.pp_points[:, 1], "o", ms=2.5, color="tab:blue")
        ax.set_xlabel("empirical probability")
        ax.set_ylabel("model probability")
        ax.set_title(title or "probability plot")

        ax = axes[1]
        q = report.qq_points
        ax.plot(q[:, 0], report.qq_band[:, 0], color="tab:blue", lw=1)
        ax.plot(q[:, 0], report.qq_band[:, 1], color="tab:blue", lw=1)
        lims = [q.min(), q.max()]
        ax.plot(lims, lims, color="0.6", lw=1)
        inliers = ~report.outlier_flags
        ax.plot(q[inliers, 0], q[inliers, 1], "o", ms=2.5, color="tab:blue")
        if report.outlier_flags.any():
            ax.plot(q[report.outlier_flags, 0], q[report.outlier_flags, 1], "o", ms=3, color="red")
        ax.set_xlabel("model quantile (s)")
        ax.set_ylabel("observed (s)")
        ax.set_title(f"quantile plot, {report.level:.0%} band")

        ax = axes[2]
        widths = np.diff(report.hist_edges)
        n = report.hist_counts.sum()
        density = report.hist_counts / (n * widths)
        ax.bar(report.hist_edges[:-1], density, width=widths, align="edge",
               color="0.8", edgecolor="0.4")
        ax.plot(report.density_curve[:, 0], report.density_curve[:, 1], color="tab:blue")
        ax.set_xlabel("duration (s)")
        ax.set_ylabel("density (1/s)")
        ax.set_title(f"histogram ({report.hist_counts.size} bins) with fitted density")

        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
