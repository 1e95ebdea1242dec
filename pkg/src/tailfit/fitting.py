"""Maximum-likelihood GEV fitting with standard errors and Wald intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from .errors import (
    DegenerateSampleError,
    DomainError,
    ParameterError,
    StderrUnavailableError,
)
from .gev import GevParams, gev_logpdf, gev_quantile

# Moment estimator constant (Euler-Mascheroni, truncated as used everywhere else
# in the moment-start formula).
EULER_GAMMA = 0.5772157

# Finite stand-in for +inf likelihood so the simplex arithmetic stays defined.
OBJECTIVE_PENALTY = 1e300


@dataclass(frozen=True)
class Sample:
    """An observation sample of durations in seconds."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("sample must be a nonempty 1-d sequence of durations")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("sample contains non-finite values")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


@dataclass
class FitOptions:
    """Optimizer and uncertainty settings for fit_mle."""

    fatol: float = 1e-10          # Nelder-Mead tolerance on NLL spread
    xatol: float = 1e-8
    maxiter: int = 5000
    restarts: int = 2             # fresh-simplex polish rounds after convergence
    min_n: int = 30               # minimum-sample floor for fitting
    shape_init: float = 0.1
    # When > 0 and the observed-information standard errors are unavailable
    # (boundary-adjacent optima with shape near -1), fall back to a parametric
    # bootstrap covariance with this many replicates.
    stderr_fallback_b: int = 0
    stderr_fallback_seed: int = 0
    stderr_fallback_maxiter: int = 800


@dataclass(frozen=True)
class FitResult:
    """MLE estimates with uncertainty.

    stderr/covariance are None when the numerically differentiated Hessian is
    singular or unusable at the optimum (stderr_method records which route
    produced them otherwise).
    """

    params: GevParams
    stderr: tuple[float, float, float] | None
    covariance: np.ndarray | None
    nll: float
    n: int
    converged: bool
    grad_norm: float = math.nan
    n_iter: int = 0
    stderr_method: str | None = None


PARAM_NAMES = ("loc", "scale", "shape")


def negative_log_likelihood(sample: Sample, params: GevParams) -> float:
    """-sum(log pdf); +inf when any observation falls outside the support."""
    lp = gev_logpdf(sample.values, params)
    if not np.all(np.isfinite(lp)):
        return math.inf
    return -float(np.sum(lp))


def initial_params(sample: Sample) -> GevParams:
    """Moment-based starting point: Gumbel moments for loc/scale, shape 0.1."""
    x = sample.values
    if x.size < 2:
        raise DomainError("need at least 2 observations for a starting point")
    var = float(np.var(x, ddof=1))
    if var == 0.0:
        raise DegenerateSampleError("sample has zero variance")
    scale0 = math.sqrt(6.0 * var) / math.pi
    loc0 = float(np.mean(x)) - EULER_GAMMA * scale0
    return GevParams(loc0, scale0, 0.1)


def _nll_theta(x: np.ndarray, theta: np.ndarray) -> float:
    """NLL in the natural (loc, scale, shape) coordinates."""
    try:
        params = GevParams(float(theta[0]), float(theta[1]), float(theta[2]))
    except ParameterError:
        return math.inf
    lp = gev_logpdf(x, params)
    if not np.all(np.isfinite(lp)):
        return math.inf
    return -float(np.sum(lp))


def _objective(x: np.ndarray):
    def obj(theta):
        try:
            scale = math.exp(theta[1])
        except OverflowError:
            return OBJECTIVE_PENALTY
        v = _nll_theta(x, np.array([theta[0], scale, theta[2]]))
        return v if math.isfinite(v) else OBJECTIVE_PENALTY

    return obj


def _steps(theta: np.ndarray) -> np.ndarray:
    return np.maximum(1e-5, 1e-4 * np.abs(theta))


def _numeric_gradient(f, theta: np.ndarray) -> np.ndarray:
    h = _steps(theta)
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h[i]
        g[i] = (f(theta + e) - f(theta - e)) / (2.0 * h[i])
    return g

def _numeric_hessian(f, theta: np.ndarray, h: np.ndarray) -> np.ndarray:
    H = np.empty((3, 3))
    f0 = f(theta)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h[i]
        H[i, i] = (f(theta + e) - 2.0 * f0 + f(theta - e)) / h[i] ** 2
    for i in range(3):
        for j in range(i + 1, 3):
            ei = np.zeros(3)
            ej = np.zeros(3)
            ei[i] = h[i]
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(theta + ei + ej) - f(theta + ei - ej) - f(theta - ei + ej) + f(theta - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def _covariance_from_hessian(f, theta: np.ndarray) -> np.ndarray | None:
    """Inverse observed information, shrinking the steps when the stencil
    crosses the support boundary. None when no usable matrix is found."""
    h = _steps(theta)
    for _ in range(3):
        H = _numeric_hessian(f, theta, h)
        if np.all(np.isfinite(H)):
            try:
                cov = np.linalg.inv(H)
            except np.linalg.LinAlgError:
                return None
            cov = 0.5 * (cov + cov.T)
            diag = np.diag(cov)
            if np.all(np.isfinite(cov)) and np.all(diag > 0):
                return cov
            return None
        h = h / 10.0
    return None


def _nelder_mead(x: np.ndarray, theta0: np.ndarray, options: FitOptions, maxiter: int):
    return minimize(
        _objective(x),
        theta0,
        method="Nelder-Mead",
        options=dict(
            fatol=options.fatol,
            xatol=options.xatol,
            maxiter=maxiter,
            maxfev=2 * maxiter,
        ),
    )


def _bootstrap_covariance(
    params: GevParams, n: int, options: FitOptions
) -> np.ndarray | None:
    """Parametric-bootstrap covariance of the MLE, replicates seeded from
    (stderr_fallback_seed, replicate index) and refit from the parent estimate."""
    parent = np.array([params.loc, math.log(params.scale), params.shape])
    estimates = []
    for b in range(options.stderr_fallback_b):
        xb = gev_quantile(
            np.random.default_rng([options.stderr_fallback_seed, b]).random(n), params
        )
        res = _nelder_mead(xb, parent, options, options.stderr_fallback_maxiter)
        if res.fun < OBJECTIVE_PENALTY:
            estimates.append([res.x[0], math.exp(res.x[1]), res.x[2]])
    if len(estimates) < max(20, options.stderr_fallback_b // 2):
        return None
    cov = np.cov(np.asarray(estimates), rowvar=False)
    cov = 0.5 * (cov + cov.T)
    if np.all(np.isfinite(cov)) and np.all(np.diag(cov) > 0):
        return cov
    return None


def fit_mle(sample: Sample, options: FitOptions | None = None) -> FitResult:
    """Fit by maximizing the GEV likelihood.

    Nelder-Mead runs on (loc, log scale, shape) from the moment start; the
    shape start drops to 0 (Gumbel) if 0.1 puts observations outside the
    support. Standard errors come from the inverse central-difference Hessian
    of the NLL at the optimum in the natural coordinates.
    """
    options = options or FitOptions()
    x = sample.values
    if x.size < options.min_n:
        raise DomainError(
            f"minimum-sample floor is {options.min_n} observations, got {x.size}"
        )
    start = initial_params(sample)
    shape0 = options.shape_init
    if not math.isfinite(_nll_theta(x, np.array([start.loc, start.scale, shape0]))):
        shape0 = 0.0
    theta0 = np.array([start.loc, math.log(start.scale), shape0])

    res = _nelder_mead(x, theta0, options, options.maxiter)
    n_iter = res.nit
    for _ in range(options.restarts):
        polish = _nelder_mead(x, res.x, options, options.maxiter)
        n_iter += polish.nit
        improved = polish.fun < res.fun - 10.0 * options.fatol
        if polish.fun <= res.fun:
            res = polish
        if not improved:
            break

    params = GevParams(float(res.x[0]), math.exp(float(res.x[1])), float(res.x[2]))
    theta_hat = np.array([params.loc, params.scale, params.shape])
    nll_hat = _nll_theta(x, theta_hat)

    nll_fn = lambda t: _nll_theta(x, t)
    grad = _numeric_gradient(nll_fn, theta_hat)
    grad_norm = float(np.linalg.norm(grad)) if np.all(np.isfinite(grad)) else math.inf
    # Gate on the gradient in scale-free units: loc/scale derivatives carry
    # 1/seconds, so multiply them by the fitted scale before comparing.
    if math.isfinite(grad_norm):
        scaled = np.array([grad[0] * params.scale, grad[1] * params.scale, grad[2]])
        grad_ok = float(np.linalg.norm(scaled)) <= 0.05 * math.sqrt(x.size)
    else:
        grad_ok = False
    converged = bool(res.success) and math.isfinite(nll_hat) and grad_ok

    cov = _covariance_from_hessian(nll_fn, theta_hat)
    stderr_method = "hessian" if cov is not None else None
    if cov is None and options.stderr_fallback_b > 0:
        cov = _bootstrap_covariance(params, x.size, options)
        stderr_method = "bootstrap" if cov is not None else None
    stderr = tuple(float(s) for s in np.sqrt(np.diag(cov))) if cov is not None else None

    return FitResult(
        params=params,
        stderr=stderr,
        covariance=cov,
        nll=float(nll_hat),
        n=int(x.size),
        converged=converged,
        grad_norm=grad_norm,
        n_iter=int(n_iter),
        stderr_method=stderr_method,
    )


def confidence_interval(
    fit: FitResult, which: str = "shape", level: float = 0.95
) -> tuple[float, float]:
    """Wald interval: estimate +/- z(level) * stderr."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must lie in (0, 1), got {level}")
    if which not in PARAM_NAMES:
        raise DomainError(f"which must be one of {PARAM_NAMES}, got {which!r}")
    if fit.stderr is None:
        raise StderrUnavailableError(
            "standard errors are unavailable for this fit (singular Hessian)"
        )
    i = PARAM_NAMES.index(which)
    estimate = getattr(fit.params, which)
    z = float(norm.ppf(0.5 * (1.0 + level)))
    half = z * fit.stderr[i]
    return (estimate - half, estimate + half)
