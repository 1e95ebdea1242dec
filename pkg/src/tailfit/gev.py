"""Generalized extreme value (GEV) family: density, distribution, quantile, sampling.

Conventions: location/scale/shape parameterization with the maximum-attracting
orientation (shape > 0 heavy Frechet-type tail, shape < 0 bounded Weibull-type
tail, shape == 0 Gumbel). All durations are in seconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

# Below this |shape| the Gumbel formulas are used; (1 + shape*z)**(-1/shape)
# cancels catastrophically long before float epsilon is reached.
SHAPE_EPS = 1e-8


@dataclass(frozen=True)
class GevParams:
    """Location (seconds), scale (seconds), shape (dimensionless)."""

    loc: float
    scale: float
    shape: float

    def __post_init__(self):
        for name in ("loc", "scale", "shape"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite real, got {v!r}")
        if self.scale <= 0:
            raise ParameterError(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class Support:
    """Closed-interval support endpoints; infinite where unbounded."""

    lower: float
    upper: float


def support(params: GevParams) -> Support:
    """Support of the distribution: bounded below for shape > 0, above for shape < 0."""
    if params.shape > SHAPE_EPS:
        return Support(params.loc - params.scale / params.shape, math.inf)
    if params.shape < -SHAPE_EPS:
        return Support(-math.inf, params.loc - params.scale / params.shape)
    return Support(-math.inf, math.inf)


def _prepare(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def gev_cdf(x, params: GevParams):
    """Distribution function F(x).

    Returns 0/1 beyond the support endpoints. Accepts scalars or arrays and
    mirrors the input shape.
    """
    arr, scalar = _prepare(x)
    z = (arr - params.loc) / params.scale
    # deep-tail overflow in exp saturates to the correct 0/1 limits
    with np.errstate(over="ignore"):
        if abs(params.shape) < SHAPE_EPS:
            out = np.exp(-np.exp(-z))
        else:
            sz = params.shape * z
            out = np.empty_like(z)
            inside = sz > -1.0
            # exp(-(1+sz)**(-1/shape)) via log1p so small |shape| stays exact
            out[inside] = np.exp(-np.exp(-np.log1p(sz[inside]) / params.shape))
            out[~inside] = 0.0 if params.shape > 0 else 1.0
    return float(out) if scalar else out


def gev_logpdf(x, params: GevParams):
    """Log density; -inf outside the support."""
    arr, scalar = _prepare(x)
    z = (arr - params.loc) / params.scale
    log_scale = math.log(params.scale)
    # deep-tail overflow in exp saturates to the correct -inf log density
    with np.errstate(over="ignore"):
        if abs(params.shape) < SHAPE_EPS:
            out = -log_scale - z - np.exp(-z)
        else:
            sz = params.shape * z
            out = np.full_like(z, -np.inf)
            inside = sz > -1.0
            log_t = -np.log1p(sz[inside]) / params.shape
            out[inside] = -log_scale + (1.0 + params.shape) * log_t - np.exp(log_t)
            # On the boundary 1 + sz == 0 the density limit depends on the
            # shape: zero for shape > -1, 1/scale at shape == -1, +inf below.
            boundary = sz == -1.0
            if np.any(boundary):
                if params.shape == -1.0:
                    out[boundary] = -log_scale
                elif params.shape < -1.0:
                    out[boundary] = np.inf
    return float(out) if scalar else out


def gev_pdf(x, params: GevParams):
    """Density f(x); zero outside the support."""
    out = np.exp(gev_logpdf(x, params))
    return out


def gev_quantile(p, params: GevParams):
    """Inverse of gev_cdf on (0, 1)."""
    arr, scalar = _prepare(p)
    if np.any((arr <= 0.0) | (arr >= 1.0)) or not np.all(np.isfinite(arr)):
        raise DomainError("quantile probability must lie strictly inside (0, 1)")
    log_log = np.log(-np.log(arr))
    if abs(params.shape) < SHAPE_EPS:
        out = params.loc - params.scale * log_log
    else:
        # ((-log p)**(-shape) - 1) / shape, written with expm1 for small shape
        out = params.loc + params.scale * np.expm1(-params.shape * log_log) / params.shape
    return float(out) if scalar else out


def gev_sample(params: GevParams, n: int, seed) -> np.ndarray:
    """Draw n values by inverse transform.

    Uniforms come from numpy's seeded PCG64 generator, so a given seed yields
    a bit-reproducible sequence. `seed` may be an int or a sequence of ints
    (numpy SeedSequence entropy), which is how substreams are derived.
    """
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    # rng.random() can return exactly 0.0; nudge into the open interval
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return gev_quantile(u, params)
