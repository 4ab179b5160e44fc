"""Samplers and evaluators for the limiting objects.

The rescaled (path length, traffic) pair converges to (hitting time of 0 by
1 + M, weighted area under 1 + M), where M is a time-inhomogeneous
Brownian integral whose diffusion coefficient depends on the model:
reciprocal intensity for the semi-lattice, sqrt(beta_p) for the diluted
lattice (sqrt(2) for the pure one).  Two independent samplers are provided:
direct Euler-Maruyama on 1 + M, and the time-change route through a
standard Brownian clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from . import kernels
from .fields import EnvironmentProfile, Family
from .records import LimitSample
from .rngcore import Stream

SQRT2 = math.sqrt(2.0)
MIN_P = 1e-6


class ModelKind(Enum):
    PURE_LATTICE = "pure"
    DILUTED_LATTICE = "diluted"
    SEMI_LATTICE = "semi"


def beta_p(p: float) -> float:
    """Variance of the per-column boundary-gap increment in the diluted
    lattice: (p^4 + (2-p)^4) / (p^2 (2-p)^2)."""
    if not MIN_P < p <= 1.0:
        raise ValueError(f"p must lie in ({MIN_P}, 1], got {p}")
    q = 2.0 - p
    return (p**4 + q**4) / (p * p * q * q)


def rho_cdf(t) -> float:
    """CDF of the first hitting time of 0 by 1 + standard Brownian motion:
    P(rho <= t) = 2 (1 - Phi(t^{-1/2}))."""
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0, 2.0 * (1.0 - ndtr(1.0 / np.sqrt(np.maximum(t, 1e-300)))), 0.0)
    return float(out) if out.ndim == 0 else out


def rho_quantile(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0,1)")
    return float(ndtri(1.0 - q / 2.0)) ** -2


def sample_rho(rng: Stream) -> float:
    """Exact draw of rho via the reciprocal-square of a standard normal."""
    while True:
        z = rng.normal()
        if z != 0.0:
            return 1.0 / (z * z)


@dataclass(frozen=True)
class LimitSpec:
    """Which limiting pair to sample and at which macroscopic anchor."""

    model: ModelKind
    lambda_or_p: EnvironmentProfile
    mu: EnvironmentProfile
    anchor: tuple[float, float] = (0.0, 0.0)

    def sigma(self, t: float) -> float:
        x1 = self.anchor[0] + t
        x2 = self.anchor[1]
        if self.model is ModelKind.SEMI_LATTICE:
            return 1.0 / self.lambda_or_p.value(x1, x2)
        if self.model is ModelKind.DILUTED_LATTICE:
            return math.sqrt(beta_p(self.lambda_or_p.value(x1, x2)))
        return SQRT2

    def weight(self, t: float) -> float:
        """Integrand weight multiplying (1 + M_t) in the traffic limit."""
        x1 = self.anchor[0] + t
        x2 = self.anchor[1]
        mu = self.mu.value(x1, x2)
        if self.model is ModelKind.SEMI_LATTICE:
            return self.lambda_or_p.value(x1, x2) * mu
        if self.model is ModelKind.DILUTED_LATTICE:
            return 0.5 * self.lambda_or_p.value(x1, x2) * mu
        return 0.5 * mu


def _grids(spec: LimitSpec, dt: float, t_max: float):
    ts = np.arange(0.0, t_max + dt, dt)
    sigma = np.array([spec.sigma(float(t)) for t in ts])
    weight = np.array([spec.weight(float(t)) for t in ts])
    if np.any(sigma <= 0.0) or not np.all(np.isfinite(sigma)):
        raise ValueError("diffusion coefficient must be positive and finite")
    return sigma, weight


def sample_limit_pairs(spec: LimitSpec, dt: float, n: int, master_seed: int,
                       t_max: float = 50.0) -> tuple[np.ndarray, np.ndarray]:
    """Batch Euler-Maruyama draws of (theta, integral).

    theta is nan for paths still above 0 at t_max (structural censoring:
    the hitting time has infinite mean)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    sigma, weight = _grids(spec, dt, t_max)
    theta = np.empty(n)
    integral = np.empty(n)
    kernels.em_pair_batch(np.uint64(master_seed), kernels.PURPOSE_LIMIT, n,
                          sigma, weight, dt, theta, integral)
    return theta, integral


def sample_limit_pair(spec: LimitSpec, dt: float, rng_or_seed, t_max: float = 50.0,
                      index: int = 0) -> LimitSample:
    """Single-draw convenience wrapper (replica `index` of the batch)."""
    seed = rng_or_seed.key if isinstance(rng_or_seed, Stream) else int(rng_or_seed)
    theta, integral = sample_limit_pairs(spec, dt, index + 1, seed, t_max)
    th = float(theta[index])
    return LimitSample(theta=None if math.isnan(th) else th,
                       integral=float(integral[index]), dt_used=dt)


# ---------------------------------------------------------------------------
# time change Lambda(t) = int_0^t lambda(x1+s, x2)^{-2} ds and its inverse
# ---------------------------------------------------------------------------


def lambda_timechange(spec: LimitSpec, t: float) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if spec.model is not ModelKind.SEMI_LATTICE:
        raise ValueError("time change is defined for the semi-lattice model")
    prof = spec.lambda_or_p
    x1, x2 = spec.anchor
    if prof.kind is Family.CONSTANT:
        lam = prof.params["c"]
        return t / (lam * lam)
    if prof.kind is Family.RECIPROCAL_LINEAR:
        c = x1 + x2
        return ((c + t) ** 3 - c**3) / 3.0
    if prof.kind is Family.EXPONENTIAL_DECAY:
        c = x1 + x2
        return math.exp(2.0 * c) * math.expm1(2.0 * t) / 2.0
    val, _ = quad(lambda s: prof.value(x1 + s, x2) ** -2, 0.0, t,
                  epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def lambda_timechange_inverse(spec: LimitSpec, u: float) -> float:
    if u < 0:
        raise ValueError("u must be nonnegative")
    if u == 0.0:
        return 0.0
    prof = spec.lambda_or_p
    x1, x2 = spec.anchor
    if prof.kind is Family.CONSTANT:
        lam = prof.params["c"]
        return u * lam * lam
    if prof.kind is Family.RECIPROCAL_LINEAR:
        c = x1 + x2
        return (3.0 * u + c**3) ** (1.0 / 3.0) - c
    if prof.kind is Family.EXPONENTIAL_DECAY:
        c = x1 + x2
        return 0.5 * math.log1p(2.0 * u * math.exp(-2.0 * c))
    # generic: bracketed root finding; Lambda' = lambda^{-2} >= lambda_max^{-2}
    hi = u * prof.upper_bound**2
    while lambda_timechange(spec, hi) < u:
        hi *= 1.0 + 1e-9
    return brentq(lambda t: lambda_timechange(spec, t) - u, 0.0, hi,
                  xtol=1e-13, rtol=8.9e-16)


def sample_limit_pairs_timechanged(spec: LimitSpec, dt: float, n: int,
                                   master_seed: int, t_max: float = 50.0
                                   ) -> tuple[np.ndarray, np.ndarray]:
    """Alternative sampler through the Brownian clock: simulate 1 + B to its
    hitting time rho by EM, map theta = Lambda^{-1}(rho), and accumulate
    int_0^rho (1 + B_t) lambda(x1 + Lambda^{-1}(t))^3 mu(...) dt.

    Like the direct sampler, only the profile restricted to the anchor line
    enters (vertical variation vanishes under the flattening rescaling)."""
    if spec.model is not ModelKind.SEMI_LATTICE:
        raise ValueError("time-changed sampler is defined for the semi-lattice model")
    if dt <= 0:
        raise ValueError("dt must be positive")
    # horizon in the rho clock chosen to cover theta up to t_max
    rho_max = lambda_timechange(spec, t_max)
    ts = np.arange(0.0, rho_max + dt, dt)
    x1, x2 = spec.anchor
    inv = np.array([lambda_timechange_inverse(spec, float(t)) for t in ts])
    weight = np.array([spec.lambda_or_p.value(x1 + v, x2) ** 3
                       * spec.mu.value(x1 + v, x2) for v in inv])
    sigma = np.ones_like(ts)
    rho = np.empty(n)
    integral = np.empty(n)
    kernels.em_pair_batch(np.uint64(master_seed), kernels.PURPOSE_LIMIT_TIMECHANGED,
                          n, sigma, weight, dt, rho, integral)
    theta = np.full(n, np.nan)
    ok = ~np.isnan(rho)
    theta[ok] = np.interp(rho[ok], ts, inv)
    return theta, integral
