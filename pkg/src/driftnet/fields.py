"""Inhomogeneity fields and their rescaled views.

A profile is a base function on R^2 (intensity, thinning probability, or
traffic weight) together with declared bounds, a Lipschitz constant in the
second argument, and the rectangular window on which those declarations are
validated.  A ScaledField is the profile seen through the flattening
rescaling f(anchor + x / ell^2); the families are closed under that
rescaling, so the scaled view stores (profile, ell, anchor) and stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq


class FieldDomainError(ValueError):
    """Raised when a family is evaluated where it is undefined or unbounded."""


class Family(Enum):
    CONSTANT = "constant"
    AFFINE_CLAMPED = "affine_clamped"
    RECIPROCAL_LINEAR = "reciprocal_linear"
    EXPONENTIAL_DECAY = "exponential_decay"
    TABULATED = "tabulated"


Window = tuple[tuple[float, float], tuple[float, float]]

_DEFAULT_WINDOW: Window = ((0.0, 1.0), (-1.0, 1.0))


@dataclass(frozen=True)
class EnvironmentProfile:
    """Base inhomogeneity function with declared bounds.

    params per family:
      constant:           c
      affine_clamped:     a0, ax, ay, clamp_lo, clamp_hi
                          (value = clip(a0 + ax*x1 + ay*x2, clamp_lo, clamp_hi))
      reciprocal_linear:  none (value = 1 / (x1 + x2); needs x1 + x2 > 0)
      exponential_decay:  none (value = exp(-x1 - x2))
      tabulated:          knots_x2, values (piecewise linear in x2, flat in x1)
    """

    kind: Family
    params: dict = field(default_factory=dict)
    lower_bound: float = 0.0
    upper_bound: float = math.inf
    lipschitz: float = 0.0
    vertically_homogeneous: bool = False
    window: Window = _DEFAULT_WINDOW

    def __post_init__(self):
        if self.lower_bound < 0:
            raise ValueError("lower_bound must be nonnegative")
        if self.upper_bound < self.lower_bound:
            raise ValueError("upper_bound below lower_bound")
        if self.kind is Family.RECIPROCAL_LINEAR:
            (x1lo, _), (x2lo, _) = self.window
            if x1lo + x2lo <= 0:
                raise FieldDomainError(
                    "reciprocal_linear window must satisfy x1 + x2 > 0"
                )
        if self.kind is Family.TABULATED:
            xs = np.asarray(self.params["knots_x2"], dtype=float)
            ys = np.asarray(self.params["values"], dtype=float)
            if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
                raise ValueError("tabulated profile needs matching 1-d knot/value arrays")
            if not np.all(np.diff(xs) > 0):
                raise ValueError("tabulated knots must be strictly increasing")
        self.validate_on_window()

    # ---- base function -------------------------------------------------

    def value(self, x1: float, x2: float) -> float:
        k = self.kind
        if k is Family.CONSTANT:
            return self.params["c"]
        if k is Family.AFFINE_CLAMPED:
            p = self.params
            v = p["a0"] + p["ax"] * x1 + p["ay"] * x2
            return min(max(v, p["clamp_lo"]), p["clamp_hi"])
        if k is Family.RECIPROCAL_LINEAR:
            s = x1 + x2
            if s <= 0:
                raise FieldDomainError(f"reciprocal_linear undefined at x1+x2={s}")
            return 1.0 / s
        if k is Family.EXPONENTIAL_DECAY:
            return math.exp(-x1 - x2)
        # tabulated
        xs = self.params["knots_x2"]
        ys = self.params["values"]
        return float(np.interp(x2, xs, ys))

    def integral_x2(self, x1: float, a: float, b: float) -> float:
        """Exact integral of value(x1, .) over [a, b] in the second argument."""
        if b < a:
            raise ValueError("integration bounds reversed")
        k = self.kind
        if k is Family.CONSTANT:
            return self.params["c"] * (b - a)
        if k is Family.RECIPROCAL_LINEAR:
            if x1 + a <= 0:
                raise FieldDomainError("reciprocal_linear undefined on integration range")
            return math.log((x1 + b) / (x1 + a))
        if k is Family.EXPONENTIAL_DECAY:
            return math.exp(-x1) * (math.exp(-a) - math.exp(-b))
        if k is Family.AFFINE_CLAMPED:
            return self._affine_clamped_integral(x1, a, b)
        return self._tabulated_integral(a, b)

    def _affine_clamped_integral(self, x1: float, a: float, b: float) -> float:
        p = self.params
        ay = p["ay"]
        base = p["a0"] + p["ax"] * x1

        def anti(lo_w, hi_w):
            # integral of the clipped affine over [lo_w, hi_w], affine monotone there
            vl = min(max(base + ay * lo_w, p["clamp_lo"]), p["clamp_hi"])
            vh = min(max(base + ay * hi_w, p["clamp_lo"]), p["clamp_hi"])
            return 0.5 * (vl + vh) * (hi_w - lo_w)

        if ay == 0.0:
            return anti(a, b)
        # breakpoints where the unclipped affine crosses the clamps
        pts = [a, b]
        for c in (p["clamp_lo"], p["clamp_hi"]):
            w = (c - base) / ay
            if a < w < b:
                pts.append(w)
        pts.sort()
        return sum(anti(lo, hi) for lo, hi in zip(pts[:-1], pts[1:]))

    def _tabulated_integral(self, a: float, b: float) -> float:
        xs = np.asarray(self.params["knots_x2"], dtype=float)
        ys = np.asarray(self.params["values"], dtype=float)
        # piecewise linear: integrate exactly via trapezoid on the knot partition
        pts = np.unique(np.concatenate([[a, b], xs[(xs > a) & (xs < b)]]))
        vals = np.interp(pts, xs, ys)
        return float(np.trapezoid(vals, pts))

    # ---- validation ----------------------------------------------------

    def validate_on_window(self, grid: int = 21) -> None:
        """Spot-check declared bounds and the x2-Lipschitz constant on a grid."""
        (x1lo, x1hi), (x2lo, x2hi) = self.window
        x1s = np.linspace(x1lo, x1hi, grid)
        x2s = np.linspace(x2lo, x2hi, grid)
        tol = 1e-9 * max(1.0, abs(self.upper_bound))
        for x1 in x1s:
            vals = [self.value(float(x1), float(x2)) for x2 in x2s]
            for v in vals:
                if v < self.lower_bound - tol or v > self.upper_bound + tol:
                    raise FieldDomainError(
                        f"{self.kind.value}: value {v} outside declared bounds "
                        f"[{self.lower_bound}, {self.upper_bound}] on window"
                    )
            for (ya, va), (yb, vb) in zip(zip(x2s, vals), zip(x2s[1:], vals[1:])):
                if abs(vb - va) > self.lipschitz * abs(yb - ya) + tol:
                    raise FieldDomainError(
                        f"{self.kind.value}: x2-Lipschitz constant {self.lipschitz} "
                        f"violated between x2={ya} and x2={yb}"
                    )


def constant_profile(c: float, vertically_homogeneous: bool = True,
                     window: Window = _DEFAULT_WINDOW) -> EnvironmentProfile:
    return EnvironmentProfile(
        kind=Family.CONSTANT, params={"c": c},
        lower_bound=c, upper_bound=c, lipschitz=0.0,
        vertically_homogeneous=vertically_homogeneous, window=window,
    )


@dataclass(frozen=True)
class ScaledField:
    """Profile seen at scale ell around an anchor point.

    eval(i, y) = profile(anchor1 + i/ell^2, anchor2 + y/ell^2): lattice
    column index i and height y live on the unrescaled grid, the profile
    argument on the macroscopic one.
    """

    profile: EnvironmentProfile
    ell: float
    anchor: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.ell <= 0:
            raise ValueError("ell must be positive")

    def eval(self, i: float, y: float) -> float:
        inv = 1.0 / (self.ell * self.ell)
        return self.profile.value(self.anchor[0] + i * inv, self.anchor[1] + y * inv)

    def column_value(self, i: float) -> float:
        """Field value on column i at the anchor height (vertically homogeneous use)."""
        return self.eval(i, 0.0)

    def vertical_mass(self, i: float, a: float, b: float) -> float:
        """Integral of the scaled field over heights [a, b] in column i."""
        if b < a:
            raise ValueError("vertical_mass needs a <= b")
        if a == b:
            return 0.0
        ell2 = self.ell * self.ell
        x1 = self.anchor[0] + i / ell2
        wa = self.anchor[1] + a / ell2
        wb = self.anchor[1] + b / ell2
        return ell2 * self.profile.integral_x2(x1, wa, wb)

    def mass_inverse(self, i: float, start: float, mass: float, direction: int = +1) -> float:
        """Height offset g >= 0 such that the vertical mass between start and
        start + direction*g equals `mass`.  Exact for the constant family,
        bracketed root finding (|residual| <= 1e-10) otherwise."""
        if mass < 0:
            raise ValueError("mass must be nonnegative")
        if mass == 0.0:
            return 0.0
        if self.profile.kind is Family.CONSTANT:
            return mass / self.profile.params["c"]
        lo_bound = self.profile.lower_bound
        if lo_bound <= 0:
            raise FieldDomainError("mass_inverse needs a positive lower bound")

        def mass_at(g: float) -> float:
            if direction > 0:
                return self.vertical_mass(i, start, start + g)
            return self.vertical_mass(i, start - g, start)

        def mass_at_safe(g: float):
            try:
                return mass_at(g)
            except FieldDomainError:
                return None

        # bracket search that may not cross the family's domain edge (where
        # the cumulative mass diverges, e.g. reciprocal_linear near x1+x2=0)
        lo = mass / self.profile.upper_bound       # mass_at(lo) <= mass
        hi = mass / lo_bound
        bad = math.inf
        val = mass_at_safe(hi)
        while val is None:
            bad = hi
            hi = 0.5 * (lo + hi)
            val = mass_at_safe(hi)
        for _ in range(200):
            if val >= mass:
                break
            nxt = hi * 2.0 if bad == math.inf else 0.5 * (hi + bad)
            v = mass_at_safe(nxt)
            if v is None:
                bad = nxt
            else:
                hi, val = nxt, v
        else:
            raise FieldDomainError("requested mass exceeds the available column mass")
        return brentq(lambda g: mass_at(g) - mass, 0.0, hi, xtol=1e-12, rtol=8.9e-16)
