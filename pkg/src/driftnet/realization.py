"""Shared column realizations.

A realization is the full random environment of one replica, addressable by
(column, height) and generated lazily from counter-based streams.  Both the
bounding-walk simulators and the brute-force network oracle can be driven
from the same realization, which turns distribution-level agreement claims
into exact per-seed equality checks.
"""

from __future__ import annotations

import bisect

from .fields import ScaledField
from .rngcore import Stream, derive_key, master_key, stream_u64, u64_to_unit

# purpose tags for key derivation
_TAG_COLUMN_UP = 0
_TAG_COLUMN_DOWN = 1
_TAG_ZETA = 2
_TAG_XI = 3


class SemiColumn:
    """Lazy sorted point set of one semi-lattice column.

    Points form an inhomogeneous Poisson process with the column's vertical
    intensity; they are generated by cumulative-mass inversion outward from
    height 0 (unit-exponential arrivals in mass scale), so any two consumers
    of the same key see the identical point set.
    """

    def __init__(self, lam: ScaledField, i: int, key: int):
        self.lam = lam
        self.i = i
        self._up = Stream(derive_key(key, _TAG_COLUMN_UP))
        self._down = Stream(derive_key(key, _TAG_COLUMN_DOWN))
        self._pts_up: list[float] = []    # ascending, > 0
        self._pts_down: list[float] = []  # descending, < 0
        self._mass_up = 0.0
        self._mass_down = 0.0
        self.max_extent = 0.0  # largest |height| generated, for window guards

    def _extend_up(self):
        self._mass_up += self._up.exponential()
        y = self.lam.mass_inverse(self.i, 0.0, self._mass_up, +1)
        self._pts_up.append(y)
        self.max_extent = max(self.max_extent, y)

    def _extend_down(self):
        self._mass_down += self._down.exponential()
        y = -self.lam.mass_inverse(self.i, 0.0, self._mass_down, -1)
        self._pts_down.append(y)
        self.max_extent = max(self.max_extent, -y)

    def _cover(self, lo: float, hi: float):
        while not self._pts_up or self._pts_up[-1] <= hi:
            self._extend_up()
        while not self._pts_down or self._pts_down[-1] >= lo:
            self._extend_down()

    def first_above(self, y: float) -> float:
        """Smallest point strictly above height y."""
        while not self._pts_up or self._pts_up[-1] <= y:
            self._extend_up()
        if y < 0:
            while not self._pts_down or self._pts_down[-1] >= y:
                self._extend_down()
            k = bisect.bisect_left([-v for v in self._pts_down], -y)
            if k > 0:
                return self._pts_down[k - 1]
        return self._pts_up[bisect.bisect_right(self._pts_up, y)]

    def first_below(self, y: float) -> float:
        """Largest point strictly below height y."""
        while not self._pts_down or self._pts_down[-1] >= y:
            self._extend_down()
        if y > 0:
            while not self._pts_up or self._pts_up[-1] <= y:
                self._extend_up()
            k = bisect.bisect_left(self._pts_up, y)
            if k > 0:
                return self._pts_up[k - 1]
        idx = bisect.bisect_right([-v for v in self._pts_down], -y)
        return self._pts_down[idx]

    def points_in(self, lo: float, hi: float) -> list[float]:
        """Sorted points with lo <= y <= hi."""
        self._cover(lo, hi)
        out = [y for y in reversed(self._pts_down) if lo <= y <= hi]
        out += [y for y in self._pts_up if lo <= y <= hi]
        return out


class SemiRealization:
    """All columns of one semi-lattice replica."""

    def __init__(self, lam: ScaledField, seed: int, replica: int = 0):
        self.lam = lam
        self._base = derive_key(master_key(seed), replica)
        self._cols: dict[int, SemiColumn] = {}

    def column(self, i: int) -> SemiColumn:
        col = self._cols.get(i)
        if col is None:
            col = SemiColumn(self.lam, i, derive_key(self._base, i))
            self._cols[i] = col
        return col

    def max_extent(self) -> float:
        return max((c.max_extent for c in self._cols.values()), default=0.0)


class LatticeRealization:
    """Occupancy and choice fields of one (diluted) lattice replica.

    Site (i, y) is eligible when i + y is even.  Occupancy and tie-break
    bits are stateless functions of (seed, i, y), so any consumer sees the
    same fields without storing them.
    """

    def __init__(self, p: ScaledField, seed: int, replica: int = 0):
        self.p = p
        self._base = derive_key(master_key(seed), replica)
        self._zeta_key = derive_key(self._base, _TAG_ZETA)
        self._xi_key = derive_key(self._base, _TAG_XI)
        self.max_extent = 0

    @staticmethod
    def eligible(i: int, y: int) -> bool:
        return (i + y) % 2 == 0

    def occupied(self, i: int, y: int) -> bool:
        if not self.eligible(i, y):
            return False
        self.max_extent = max(self.max_extent, abs(y))
        u = u64_to_unit(stream_u64(derive_key(self._zeta_key, i, y), 0))
        return u < self.p.eval(i, y)

    def xi(self, i: int, y: int) -> int:
        """Fair up/down choice bit of node (i, y): 1 = upper, 0 = lower."""
        return stream_u64(derive_key(self._xi_key, i, y), 0) & 1

    def first_occupied_above(self, i: int, y: int) -> int:
        z = y + 1
        while not self.occupied(i, z):
            z += 1
        return z

    def first_occupied_below(self, i: int, y: int) -> int:
        z = y - 1
        while not self.occupied(i, z):
            z -= 1
        return z

    def occupied_in(self, i: int, lo: int, hi: int) -> list[int]:
        return [y for y in range(lo, hi + 1) if self.occupied(i, y)]
