"""Brute-force navigation-forest oracle.

Builds the actual drainage forest (each node linked to its nearest neighbor
in the previous column) on a finite window and computes slit throughput
(tau, T) straight from the definitions, independently of the bounding-walk
recursion.  Driven from the same shared realization as the walk, this turns
distributional agreement into exact per-seed equality.

Two layers:

* ``build_forest`` / ``slit_traffic``: the literal construction on explicit
  window columns.  Used for small hand-checkable cases and dumps.
* ``oracle_run_semilattice`` / ``oracle_run_diluted``: lazy equivalent that
  propagates the contributing set column by column.  Because successor edges
  never cross, the contributing nodes of each column form one contiguous
  block, so only the block and its two flanking neighbors are ever needed.
  Tests verify layer equality on explicit windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .fields import ScaledField
from .realization import LatticeRealization, SemiRealization

GUARD_FACTOR = 40.0  # per-column height allowance of the window guard


@dataclass
class ColumnRealization:
    """One explicit window column: sorted node heights, plus tie-break bits
    keyed by height for lattice models (1 = upper neighbor, 0 = lower)."""

    i: int
    points: list
    xi: dict | None = None


@dataclass
class NavigationForest:
    columns: list[ColumnRealization]
    parent: list[list[int]] = field(default_factory=list)  # index into column i-1; -1 in column 0

    def n_nodes(self) -> int:
        return sum(len(c.points) for c in self.columns)


def build_forest(realizations: list[ColumnRealization], model: str = "semi") -> NavigationForest:
    """Link every node of column i >= 1 to its nearest node in column i-1.

    Lattice ties (exact midpoints) are resolved by the node's own xi bit;
    an exact tie in the semi-lattice has probability zero and raises.
    """
    parent: list[list[int]] = []
    for idx, col in enumerate(realizations):
        if idx == 0:
            parent.append([-1] * len(col.points))
            continue
        prev = realizations[idx - 1].points
        if not prev:
            raise ValueError(f"column {idx - 1} of the window is empty; widen the window")
        links = []
        for y in col.points:
            k = _bisect(prev, y)
            lo = k - 1
            hi = k if k < len(prev) else k - 1
            if lo < 0:
                links.append(hi)
                continue
            if hi == lo:
                links.append(lo)
                continue
            d_lo = y - prev[lo]
            d_hi = prev[hi] - y
            if d_lo < d_hi:
                links.append(lo)
            elif d_hi < d_lo:
                links.append(hi)
            else:
                if model == "semi":
                    raise RuntimeError(
                        f"exact distance tie at column {idx}, height {y}: generator bug")
                bit = (col.xi or {}).get(y)
                if bit is None:
                    raise ValueError(f"missing tie bit at column {idx}, height {y}")
                links.append(hi if bit == 1 else lo)
        parent.append(links)
    return NavigationForest(columns=list(realizations), parent=parent)


def _bisect(arr, y):
    import bisect

    return bisect.bisect_left(arr, y)


@dataclass
class TrafficResult:
    """Oracle verdict for one realization.

    tau is None when the window horizon was exhausted with contributing
    nodes still alive (CENSORED).  longest_path_nodes is the literal
    maximal number of points on a single marked path; it must equal tau
    whenever tau is set (asserted by the callers).
    """

    tau: int | None
    longest_path_nodes: int
    T: float
    marks: list[list[bool]] | None = None
    blocks: list[tuple] | None = None
    guard_touched: bool = False

    @property
    def censored(self) -> bool:
        return self.tau is None


def slit_traffic(forest: NavigationForest, ell: float, mu: ScaledField,
                 keep_marks: bool = True) -> TrafficResult:
    """Mark every node whose directed path enters the slit [-ell/2, ell/2]
    of column 0; T = sum of mu over marked nodes, tau by strip emptiness."""
    half = ell / 2.0
    marks: list[list[bool]] = []
    T = 0.0
    tau = None
    last_marked_col = -1
    for idx, col in enumerate(forest.columns):
        if idx == 0:
            m = [-half <= y <= half for y in col.points]
        else:
            pm = marks[idx - 1]
            m = [pm[j] for j in forest.parent[idx]]
        marks.append(m)
        if not any(m):
            tau = idx
            break
        last_marked_col = idx
        T += sum(mu.eval(idx, y) for y, flag in zip(col.points, m) if flag)
    longest = last_marked_col + 1
    if tau is not None:
        assert longest == tau, "path-count and strip-emptiness tau disagree"
    return TrafficResult(tau=tau, longest_path_nodes=longest, T=T,
                         marks=marks if keep_marks else None)


# ---------------------------------------------------------------------------
# window extraction from shared realizations
# ---------------------------------------------------------------------------


def guard_height_semi(ell: float, horizon: int, lam_min: float) -> float:
    return ell / 2.0 + horizon * GUARD_FACTOR / lam_min


def guard_height_lattice(ell: int, horizon: int, p_min: float) -> float:
    return ell / 2.0 + horizon * GUARD_FACTOR / p_min


def semi_window(real: SemiRealization, horizon: int, H: float) -> list[ColumnRealization]:
    return [ColumnRealization(i=i, points=real.column(i).points_in(-H, H))
            for i in range(horizon + 1)]


def lattice_window(real: LatticeRealization, horizon: int, H: int) -> list[ColumnRealization]:
    cols = []
    for i in range(horizon + 1):
        pts = real.occupied_in(i, -H, H)
        xi = {y: real.xi(i, y) for y in pts}
        cols.append(ColumnRealization(i=i, points=pts, xi=xi))
    return cols


# ---------------------------------------------------------------------------
# lazy contiguous-block oracle (same marks, O(block) work per column)
# ---------------------------------------------------------------------------


def oracle_run_semilattice(real: SemiRealization, ell: float, mu: ScaledField,
                           horizon: int, guard: float | None = None) -> TrafficResult:
    """Slit throughput from the realization by contributing-block propagation.

    A column's contributing nodes are exactly the points strictly between the
    midpoints toward the flanking non-contributing neighbors of the previous
    column's block, because nearest-neighbor edges never cross.
    """
    if guard is None:
        lam_min = real.lam.profile.lower_bound
        guard = guard_height_semi(ell, horizon, lam_min)
    block = real.column(0).points_in(-ell / 2.0, ell / 2.0)
    T = sum(mu.eval(0, y) for y in block)
    blocks = [(0, list(block))]
    tau = None
    i = 0
    while block and i < horizon - 1:
        prev = real.column(i)
        o_up = prev.first_above(block[-1])
        o_dn = prev.first_below(block[0])
        hi = 0.5 * (block[-1] + o_up)
        lo = 0.5 * (block[0] + o_dn)
        i += 1
        block = [y for y in real.column(i).points_in(lo, hi) if lo < y < hi]
        blocks.append((i, list(block)))
        T += sum(mu.eval(i, y) for y in block)
    if not block:
        tau = i
        longest = i
    else:
        longest = i + 1
    touched = real.max_extent() > guard
    return TrafficResult(tau=tau, longest_path_nodes=longest, T=T,
                         blocks=blocks, guard_touched=touched)


def oracle_run_diluted(real: LatticeRealization, ell: int, mu: ScaledField,
                       horizon: int, guard: float | None = None) -> TrafficResult:
    """Lattice analog of the block propagation: integer heights, occupancy
    thinning, and node tie bits at exact midpoints (xi=1 joins the upper
    neighbor, xi=0 the lower)."""
    if guard is None:
        p_min = real.p.profile.lower_bound
        guard = guard_height_lattice(ell, horizon, p_min)
    h = ell // 2
    block = real.occupied_in(0, -h, h)
    T = sum(mu.eval(0, y) for y in block)
    blocks = [(0, list(block))]
    tau = None
    i = 0
    while block and i < horizon - 1:
        o_up = real.first_occupied_above(i, block[-1])
        o_dn = real.first_occupied_below(i, block[0])
        hi2 = block[-1] + o_up   # doubled midpoints, kept integral
        lo2 = block[0] + o_dn
        i += 1
        nxt = [y for y in real.occupied_in(i, (lo2 + 2) // 2, (hi2 - 1) // 2)
               if 2 * y > lo2 and 2 * y < hi2]
        if hi2 % 2 == 0:
            m = hi2 // 2
            if real.occupied(i, m) and real.xi(i, m) == 0:
                nxt.append(m)   # equidistant node joins its lower (marked) neighbor
        if lo2 % 2 == 0:
            m = lo2 // 2
            if real.occupied(i, m) and real.xi(i, m) == 1:
                nxt.insert(0, m)  # joins its upper (marked) neighbor
        block = nxt
        blocks.append((i, list(block)))
        T += sum(mu.eval(i, y) for y in block)
    if not block:
        tau = i
        longest = i
    else:
        longest = i + 1
    touched = real.max_extent > guard
    return TrafficResult(tau=tau, longest_path_nodes=longest, T=T,
                         blocks=blocks, guard_touched=touched)


def sandwich_check(result: TrafficResult, walls: list[tuple]) -> bool:
    """True when every contributing node lies weakly inside the bounding
    walls: walls[i] = (B_i, A_i)."""
    if result.blocks is None:
        raise ValueError("run the oracle with block recording")
    for i, blk in result.blocks:
        if i >= len(walls):
            break
        B, A = walls[i]
        for y in blk:
            if not (B <= y <= A):
                return False
    return True


# ---------------------------------------------------------------------------
# dumps
# ---------------------------------------------------------------------------


def forest_csv(forest: NavigationForest, result: TrafficResult) -> str:
    """CSV rows: column, height, parent height (empty in column 0), mark."""
    lines = ["# driftnet-schema v1", "column,height,parent_height,contributing"]
    marks = result.marks or [[False] * len(c.points) for c in forest.columns]
    for idx, col in enumerate(forest.columns):
        for j, y in enumerate(col.points):
            par = forest.parent[idx][j]
            py = "" if par < 0 else repr(forest.columns[idx - 1].points[par])
            flag = int(idx < len(marks) and marks[idx][j])
            lines.append(f"{idx},{y!r},{py},{flag}")
    return "\n".join(lines) + "\n"


def forest_svg(forest: NavigationForest, result: TrafficResult, ell: float,
               scale: float = 24.0) -> str:
    """Minimal static picture: edges gray, nodes black, contributing nodes
    and the slit highlighted in beige."""
    ys = [y for c in forest.columns for y in c.points]
    if not ys:
        return "<svg xmlns='http://www.w3.org/2000/svg'/>"
    y_lo, y_hi = min(ys) - 1, max(ys) + 1
    w = (len(forest.columns) + 1) * scale
    hgt = (y_hi - y_lo) * scale

    def X(i):
        return (i + 0.5) * scale

    def Y(y):
        return (y_hi - y) * scale

    marks = result.marks or []
    parts = [f"<svg xmlns='http://www.w3.org/2000/svg' width='{w:.0f}' height='{hgt:.0f}'>",
             f"<rect x='{X(0) - scale / 4:.1f}' y='{Y(ell / 2):.1f}' width='{scale / 2:.1f}' "
             f"height='{Y(-ell / 2) - Y(ell / 2):.1f}' fill='wheat' stroke='none'/>"]
    for idx, col in enumerate(forest.columns):
        for j, y in enumerate(col.points):
            par = forest.parent[idx][j]
            if par >= 0:
                py = forest.columns[idx - 1].points[par]
                parts.append(f"<line x1='{X(idx):.1f}' y1='{Y(y):.1f}' x2='{X(idx - 1):.1f}' "
                             f"y2='{Y(py):.1f}' stroke='gray' stroke-width='1'/>")
    for idx, col in enumerate(forest.columns):
        for j, y in enumerate(col.points):
            hot = idx < len(marks) and j < len(marks[idx]) and marks[idx][j]
            color = "peru" if hot else "black"
            parts.append(f"<circle cx='{X(idx):.1f}' cy='{Y(y):.1f}' r='3' fill='{color}'/>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
