import pytest

from driftnet.fields import ScaledField, constant_profile
from driftnet.oracle import (ColumnRealization, build_forest, forest_csv,
                             forest_svg, guard_height_semi, lattice_window,
                             oracle_run_diluted, oracle_run_semilattice,
                             sandwich_check, semi_window, slit_traffic)
from driftnet.realization import LatticeRealization, SemiRealization
from driftnet.semilattice import (WalkState, apply_column,
                                  column_from_realization,
                                  run_semilattice_realized)
from driftnet.lattice import run_diluted_realized

UNIT = constant_profile(1.0)


def unit_field(ell):
    return ScaledField(UNIT, ell=float(ell))


def test_hand_built_forest_links_and_traffic():
    cols = [
        ColumnRealization(0, [-1.0, 0.5, 3.0]),
        ColumnRealization(1, [-0.8, 2.4]),
        ColumnRealization(2, [2.0]),
        ColumnRealization(3, [-4.0]),
    ]
    f = build_forest(cols, model="semi")
    assert f.parent[0] == [-1, -1, -1]
    assert f.parent[1] == [0, 2]     # -0.8 -> -1.0, 2.4 -> 3.0
    assert f.parent[2] == [1]        # 2.0 -> 2.4
    assert f.parent[3] == [0]        # -4.0 -> 2.0 (only node)
    res = slit_traffic(f, ell=2.0, mu=unit_field(2.0))
    # slit [-1,1] marks {-1.0, 0.5}; column 1 keeps -0.8; column 2 dies
    assert res.tau == 2
    assert res.longest_path_nodes == 2
    assert res.T == pytest.approx(3.0)
    assert res.marks[1] == [True, False]


def test_aligned_chain_is_censored():
    cols = [ColumnRealization(i, [0.0]) for i in range(5)]
    res = slit_traffic(build_forest(cols), ell=1.0, mu=unit_field(1.0))
    assert res.tau is None and res.censored
    assert res.longest_path_nodes == 5
    assert res.T == pytest.approx(5.0)


def test_empty_previous_column_rejected():
    cols = [ColumnRealization(0, []), ColumnRealization(1, [0.0])]
    with pytest.raises(ValueError):
        build_forest(cols)


def test_semi_exact_tie_is_a_bug():
    cols = [ColumnRealization(0, [0.0, 2.0]), ColumnRealization(1, [1.0])]
    with pytest.raises(RuntimeError):
        build_forest(cols, model="semi")


def test_lattice_tie_uses_xi_bit():
    cols = [ColumnRealization(0, [0, 2]),
            ColumnRealization(1, [1], xi={1: 1})]
    f = build_forest(cols, model="lattice")
    assert f.parent[1] == [1]  # xi = 1 -> upper neighbor
    cols[1].xi = {1: 0}
    assert build_forest(cols, model="lattice").parent[1] == [0]
    cols[1].xi = {}
    with pytest.raises(ValueError):
        build_forest(cols, model="lattice")


@pytest.mark.parametrize("seed", range(60))
def test_semi_literal_equals_lazy(seed):
    ell, horizon = 3.0, 40
    mu = unit_field(ell)
    lam = ScaledField(UNIT, ell=ell)
    real = SemiRealization(lam, seed=seed)
    lazy = oracle_run_semilattice(real, ell, mu, horizon)
    H = guard_height_semi(ell, horizon, 1.0)
    window = semi_window(SemiRealization(lam, seed=seed), horizon - 1,
                         max(15.0, real.max_extent() + 1.0))
    lit = slit_traffic(build_forest(window), ell, mu)
    assert lit.tau == lazy.tau
    assert lit.T == pytest.approx(lazy.T, rel=1e-12)
    assert H > ell / 2.0


@pytest.mark.parametrize("seed", range(60))
def test_diluted_literal_equals_lazy(seed):
    ell, horizon = 6, 40
    p = ScaledField(constant_profile(0.6), ell=float(ell))
    mu = unit_field(ell)
    real = LatticeRealization(p, seed=seed)
    lazy = oracle_run_diluted(real, ell, mu, horizon)
    window = lattice_window(LatticeRealization(p, seed=seed), horizon - 1,
                            max(40, real.max_extent + 2))
    lit = slit_traffic(build_forest(window, model="lattice"), ell, mu)
    assert lit.tau == lazy.tau
    assert lit.T == pytest.approx(lazy.T, rel=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_semi_walk_oracle_coupling(seed):
    ell, steps = 4.0, 300
    lam = ScaledField(UNIT, ell=ell)
    mu = unit_field(ell)
    walk = run_semilattice_realized(ell, SemiRealization(lam, seed=seed), mu, steps)
    orac = oracle_run_semilattice(SemiRealization(lam, seed=seed), ell, mu, steps)
    assert walk.tau == orac.tau
    assert walk.T == pytest.approx(orac.T, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_diluted_walk_oracle_coupling(seed):
    ell, steps = 6, 300
    p = ScaledField(constant_profile(0.7), ell=float(ell))
    mu = unit_field(ell)
    walk = run_diluted_realized(ell, LatticeRealization(p, seed=seed), mu, steps)
    orac = oracle_run_diluted(LatticeRealization(p, seed=seed), ell, mu, steps)
    assert walk.tau == orac.tau
    assert walk.T == pytest.approx(orac.T, rel=1e-12, abs=1e-12)


def test_sandwich_against_walk_walls():
    ell = 4.0
    lam = ScaledField(UNIT, ell=ell)
    mu = unit_field(ell)
    for seed in range(30):
        real = SemiRealization(lam, seed=seed)
        st = WalkState(i=0, A=ell / 2.0, B=-ell / 2.0)
        walls = [(st.B, st.A)]
        for _ in range(200):
            step = column_from_realization(st, real, mu)
            if step.count == 0:
                break
            apply_column(st, step)
            walls.append((st.B, st.A))
        orac = oracle_run_semilattice(SemiRealization(lam, seed=seed), ell, mu, 200)
        assert sandwich_check(orac, walls)


def test_dump_formats():
    cols = [ColumnRealization(0, [-1.0, 0.5]), ColumnRealization(1, [0.2])]
    f = build_forest(cols)
    res = slit_traffic(f, ell=2.0, mu=unit_field(2.0))
    csv = forest_csv(f, res)
    lines = csv.strip().split("\n")
    assert lines[0] == "# driftnet-schema v1"
    assert lines[1] == "column,height,parent_height,contributing"
    assert len(lines) == 2 + f.n_nodes()
    svg = forest_svg(f, res, ell=2.0)
    assert svg.startswith("<svg") and "circle" in svg and "wheat" in svg
