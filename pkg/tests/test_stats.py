import math

import numpy as np
import pytest

from driftnet.lattice import exact_tau_pmf, exact_tau_tail
from driftnet.stats import (INV_2_SQRT_PI, INV_4_SQRT_PI, EcdfTable,
                            chi_square_gof, dkw_epsilon, ks_one_sample,
                            ks_two_sample, ks_two_sample_critical, tail_ratio)


def test_constants():
    assert INV_4_SQRT_PI == pytest.approx(0.1410473959, abs=1e-9)
    assert INV_2_SQRT_PI == pytest.approx(0.2820947918, abs=1e-9)


def test_dkw_threshold_values():
    assert dkw_epsilon(100000, 0.01) == pytest.approx(
        math.sqrt(math.log(200.0) / 200000.0))
    with pytest.raises(ValueError):
        dkw_epsilon(0)
    with pytest.raises(ValueError):
        dkw_epsilon(100, 1.5)


def test_two_sample_critical_value():
    want = math.sqrt(-0.5 * math.log(0.005)) * math.sqrt(2.0 / 10000.0)
    assert ks_two_sample_critical(10000, 10000, 0.01) == pytest.approx(want)


def test_ecdf_basic_eval():
    t = EcdfTable.from_samples([3.0, 1.0, 2.0])
    assert t.eval(0.5) == 0.0
    assert t.eval(1.0) == pytest.approx(1.0 / 3.0)
    assert t.eval(2.5) == pytest.approx(2.0 / 3.0)
    assert t.eval(10.0) == 1.0
    assert t.censor_rate == 0.0


def test_ecdf_censoring_rules():
    t = EcdfTable.from_samples([1.0, 2.0, 5.0, 6.0],
                               censored=[False, False, True, True],
                               threshold=4.0)
    assert t.n_total == 4 and t.censor_count == 2
    assert t.censor_rate == 0.5
    assert t.eval(3.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        t.eval(4.0)
    with pytest.raises(ValueError):
        EcdfTable.from_samples([5.0], censored=[True])  # needs finite threshold
    with pytest.raises(ValueError):
        EcdfTable.from_samples([5.0, 1.0], censored=[False, False], threshold=4.0)


def test_merge_is_associative_and_consistent():
    a = EcdfTable.from_samples([1.0, 9.0], censored=[False, True], threshold=8.0)
    b = EcdfTable.from_samples([2.0, 3.0])
    c = EcdfTable.from_samples([0.5, 7.5, 12.0], censored=[False, False, True],
                               threshold=10.0)
    ab_c = a.merge(b).merge(c)
    a_bc = a.merge(b.merge(c))
    assert np.array_equal(ab_c.values, a_bc.values)
    assert ab_c.n_total == a_bc.n_total == 7
    assert ab_c.censor_count == a_bc.censor_count
    assert ab_c.censor_threshold == 8.0
    assert ab_c.eval(5.0) == pytest.approx(4.0 / 7.0)


def test_two_sample_identical_and_disjoint():
    xs = np.linspace(0.0, 1.0, 100)
    a = EcdfTable.from_samples(xs)
    b = EcdfTable.from_samples(xs)
    assert ks_two_sample(a, b).statistic == 0.0
    c = EcdfTable.from_samples(xs + 10.0)
    r = ks_two_sample(a, c)
    assert r.statistic == 1.0 and not r.passed


def test_one_sample_against_uniform():
    rng = np.random.default_rng(1)
    xs = rng.random(100000)
    t = EcdfTable.from_samples(xs)
    r = ks_one_sample(t, lambda x: min(max(x, 0.0), 1.0), 0.0, 1.0)
    assert r.statistic < dkw_epsilon(100000)
    assert r.passed


def test_one_sample_respects_censor_threshold():
    xs = np.concatenate([np.linspace(0.0, 0.5, 500), np.full(500, 2.0)])
    t = EcdfTable.from_samples(xs, censored=xs >= 1.0, threshold=1.0)
    r = ks_one_sample(t, lambda x: x / 2.0 if x < 0.5 else 0.25 + (x - 0.5) / 2.0,
                      0.0, 5.0)
    assert r.range[1] < 1.0  # clipped below the censor threshold


def test_dkw_band_coverage():
    # 200 uniform batches of 1e4: the 99% DKW band should fail rarely
    eps = dkw_epsilon(10000, 0.01)
    rng = np.random.default_rng(7)
    fails = 0
    for _ in range(200):
        xs = np.sort(rng.random(10000))
        ec = np.arange(1, 10001) / 10000.0
        d = max(np.abs(ec - xs).max(), np.abs(ec - 1.0 / 10000.0 - xs).max())
        fails += d > eps
    assert fails <= 0.05 * 200 + 3


def test_chi_square_merging_and_pass():
    obs = np.array([50.0, 30.0, 15.0, 3.0, 1.0, 1.0])
    exp = np.array([48.0, 31.0, 16.0, 3.0, 1.0, 1.0])
    r = chi_square_gof(obs, exp)
    assert r.n_bins == 4  # the three tail bins merged into one
    assert r.passed
    with pytest.raises(ValueError):
        chi_square_gof([1.0], [1.0])


def test_chi_square_detects_mismatch():
    obs = np.array([100.0, 200.0, 300.0])
    exp = np.array([200.0, 200.0, 200.0])
    assert not chi_square_gof(obs, exp).passed


def test_tail_ratio_wiring():
    assert tail_ratio(lambda e, n: exact_tau_tail(e, n), 2, 100.0, "tail") == \
        pytest.approx(math.sqrt(100.0) / 2.0 * exact_tau_tail(2, 100))
    assert tail_ratio(lambda e, n: exact_tau_pmf(e, n), 2, 1e6, "pmf") == \
        pytest.approx(INV_2_SQRT_PI, rel=1e-4)
    with pytest.raises(ValueError):
        tail_ratio(lambda e, n: 0.0, 2, 10.0, "nope")
