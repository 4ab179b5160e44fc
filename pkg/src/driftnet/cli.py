"""Command-line harness.

Subcommands: simulate, limit-sample, exact-pmf, compare, oracle-check,
forest-dump.  Exit codes: 0 = all checks pass, 1 = statistical failure,
2 = configuration / IO error.  Every CSV starts with the schema comment
"# driftnet-schema v1"; outputs are a deterministic function of (config,
master seed) regardless of thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import engine, limits, oracle, stats
from .config import ConfigError, ExperimentConfig, load_config
from .fields import ScaledField
from .lattice import exact_tau_pmf_array
from .limits import LimitSpec, ModelKind
from .realization import LatticeRealization, SemiRealization
from .records import RunRecord

SCHEMA = "# driftnet-schema v1"


def _ell_tag(ell: float) -> str:
    return str(int(ell)) if float(ell).is_integer() else str(ell)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _quantiles(vals: np.ndarray) -> dict | None:
    if vals.size == 0:
        return None
    qs = np.quantile(vals, [0.1, 0.25, 0.5, 0.75, 0.9])
    return {f"q{int(100 * q)}": float(v) for q, v in zip([0.1, 0.25, 0.5, 0.75, 0.9], qs)}


def runs_csv(res: engine.BatchResult) -> str:
    lines = [SCHEMA, "seed_id,tau,tau_prime,T,T_prime,censored"]
    for r in range(res.n):
        rec = res.record(r)
        lines.append("%d,%s,%s,%r,%r,%d" % (
            rec.seed_id,
            "" if rec.tau is None else rec.tau,
            "" if rec.tau_prime is None else rec.tau_prime,
            rec.T, rec.T_prime, int(rec.censored)))
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    summary = {"model": cfg.model.value, "master_seed": cfg.master_seed, "ells": {}}
    for ell in cfg.ell_list:
        res = engine.simulate_batch(cfg.model, ell, cfg.intensity, cfg.mu,
                                    cfg.replicas, cfg.max_steps_for(ell),
                                    cfg.master_seed, anchor=cfg.anchor,
                                    threads=cfg.threads or None, method=cfg.method)
        _write(out / f"runs_ell{_ell_tag(ell)}.csv", runs_csv(res))
        kept = ~res.censored
        summary["ells"][_ell_tag(ell)] = {
            "replicas": res.n,
            "censor_rate": res.censor_rate if res.n else None,
            "tau_over_ell2": _quantiles(res.tau[kept] / ell**2),
            "T_over_ell3": _quantiles(res.T_rescaled()[kept]),
        }
    _write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    return 0


def limit_samples(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    spec = LimitSpec(cfg.model, cfg.intensity, cfg.mu, anchor=cfg.anchor)
    if cfg.timechanged:
        return limits.sample_limit_pairs_timechanged(spec, cfg.dt, cfg.limit_n,
                                                     cfg.master_seed, cfg.t_max)
    return limits.sample_limit_pairs(spec, cfg.dt, cfg.limit_n,
                                     cfg.master_seed, cfg.t_max)


def cmd_limit_sample(cfg: ExperimentConfig, out: Path) -> int:
    theta, integral = limit_samples(cfg)
    lines = [SCHEMA, "replica,theta,integral,censored,dt"]
    for r in range(theta.shape[0]):
        cens = math.isnan(theta[r])
        lines.append("%d,%s,%r,%d,%r" % (
            r, "" if cens else repr(float(theta[r])), float(integral[r]),
            int(cens), cfg.dt))
    _write(out / "limit_samples.csv", "\n".join(lines) + "\n")
    return 0


def cmd_exact_pmf(cfg: ExperimentConfig, out: Path) -> int:
    pmf = exact_tau_pmf_array(cfg.pmf_ell, cfg.pmf_n_max)
    cdf = np.cumsum(pmf)
    lines = [SCHEMA, "n,pmf,cdf"]
    for k in range(cfg.pmf_n_max):
        lines.append("%d,%r,%r" % (k + 1, float(pmf[k]), float(cdf[k])))
    _write(out / f"exact_pmf_ell{cfg.pmf_ell}.csv", "\n".join(lines) + "\n")
    return 0


def cmd_compare(cfg: ExperimentConfig, out: Path) -> int:
    ell = cfg.ell_list[0]
    res = engine.simulate_batch(cfg.model, ell, cfg.intensity, cfg.mu,
                                cfg.replicas, cfg.max_steps_for(ell),
                                cfg.master_seed, anchor=cfg.anchor,
                                threads=cfg.threads or None, method=cfg.method)
    theta, integral = limit_samples(cfg)

    tau_vals, tau_cens, tau_thr = res.tau_rescaled()
    sim_tau = stats.EcdfTable.from_samples(tau_vals, tau_cens, tau_thr)
    lim_cens = np.isnan(theta)
    lim_tau = stats.EcdfTable.from_samples(np.where(lim_cens, cfg.t_max, theta),
                                           lim_cens, cfg.t_max)
    ks_tau = stats.ks_two_sample(sim_tau, lim_tau, lo=cfg.range_lo, hi=cfg.range_hi,
                                 threshold=cfg.ks_tau_threshold)

    sim_T = stats.EcdfTable.from_samples(res.T_rescaled()[~res.censored])
    lim_T = stats.EcdfTable.from_samples(integral[~lim_cens])
    hi_T = min(np.quantile(sim_T.values, 0.99), np.quantile(lim_T.values, 0.99))
    ks_T = stats.ks_two_sample(sim_T, lim_T, lo=0.0, hi=float(hi_T),
                               threshold=cfg.ks_T_threshold)

    verdict = {
        "model": cfg.model.value, "ell": ell, "replicas": res.n,
        "censor_rate_sim": res.censor_rate, "censor_rate_limit": float(lim_cens.mean()),
        "ks_tau": json.loads(ks_tau.to_json()), "ks_T": json.loads(ks_T.to_json()),
        "passed": ks_tau.passed and ks_T.passed,
    }
    _write(out / "compare.json", json.dumps(verdict, indent=2) + "\n")
    print(json.dumps(verdict))
    return 0 if verdict["passed"] else 1


def _oracle_one(cfg: ExperimentConfig, seed: int):
    from .lattice import run_diluted_realized
    from .semilattice import run_semilattice_realized

    ell = cfg.oracle_ell
    guard = cfg.oracle_guard if cfg.oracle_guard > 0 else None
    mu = ScaledField(cfg.mu, ell=float(ell), anchor=cfg.anchor)
    if cfg.model is ModelKind.SEMI_LATTICE:
        lam = ScaledField(cfg.intensity, ell=float(ell), anchor=cfg.anchor)
        real = SemiRealization(lam, seed=seed)
        rec = run_semilattice_realized(float(ell), real, mu, cfg.oracle_horizon,
                                       seed_id=seed)
        res = oracle.oracle_run_semilattice(real, float(ell), mu, cfg.oracle_horizon,
                                            guard=guard)
    else:
        p = ScaledField(cfg.intensity, ell=float(ell), anchor=cfg.anchor)
        real = LatticeRealization(p, seed=seed)
        rec = run_diluted_realized(int(ell), real, mu, cfg.oracle_horizon,
                                   seed_id=seed)
        res = oracle.oracle_run_diluted(real, int(ell), mu, cfg.oracle_horizon,
                                        guard=guard)
    return rec, res


def cmd_oracle_check(cfg: ExperimentConfig, out: Path) -> int:
    first_mismatch = None
    checked = discarded = 0
    for seed in range(cfg.oracle_seeds):
        rec, res = _oracle_one(cfg, seed)
        if res.guard_touched:
            discarded += 1
            continue
        checked += 1
        ok = rec.tau == res.tau and abs(rec.T - res.T) <= 1e-12 * max(1.0, abs(rec.T))
        if res.tau is not None:
            ok = ok and res.longest_path_nodes == res.tau
        if not ok and first_mismatch is None:
            first_mismatch = {"seed": seed, "walk_tau": rec.tau, "oracle_tau": res.tau,
                              "walk_T": rec.T, "oracle_T": res.T}
    verdict = {"model": cfg.model.value, "ell": cfg.oracle_ell,
               "seeds": cfg.oracle_seeds, "checked": checked,
               "guard_discarded": discarded,
               "passed": first_mismatch is None, "first_mismatch": first_mismatch}
    _write(out / "oracle.json", json.dumps(verdict, indent=2) + "\n")
    print(json.dumps(verdict))
    return 0 if verdict["passed"] else 1


def cmd_forest_dump(cfg: ExperimentConfig, out: Path) -> int:
    ell = cfg.oracle_ell
    mu = ScaledField(cfg.mu, ell=float(ell), anchor=cfg.anchor)
    horizon = cfg.forest_horizon
    if cfg.model is ModelKind.SEMI_LATTICE:
        lam = ScaledField(cfg.intensity, ell=float(ell), anchor=cfg.anchor)
        real = SemiRealization(lam, seed=cfg.forest_seed)
        cols = oracle.semi_window(real, horizon - 1, H=cfg.forest_height)
        forest = oracle.build_forest(cols, model="semi")
    else:
        p = ScaledField(cfg.intensity, ell=float(ell), anchor=cfg.anchor)
        real = LatticeRealization(p, seed=cfg.forest_seed)
        cols = oracle.lattice_window(real, horizon - 1, H=int(cfg.forest_height))
        forest = oracle.build_forest(cols, model="lattice")
    res = oracle.slit_traffic(forest, float(ell), mu)
    _write(out / "forest.csv", oracle.forest_csv(forest, res))
    _write(out / "forest.svg", oracle.forest_svg(forest, res, float(ell)))
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "limit-sample": cmd_limit_sample,
    "exact-pmf": cmd_exact_pmf,
    "compare": cmd_compare,
    "oracle-check": cmd_oracle_check,
    "forest-dump": cmd_forest_dump,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="driftnet",
        description="Drainage-network throughput simulator and verification harness")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, metavar="PATH")
    parser.add_argument("--seed", type=int, default=None, metavar="U64")
    parser.add_argument("--threads", type=int, default=None, metavar="N")
    parser.add_argument("--out", default=".", metavar="DIR")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, seed_override=args.seed,
                          threads_override=args.threads)
        return _COMMANDS[args.command](cfg, Path(args.out))
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
