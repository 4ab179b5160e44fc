"""Experiment configuration: flat INI (key = value under sections).

Sections:

  [run]       model, ell (comma list), replicas, max_steps (0 = 50*ell^2),
              master_seed, threads (0 = library default), method
  [anchor]    x1, x2
  [window]    x1_lo, x1_hi, x2_lo, x2_hi  (profile validation window)
  [intensity] the lambda / thinning-p profile: family + its parameters
  [mu]        traffic-weight profile, same keys
  [limit]     dt, t_max, n, timechanged
  [compare]   ks_tau_threshold, ks_T_threshold, range_lo, range_hi
  [oracle]    seeds, horizon, ell, guard (0 = default height guard)
  [pmf]       ell, n_max
  [forest]    seed, horizon, height

Only [run] is mandatory; everything else has defaults.  No expressions: every
value is a literal.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .fields import EnvironmentProfile, Family, Window
from .limits import ModelKind


class ConfigError(ValueError):
    pass


_MODELS = {m.value: m for m in ModelKind}


def _profile_from_section(sec, window: Window, default_c: float = 1.0) -> EnvironmentProfile:
    family = sec.get("family", "constant") if sec is not None else "constant"
    try:
        kind = Family(family)
    except ValueError:
        raise ConfigError(f"unknown profile family {family!r}") from None
    get = (lambda k, d=None: sec.get(k, d)) if sec is not None else (lambda k, d=None: d)
    (x1lo, x1hi), (x2lo, x2hi) = window

    if kind is Family.CONSTANT:
        c = float(get("c", default_c))
        return EnvironmentProfile(kind, {"c": c}, lower_bound=c, upper_bound=c,
                                  lipschitz=0.0, vertically_homogeneous=True,
                                  window=window)
    if kind is Family.AFFINE_CLAMPED:
        p = {k: float(get(k)) for k in ("a0", "ax", "ay", "clamp_lo", "clamp_hi")}
        return EnvironmentProfile(kind, p, lower_bound=p["clamp_lo"],
                                  upper_bound=p["clamp_hi"], lipschitz=abs(p["ay"]),
                                  vertically_homogeneous=(p["ay"] == 0.0),
                                  window=window)
    if kind is Family.RECIPROCAL_LINEAR:
        s_lo = x1lo + x2lo
        s_hi = x1hi + x2hi
        if s_lo <= 0:
            raise ConfigError("reciprocal_linear needs x1_lo + x2_lo > 0 in [window]")
        return EnvironmentProfile(kind, {}, lower_bound=1.0 / s_hi,
                                  upper_bound=1.0 / s_lo, lipschitz=1.0 / (s_lo * s_lo),
                                  vertically_homogeneous=False, window=window)
    if kind is Family.EXPONENTIAL_DECAY:
        hi = math.exp(-x1lo - x2lo)
        return EnvironmentProfile(kind, {}, lower_bound=math.exp(-x1hi - x2hi),
                                  upper_bound=hi, lipschitz=hi,
                                  vertically_homogeneous=False, window=window)
    # tabulated
    knots = [float(v) for v in get("knots_x2", "").split(",") if v.strip()]
    vals = [float(v) for v in get("values", "").split(",") if v.strip()]
    if len(knots) != len(vals) or len(knots) < 2:
        raise ConfigError("tabulated profile needs matching knots_x2 / values lists")
    slopes = np.abs(np.diff(vals) / np.diff(knots))
    return EnvironmentProfile(kind, {"knots_x2": knots, "values": vals},
                              lower_bound=min(vals), upper_bound=max(vals),
                              lipschitz=float(slopes.max()) if slopes.size else 0.0,
                              vertically_homogeneous=False, window=window)


@dataclass
class ExperimentConfig:
    model: ModelKind
    ell_list: list[float]
    replicas: int
    max_steps: int              # 0 = per-ell default 50*ell^2
    master_seed: int
    threads: int                # 0 = library default
    method: str
    anchor: tuple[float, float]
    intensity: EnvironmentProfile
    mu: EnvironmentProfile
    dt: float
    t_max: float
    limit_n: int
    timechanged: bool
    ks_tau_threshold: float
    ks_T_threshold: float
    range_lo: float
    range_hi: float
    oracle_seeds: int
    oracle_horizon: int
    oracle_ell: float
    oracle_guard: float
    pmf_ell: int
    pmf_n_max: int
    forest_seed: int
    forest_horizon: int
    forest_height: float
    raw: configparser.ConfigParser = field(repr=False, default=None)

    def max_steps_for(self, ell: float) -> int:
        return self.max_steps if self.max_steps > 0 else int(50 * ell * ell)


def load_config(path: str, seed_override: int | None = None,
                threads_override: int | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    if "run" not in cp:
        raise ConfigError("missing [run] section")
    run = cp["run"]
    model_name = run.get("model", "")
    if model_name not in _MODELS:
        raise ConfigError(f"model must be one of {sorted(_MODELS)}, got {model_name!r}")
    model = _MODELS[model_name]
    try:
        ells = [float(v) for v in run.get("ell", "").split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"bad ell list: {e}") from None
    if not ells:
        raise ConfigError("[run] ell must list at least one scale")
    if model is not ModelKind.SEMI_LATTICE:
        for ell in ells:
            if ell != int(ell) or int(ell) % 2 or (int(ell) // 2) % 2 != 1:
                raise ConfigError(f"lattice ell must have ell/2 odd, got {ell}")

    anchor_sec = cp["anchor"] if "anchor" in cp else {}
    anchor = (float(anchor_sec.get("x1", 0.0)), float(anchor_sec.get("x2", 0.0)))
    win_sec = cp["window"] if "window" in cp else {}
    window = ((float(win_sec.get("x1_lo", anchor[0])),
               float(win_sec.get("x1_hi", anchor[0] + 60.0))),
              (float(win_sec.get("x2_lo", anchor[1] - 1.0)),
               float(win_sec.get("x2_hi", anchor[1] + 1.0))))

    try:
        intensity = _profile_from_section(cp["intensity"] if "intensity" in cp else None,
                                          window)
        mu = _profile_from_section(cp["mu"] if "mu" in cp else None, window)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad profile section: {e}") from None
    if model is not ModelKind.SEMI_LATTICE and intensity.upper_bound > 1.0:
        raise ConfigError("thinning probability profile must stay within (0, 1]")

    lim = cp["limit"] if "limit" in cp else {}
    cmpse = cp["compare"] if "compare" in cp else {}
    orc = cp["oracle"] if "oracle" in cp else {}
    pmf = cp["pmf"] if "pmf" in cp else {}
    fr = cp["forest"] if "forest" in cp else {}

    try:
        cfg = ExperimentConfig(
            model=model,
            ell_list=ells,
            replicas=int(run.get("replicas", 1000)),
            max_steps=int(run.get("max_steps", 0)),
            master_seed=int(run.get("master_seed", 1)) if seed_override is None else seed_override,
            threads=int(run.get("threads", 0)) if threads_override is None else threads_override,
            method=run.get("method", "auto"),
            anchor=anchor,
            intensity=intensity,
            mu=mu,
            dt=float(lim.get("dt", 1e-4)),
            t_max=float(lim.get("t_max", 50.0)),
            limit_n=int(lim.get("n", 10000)),
            timechanged=str(lim.get("timechanged", "false")).lower() in ("1", "true", "yes"),
            ks_tau_threshold=float(cmpse.get("ks_tau_threshold", 0.025)),
            ks_T_threshold=float(cmpse.get("ks_T_threshold", 0.03)),
            range_lo=float(cmpse.get("range_lo", 0.0)),
            range_hi=float(cmpse.get("range_hi", math.inf)),
            oracle_seeds=int(orc.get("seeds", 100)),
            oracle_horizon=int(orc.get("horizon", 200)),
            oracle_ell=float(orc.get("ell", ells[0])),
            oracle_guard=float(orc.get("guard", 0.0)),
            pmf_ell=int(pmf.get("ell", 2)),
            pmf_n_max=int(pmf.get("n_max", 1000)),
            forest_seed=int(fr.get("seed", 0)),
            forest_horizon=int(fr.get("horizon", 12)),
            forest_height=float(fr.get("height", 12.0)),
            raw=cp,
        )
    except ValueError as e:
        raise ConfigError(f"bad config value: {e}") from None
    if cfg.replicas < 0 or cfg.limit_n < 0 or cfg.dt <= 0 or cfg.oracle_horizon < 1:
        raise ConfigError("replicas/n nonnegative, dt positive, horizon >= 1 required")
    if cfg.method not in ("auto", "fast", "reference"):
        raise ConfigError(f"method must be auto/fast/reference, got {cfg.method!r}")
    return cfg
