"""Result records shared by the simulators and the harness."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class RunRecord:
    """One replica's outcome.

    tau / tau_prime are None when the run was censored at max_steps before
    the corresponding stopping rule fired.  T holds the partial traffic sum
    in that case.  tau_prime <= tau and T_prime <= T whenever both are set.
    """

    tau: int | None
    tau_prime: int | None
    T: float
    T_prime: float
    steps_used: int
    seed_id: int

    @property
    def censored(self) -> bool:
        return self.tau is None


@dataclass
class LimitSample:
    """One draw of the limiting pair (hitting time, weighted area integral)."""

    theta: float | None
    integral: float
    dt_used: float
    bias_note: str = "DiscretizedHitting"

    @property
    def censored(self) -> bool:
        return self.theta is None
