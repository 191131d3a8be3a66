"""Parameter algebra: schedules, per-level parameters, regime membership.

All frequency ladders are integer-exact (Python ints), so lambda_{q+1} =
lambda_q^b holds with no rounding.  At desk scale the concentration scales
are rounded so that lambda_{q+1} r_perp and r_par / r_perp are integers,
which makes the building blocks exactly periodic on the collocation grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

INF = float("inf")


class RegimeError(ValueError):
    """A quantity of the other supercriticality regime was requested."""


@dataclass(frozen=True)
class Schedule:
    """Iteration schedule.  desk_scale swaps the astronomically steep
    paper-scale mollification/cutoff exponents for computable overrides while
    keeping every formula's structure."""

    a: int = 2
    b: int = 2
    beta: float = 0.1
    eps: Fraction = Fraction(1, 80)
    alpha: Fraction = Fraction(3, 2)
    nu: float = 1.0
    regime: str = "S1"
    desk_scale: bool = True

    def __post_init__(self):
        if self.a < 2 or int(self.a) != self.a:
            raise ValueError("a must be an integer >= 2")
        if self.b < 2 or self.b % 2 != 0:
            raise ValueError("b must be an even integer >= 2")
        if not (0.0 < self.beta <= 1.0):
            raise ValueError("beta must lie in (0, 1]")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        alpha = Fraction(self.alpha)
        if not (1 <= alpha < 2):
            raise ValueError("alpha must lie in [1, 2)")
        if self.regime not in ("S1", "S2"):
            raise ValueError("regime must be 'S1' or 'S2'")
        if self.regime == "S1" and alpha < Fraction(5, 4):
            raise ValueError("regime S1 requires alpha >= 5/4")
        if self.nu < 0:
            raise ValueError("nu must be >= 0")
        if not self.desk_scale:
            if (self.b * alpha).denominator != 1:
                raise ValueError("paper scale requires b * alpha integral")
            if (self.b * Fraction(self.eps)).denominator != 1:
                raise ValueError("paper scale requires b * eps integral")

    def lam(self, q: int) -> int:
        """lambda_q = a**(b**q), exact integer."""
        if q < 0:
            raise ValueError("level must be >= 0")
        return self.a ** (self.b ** q)

    def delta(self, q: int) -> float:
        """delta_q = lambda_1^{3 beta} lambda_q^{-2 beta}."""
        return float(self.lam(1)) ** (3 * self.beta) * \
            float(self.lam(q)) ** (-2 * self.beta)

    def varsigma(self, q: int, horizon: float = 1.0) -> float:
        """Initial-time cutoff scale (paper: lambda_q^-40; desk: T/8)."""
        if self.desk_scale:
            return horizon / 8.0
        return float(self.lam(q)) ** -40.0


def _round_at_least_one(x: float) -> int:
    return max(1, int(round(x)))


@dataclass(frozen=True)
class LevelParams:
    """All level-q parameters used by the blocks and perturbations."""

    q: int
    regime: str
    lambda_q: int
    lambda_q1: int
    delta_q1: float
    delta_q2: float
    varsigma_q: float
    ell: float
    tau: float
    sigma: int
    alpha: float
    nu: float
    r_perp: float
    _r_par: float | None = None
    _mu: float | None = None

    @property
    def r_par(self) -> float:
        if self.regime != "S1":
            raise RegimeError("r_par is defined only in regime S1")
        return self._r_par

    @property
    def mu(self) -> float:
        if self.regime != "S1":
            raise RegimeError("mu is defined only in regime S1")
        return self._mu

    @property
    def lam_r_perp(self) -> int:
        """lambda_{q+1} r_perp, an integer after desk-scale rounding."""
        k = self.lambda_q1 * self.r_perp
        ki = int(round(k))
        if abs(k - ki) > 1e-9:
            raise ValueError("lambda_{q+1} r_perp is not integral")
        return ki

    def check_inequalities(self) -> dict:
        """Re-check the block-parameter inequalities after rounding."""
        out = {}
        if self.regime == "S1":
            rhs = (self.r_perp / self._r_par) * self.lambda_q1 * self._mu
            out["sigma_tau_lt"] = self.sigma * self.tau < rhs
            out["lambda_lt"] = self.lambda_q1 < rhs
            out["ratio_lt_one"] = self.r_perp / self._r_par < 1.0
            out["ell_ratio"] = (self.ell ** -12.0) / self.lambda_q1 < \
                self.r_perp / self._r_par
        return out


def level_params(sched: Schedule, q: int, horizon: float = 1.0) -> LevelParams:
    """Evaluate the parameter formulas at level q (block scales belong to
    level q+1).  desk_scale rounds r_perp, r_par to grid-exact values and
    replaces the mollification/cutoff scales by the desk overrides."""
    lam_q = sched.lam(q)
    lam_q1 = sched.lam(q + 1)
    lam = float(lam_q1)
    eps = float(sched.eps)
    alpha = float(sched.alpha)
    if sched.desk_scale:
        ell = 1.0 / lam
    else:
        ell = float(lam_q) ** -80.0
    sigma = _round_at_least_one(lam**(2 * eps))
    if sched.regime == "S1":
        tau = lam**(4 * alpha - 5 + 11 * eps)
        mu = lam**(2 * alpha - 1 + 2 * eps)
        if sched.desk_scale:
            k = _round_at_least_one(lam**(2 * eps))
            r_perp = k / lam
            m_ratio = _round_at_least_one(lam**(2 * eps))
            r_par = m_ratio * r_perp
        else:
            r_perp = lam**(-1 + 2 * eps)
            r_par = lam**(-1 + 4 * eps)
        return LevelParams(q=q, regime="S1", lambda_q=lam_q, lambda_q1=lam_q1,
                           delta_q1=sched.delta(q + 1), delta_q2=sched.delta(q + 2),
                           varsigma_q=sched.varsigma(q, horizon), ell=ell,
                           tau=max(tau, 1.0), sigma=sigma, alpha=alpha,
                           nu=sched.nu, r_perp=r_perp, _r_par=r_par, _mu=mu)
    tau = lam**(2 * alpha)
    if sched.desk_scale:
        k = _round_at_least_one(lam**(2 - alpha - 8 * eps))
        r_perp = k / lam
    else:
        r_perp = lam**(-alpha + 1 - 8 * eps)
    return LevelParams(q=q, regime="S2", lambda_q=lam_q, lambda_q1=lam_q1,
                       delta_q1=sched.delta(q + 1), delta_q2=sched.delta(q + 2),
                       varsigma_q=sched.varsigma(q, horizon), ell=ell,
                       tau=max(tau, 1.0), sigma=sigma, alpha=alpha,
                       nu=sched.nu, r_perp=r_perp)


def synthetic_params(lam: float, eps: float, alpha: float, regime: str = "S1",
                     exact: bool = True) -> LevelParams:
    """LevelParams at a prescribed block frequency with exact power-law
    scales (no rounding); used by the scaling studies."""
    lam_i = int(round(lam))
    if regime == "S1":
        r_perp = lam**(-1 + 2 * eps) if exact else \
            _round_at_least_one(lam**(2 * eps)) / lam
        r_par = lam**(-1 + 4 * eps) if exact else \
            _round_at_least_one(lam**(2 * eps)) * r_perp
        return LevelParams(q=0, regime="S1", lambda_q=lam_i, lambda_q1=lam_i,
                           delta_q1=1.0, delta_q2=1.0, varsigma_q=1.0 / 8.0,
                           ell=1.0 / lam, tau=lam**(4 * alpha - 5 + 11 * eps),
                           sigma=_round_at_least_one(lam**(2 * eps)),
                           alpha=alpha, nu=1.0, r_perp=r_perp, _r_par=r_par,
                           _mu=lam**(2 * alpha - 1 + 2 * eps))
    r_perp = lam**(-alpha + 1 - 8 * eps) if exact else \
        _round_at_least_one(lam**(2 - alpha - 8 * eps)) / lam
    return LevelParams(q=0, regime="S2", lambda_q=lam_i, lambda_q1=lam_i,
                       delta_q1=1.0, delta_q2=1.0, varsigma_q=1.0 / 8.0,
                       ell=1.0 / lam, tau=lam**(2 * alpha),
                       sigma=_round_at_least_one(lam**(2 * eps)),
                       alpha=alpha, nu=1.0, r_perp=r_perp)


# -- supercritical-regime algebra ------------------------------------------------


@dataclass(frozen=True)
class RegimeSpec:
    """A point (s, gamma, p) in the mixed-norm exponent space; gamma and p
    may be math.inf (arithmetic uses 1/inf = 0)."""

    s: float
    gamma: float
    p: float

    def __post_init__(self):
        if not (0 <= self.s < 3):
            raise ValueError("s must lie in [0, 3)")
        for name, v in (("gamma", self.gamma), ("p", self.p)):
            if v < 1:
                raise ValueError(f"{name} must be >= 1 (inf allowed)")


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def in_regime(spec: RegimeSpec, alpha: float) -> dict:
    """Membership in the two supercritical regimes with signed margins
    (RHS - s); membership is strict and includes the alpha range gate."""
    s1_rhs = (4 * alpha - 5) * _inv(spec.gamma) + 3 * _inv(spec.p) + 1 - 2 * alpha
    s2_rhs = 2 * alpha * _inv(spec.gamma) + (2 * alpha - 2) * _inv(spec.p) \
        + 1 - 2 * alpha
    m1 = s1_rhs - spec.s
    m2 = s2_rhs - spec.s
    return {
        "S1": bool(m1 > 0 and 1.25 <= alpha < 2),
        "S2": bool(m2 > 0 and 1.0 <= alpha < 2),
        "margin_S1": m1,
        "margin_S2": m2,
    }


def lps_defect(spec: RegimeSpec, alpha: float) -> float:
    """Distance from the scaling-invariant line 2a/gamma + 3/p = 2a - 1 + s."""
    return 2 * alpha * _inv(spec.gamma) + 3 * _inv(spec.p) - (2 * alpha - 1 + spec.s)


def epsilon_bound(spec: RegimeSpec, alpha: float, regime: str) -> float:
    """Largest admissible eps for the schedule; negative iff the point lies
    outside the requested regime."""
    if regime == "S1":
        margin = (4 * alpha - 5) * _inv(spec.gamma) + 3 * _inv(spec.p) \
            - (2 * alpha - 1) - spec.s
    elif regime == "S2":
        margin = 2 * alpha * _inv(spec.gamma) + (2 * alpha - 2) * _inv(spec.p) \
            - (2 * alpha - 1) - spec.s
    else:
        raise RegimeError(f"unknown regime {regime!r}")
    return min(2.0 - alpha, margin) / 20.0


def paper_scale_growth_constant() -> float:
    """Smallest c with q 50^q <= c 60^q for all natural q."""
    return max(q * (5.0 / 6.0) ** q for q in range(1, 200))


def paper_scale_check(sched: Schedule, r: float = 1.0, L: float = 1.0,
                      delta: float = 1.0 / 100.0) -> dict:
    """Report which paper-scale largeness constraints the schedule honors.
    Desk schedules are expected to fail these; the report is informational."""
    c = paper_scale_growth_constant()
    a_threshold = (60.0 * 8.0 * 50.0 * r * L * L) ** c
    eps = float(sched.eps)
    return {
        "growth_constant": c,
        "a_threshold": a_threshold,
        "a_ok": sched.a >= a_threshold,
        "b_threshold": 150000.0 / eps,
        "b_ok": sched.b > 150000.0 / eps,
        "beta_ok": sched.beta <= 5.0 / (2.0 * sched.b**2),
        "delta_ok": delta < 1.0 / 80.0,
        "all_ok": bool(sched.a >= a_threshold and sched.b > 150000.0 / eps
                       and sched.beta <= 5.0 / (2.0 * sched.b**2)
                       and delta < 1.0 / 80.0),
    }
