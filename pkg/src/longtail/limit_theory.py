"""Closed forms for the limit-law constants and admissible threshold schedules.

The residual exponent of the reduction principle is

    kappa(gamma, r) = 1 + 1/r - (1 - d)(1 + gamma),

minimized over the admissible window 1/(1-d) < r < alpha,
0 < gamma < min{ d/(1-d), 1 - 1/(r(1-d)), alpha/r - 1 }.  The constrained
minimum (gamma0, r0, kappa0) has two regimes:

    RegimeA  (1/((1-d)(1-2d)) < alpha):
        gamma0 = d/(1-d),  r0 = alpha(1-d),  kappa0 = 1/(alpha(1-d))
    RegimeB  (otherwise):
        gamma0 = (alpha(1-d)-1)/(alpha(1-d)+1),
        r0     = (1/(1-d) + alpha)/2,
        kappa0 = d + (1-d)(3 - alpha(1-d))/(alpha(1-d)+1)

Partial sums n^{-(d+1/alpha)} sum X_t converge to SaS(eta) for alpha < 2
and to N(0, sigma^2) for alpha = 2, with

    sigma^2 = c_a^2 var_eps B(1-2d, d) / (d (2d+1)),
    eta     = (c_a/d) (A Gamma(2-alpha) cos(pi alpha/2) / (1-alpha))^(1/alpha)
              * (1/(d alpha + 1) + int_0^inf ((1+w)^d - w^d)^alpha dw)^(1/alpha).

Threshold schedules u_n (heavy power rule, light logarithmic rule, and the
random-k rule k = floor(n P[X_0 > u_n])) carry an explicit `admissible`
flag rather than clamping: at desk scale admissible thresholds grow so
slowly that experiments need a prefactor, and the flag keeps the
asymptotic bookkeeping honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .innovations import InnovationSpec, moment_index, tail_constant
from .linear_process import MarginalLaw, marginal_tail
from .stable_numerics import NumericError, StableLaw, beta_function

__all__ = [
    "TheoryReport",
    "ThresholdSchedule",
    "kappa",
    "optimal_exponents",
    "gamma_hard_bound",
    "limit_variance",
    "limit_scale",
    "clt_rate",
    "theory_report",
    "make_schedule",
    "threshold_at",
    "k_at",
]

_REPORT_KEYS = ("alpha", "d", "regime", "gamma0", "r0", "kappa0", "rate_exponent", "eta_or_sigma2")


def kappa(gamma: float, r: float, d: float) -> float:
    """Residual exponent kappa(gamma, r) = 1 + 1/r - (1-d)(1+gamma)."""
    if r <= 0.0:
        raise ValueError(f"r must be positive, got {r}")
    return 1.0 + 1.0 / r - (1.0 - d) * (1.0 + gamma)


def _check_alpha_d(alpha: float, d: float) -> None:
    if not (1.0 < alpha <= 2.0):
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    upper = 1.0 - 1.0 / alpha
    if not (0.0 < d < upper):
        raise ValueError(f"d must lie in (0, {upper:.6g}) for alpha={alpha}, got {d}")


def optimal_exponents(alpha: float, d: float) -> tuple[float, float, float, str]:
    """Constrained minimizer (gamma0, r0, kappa0) and its regime label.

    RegimeA applies when 1/((1-d)(1-2d)) < alpha; the two closed forms meet
    continuously on the boundary surface alpha(1-d)(1-2d) = 1.
    """
    _check_alpha_d(alpha, d)
    a1 = alpha * (1.0 - d)
    if alpha * (1.0 - d) * (1.0 - 2.0 * d) > 1.0:
        gamma0 = d / (1.0 - d)
        r0 = a1
        kappa0 = 1.0 / a1
        regime = "RegimeA"
    else:
        gamma0 = (a1 - 1.0) / (a1 + 1.0)
        r0 = (1.0 / (1.0 - d) + alpha) / 2.0
        kappa0 = d + (1.0 - d) * (3.0 - a1) / (a1 + 1.0)
        regime = "RegimeB"
    return gamma0, r0, kappa0, regime


def gamma_hard_bound(alpha: float) -> tuple[float, float]:
    """Largest achievable gamma bound and its maximizing memory parameter d*.

    gamma_max = 8(1-1/alpha) / ((1+s)(3+s)),  d* = (3-s)/4,
    with s = sqrt(9 - 8(1-1/alpha)).  At alpha=2: d* = (3-sqrt 5)/4 ~ 0.191
    and gamma_max = sqrt(5) - 2.
    """
    if not (1.0 < alpha <= 2.0):
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    y = 1.0 - 1.0 / alpha
    s = math.sqrt(9.0 - 8.0 * y)
    gamma_max = 8.0 * y / ((1.0 + s) * (3.0 + s))
    d_star = (3.0 - s) / 4.0
    return gamma_max, d_star


def limit_variance(c_a: float, var_eps: float, d: float) -> float:
    """Partial-sum limit variance sigma^2 = c_a^2 var_eps B(1-2d, d)/(d(2d+1))."""
    if var_eps <= 0.0:
        raise ValueError(f"var_eps must be positive, got {var_eps}")
    if not (0.0 < d < 0.5):
        raise ValueError(f"d must lie in (0, 1/2), got {d}")
    return c_a**2 * var_eps * beta_function(1.0 - 2.0 * d, d) / (d * (2.0 * d + 1.0))


def limit_scale(c_a: float, A: float, alpha: float, d: float, quad_tol: float = 1e-10) -> float:
    """Stable limit scale eta for alpha in (1, 2).

    The kernel integral int_{-inf}^{1} ((1-v)_+^d - (-v)_+^d)^alpha dv is
    split into the closed piece int_0^1 (1-v)^{d alpha} dv = 1/(d alpha + 1)
    and the tail int_0^inf ((1+w)^d - w^d)^alpha dw; the tail is itself
    integrated on [0,1] directly and on [1,inf) through w -> 1/w, which
    maps it to an integrable algebraic endpoint singularity.  Finiteness
    holds precisely because (1-d) alpha > 1.
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError(f"alpha must lie in (1, 2) for the stable branch, got {alpha}")
    if not (0.0 < d < 1.0 - 1.0 / alpha):
        raise ValueError(f"d must lie in (0, 1 - 1/alpha), got {d}")
    if A <= 0.0:
        raise ValueError(f"tail constant A must be positive, got {A}")

    factor = A * math.gamma(2.0 - alpha) * math.cos(math.pi * alpha / 2.0) / (1.0 - alpha)
    # cos < 0 and 1 - alpha < 0 on (1,2), so the ratio is positive
    if factor <= 0.0:
        raise NumericError(f"tail-constant factor not positive: {factor}")

    def head(w: float) -> float:
        return ((1.0 + w) ** d - w**d) ** alpha

    def tail(v: float) -> float:  # w = 1/v
        return v ** (-d * alpha - 2.0) * ((1.0 + v) ** d - 1.0) ** alpha

    i1, e1 = integrate.quad(head, 0.0, 1.0, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    i2, e2 = integrate.quad(tail, 0.0, 1.0, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    if e1 + e2 > max(100.0 * quad_tol, 1e-8 * (i1 + i2)):
        raise NumericError(f"kernel integral did not converge: err={e1 + e2:.2e}")
    kernel = 1.0 / (d * alpha + 1.0) + i1 + i2
    eta = (abs(c_a) / d) * factor ** (1.0 / alpha) * kernel ** (1.0 / alpha)
    if not (eta > 0.0 and math.isfinite(eta)):
        raise NumericError(f"limit scale not positive/finite: {eta}")
    return eta


def clt_rate(alpha: float, d: float) -> float:
    """Exponent 1 - (d + 1/alpha) of the second central limit theorem prefactor."""
    _check_alpha_d(alpha, d)
    return 1.0 - (d + 1.0 / alpha)


# ----------------------------------------------------------------------
# theory report
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TheoryReport:
    """All limit-theorem constants for one (innovation, d, c_a) setting.

    `nu` is the innovation moment index (inf for Gaussian) and
    alpha = min(nu, 2) the stability index of the partial-sum limit; the
    limit law itself is SaS(eta) when alpha < 2 and N(0, sigma2) when
    alpha = 2.
    """

    alpha: float
    d: float
    nu: float
    regime: str
    gamma0: float
    r0: float
    kappa0: float
    rate_exponent: float
    gamma_hard_bound: float
    d_star: float
    eta: float | None = None
    sigma2: float | None = None

    @property
    def eta_or_sigma2(self) -> float:
        return self.sigma2 if self.alpha == 2.0 else self.eta

    def limit_law(self) -> StableLaw:
        """Predicted partial-sum limit as a StableLaw (alpha=2 means N(0, 2 eta^2))."""
        if self.alpha == 2.0:
            return StableLaw(2.0, math.sqrt(self.sigma2 / 2.0))
        return StableLaw(self.alpha, self.eta)

    def to_dict(self) -> dict:
        vals = dict(
            alpha=self.alpha,
            d=self.d,
            regime=self.regime,
            gamma0=self.gamma0,
            r0=self.r0,
            kappa0=self.kappa0,
            rate_exponent=self.rate_exponent,
            eta_or_sigma2=self.eta_or_sigma2,
        )
        return {k: vals[k] for k in _REPORT_KEYS}

    def to_text(self) -> str:
        lines = []
        for key, val in self.to_dict().items():
            lines.append(f"{key} = {val!r}" if isinstance(val, str) else f"{key} = {val!r}")
        return "\n".join(lines) + "\n"


def theory_report(
    d: float,
    *,
    innovation: InnovationSpec | None = None,
    alpha: float | None = None,
    c_a: float = 1.0,
    A: float | None = None,
    var_eps: float | None = None,
    quad_tol: float = 1e-10,
) -> TheoryReport:
    """Assemble a TheoryReport from an innovation spec or bare (alpha, d).

    With an innovation spec, nu, A and var_eps are derived from it (nu = 2
    Student-t is rejected: its variance diverges and the alpha = 2 limit
    needs a finite one).  With a bare alpha, a heavy law defaults to the
    unit-scale symmetric-stable tail constant unless A is supplied, and a
    light law to var_eps = 1.
    """
    if innovation is not None:
        nu = moment_index(innovation)
        if nu == 2.0:
            raise ValueError("nu = 2 sits on the infinite-variance boundary; not supported")
        alpha = min(nu, 2.0)
        if alpha < 2.0:
            A = tail_constant(innovation)
        elif innovation.family == "Gaussian":
            var_eps = innovation.scale**2
        else:  # Student-t with nu > 2
            var_eps = innovation.scale**2 * nu / (nu - 2.0)
    else:
        if alpha is None:
            raise ValueError("either innovation or alpha must be given")
        nu = math.inf if alpha == 2.0 else alpha
    _check_alpha_d(alpha, d)
    gamma0, r0, kappa0, regime = optimal_exponents(alpha, d)
    gmax, dstar = gamma_hard_bound(alpha)
    eta = sigma2 = None
    if alpha == 2.0:
        sigma2 = limit_variance(c_a, 1.0 if var_eps is None else var_eps, d)
    else:
        if A is None:
            A = tail_constant(InnovationSpec("SymmetricStable", nu=alpha, scale=1.0))
        eta = limit_scale(c_a, A, alpha, d, quad_tol)
    return TheoryReport(
        alpha=alpha,
        d=d,
        nu=nu,
        regime=regime,
        gamma0=gamma0,
        r0=r0,
        kappa0=kappa0,
        rate_exponent=clt_rate(alpha, d),
        gamma_hard_bound=gmax,
        d_star=dstar,
        eta=eta,
        sigma2=sigma2,
    )


# ----------------------------------------------------------------------
# threshold schedules
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdSchedule:
    """Deterministic threshold rule u_n, or the random rule k(n) wrapping one.

    HeavyPower: u_n = c n^theta.  LightLog: u_n = c (beta log(n) coef)^{1/beta}
    with coef = 1/2 + d - kappa0 - delta.  RandomK: k(n) = floor(n P[X_0 > u_n])
    where u_n comes from the deterministic `sub` schedule.  `admissible`
    records whether the rule satisfies the corollary's growth condition
    (the prefactor is folded into the effective delta for that check).
    """

    kind: str
    delta: float
    c: float = 1.0
    theta: float | None = None
    beta: float | None = None
    coef: float | None = None
    admissible: bool = True
    sub: "ThresholdSchedule | None" = None


def make_schedule(
    kind: str,
    theory: TheoryReport,
    delta: float | None = None,
    c: float = 1.0,
    beta: float | None = None,
) -> ThresholdSchedule:
    """Build a threshold schedule with an explicit admissibility flag.

    delta defaults to 10% of the available margin (d + 1/alpha - kappa0
    for heavy schedules, 1/2 + d - kappa0 for light ones); HeavyPower
    additionally bakes a factor-2 safety margin into its exponent,
    theta = (d + 1/alpha - kappa0 - 2 delta)/(nu + 1).
    Inadmissible parameter choices are flagged, not rejected; a
    nonpositive margin (impossible under the optimality result) raises.
    """
    if kind == "RandomK":
        sub_kind = "HeavyPower" if theory.alpha < 2.0 else "LightLog"
        sub = make_schedule(sub_kind, theory, delta=delta, c=c, beta=beta)
        return ThresholdSchedule(
            kind="RandomK", delta=sub.delta, c=c, beta=sub.beta, admissible=sub.admissible, sub=sub
        )
    if kind == "HeavyPower":
        if not math.isfinite(theory.nu):
            raise ValueError("HeavyPower schedules require a finite tail index nu")
        margin = theory.d + 1.0 / theory.alpha - theory.kappa0
        if margin <= 0.0:
            raise NumericError(
                f"d + 1/alpha - kappa0 = {margin:.6g} <= 0 contradicts the optimality bound"
            )
        if delta is None:
            delta = 0.1 * margin
        theta = (margin - 2.0 * delta) / (theory.nu + 1.0)
        admissible = 0.0 < theta < margin / (theory.nu + 1.0)
        return ThresholdSchedule(
            kind="HeavyPower", delta=delta, c=c, theta=theta, admissible=admissible
        )
    if kind == "LightLog":
        if beta is None:
            beta = 2.0
        if beta <= 0.0:
            raise ValueError(f"beta must be positive, got {beta}")
        margin = 0.5 + theory.d - theory.kappa0
        if margin <= 0.0:
            raise NumericError(
                f"1/2 + d - kappa0 = {margin:.6g} <= 0 contradicts the optimality bound"
            )
        if delta is None:
            delta = 0.1 * margin
        coef = margin - delta
        eff = c**beta * coef  # prefactor folded into the effective coefficient
        admissible = 0.0 < eff < margin
        return ThresholdSchedule(
            kind="LightLog", delta=delta, c=c, beta=beta, coef=coef, admissible=admissible
        )
    raise ValueError(f"unknown schedule kind {kind!r}")


def threshold_at(schedule: ThresholdSchedule, n: int) -> float:
    """Deterministic threshold u_n of the schedule (sub-schedule for RandomK)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if schedule.kind == "RandomK":
        return threshold_at(schedule.sub, n)
    if schedule.kind == "HeavyPower":
        return schedule.c * float(n) ** schedule.theta
    if schedule.coef <= 0.0:
        raise NumericError("light schedule coefficient is nonpositive; no real threshold")
    return schedule.c * (schedule.beta * math.log(n) * schedule.coef) ** (1.0 / schedule.beta)


def k_at(schedule: ThresholdSchedule, n: int, marginal: MarginalLaw) -> int:
    """Random-threshold order count k = floor(n P[X_0 > u_n])."""
    u = threshold_at(schedule, n)
    return int(math.floor(n * float(marginal_tail(marginal, u))))
