"""Peaks-over-threshold statistics and their centered, scaled normalizations.

Three raw functionals of a path x_1..x_n and a threshold u > 0 (or an
order count k):

    count      sum_t 1{x_t > u}
    hill       sum_t log(x_t / u) 1{x_t > u}
    randhill   sum_{i<=k} log(x_{n-i+1:n} / x_{n-k:n})

Each has a corollary-specific normalization  pref_n * (raw/(n P) - center)
whose limit is a known multiple of the partial-sum limit law: the heavy
prefactor is n^{1-(d+1/alpha)} u_n (quantile-based for the random-k rule),
the light one n^{1/2-d} u_n^{1-beta}.  Centers come from the marginal law:
P = P[X_0 > u] for counts and the conditional log-mean

    E[log(X_0/u) | X_0 > u] = (1/P) int_u^inf P[X_0 > x] / x dx

for Hill sums.  The reduction principle replaces the centered functional
by -G'(u) * sum_t x_t with G'(u) = f(u) (count) or int_u^inf f(x)/x dx
(hill); `reduction_residual` returns the difference between the two
sides, whose L^{r0} norm decays faster than the statistic itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .limit_theory import TheoryReport, ThresholdSchedule, threshold_at
from .linear_process import (
    MarginalLaw,
    marginal_pdf,
    marginal_quantile,
    marginal_tail,
)
from .stable_numerics import NumericError

__all__ = [
    "PotStatistic",
    "CenteringTerms",
    "exceedance_count",
    "hill_sum",
    "order_statistic",
    "hill_random",
    "centering_terms",
    "reduction_residual",
    "normalized_statistic",
    "statistic_plan",
    "statistic_from_plan",
    "residual_plan",
    "residual_from_plan",
    "pot_csv_header",
    "pot_csv_row",
]

COROLLARY_IDS = (
    "HeavyDetCount",
    "HeavyDetHill",
    "HeavyRandHill",
    "LightDetCount",
    "LightDetHill",
    "LightRandHill",
)


# ----------------------------------------------------------------------
# raw functionals
# ----------------------------------------------------------------------

def exceedance_count(xs: np.ndarray, u: float) -> int:
    """Number of strict exceedances of u."""
    return int(np.count_nonzero(np.asarray(xs) > u))


def hill_sum(xs: np.ndarray, u: float) -> float:
    """Deterministic-threshold Hill sum; 0.0 when nothing exceeds u.

    Args:
        xs: path values.
        u: threshold, must be positive (logs of exceedances are taken).
    """
    if not u > 0.0:
        raise ValueError(f"threshold must be positive, got {u}")
    xs = np.asarray(xs, dtype=float)
    exc = xs[xs > u]
    if exc.size == 0:
        return 0.0
    return float(np.sum(np.log(exc / u)))


def order_statistic(xs: np.ndarray, m: int) -> float:
    """m-th smallest value (1-based), via selection rather than a full sort."""
    xs = np.asarray(xs, dtype=float)
    if not 1 <= m <= xs.size:
        raise ValueError(f"order {m} out of range 1..{xs.size}")
    return float(np.partition(xs, m - 1)[m - 1])


def hill_random(xs: np.ndarray, k: int) -> float:
    """Hill sum over the k largest values with the (n-k)-th order statistic as threshold.

    Raises ValueError when the random threshold x_{n-k:n} is not positive,
    since the statistic takes logarithms of ratios against it.
    """
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..n-1, got k={k}, n={n}")
    part = np.partition(xs, n - k - 1)
    thr = part[n - k - 1]
    if not thr > 0.0:
        raise ValueError(f"random threshold x_(n-k:n) = {thr} is not positive")
    return float(np.sum(np.log(part[n - k:] / thr)))


# ----------------------------------------------------------------------
# centering terms
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CenteringTerms:
    """Marginal-law quantities entering the centering and the reduction slope.

    mean_G is E[G(X_0, u)] for the Hill functional, slope_G its u-slope
    int_u^inf f(x)/x dx, conditional_log_mean = mean_G / P[X_0 > u], and
    xi_at_u = u f(u)/P[X_0 > u] (tends to nu for regularly varying tails,
    and grows like u^beta for light ones).
    """

    mean_G: float
    slope_G: float
    conditional_log_mean: float
    xi_at_u: float


_CENTER_MEMO: dict = {}


def _quad_over_threshold(fun, u: float) -> float:
    """int_u^inf fun(x)/x dx via x = u/v, which maps to a smooth [0,1] integral."""
    val, err = integrate.quad(lambda v: fun(u / v) / v, 0.0, 1.0,
                              epsabs=1e-13, epsrel=1e-10, limit=200)
    if not math.isfinite(val):
        raise NumericError(f"threshold integral diverged at u={u}")
    return val


def centering_terms(marginal: MarginalLaw, u: float, nu: float) -> CenteringTerms:
    """Centering quantities for threshold u under the given marginal law.

    Exact marginals are integrated by adaptive quadrature; Monte Carlo
    marginals use sample means below the sample maximum and the fitted
    power tail (with index nu) beyond it.  Results are memoized per
    (marginal, u, nu) since experiment grids revisit the same thresholds.
    """
    if not u > 0.0:
        raise ValueError(f"threshold must be positive, got {u}")
    key = (marginal.cache_key(), float(u), float(nu))
    hit = _CENTER_MEMO.get(key)
    if hit is not None:
        return hit

    p = float(marginal_tail(marginal, u))
    if p <= 0.0:
        raise NumericError(f"P[X > {u}] underflowed to {p}; threshold too extreme")
    if marginal.kind == "MonteCarloEmpirical":
        s = marginal.sample
        if u >= s[-1]:
            # pure power-tail closed forms beyond the sample range
            amp = 0.5 * marginal.tail_amp
            mean_g = amp * u ** (-nu) / nu
            slope_g = amp * nu * u ** (-nu - 1.0) / (nu + 1.0)
            xi = nu
            terms = CenteringTerms(mean_g, slope_g, mean_g / p, xi)
        else:
            exc = s[s > u]
            nsz = s.size
            mean_g = float(np.sum(np.log(exc / u))) / nsz
            slope_g = float(np.sum(1.0 / exc)) / nsz
            fu = float(marginal_pdf(marginal, u))
            terms = CenteringTerms(mean_g, slope_g, mean_g / p, u * fu / p)
    else:
        mean_g = _quad_over_threshold(lambda x: float(marginal_tail(marginal, x)), u)
        slope_g = _quad_over_threshold(lambda x: float(marginal_pdf(marginal, x)), u)
        fu = float(marginal_pdf(marginal, u))
        terms = CenteringTerms(mean_g, slope_g, mean_g / p, u * fu / p)

    if len(_CENTER_MEMO) > 4096:
        _CENTER_MEMO.clear()
    _CENTER_MEMO[key] = terms
    return terms


# ----------------------------------------------------------------------
# reduction principle residual
# ----------------------------------------------------------------------

def residual_plan(n: int, theory: TheoryReport, marginal: MarginalLaw,
                  u: float, kind: str) -> dict:
    """Precompute the per-n constants of the reduction residual.

    kind selects the functional: "count" uses G'(u) = f(u), "hill"
    uses the integrated slope.  The plan also carries the normalizer
    n^{d+1/alpha} G'(u) used to put residuals on the statistic's scale.
    """
    if kind not in ("count", "hill"):
        raise ValueError(f"kind must be 'count' or 'hill', got {kind!r}")
    if marginal.kind == "MonteCarloEmpirical":
        raise ValueError("reduction residuals need an exact marginal law")
    p = float(marginal_tail(marginal, u))
    if kind == "count":
        center = n * p
        slope = float(marginal_pdf(marginal, u))
    else:
        terms = centering_terms(marginal, u, theory.nu)
        center = n * terms.mean_G
        slope = terms.slope_G
    norm = float(n) ** (theory.d + 1.0 / theory.alpha) * slope
    return {"kind": kind, "u": float(u), "center": center, "slope": slope,
            "norm": norm, "n": int(n)}


def residual_from_plan(path: np.ndarray, plan: dict) -> tuple[float, float, float]:
    """(raw residual, residual / (n^{d+1/alpha} G'(u)), u) for one path."""
    path = np.asarray(path, dtype=float)
    if path.size != plan["n"]:
        raise ValueError(f"path length {path.size} != plan n {plan['n']}")
    u = plan["u"]
    if plan["kind"] == "count":
        raw_stat = float(exceedance_count(path, u))
    else:
        raw_stat = hill_sum(path, u)
    resid = (raw_stat - plan["center"]) - plan["slope"] * float(np.sum(path))
    return resid, resid / plan["norm"], u


def reduction_residual(path: np.ndarray, theory: TheoryReport,
                       marginal: MarginalLaw, u: float, kind: str) -> float:
    """Centered POT functional minus its partial-sum reduction, for one path.

    Returns (T_n(u) - E T_n(u)) + G'(u) * S_n, the quantity whose L^{r0}
    norm the reduction principle bounds by n^{kappa0 + o(1)}.
    """
    plan = residual_plan(len(np.asarray(path)), theory, marginal, u, kind)
    return residual_from_plan(path, plan)[0]


# ----------------------------------------------------------------------
# normalized corollary statistics
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PotStatistic:
    """One evaluated corollary statistic.

    u_or_k stores the deterministic threshold for Det kinds and the order
    count k for Rand kinds.  predicted_limit_scale is the corollary's
    multiple of the partial-sum limit law (0 means the statistic is
    degenerate and converges to zero in probability).
    """

    corollary_id: str
    n: int
    u_or_k: float
    raw_value: float
    centered_scaled_value: float
    predicted_limit_scale: float
    admissible: bool


def statistic_plan(corollary_id: str, n: int, theory: TheoryReport,
                   schedule: ThresholdSchedule, marginal: MarginalLaw) -> dict:
    """Precompute all per-(corollary, n) constants of the normalization.

    Experiments evaluate thousands of replications at each n; everything
    that does not depend on the path (threshold, exceedance probability,
    conditional log-mean, quantile, prefactor) is computed once here.
    """
    if corollary_id not in COROLLARY_IDS:
        raise ValueError(f"unknown corollary_id {corollary_id!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    heavy = corollary_id.startswith("Heavy")
    rand = "Rand" in corollary_id
    if heavy and not math.isfinite(theory.nu):
        raise ValueError(f"{corollary_id} needs a finite tail index, got nu={theory.nu}")
    if not heavy and theory.alpha != 2.0:
        raise ValueError(f"{corollary_id} needs a light-tailed setting, got alpha={theory.alpha}")
    if rand != (schedule.kind == "RandomK"):
        raise ValueError(f"schedule kind {schedule.kind!r} does not match {corollary_id}")

    u = threshold_at(schedule, n)
    p = float(marginal_tail(marginal, u))
    if p <= 0.0:
        raise NumericError(f"P[X > u_n] underflowed at n={n}, u={u}")
    nu = theory.nu
    plan = {
        "corollary_id": corollary_id,
        "n": int(n),
        "u": u,
        "p": p,
        "np": n * p,
        "admissible": schedule.admissible,
    }
    if "Hill" in corollary_id:
        plan["clm"] = centering_terms(marginal, u, nu).conditional_log_mean
    if rand:
        k = int(math.floor(n * p))
        plan["k"] = k
        if 1 <= k <= n - 1:
            plan["q"] = float(marginal_quantile(marginal, 1.0 - k / n))
        else:
            plan["q"] = math.nan  # evaluation will reject this k

    if heavy:
        base = float(n) ** (1.0 - (theory.d + 1.0 / theory.alpha))
        plan["pref"] = base * (plan["q"] if rand else u)
        scales = {"HeavyDetCount": nu, "HeavyDetHill": nu * nu / (nu + 1.0),
                  "HeavyRandHill": nu / (nu + 1.0)}
        plan["scale"] = scales[corollary_id]
    else:
        beta = schedule.beta if schedule.beta is not None else 2.0
        base = float(n) ** (0.5 - theory.d)
        plan["pref"] = base * (plan["q"] if rand else u) ** (1.0 - beta)
        plan["scale"] = 0.0 if corollary_id == "LightRandHill" else 1.0
    return plan


def statistic_from_plan(corollary_id: str, path: np.ndarray, plan: dict) -> tuple[float, float, float]:
    """(raw, centered-scaled, u_or_k) for one path under a precomputed plan."""
    path = np.asarray(path, dtype=float)
    if path.size != plan["n"]:
        raise ValueError(f"path length {path.size} != plan n {plan['n']}")
    if corollary_id.endswith("Count"):
        raw = float(exceedance_count(path, plan["u"]))
        value = plan["pref"] * (raw / plan["np"] - 1.0)
        return raw, value, plan["u"]
    if "Rand" in corollary_id:
        raw = hill_random(path, plan["k"])  # raises for out-of-range k
        value = plan["pref"] * (raw / plan["np"] - plan["clm"])
        return raw, value, float(plan["k"])
    raw = hill_sum(path, plan["u"])
    value = plan["pref"] * (raw / plan["np"] - plan["clm"])
    return raw, value, plan["u"]


def normalized_statistic(corollary_id: str, path: np.ndarray, theory: TheoryReport,
                         schedule: ThresholdSchedule, marginal: MarginalLaw) -> PotStatistic:
    """Evaluate one corollary statistic on one path.

    Inadmissible schedules are evaluated anyway and flagged in the result;
    the corollary's convergence guarantee simply does not cover them.
    """
    path = np.asarray(path, dtype=float)
    plan = statistic_plan(corollary_id, path.size, theory, schedule, marginal)
    raw, value, u_or_k = statistic_from_plan(corollary_id, path, plan)
    return PotStatistic(
        corollary_id=corollary_id,
        n=path.size,
        u_or_k=u_or_k,
        raw_value=raw,
        centered_scaled_value=value,
        predicted_limit_scale=plan["scale"],
        admissible=plan["admissible"],
    )


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

def pot_csv_header() -> str:
    return "corollary_id,n,u_or_k,raw,centered_scaled,predicted_scale,admissible"


def pot_csv_row(stat: PotStatistic) -> str:
    return ",".join([
        stat.corollary_id,
        repr(stat.n),
        repr(stat.u_or_k),
        repr(stat.raw_value),
        repr(stat.centered_scaled_value),
        repr(stat.predicted_limit_scale),
        "true" if stat.admissible else "false",
    ])
