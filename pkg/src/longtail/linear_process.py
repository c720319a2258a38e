"""Causal long-memory linear process X_t = sum_{j=0}^{J} a_j eps_{t-j}.

The coefficients follow the pure power law

    a_j = c_a * (j + 1)**(-(1 - d)),      0 < d < 1 - 1/alpha,

so that (j+1)**(1-d) * a_j = c_a holds exactly for every j.  Two
generation kernels are provided (direct and FFT convolution), both using
n + J innovations drawn once from the seed, so X_1 already carries the
full truncated kernel and the truncated process is exactly stationary.

Closed-form marginal and partial-sum laws exist for Gaussian and
symmetric-stable innovations; Student-t marginals are Monte Carlo only.
Power sums of coefficients and of the partial-sum weights

    b_{n,k} = sum_{t=max(1,k)}^{n} a_{t-k},   1 - J <= k <= n,

are evaluated either from materialized arrays or, for horizons far beyond
memory, from generalized harmonic numbers H_m(s) = sum_{i<=m} i^{-s}
continued by an Euler-Maclaurin expansion (exact cumulative sums are used
up to a switch point, the asymptotic expansion beyond it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, special, stats

from .innovations import InnovationSpec, moment_index, sample_innovations, tail_constant
from .stable_numerics import NumericError, StableLaw, sas_pdf, sas_quantile, sas_sf

__all__ = [
    "ProcessSpec",
    "MarginalLaw",
    "coefficients",
    "truncation_horizon",
    "simulate_path",
    "partial_sum_weights",
    "partial_sum_power_sum",
    "partial_sum_power_sum_infinite",
    "partial_sum_remainder_scale",
    "partial_sum_sample",
    "partial_sum_sample_infinite",
    "marginal_law",
    "marginal_tail",
    "marginal_pdf",
    "marginal_quantile",
    "path_to_csv",
]

# exact cumulative harmonic sums are kept up to this index; Euler-Maclaurin beyond
_H_SWITCH = 20000


@dataclass(frozen=True)
class ProcessSpec:
    """Long-memory process parameters.

    Args:
        innovation: innovation distribution (must be samplable, nu > 1).
        d: memory parameter, 0 < d < 1 - 1/alpha with alpha = min(nu, 2).
        ca: nonzero coefficient constant c_a.
        J: truncation horizon (>= 0; 0 degenerates to a_0 * eps_t).
    """

    innovation: InnovationSpec
    d: float
    ca: float = 1.0
    J: int = 1

    def __post_init__(self) -> None:
        alpha = min(moment_index(self.innovation), 2.0)
        upper = 1.0 - 1.0 / alpha
        if not (0.0 < self.d < upper):
            raise ValueError(
                f"d must lie in (0, 1 - 1/alpha) = (0, {upper:.6g}); got d={self.d} "
                f"with alpha={alpha}"
            )
        if self.ca == 0.0 or not math.isfinite(self.ca):
            raise ValueError("c_a must be nonzero and finite")
        if int(self.J) != self.J or self.J < 0:
            raise ValueError(f"J must be a nonnegative integer, got {self.J}")

    @property
    def alpha(self) -> float:
        return min(moment_index(self.innovation), 2.0)


# ----------------------------------------------------------------------
# generalized harmonic numbers H_m(s) = sum_{i=1}^m i^(-s)
# ----------------------------------------------------------------------

def _zeta_below_one(s: float, terms: int = _H_SWITCH) -> float:
    # zeta(s) for 0 < s < 1 by direct summation minus the Euler-Maclaurin tail
    i = np.arange(1, terms + 1, dtype=np.float64)
    direct = float(np.sum(i ** (-s)))
    m = float(terms)
    corr = (
        m ** (1.0 - s) / (1.0 - s)
        + 0.5 * m ** (-s)
        - (s / 12.0) * m ** (-s - 1.0)
        + (s * (s + 1.0) * (s + 2.0) / 720.0) * m ** (-s - 3.0)
    )
    return direct - corr


def _harmonic_table(s: float) -> tuple[float, np.ndarray]:
    cache = _harmonic_table.__dict__.setdefault("cache", {})
    if s not in cache:
        z = float(special.zeta(s)) if s > 1.0 else _zeta_below_one(s)
        cum = np.cumsum(np.arange(1, _H_SWITCH + 1, dtype=np.float64) ** (-s))
        cache[s] = (z, cum)
    return cache[s]


def _gen_harmonic(m, s: float) -> np.ndarray:
    """H_m(s) for integer m >= 0 (array-valued); requires s > 0, s != 1."""
    z, cum = _harmonic_table(s)
    m = np.asarray(m, dtype=np.int64)
    mf = m.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        em = (
            z
            + mf ** (1.0 - s) / (1.0 - s)
            + 0.5 * mf ** (-s)
            - (s / 12.0) * mf ** (-s - 1.0)
            + (s * (s + 1.0) * (s + 2.0) / 720.0) * mf ** (-s - 3.0)
        )
    small = m <= _H_SWITCH
    idx = np.clip(m, 1, _H_SWITCH) - 1
    out = np.where(small, np.where(m > 0, cum[idx], 0.0), em)
    return out


# ----------------------------------------------------------------------
# coefficients and truncation
# ----------------------------------------------------------------------

def coefficients(spec: ProcessSpec) -> np.ndarray:
    """Kernel a_0..a_J with a_j = c_a (j+1)^{-(1-d)}."""
    j = np.arange(1, spec.J + 2, dtype=np.float64)
    return spec.ca * j ** (-(1.0 - spec.d))


def truncation_horizon(d: float, alpha: float, rel_tol: float = 1e-3) -> int:
    """Smallest power-of-two J with discarded tail mass below rel_tol.

    The criterion is on the alpha-th power sums of the kernel:
    sum_{j>J} |a_j|^alpha <= rel_tol * sum_{j<=J} |a_j|^alpha, evaluated
    from exact partial sums (Riemann-zeta continuation, so horizons far
    beyond addressable memory cost nothing).

    Raises if (1-d)*alpha <= 1, where the tail series diverges.
    """
    if not (0.0 < rel_tol < 1.0):
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    s = (1.0 - d) * alpha
    if s <= 1.0:
        raise ValueError(
            f"(1-d)*alpha = {s:.6g} <= 1: coefficient power series diverges "
            "(d violates the admissible interval)"
        )
    z = float(special.zeta(s))
    J = 1
    while J < 2**62:
        head = float(_gen_harmonic(J + 1, s))
        if z - head <= rel_tol * head:
            return J
        J *= 2
    raise NumericError("truncation_horizon failed to terminate")


# ----------------------------------------------------------------------
# path generation
# ----------------------------------------------------------------------

def simulate_path(spec: ProcessSpec, n: int, seed: int, method: str = "fft") -> np.ndarray:
    """Simulate X_1..X_n; `direct` and `fft` agree to 1e-9 relative.

    Draws n + J innovations eps_{1-J}..eps_n once from the seed, then
    convolves with the kernel.  `fft` runs in O((n+J) log (n+J)); `direct`
    is the O(nJ) reference kernel.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if method not in ("direct", "fft"):
        raise ValueError(f"method must be 'direct' or 'fft', got {method!r}")
    # eps[m] = eps_{m+1-J}, so convolve(eps, a, 'valid')[i] = sum_j a_j eps_{i+1-j} = X_{i+1}
    eps = sample_innovations(spec.innovation, n + spec.J, seed)
    a = coefficients(spec)
    if method == "direct":
        out = np.convolve(eps, a, mode="valid")
    else:
        out = signal.fftconvolve(eps, a, mode="valid")
    return out


def partial_sum_weights(spec: ProcessSpec, n: int) -> np.ndarray:
    """Weights b_{n,k} with sum_{t=1}^n X_t = sum_k b_{n,k} eps_k.

    Returned in innovation order k = 1-J .. n (matching the innovation
    array drawn by simulate_path), b_{n,k} = sum_{t=max(1,k)}^{n} a_{t-k}.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = coefficients(spec)
    csum = np.concatenate([[0.0], np.cumsum(a)])  # csum[m] = a_0 + .. + a_{m-1}
    k = np.arange(1 - spec.J, n + 1, dtype=np.int64)
    hi = np.minimum(n - k, spec.J) + 1
    lo = np.maximum(1 - k, 0)
    return csum[hi] - csum[lo]


def partial_sum_power_sum(spec: ProcessSpec, n: int, p: float | None = None) -> float:
    """sum_k |b_{n,k}|^p without materializing the weights.

    Defaults p to alpha = min(nu, 2).  Uses the harmonic-number identity
    b_{n,k} = c_a (H_{q}(1-d) - H_{m}(1-d)) and streams over the horizon
    in chunks, so J in the billions is workable.  Agrees with the
    materialized route to ~1e-12 relative on overlapping sizes.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if p is None:
        p = spec.alpha
    s = 1.0 - spec.d
    J = spec.J
    total = 0.0
    # k in [1, n]: b/c_a = H_{min(n-k, J) + 1}
    q_top = min(n, J + 1)
    chunk = 1 << 22
    for start in range(1, q_top + 1, chunk):
        q = np.arange(start, min(q_top, start + chunk - 1) + 1, dtype=np.int64)
        total += float(np.sum(_gen_harmonic(q, s) ** p))
    if n > J + 1:
        total += (n - J - 1) * float(_gen_harmonic(J + 1, s) ** p)
    # k <= 0, M = 1 - k in [1, J]: b/c_a = H_{min(n+M-1, J)+1} - H_M
    m_split = min(J, max(0, J - n + 1))
    h_top = float(_gen_harmonic(J + 1, s))
    for start in range(1, m_split + 1, chunk):
        m = np.arange(start, min(m_split, start + chunk - 1) + 1, dtype=np.int64)
        diff = _gen_harmonic(n + m, s) - _gen_harmonic(m, s)
        total += float(np.sum(diff**p))
    for start in range(m_split + 1, J + 1, chunk):
        m = np.arange(start, min(J, start + chunk - 1) + 1, dtype=np.int64)
        total += float(np.sum((h_top - _gen_harmonic(m, s)) ** p))
    return abs(spec.ca) ** p * total


def partial_sum_power_sum_infinite(d: float, ca: float, n: int, p: float) -> float:
    """sum_k |b_{n,k}|^p for the untruncated kernel (horizon J = infinity).

    The weight sum splits as sum_{m<=n} H_m(1-d)^p plus the lag tail
    sum_{M>=1} (H_{n+M} - H_M)^p.  The lag tail is summed exactly up to
    M0 = max(64 n, 2^16) and continued by Euler-Maclaurin: the summand
    extends to the smooth function phi(x)^p built from the continuous
    continuation of H, whose integral over [M0, inf) is evaluated by
    adaptive quadrature under x -> M0/x.  Requires (1-d) p > 1, else the
    tail diverges.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < d < 1.0):
        raise ValueError(f"d must lie in (0, 1), got {d}")
    s = 1.0 - d
    if s * p <= 1.0:
        raise ValueError(f"(1-d)*p = {s * p:.6g} <= 1: infinite-horizon sum diverges")
    chunk = 1 << 22
    total = 0.0
    for start in range(1, n + 1, chunk):
        m = np.arange(start, min(n, start + chunk - 1) + 1, dtype=np.int64)
        total += float(np.sum(_gen_harmonic(m, s) ** p))
    m0 = max(64 * n, 1 << 16)
    for start in range(1, m0 + 1, chunk):
        m = np.arange(start, min(m0, start + chunk - 1) + 1, dtype=np.int64)
        total += float(np.sum((_gen_harmonic(n + m, s) - _gen_harmonic(m, s)) ** p))

    c3 = s * (s + 1.0) * (s + 2.0) / 720.0

    def phi(x: float) -> float:
        y = x + n
        return (
            (y**d - x**d) / d
            + 0.5 * (y**-s - x**-s)
            - (s / 12.0) * (y ** (-s - 1.0) - x ** (-s - 1.0))
            + c3 * (y ** (-s - 3.0) - x ** (-s - 3.0))
        )

    # numeric on a log scale while x stays far from the cancellation floor,
    # then the closed-form power-law remainder (phi ~ n x^{d-1} to O(n/x))
    x1 = m0 * 1e6
    span = math.log(x1 / m0)
    num, err = integrate.quad(
        lambda t: phi(m0 * math.exp(t)) ** p * m0 * math.exp(t), 0.0, span,
        epsabs=0.0, epsrel=1e-10, limit=300,
    )
    far = float(n) ** p * x1 ** (1.0 - s * p) / (s * p - 1.0)
    integral = num + far
    if err > 1e-7 * (total + abs(integral)) + 1e-12:
        raise NumericError(f"horizon tail quadrature did not converge: err={err:.2e}")
    h = m0 * 1e-6
    deriv = (phi(m0 + h) ** p - phi(m0 - h) ** p) / (2.0 * h)
    total += integral - 0.5 * phi(float(m0)) ** p - deriv / 12.0
    return abs(ca) ** p * total


def partial_sum_sample(
    spec: ProcessSpec, n: int, seed: int, weights: np.ndarray | None = None
) -> float:
    """One draw of sum_{t=1}^n X_t via the weight representation.

    Equal in law -- and, innovation stream for innovation stream, equal up
    to floating-point reassociation -- to sum(simulate_path(spec, n, seed)).
    Pass precomputed `weights` when replicating to avoid rebuilding them.
    """
    if weights is None:
        weights = partial_sum_weights(spec, n)
    eps = sample_innovations(spec.innovation, n + spec.J, seed)
    return float(weights @ eps)


def partial_sum_remainder_scale(spec: ProcessSpec, n: int) -> float:
    """Weight-norm of the pre-window lag tail, (sum_{k <= -J} |b_{n,k}|^alpha)^{1/alpha}.

    This is the multiplier that turns one extra innovation draw into the
    exact law of the tail sum left out by a finite horizon J; see
    partial_sum_sample_infinite.
    """
    p = spec.alpha
    rem = partial_sum_power_sum_infinite(spec.d, spec.ca, n, p) - partial_sum_power_sum(
        spec, n, p
    )
    # roundoff can leave a tiny negative once J is large enough to cover everything
    return max(rem, 0.0) ** (1.0 / p)


def partial_sum_sample_infinite(
    spec: ProcessSpec,
    n: int,
    seed: int,
    weights: np.ndarray | None = None,
    remainder_scale: float | None = None,
) -> float:
    """One draw of sum_{t=1}^n X_t for the untruncated (J = infinity) process.

    Exact in law, not an approximation: the innovations older than the
    simulation window enter only through the independent lump
    sum_{k <= -J} b_{n,k} eps_k, and for the closed-under-convolution
    families (Gaussian, SymmetricStable) that lump is again a single
    family draw scaled by the lag-tail weight norm.  The horizon J of
    `spec` therefore only sets how much of the sum is resolved innovation
    by innovation -- the sampled law does not depend on it.

    Pass precomputed `weights` (partial_sum_weights) and
    `remainder_scale` (partial_sum_remainder_scale) when replicating.
    """
    family = spec.innovation.family
    if family not in ("Gaussian", "SymmetricStable"):
        raise ValueError(
            f"exact infinite-horizon sampling needs a convolution-stable family, got {family!r}"
        )
    if weights is None:
        weights = partial_sum_weights(spec, n)
    if remainder_scale is None:
        remainder_scale = partial_sum_remainder_scale(spec, n)
    eps = sample_innovations(spec.innovation, n + spec.J + 1, seed)
    return float(remainder_scale * eps[0] + weights @ eps[1:])


# ----------------------------------------------------------------------
# marginal law of X_0
# ----------------------------------------------------------------------

@dataclass(eq=False)
class MarginalLaw:
    """Stationary law of X_0 = sum_j a_j eps_{-j}.

    kind is one of GaussianExact (params: variance), StableExact (params:
    alpha and scale), or MonteCarloEmpirical (params: stored sorted sample
    plus the tail amplitude used beyond the sample range).  nu is the tail
    (moment) index of the marginal; tail_amp is A_X in
    P[X > x] ~ (A_X / 2) x^{-nu} for the heavy kinds.
    """

    kind: str
    nu: float
    variance: float | None = None
    alpha: float | None = None
    scale: float | None = None
    sample: np.ndarray | None = None
    tail_amp: float | None = None
    _kde: object = field(default=None, repr=False)

    def cache_key(self):
        """Hashable identity for memoizing quadratures against this law."""
        if self.kind == "MonteCarloEmpirical":
            return (self.kind, self.nu, id(self.sample))
        return (self.kind, self.nu, self.variance, self.alpha, self.scale)


def marginal_law(spec: ProcessSpec, mc_size: int = 100000, seed: int = 0) -> MarginalLaw:
    """Marginal law of X_0: closed form where it exists, Monte Carlo otherwise.

    Gaussian innovations give N(0, var_eps * sum a_j^2); symmetric-stable
    innovations give SaS with scale scale_eps * (sum |a_j|^nu)^{1/nu}
    (stable closure under linear combinations).  Student-t innovations
    have no closed-form marginal: a sorted Monte Carlo sample of X_0 of
    size `mc_size` is stored (cost scales with mc_size * (J+1)).
    """
    innov = spec.innovation
    s_abs = abs(spec.ca)
    if innov.family == "Gaussian":
        h = float(_gen_harmonic(spec.J + 1, 2.0 * (1.0 - spec.d)))
        return MarginalLaw(
            kind="GaussianExact", nu=math.inf, variance=innov.scale**2 * spec.ca**2 * h
        )
    if innov.family == "SymmetricStable":
        nu = innov.nu
        h = float(_gen_harmonic(spec.J + 1, (1.0 - spec.d) * nu))
        scale = innov.scale * s_abs * h ** (1.0 / nu)
        amp = 2.0 * scale**nu * math.sin(math.pi * nu / 2.0) * math.gamma(nu) / math.pi
        return MarginalLaw(kind="StableExact", nu=nu, alpha=nu, scale=scale, tail_amp=amp)
    # Student-t: Monte Carlo marginal
    nu = innov.nu
    budget = mc_size * (spec.J + 1)
    if budget > int(2e9):
        raise NumericError(
            f"Monte Carlo marginal needs {budget:.2e} innovation draws; "
            "reduce J or mc_size"
        )
    rng = np.random.default_rng(seed)
    a = coefficients(spec)
    rows = max(1, int(4e6 // (spec.J + 1)))
    parts = []
    done = 0
    while done < mc_size:
        b = min(rows, mc_size - done)
        parts.append(innov.scale * rng.standard_t(nu, (b, spec.J + 1)) @ a)
        done += b
    sample = np.sort(np.concatenate(parts))
    h = float(_gen_harmonic(spec.J + 1, (1.0 - spec.d) * nu))
    amp = tail_constant(innov) * s_abs**nu * h
    return MarginalLaw(kind="MonteCarloEmpirical", nu=nu, sample=sample, tail_amp=amp)


def marginal_tail(law: MarginalLaw, x) -> float | np.ndarray:
    """P[X_0 > x]."""
    if law.kind == "GaussianExact":
        return stats.norm.sf(x, scale=math.sqrt(law.variance))
    if law.kind == "StableExact":
        return sas_sf(StableLaw(law.alpha, law.scale), x)
    s = law.sample
    xs = np.asarray(x, dtype=float)
    ecdf = (s.size - np.searchsorted(s, xs, side="right")) / s.size
    # beyond the observed range, continue with the regularly varying tail
    beyond = xs > s[-1]
    safe = np.where(beyond, xs, 1.0)
    out = np.where(beyond, 0.5 * law.tail_amp * safe ** (-law.nu), ecdf)
    return float(out) if np.isscalar(x) else out


def marginal_pdf(law: MarginalLaw, x) -> float | np.ndarray:
    """Density of X_0 (Gaussian/stable exact; KDE for the empirical kind, rough)."""
    if law.kind == "GaussianExact":
        return stats.norm.pdf(x, scale=math.sqrt(law.variance))
    if law.kind == "StableExact":
        return sas_pdf(StableLaw(law.alpha, law.scale), x)
    if law._kde is None:
        sub = law.sample[:: max(1, law.sample.size // 20000)]
        law._kde = stats.gaussian_kde(sub)
    out = law._kde(np.atleast_1d(np.asarray(x, dtype=float)))
    return float(out[0]) if np.isscalar(x) else out


def marginal_quantile(law: MarginalLaw, p: float) -> float:
    """Quantile q_{X_0}(p)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if law.kind == "GaussianExact":
        return float(stats.norm.ppf(p, scale=math.sqrt(law.variance)))
    if law.kind == "StableExact":
        return sas_quantile(StableLaw(law.alpha, law.scale), p)
    return float(np.quantile(law.sample, p))


def path_to_csv(xs: np.ndarray, file) -> None:
    """Write a simulated path as a single-column CSV with header row `x`.

    Args:
        xs: path values.
        file: path-like or open text file.
    """
    xs = np.asarray(xs, dtype=float)
    lines = "x\n" + "\n".join(repr(float(v)) for v in xs) + "\n"
    if hasattr(file, "write"):
        file.write(lines)
    else:
        with open(file, "w", newline="\n") as fh:
            fh.write(lines)
