"""Innovation distributions for the linear process.

Three symmetric families are supported, each parameterized by a tail
(moment) index nu and a scale:

* ``Gaussian``        -- nu = inf, scale = standard deviation;
* ``SymmetricStable`` -- 1 < nu < 2, scale = stable scale (cf exp(-|scale*t|^nu));
* ``StudentT``        -- nu > 1 degrees of freedom, scale multiplies the
  standard t variate.

For the heavy families the upper tail is regularly varying,
P[eps > x] ~ (A/2) x^{-nu}, and the constant A is derived in closed form
from (nu, scale); it is exposed read-only via :func:`tail_constant`.

The Cauchy endpoint nu = 1 is accepted when *constructing* a
SymmetricStable spec so that its arctan tail can be evaluated, but
sampling and process construction require nu > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .stable_numerics import StableLaw, sas_sf, standard_sas_draws

__all__ = [
    "InnovationSpec",
    "sample_innovations",
    "innovation_tail",
    "moment_index",
    "tail_constant",
]

_FAMILIES = ("Gaussian", "SymmetricStable", "StudentT")


@dataclass(frozen=True)
class InnovationSpec:
    """Distribution family of the i.i.d. innovations.

    Args:
        family: one of ``Gaussian``, ``SymmetricStable``, ``StudentT``.
        nu: tail index; ``inf`` for Gaussian (``None`` is normalized to
            ``inf``), in [1, 2) for SymmetricStable (1 allowed for tail
            arithmetic only), > 1 for StudentT.
        scale: positive scale parameter.
    """

    family: str
    nu: float | None = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown innovation family {self.family!r}")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        nu = self.nu
        if self.family == "Gaussian":
            if nu is None:
                object.__setattr__(self, "nu", math.inf)
            elif not math.isinf(nu):
                raise ValueError("Gaussian innovations have nu = inf")
        elif self.family == "SymmetricStable":
            if nu is None or not (1.0 <= nu < 2.0):
                raise ValueError(f"SymmetricStable requires 1 <= nu < 2, got {nu}")
        else:  # StudentT
            if nu is None or not (nu > 1.0 and math.isfinite(nu)):
                raise ValueError(f"StudentT requires finite nu > 1, got {nu}")


def moment_index(spec: InnovationSpec) -> float:
    """Algebraic moment index nu = sup{p : E|eps|^p < inf} (inf for Gaussian)."""
    return spec.nu


def tail_constant(spec: InnovationSpec) -> float:
    """Tail constant A in P[eps > x] ~ (A/2) x^{-nu} for the heavy families.

    SymmetricStable:  A = 2 scale^nu sin(pi nu / 2) Gamma(nu) / pi
    StudentT:         A = 2 scale^nu nu^{nu/2 - 1} Gamma((nu+1)/2)
                          / (sqrt(pi) Gamma(nu/2))

    Raises for Gaussian innovations, whose tail is not regularly varying.
    """
    nu, s = spec.nu, spec.scale
    if spec.family == "SymmetricStable":
        return 2.0 * s**nu * math.sin(math.pi * nu / 2.0) * math.gamma(nu) / math.pi
    if spec.family == "StudentT":
        return (
            2.0 * s**nu * nu ** (nu / 2.0 - 1.0) * math.gamma((nu + 1.0) / 2.0)
            / (math.sqrt(math.pi) * math.gamma(nu / 2.0))
        )
    raise ValueError("Gaussian innovations have no power-tail constant")


def sample_innovations(spec: InnovationSpec, count: int, seed: int) -> np.ndarray:
    """Draw `count` i.i.d. innovations; bit-identical for identical (spec, count, seed).

    Gaussian draws use the generator's normal stream, SymmetricStable the
    Chambers-Mallows-Stuck transform, StudentT the generator's standard-t
    stream scaled by `scale`.  Rejects nu <= 1 (sampling at the Cauchy
    endpoint is out of scope).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    if spec.family == "Gaussian":
        return rng.normal(0.0, spec.scale, count)
    if spec.nu <= 1.0:
        raise ValueError(f"sampling requires nu > 1, got nu={spec.nu}")
    if spec.family == "SymmetricStable":
        return spec.scale * standard_sas_draws(rng, spec.nu, count)
    return spec.scale * rng.standard_t(spec.nu, count)


def innovation_tail(spec: InnovationSpec, x) -> float | np.ndarray:
    """Upper tail P[eps > x]; exact closed/quadrature forms per family.

    Gaussian uses the complementary normal integral, SymmetricStable the
    stable-law survival function (arctan closed form at nu = 1), StudentT
    the t distribution's CDF.  Accepts scalars or arrays.
    """
    if spec.family == "Gaussian":
        return stats.norm.sf(x, scale=spec.scale)
    if spec.family == "SymmetricStable":
        if spec.nu == 1.0:
            return 0.5 - np.arctan(np.asarray(x, dtype=float) / spec.scale) / np.pi
        return sas_sf(StableLaw(spec.nu, spec.scale), x)
    return stats.t.sf(np.asarray(x, dtype=float) / spec.scale, df=spec.nu)
