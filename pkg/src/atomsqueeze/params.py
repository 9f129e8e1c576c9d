"""Model parameters, unit reduction, and validity diagnostics.

All solver mathematics runs in dimensionless variables: detuning ratio
``d = delta/g0``, chemical-potential ratio ``M = mu/g0`` and interaction
coefficient ``kappa = g0 * tbar``, where ``tbar`` is the in-and-out
transmission time (path length ``2a``) of an atom crossing the coupling
region at velocity ``vbar = sqrt(2*hbar*mu/m)``. Physical units (SI, with
rates in rad/s) appear only at this conversion boundary.

Unit reduction used throughout: rates ``g0``, ``mu``, ``gamma`` and the
detuning ``delta`` are angular rates in rad/s (energy = hbar * rate);
lengths in meters; masses in kg. Then

    vbar = sqrt(2 * hbar * mu / m)      [m/s]
    tbar = 2 * a / vbar                 [s]
    kappa = g0 * tbar                   [dimensionless]

Note: a quoted coupling "g0 ~ 20 kHz" is interpreted as 2e4 rad/s, not
2*pi*2e4 rad/s. Only this reading reproduces the reference squeezing
r0 ~ 2 for the standard sodium parameter set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ParameterDomainError

HBAR = 1.054571817e-34  # J s

#: First few parametric thresholds kappa = pi/2 + n*pi live in analytic.py;
#: validity reporting only needs distances to that grid.
DEFAULT_MARGIN = 0.1


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ParameterDomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Physical parameters of the coupled-beam model.

    Attributes:
        g0: peak spin-exchange coupling rate (rad/s), > 0.
        mu: condensate chemical potential as an angular rate (rad/s), > 0.
        a: length of the coupling (condensate) region (m), >= 0.
           Zero is allowed as the degenerate no-region limit.
        m: atomic mass (kg), > 0.
        gamma: coupling ramp rate (rad/s), >= 0.
        n0: condensate atom number, >= 1.
    """

    g0: float
    mu: float
    a: float
    m: float
    gamma: float = 0.0
    n0: float = 1e6

    def __post_init__(self):
        for name in ("g0", "mu", "a", "m", "gamma", "n0"):
            _require_finite(name, getattr(self, name))
        if self.g0 <= 0:
            raise ParameterDomainError(f"g0 must be > 0, got {self.g0}")
        if self.mu <= 0:
            raise ParameterDomainError(f"mu must be > 0, got {self.mu}")
        if self.a < 0:
            raise ParameterDomainError(f"a must be >= 0, got {self.a}")
        if self.m <= 0:
            raise ParameterDomainError(f"m must be > 0, got {self.m}")
        if self.gamma < 0:
            raise ParameterDomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.n0 < 1:
            raise ParameterDomainError(f"n0 must be >= 1, got {self.n0}")


@dataclass(frozen=True)
class DimensionlessParams:
    """Reduced parameters (d, M, kappa) that fully determine the spectra.

    Attributes:
        d: detuning ratio delta/g0 (any real).
        big_m: chemical-potential ratio mu/g0, > 0.
        kappa: interaction coefficient g0 * tbar, >= 0.
    """

    d: float
    big_m: float
    kappa: float

    def __post_init__(self):
        for name in ("d", "big_m", "kappa"):
            _require_finite(name, getattr(self, name))
        if self.big_m <= 0:
            raise ParameterDomainError(f"big_m must be > 0, got {self.big_m}")
        if self.kappa < 0:
            raise ParameterDomainError(f"kappa must be >= 0, got {self.kappa}")


@dataclass(frozen=True)
class ValidityReport:
    """Diagnostics for the approximations behind the closed-form spectrum.

    ``steady_output_ok`` checks the slow-ramp condition gamma << g0,
    ``large_mu_ok`` checks mu >> g0, and ``below_threshold`` checks that the
    operating point is away from the parametric thresholds
    kappa = pi/2 + n*pi. Margins are the raw ratios / distances so callers
    can apply their own cutoffs.
    """

    steady_output_ok: bool
    steady_output_margin: float  # gamma / g0
    large_mu_ok: bool
    large_mu_margin: float  # g0 / mu
    below_threshold: bool
    threshold_distance: float  # min_n |kappa - (pi/2 + n pi)|
    ratio_threshold: float = field(default=DEFAULT_MARGIN)


def vbar(p: PhysicalParams) -> float:
    """Beam velocity sqrt(2*hbar*mu/m) in m/s of an atom emerging at mu."""
    return math.sqrt(2.0 * HBAR * p.mu / p.m)


def transit_time(p: PhysicalParams) -> float:
    """Transmission time tbar = 2a / sqrt(2*hbar*mu/m), in seconds."""
    return 2.0 * p.a / vbar(p)


def to_dimensionless(p: PhysicalParams, delta: float = 0.0) -> DimensionlessParams:
    """Reduce physical parameters to (d, M, kappa) at detuning ``delta`` (rad/s)."""
    _require_finite("delta", delta)
    return DimensionlessParams(
        d=delta / p.g0,
        big_m=p.mu / p.g0,
        kappa=p.g0 * transit_time(p),
    )


def threshold_distance(kappa: float) -> float:
    """Distance from kappa to the nearest parametric threshold pi/2 + n*pi."""
    if kappa < 0:
        raise ParameterDomainError(f"kappa must be >= 0, got {kappa}")
    n = round((kappa - math.pi / 2.0) / math.pi)
    best = math.inf
    for nn in (n - 1, n, n + 1):
        if nn < 0:
            continue
        best = min(best, abs(kappa - (math.pi / 2.0 + nn * math.pi)))
    # kappa below the first threshold: nearest is n = 0
    return min(best, abs(kappa - math.pi / 2.0))


def validity(
    p: PhysicalParams,
    d_grid=None,
    ratio_threshold: float = DEFAULT_MARGIN,
) -> ValidityReport:
    """Check the operating point of ``p`` against the model's regime.

    ``d_grid`` is an optional iterable of detuning ratios; the threshold
    flag also fails if any grid point evaluates above threshold (which, in
    the closed-form spectrum, can only occur on the d = 0 axis exactly at
    kappa = pi/2 + n*pi). With the default margins, steady output requires
    gamma/g0 <= 0.1 and the large-mu regime g0/mu <= 0.1.
    """
    from .analytic import r_large_mu_limit  # local import, avoids cycle

    dp = to_dimensionless(p)
    dist = threshold_distance(dp.kappa)
    below = dist > 1e-12
    if d_grid is not None:
        for d in d_grid:
            if r_large_mu_limit(d, dp.kappa).above_threshold:
                below = False
                break
    g_ratio = p.gamma / p.g0
    mu_ratio = p.g0 / p.mu
    return ValidityReport(
        steady_output_ok=g_ratio <= ratio_threshold,
        steady_output_margin=g_ratio,
        large_mu_ok=mu_ratio <= ratio_threshold,
        large_mu_margin=mu_ratio,
        below_threshold=below,
        threshold_distance=dist,
        ratio_threshold=ratio_threshold,
    )
