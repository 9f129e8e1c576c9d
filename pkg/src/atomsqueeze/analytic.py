"""Closed-form squeezing spectrum for the hard-wall + uniform-slab model.

The two outgoing channels at mu +/- delta form a two-mode squeezed state
whose squeezing parameter, for a wall at x = 0 and uniform coupling on
0 <= x <= a, is

    r(d) = | arctanh[ tanh(2*theta) * sin(phi) ] |

with ``tanh(2*theta) = 1/sqrt(1 + d^2)`` (d = delta/g0) and ``phi`` the
phase difference accumulated by the two interior branches across the slab,
``phi = (k_plus - k_minus) * a``. The raw definition of theta,
arctanh[sqrt(d^2+1) - d], overflows at d = 0 and leaves its domain for
d < 0; the simplified form is algebraically identical for d > 0 and
extends the spectrum evenly. The mu >> g0 limit collapses phi to
kappa * sqrt(1 + d^2), which at zero detuning gives the textbook
r0 = |arctanh(sin kappa)| with its thresholds at kappa = pi/2 + n*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .errors import ClosedChannelError, ParameterDomainError
from .params import DimensionlessParams

#: |arctanh_argument| within this distance below 1 is flagged near-threshold.
NEAR_THRESHOLD_BAND = 1e-12


@dataclass(frozen=True)
class SqueezingValue:
    """Squeezing parameter at one operating point.

    ``arctanh_argument`` is tanh(2*theta) * sin(phi); the point is above
    threshold when its magnitude reaches 1, in which case ``r`` is inf and
    the linearized no-depletion model has broken down. ``near_threshold``
    marks arguments within NEAR_THRESHOLD_BAND below saturation; the value
    of r is still reported as-is (no clipping) so divergences stay visible.
    """

    r: float
    above_threshold: bool
    arctanh_argument: float
    near_threshold: bool = False


@dataclass(frozen=True)
class SqueezingSpectrum:
    """r over a strictly increasing detuning-ratio grid, with context."""

    points: Tuple[Tuple[float, SqueezingValue], ...]
    big_m: float
    kappa: float

    def __post_init__(self):
        ds = [d for d, _ in self.points]
        if any(b <= a for a, b in zip(ds, ds[1:])):
            raise ParameterDomainError("detuning grid must be strictly increasing")

    @property
    def detunings(self) -> List[float]:
        return [d for d, _ in self.points]

    @property
    def r_values(self) -> List[float]:
        return [v.r for _, v in self.points]

    def any_above_threshold(self) -> bool:
        return any(v.above_threshold for _, v in self.points)


def _value_from_argument(arg: float) -> SqueezingValue:
    if abs(arg) >= 1.0:
        return SqueezingValue(r=math.inf, above_threshold=True, arctanh_argument=arg)
    near = abs(arg) > 1.0 - NEAR_THRESHOLD_BAND
    return SqueezingValue(
        r=abs(math.atanh(arg)),
        above_threshold=False,
        arctanh_argument=arg,
        near_threshold=near,
    )


def _value_from_phase(d: float, phi: float) -> SqueezingValue:
    """SqueezingValue for argument sin(phi)/sqrt(1+d^2), saturation-stable.

    Near threshold the argument rounds to 1 long before the true
    divergence, so 1 - |arg| is assembled from cancellation-free pieces:
    s - 1 = d^2/(1+s) and 1 - |sin(phi)| = 2*sin^2(pi/4 -/+ phi/2). The
    threshold flag then flips at the floating-point representation of the
    divergence itself rather than ~1e-8 early, and r keeps full relative
    accuracy arbitrarily close to threshold.
    """
    s = math.sqrt(1.0 + d * d)
    t = math.sin(phi)
    if t == 0.0:
        return SqueezingValue(r=0.0, above_threshold=False, arctanh_argument=0.0)
    if t >= 0.0:
        one_minus_abs_t = 2.0 * math.sin(math.pi / 4.0 - phi / 2.0) ** 2
    else:
        one_minus_abs_t = 2.0 * math.sin(math.pi / 4.0 + phi / 2.0) ** 2
    s_minus_abs_t = d * d / (1.0 + s) + one_minus_abs_t  # = s - |t|, stable
    arg = t / s
    if s_minus_abs_t <= 0.0:
        return SqueezingValue(r=math.inf, above_threshold=True, arctanh_argument=arg)
    r = max(0.0, 0.5 * math.log((s + abs(t)) / s_minus_abs_t))
    near = s_minus_abs_t / s < NEAR_THRESHOLD_BAND
    return SqueezingValue(
        r=r, above_threshold=False, arctanh_argument=arg, near_threshold=near
    )


def tanh_two_theta(d: float) -> float:
    """Interaction mixing factor tanh(2*theta) = 1/sqrt(1 + d^2).

    Equals tanh(2*arctanh(sqrt(d^2+1) - d)) wherever the latter is defined,
    and is even in d. Ranges over (0, 1], saturating at d = 0 (resonance).
    """
    return 1.0 / math.sqrt(1.0 + d * d)


def wavenumber_phase(params: DimensionlessParams) -> float:
    """Phase difference (k_plus - k_minus) * a of the interior branches.

    The interior wavenumbers are k_pm = sqrt(2m(mu +/- g0*s))/hbar with
    s = sqrt(1 + d^2). Eliminating a via kappa = g0 * 2a/sqrt(2*hbar*mu/m)
    leaves the dimensionless form

        phi = kappa * M * (sqrt(1 + s/M) - sqrt(1 - s/M))

    evaluated here as 2*kappa*s / (sqrt(1 + s/M) + sqrt(1 - s/M)), which
    avoids catastrophic cancellation at large M and has the exact limit
    phi -> kappa * s as M -> inf.

    Raises ClosedChannelError when M < s (k_minus imaginary: the lower
    interior branch is evanescent and the closed form does not apply).
    """
    s = math.sqrt(1.0 + params.d * params.d)
    if params.big_m < s:
        raise ClosedChannelError(
            f"lower interior branch evanescent: big_m={params.big_m} < sqrt(1+d^2)={s}"
        )
    return 2.0 * params.kappa * s / (
        math.sqrt(1.0 + s / params.big_m) + math.sqrt(1.0 - s / params.big_m)
    )


def r_analytic(params: DimensionlessParams) -> SqueezingValue:
    """Squeezing parameter with the exact interior wavenumbers (finite M)."""
    return _value_from_phase(params.d, wavenumber_phase(params))


def r_large_mu_limit(d: float, kappa: float) -> SqueezingValue:
    """Squeezing parameter in the mu >> g0 regime.

    arctanh_argument = sin(kappa*sqrt(1+d^2)) / sqrt(1+d^2); the M -> inf
    limit of :func:`r_analytic`, even in d, and finite for all d != 0.
    """
    if kappa < 0:
        raise ParameterDomainError(f"kappa must be >= 0, got {kappa}")
    return _value_from_phase(d, kappa * math.sqrt(1.0 + d * d))


def r_zero_detuning(kappa: float) -> SqueezingValue:
    """Peak squeezing r0 = |arctanh(sin kappa)| between the modes at mu."""
    return r_large_mu_limit(0.0, kappa)


def threshold_kappas(n_max: int) -> List[float]:
    """The parametric thresholds kappa = pi/2 + n*pi for n = 0..n_max."""
    if n_max < 0:
        raise ParameterDomainError(f"n_max must be >= 0, got {n_max}")
    return [math.pi / 2.0 + n * math.pi for n in range(n_max + 1)]


def loss_rate(r0: float, g0: float, n0: float) -> float:
    """Condensate loss rate from output coupling, 2*g0*sinh^2(r0)/n0 (rad/s)."""
    if n0 < 1:
        raise ParameterDomainError(f"n0 must be >= 1, got {n0}")
    return 2.0 * g0 * math.sinh(r0) ** 2 / n0


def spectrum_large_mu(d_grid: Sequence[float], kappa: float) -> SqueezingSpectrum:
    """Evaluate the mu >> g0 spectrum over a detuning grid."""
    pts = tuple((float(d), r_large_mu_limit(float(d), kappa)) for d in d_grid)
    return SqueezingSpectrum(points=pts, big_m=math.inf, kappa=kappa)


def spectrum_analytic(
    d_grid: Sequence[float], big_m: float, kappa: float
) -> SqueezingSpectrum:
    """Evaluate the finite-M closed-form spectrum over a detuning grid."""
    pts = tuple(
        (float(d), r_analytic(DimensionlessParams(d=float(d), big_m=big_m, kappa=kappa)))
        for d in d_grid
    )
    return SqueezingSpectrum(points=pts, big_m=big_m, kappa=kappa)
