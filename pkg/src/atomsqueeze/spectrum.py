"""Spectrum grids, threshold location, cross-solver comparison, and flux.

These are the computations behind the CLI subcommands; they are kept
importable so the analysis pipeline can be driven programmatically and so
the tests can exercise them without file I/O.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .analytic import (
    SqueezingSpectrum,
    r_analytic,
    r_large_mu_limit,
    threshold_kappas,
)
from .errors import AboveThresholdError, ParameterDomainError, SolverError
from .params import DimensionlessParams
from .scattering import r_scattering

DEFAULT_BIG_M = 100.0


def linspace_grid(spec: Tuple[float, float, int]) -> np.ndarray:
    lo, hi, n = spec
    if n < 1 or hi < lo:
        raise ParameterDomainError(f"bad grid spec {spec!r}")
    return np.linspace(lo, hi, int(n))


def r_point(d: float, big_m: float, kappa: float, method: str) -> Tuple[float, bool]:
    """(r, above_threshold) at one grid point by the requested method."""
    if method == "analytic":
        if math.isinf(big_m):
            val = r_large_mu_limit(d, kappa)
        else:
            val = r_analytic(DimensionlessParams(d=d, big_m=big_m, kappa=kappa))
    elif method == "scattering":
        val = r_scattering(DimensionlessParams(d=d, big_m=big_m, kappa=kappa))
    else:
        raise ParameterDomainError(f"unknown method {method!r}")
    return val.r, val.above_threshold


def _row(args):
    d, big_m, kappas, method = args
    return [r_point(d, big_m, k, method) for k in kappas]


def spectrum_grid(
    d_grid: Sequence[float],
    kappa_grid: Sequence[float],
    big_m: float = DEFAULT_BIG_M,
    method: str = "analytic",
    jobs: int = 1,
) -> List[Tuple[float, float, float, bool]]:
    """Rectangular (d, kappa, r, above_threshold) sweep, row-ordered.

    Rows are dispatched to a process pool when jobs > 1; assembly is by
    row index, so the output ordering (and any file written from it) is
    identical regardless of scheduling.
    """
    tasks = [(float(d), big_m, [float(k) for k in kappa_grid], method) for d in d_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    out = []
    for (d, _, kappas, _), row in zip(tasks, rows):
        for k, (r, above) in zip(kappas, row):
            out.append((d, k, r, above))
    return out


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a threshold search over a kappa interval.

    ``found`` means the interval contains a local maximum of the arctanh
    argument; ``diverges`` whether that maximum actually saturates the
    argument (a true threshold; at d != 0 the peak stays below 1 and no
    divergence exists).
    """

    found: bool
    kappa: Optional[float]
    nearest_reference: Optional[float]  # closest pi/2 + n*pi
    deviation: Optional[float]
    diverges: bool
    peak_argument: Optional[float]
    lo: float
    hi: float


def find_threshold(
    lo: float,
    hi: float,
    d: float = 0.0,
    big_m: Optional[float] = None,
    tol: float = 1e-9,
) -> ThresholdResult:
    """Locate a squeezing divergence in kappa by bisection.

    The arctanh argument touches 1 tangentially at a divergence (it never
    crosses), so the search bisects on the sign of its kappa-derivative:
    the argument rises monotonically to the left of the divergence and
    falls to its right. On [lo, hi] containing exactly one maximum this
    converges to the divergence within ``tol``. Intervals whose endpoint
    slopes have the same sign contain no interior maximum and report
    found=False.

    With big_m=None the large-mu form is used; then at d = 0 the located
    kappa is the textbook threshold pi/2 (+ n*pi depending on bracket).
    """
    if hi <= lo:
        raise ParameterDomainError("need hi > lo")

    def argument(kappa: float) -> float:
        if big_m is None:
            return r_large_mu_limit(d, kappa).arctanh_argument
        return r_analytic(
            DimensionlessParams(d=d, big_m=big_m, kappa=kappa)
        ).arctanh_argument

    h = 1e-7 * max(1.0, hi - lo)

    def slope(kappa: float) -> float:
        return (argument(kappa + h) - argument(kappa - h)) / (2.0 * h)

    s_lo, s_hi = slope(lo + h), slope(hi - h)
    if s_lo <= 0.0 or s_hi >= 0.0:
        return ThresholdResult(
            found=False, kappa=None, nearest_reference=None, deviation=None,
            diverges=False, peak_argument=None, lo=lo, hi=hi,
        )
    a, b = lo + h, hi - h
    while b - a > tol:
        mid = 0.5 * (a + b)
        if slope(mid) > 0.0:
            a = mid
        else:
            b = mid
    kappa_star = 0.5 * (a + b)
    peak = argument(kappa_star)
    refs = threshold_kappas(int(kappa_star / math.pi) + 1)
    nearest = min(refs, key=lambda r: abs(r - kappa_star))
    return ThresholdResult(
        found=True,
        kappa=kappa_star,
        nearest_reference=nearest,
        deviation=abs(kappa_star - nearest),
        diverges=peak >= 1.0 - 1e-9,
        peak_argument=peak,
        lo=lo,
        hi=hi,
    )


@dataclass(frozen=True)
class CompareResult:
    """Discrepancy summary between two spectrum methods on a shared grid."""

    max_abs: float
    mean_abs: float
    n_points: int
    n_skipped: int  # above-threshold or solver-failed points
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs <= self.tolerance


def compare_methods(
    d_grid: Sequence[float],
    kappa_grid: Sequence[float],
    big_m: float,
    tolerance: float = 0.01,
) -> CompareResult:
    """Max/mean |r_scattering - r_analytic| over a shared grid."""
    diffs = []
    skipped = 0
    for d in d_grid:
        for kappa in kappa_grid:
            try:
                r_a, above_a = r_point(float(d), big_m, float(kappa), "analytic")
                r_s, above_s = r_point(float(d), big_m, float(kappa), "scattering")
            except SolverError:
                skipped += 1
                continue
            if above_a or above_s:
                skipped += 1
                continue
            diffs.append(abs(r_s - r_a))
    if not diffs:
        raise ParameterDomainError("comparison grid is empty or all above threshold")
    return CompareResult(
        max_abs=float(np.max(diffs)),
        mean_abs=float(np.mean(diffs)),
        n_points=len(diffs),
        n_skipped=skipped,
        tolerance=tolerance,
    )


#: The flux definition below is an adopted diagnostic, not a published
#: formula: flux = (g0 / 2 pi) * integral d(d) of [2 * sinh^2(r(d))] over
#: the computed spectrum, the factor 2 counting both outgoing channels.
FLUX_DEFINITION = (
    "flux = (g0/2pi) * integral dDelta sum_channels sinh^2(r_Delta), "
    "trapezoid over the computed spectrum; adopted definition (no closed "
    "form is published), order-of-magnitude diagnostic only"
)


def flux_estimate(spectrum: SqueezingSpectrum, g0: float) -> float:
    """Output atom flux (atoms/s) from a below-threshold spectrum.

    Raises AboveThresholdError if any point of the spectrum diverges. See
    FLUX_DEFINITION for the adopted formula and its caveat.
    """
    if spectrum.any_above_threshold():
        raise AboveThresholdError("spectrum contains above-threshold points")
    ds = np.asarray(spectrum.detunings)
    integrand = np.array([2.0 * math.sinh(v.r) ** 2 for _, v in spectrum.points])
    if len(ds) == 1:
        # single-bin convention: one channel-pair bin of width g0 (in d units: 1)
        return float(g0 * integrand[0] / (2.0 * math.pi))
    return float(g0 * np.trapezoid(integrand, ds) / (2.0 * math.pi))


def ridge_locus(d: float) -> float:
    """kappa of maximal r at fixed detuning ratio, (pi/2)/sqrt(1 + d^2).

    In the large-mu spectrum the divergence ridge follows
    kappa * sqrt(1 + d^2) = pi/2; grid sweeps should peak along this locus.
    """
    return (math.pi / 2.0) / math.sqrt(1.0 + d * d)
