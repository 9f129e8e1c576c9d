"""Frequency-domain two-channel scattering for the hard-wall + slab model.

Under the steady output condition the stationary pair (u, w), the mode
coefficients of the two coupled field components at detuning delta, obeys

    (mu + delta) u = -u''/2m + V u + g0 w
    (mu - delta) w = -w''/2m + V w + g0 u

with u(0) = w(0) = 0 at the wall and free propagation beyond the slab.
Everything here is expressed in coupling units (energies in g0, 2m = 1, so
wavenumbers are square roots of dimensionless energies): exterior channels
carry k_u = sqrt(M + d), k_w = sqrt(M - d); the interior branches are the
eigenvectors of [[M + d, -1], [-1, M - d]] with wavenumbers sqrt(M +/- s),
s = sqrt(1 + d^2); the slab length is a = kappa * sqrt(M).

Each scattering experiment (unit flux injected in one channel) produces a
column of the Bogoliubov input-output relation. Amplitudes are converted
to flux normalization so the coefficients satisfy the symplectic
constraints |alpha|^2 - |beta|^2 = 1 and alpha_p beta_m = alpha_m beta_p.
Outgoing/incoming amplitudes are referenced at the origin (the plane-wave
phase convention of the asymptotic expansion), so the decoupled g0 -> 0
limit gives the bare hard-wall reflection alpha = -1.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .analytic import SqueezingValue, _value_from_argument
from .errors import (
    ClosedExteriorChannelError,
    IllConditionedWarning,
    InconsistentChannelsError,
    SolverError,
)
from .params import DimensionlessParams

#: Matching systems with condition estimates above this emit a warning.
CONDITION_LIMIT = 1e12

#: Default tolerance for the symplectic identities of a converged solve.
SOLVER_TOL = 1e-10


@dataclass(frozen=True)
class InteriorModes:
    """Eigenstructure of the coupled slab at one operating point.

    ``wavevectors`` are the two interior wavenumbers (the lower branch is
    purely imaginary with Im > 0 when evanescent); ``eigenvalues`` are the
    corresponding k^2 in coupling units; ``eigenvectors`` holds the unit
    (u, w) polarization of each branch as rows. ``exterior_open`` flags
    whether each exterior channel k(mu +/- delta) propagates.
    """

    eigenvalues: Tuple[float, float]
    eigenvectors: Tuple[Tuple[float, float], Tuple[float, float]]
    wavevectors: Tuple[complex, complex]
    exterior_open: Tuple[bool, bool]


@dataclass(frozen=True)
class BogoliubovCoefficients:
    """Flux-normalized input-output coefficients at one operating point.

    For well-conditioned below-threshold inputs these satisfy, to solver
    tolerance, |alpha_p|^2 - |beta_p|^2 = 1 (same for the minus channel),
    alpha_p*beta_m - alpha_m*beta_p = 0, and equal channel ratios
    |beta_p|/|alpha_p| = |beta_m|/|alpha_m| = tanh(r).
    """

    alpha_p: complex
    beta_p: complex
    alpha_m: complex
    beta_m: complex
    d: float
    big_m: float
    kappa: float
    condition_number: float

    def norm_defects(self) -> Tuple[float, float]:
        return (
            abs(abs(self.alpha_p) ** 2 - abs(self.beta_p) ** 2 - 1.0),
            abs(abs(self.alpha_m) ** 2 - abs(self.beta_m) ** 2 - 1.0),
        )

    def cross_defect(self) -> float:
        return abs(self.alpha_p * self.beta_m - self.alpha_m * self.beta_p)


def interior_modes(params: DimensionlessParams) -> InteriorModes:
    """Eigenpairs of the interior coupling matrix [[M+d, -1], [-1, M-d]].

    Closed channels are represented, not rejected: a negative eigenvalue
    yields an imaginary wavevector (Im > 0 by convention), and the
    corresponding slab solution is the sinh-like combination vanishing at
    the wall.
    """
    d, M = params.d, params.big_m
    s = math.sqrt(1.0 + d * d)
    lam_hi, lam_lo = M + s, M - s
    # eigenvector of [[M+d, -1], [-1, M-d]] for eigenvalue M+s: (1, d-s)
    v_hi = np.array([1.0, d - s])
    v_lo = np.array([1.0, d + s])
    v_hi /= np.linalg.norm(v_hi)
    v_lo /= np.linalg.norm(v_lo)
    return InteriorModes(
        eigenvalues=(lam_hi, lam_lo),
        eigenvectors=(tuple(v_hi), tuple(v_lo)),
        wavevectors=(cmath.sqrt(lam_hi), cmath.sqrt(lam_lo)),
        exterior_open=(M + d > 0, M - d > 0),
    )


def solve_scattering(params: DimensionlessParams) -> BogoliubovCoefficients:
    """Solve the 4x4 boundary-matching problem for one operating point.

    Two interior coefficients (one per branch, each vanishing at the wall)
    and two outgoing amplitudes are matched against continuity of (u, w)
    and their derivatives at x = a, once per incoming channel. The two
    right-hand sides share one LU factorization.

    Raises ClosedExteriorChannelError when mu - |delta| <= 0 (an exterior
    channel carries no flux and the input-output map is undefined). Emits
    IllConditionedWarning when the matching matrix condition estimate
    exceeds CONDITION_LIMIT, which happens approaching threshold.
    """
    d, M, kappa = params.d, params.big_m, params.kappa
    if M - abs(d) <= 0:
        raise ClosedExteriorChannelError(
            f"exterior channel closed: big_m={M}, |d|={abs(d)}"
        )
    modes = interior_modes(params)
    a = kappa * math.sqrt(M)
    ku = math.sqrt(M + d)
    kw = math.sqrt(M - d)
    k1, k2 = modes.wavevectors
    (e1u, e1w), (e2u, e2w) = modes.eigenvectors

    sin1, cos1 = np.sin(k1 * a), np.cos(k1 * a)
    sin2, cos2 = np.sin(k2 * a), np.cos(k2 * a)

    # Unknowns per experiment: interior coefficients c1, c2 and outgoing
    # amplitudes p (u channel) and q (w channel), referenced at x = a.
    mat = np.array(
        [
            [sin1 * e1u, sin2 * e2u, -1.0, 0.0],
            [k1 * cos1 * e1u, k2 * cos2 * e2u, -1j * ku, 0.0],
            [sin1 * e1w, sin2 * e2w, 0.0, -1.0],
            [k1 * cos1 * e1w, k2 * cos2 * e2w, 0.0, 1j * kw],
        ],
        dtype=complex,
    )
    # experiment 1: unit incident u wave exp(-i ku (x-a)); experiment 2:
    # unit incident w wave exp(+i kw (x-a)).
    rhs = np.array(
        [[1.0, 0.0], [-1j * ku, 0.0], [0.0, 1.0], [0.0, 1j * kw]], dtype=complex
    )
    cond = float(np.linalg.cond(mat))
    if cond > CONDITION_LIMIT:
        warnings.warn(
            f"matching system nearly singular (cond ~ {cond:.2e}) at "
            f"d={d}, M={M}, kappa={kappa}; coefficients may be inaccurate",
            IllConditionedWarning,
            stacklevel=2,
        )
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"singular matching system at d={d}, M={M}, kappa={kappa}"
        ) from exc
    p1, q1 = sol[2, 0], sol[3, 0]
    p2, q2 = sol[2, 1], sol[3, 1]

    # Re-reference amplitudes to the origin and flux-normalize. The w
    # channel rides on the conjugate field, so its coefficients conjugate.
    alpha_p = p1 * cmath.exp(-2j * ku * a)
    beta_m = (q1 * cmath.exp(1j * (kw - ku) * a)).conjugate() * math.sqrt(kw / ku)
    beta_p = p2 * cmath.exp(1j * (kw - ku) * a) * math.sqrt(ku / kw)
    alpha_m = (q2 * cmath.exp(2j * kw * a)).conjugate()
    return BogoliubovCoefficients(
        alpha_p=complex(alpha_p),
        beta_p=complex(beta_p),
        alpha_m=complex(alpha_m),
        beta_m=complex(beta_m),
        d=d,
        big_m=M,
        kappa=kappa,
        condition_number=cond,
    )


def r_from_coefficients(
    c: BogoliubovCoefficients, consistency_factor: float = 10.0
) -> SqueezingValue:
    """Squeezing parameter tanh(r) = |beta|/|alpha| from solved coefficients.

    The two channel ratios are averaged to suppress round-off asymmetry;
    a genuine mismatch beyond consistency_factor * SOLVER_TOL (relative to
    the ratio scale) raises InconsistentChannelsError.
    """
    t_p = abs(c.beta_p) / abs(c.alpha_p)
    t_m = abs(c.beta_m) / abs(c.alpha_m)
    scale = max(t_p, t_m, 1.0)
    if abs(t_p - t_m) > consistency_factor * SOLVER_TOL * scale:
        raise InconsistentChannelsError(
            f"channel ratios disagree: |b+/a+|={t_p!r}, |b-/a-|={t_m!r}"
        )
    t = 0.5 * (t_p + t_m)
    if t_p >= 1.0 or t_m >= 1.0 or t >= 1.0:
        return SqueezingValue(r=math.inf, above_threshold=True, arctanh_argument=t)
    return _value_from_argument(t)


def r_scattering(params: DimensionlessParams) -> SqueezingValue:
    """Convenience composition: solve_scattering then r_from_coefficients."""
    return r_from_coefficients(solve_scattering(params))
