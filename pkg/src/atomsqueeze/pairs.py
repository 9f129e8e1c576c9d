"""Weak-coupling pair production: two-atom amplitude and Bell-type metrics.

In the regime where at most one atom pair is created per detection
interval, first-order perturbation theory gives a two-atom state with
amplitude f(x, y, t): x the position of the +1 atom, y of the -1 atom.
In the frame rotating at mu per particle the amplitude obeys

    i df/dt = (H_+ (x) + H_- (y) - 2 mu) f + g(x, t) delta(x - y)

driven on the diagonal by the pair-creation source (the vacuum component
is dropped; it does not affect any post-selected quantity). H_+/- may
carry different potentials when probing internal-state asymmetries. The
delta source is discretized as 1/dx on the grid diagonal.

Once the pair has escaped the coupling region the amplitude is decomposed
by exit side into quadrants LL/LR/RL/RR (left: coordinate < -a; right:
> a). Post-selecting one atom on each side keeps the LR and RL pieces and
produces an effective two-qubit internal state in the basis
{|+1 left, -1 right>, |-1 left, +1 right>}; when potentials are identical
for the two internal components, the exchange symmetry f_LR(x, y) =
f_RL(y, x) makes that state maximally entangled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.fft import dst, idst

from .dynamics import CouplingRamp, GridSpec
from .errors import (
    EmptyPostSelectionError,
    ParameterDomainError,
    PerturbationInvalidError,
)

#: First-order treatment is rejected above this created norm^2.
PERTURBATION_NORM_LIMIT = 0.1


@dataclass(frozen=True)
class PairAmplitude:
    """Two-atom amplitude f on an (x, y) grid after free escape.

    ``leakage`` is the residual max |f| over the coupling square
    [-a, a] x [-a, a]; ``created_norm2`` the total norm^2 of the created
    component (excluding vacuum), which must stay small for the
    first-order (single-pair) treatment to hold.
    """

    f: np.ndarray
    x: np.ndarray
    dx: float
    a: float
    t0: float
    created_norm2: float
    leakage: float


@dataclass(frozen=True)
class QuadrantDecomposition:
    """Exit-side decomposition of a pair amplitude.

    Weights are norm^2 of the restrictions; the restricted amplitudes are
    kept on the full grid (zero outside their quadrant) so downstream
    overlaps can use one quadrature. in_region_weight is everything not in
    a quadrant (atoms not yet escaped).
    """

    w_ll: float
    w_lr: float
    w_rl: float
    w_rr: float
    in_region_weight: float
    total: float
    f_lr: np.ndarray
    f_rl: np.ndarray
    x: np.ndarray
    dx: float
    a: float


@dataclass(frozen=True)
class ProjectedPairState:
    """Post-selected one-atom-each-side state.

    ``psi_a`` is the motional amplitude of the |+1 left, -1 right> branch
    over (left coordinate, right coordinate); ``psi_b`` the |-1 left,
    +1 right> branch in the same coordinates. Norm one after projection.
    """

    psi_a: np.ndarray
    psi_b: np.ndarray
    dx: float
    success_probability: float


def _dst2(f, phase_x, phase_y):
    f = idst(dst(f, type=1, axis=0) * phase_x[:, None], type=1, axis=0)
    f = idst(dst(f, type=1, axis=1) * phase_y[None, :], type=1, axis=1)
    return f


def pair_amplitude(
    ramp: CouplingRamp,
    grid: GridSpec,
    t0: float,
    mu: float,
    potential_plus: Optional[np.ndarray] = None,
    potential_minus: Optional[np.ndarray] = None,
    raise_on_invalid: bool = True,
) -> PairAmplitude:
    """Evolve the sourced two-atom amplitude to time ``t0``.

    ``grid`` must be a symmetric Dirichlet grid containing the coupling
    support [-a, a] (a is taken from the ramp support, which must be
    symmetric). ``mu`` is the chemical potential in coupling units (the
    escape carrier is k0 = sqrt(mu)). The potentials are per internal
    component, sampled on grid.x; both default to zero.

    The ramp should switch off before t0 (shape 'pulse') so the pair has a
    free escape interval; the leakage metric reports how completely it
    left the coupling square.
    """
    if grid.boundary != "dirichlet":
        raise ParameterDomainError("pair evolution uses a Dirichlet box")
    x = grid.x
    if abs(grid.x_min + grid.x_max) > 1e-9 * grid.length:
        raise ParameterDomainError("pair grid must be symmetric about 0")
    if abs(ramp.x_lo + ramp.x_hi) > 1e-12:
        raise ParameterDomainError("coupling support must be symmetric about 0")
    a = ramp.x_hi
    if a <= 0 or a >= grid.x_max:
        raise ParameterDomainError("coupling support must satisfy 0 < a < x_max")
    if not math.isfinite(ramp.t_off) or ramp.t_off >= t0:
        raise ParameterDomainError(
            "ramp must switch off before t0 (use shape='pulse')"
        )
    k0 = math.sqrt(mu)
    grid.validate_resolution(k0)

    n = x.size
    kn = grid.wavenumbers()
    dt = grid.dt
    # frame: each particle rotated by mu
    phase_half = np.exp(-1j * (kn**2 - mu) * dt / 2.0)
    vp = np.zeros(n) if potential_plus is None else np.asarray(potential_plus, float)
    vm = np.zeros(n) if potential_minus is None else np.asarray(potential_minus, float)
    if vp.shape != x.shape or vm.shape != x.shape:
        raise ParameterDomainError("potential samples must match grid.x")
    phase_pot = np.exp(-1j * (vp[:, None] + vm[None, :]) * dt)
    gmask = ramp.spatial_mask(grid)
    diag = np.arange(n)
    decay = None
    if grid.absorber.width > 0:
        decay_1d = np.exp(-grid.absorber_profile() * dt)
        decay = decay_1d[:, None] * decay_1d[None, :]

    f = np.zeros((n, n), dtype=complex)
    steps = int(round(t0 / dt))
    t = 0.0
    for _ in range(steps):
        t_mid = t + dt / 2.0
        f = _dst2(f, phase_half, phase_half)
        f *= phase_pot
        g_env = ramp.envelope(t_mid)
        if g_env > 1e-14 * ramp.g0_peak:
            f[diag, diag] += (-1j * dt / grid.dx) * g_env * gmask
        if decay is not None:
            f *= decay
        f = _dst2(f, phase_half, phase_half)
        t += dt

    norm2 = float(np.sum(np.abs(f) ** 2) * grid.dx**2)
    inside = np.abs(x) <= a
    leak = float(np.abs(f[np.ix_(inside, inside)]).max()) if inside.any() else 0.0
    if norm2 > PERTURBATION_NORM_LIMIT and raise_on_invalid:
        raise PerturbationInvalidError(
            f"created norm^2 = {norm2:.3g} exceeds {PERTURBATION_NORM_LIMIT}"
        )
    return PairAmplitude(
        f=f, x=x, dx=grid.dx, a=a, t0=t0, created_norm2=norm2, leakage=leak
    )


def quadrant_decompose(fa: PairAmplitude) -> QuadrantDecomposition:
    """Split f by exit side of each atom; weights partition the total norm^2."""
    x, dx, a = fa.x, fa.dx, fa.a
    left = x < -a
    right = x > a
    f = fa.f

    def _restrict(mx, my):
        out = np.zeros_like(f)
        block = np.ix_(mx, my)
        out[block] = f[block]
        return out

    f_lr = _restrict(left, right)
    f_rl = _restrict(right, left)
    w = lambda g: float(np.sum(np.abs(g) ** 2) * dx * dx)
    w_ll = w(_restrict(left, left))
    w_rr = w(_restrict(right, right))
    w_lr = w(f_lr)
    w_rl = w(f_rl)
    total = w(f)
    return QuadrantDecomposition(
        w_ll=w_ll,
        w_lr=w_lr,
        w_rl=w_rl,
        w_rr=w_rr,
        in_region_weight=total - (w_ll + w_lr + w_rl + w_rr),
        total=total,
        f_lr=f_lr,
        f_rl=f_rl,
        x=x,
        dx=dx,
        a=a,
    )


def post_select(q: QuadrantDecomposition) -> ProjectedPairState:
    """Project onto the one-atom-each-side subspace and normalize.

    The |-1 left, +1 right> branch amplitude over (left, right) coordinates
    is f_RL with its arguments swapped (its first argument is the +1 atom's
    position, which after projection lives on the right side).
    """
    n2 = q.w_lr + q.w_rl
    if n2 <= 0.0:
        raise EmptyPostSelectionError("no amplitude with one atom on each side")
    left = q.x < -q.a
    right = q.x > q.a
    psi_a = q.f_lr[np.ix_(left, right)]
    psi_b = q.f_rl[np.ix_(right, left)].T
    scale = 1.0 / math.sqrt(n2)
    return ProjectedPairState(
        psi_a=psi_a * scale,
        psi_b=psi_b * scale,
        dx=q.dx,
        success_probability=n2 / q.total if q.total > 0 else 0.0,
    )


def internal_reduced_state(s: ProjectedPairState) -> np.ndarray:
    """2x2 internal density matrix in the branch basis, motional traced out.

    rho = [[w_A, c], [c*, w_B]] with w_A/B the branch weights and
    c = <psi_B, psi_A> the motional overlap; unit trace. The single-side
    internal state is its diagonal (the off-diagonal element is killed by
    the orthogonal internal label of the other side), so the one-side
    entropy depends on the weights alone while fidelity and CHSH also see
    the coherence c.
    """
    d2 = s.dx * s.dx
    w_a = float(np.sum(np.abs(s.psi_a) ** 2) * d2)
    w_b = float(np.sum(np.abs(s.psi_b) ** 2) * d2)
    c = complex(np.sum(np.conj(s.psi_b) * s.psi_a) * d2)
    rho = np.array([[w_a, c], [np.conj(c), w_b]], dtype=complex)
    return rho / np.trace(rho).real


def single_side_entropy(rho: np.ndarray) -> float:
    """Entanglement entropy of one side's internal qubit, in nats."""
    probs = np.real(np.diag(rho))
    return float(-sum(p * math.log(p) for p in probs if p > 1e-300))


_PAULIS = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


def _embed_two_qubit(rho: np.ndarray) -> np.ndarray:
    """Embed the branch-basis 2x2 into the |+-⟩,|-+⟩ block of two qubits."""
    full = np.zeros((4, 4), dtype=complex)
    full[1, 1] = rho[0, 0]
    full[1, 2] = rho[0, 1]
    full[2, 1] = rho[1, 0]
    full[2, 2] = rho[1, 1]
    return full


def chsh_maximum(rho: np.ndarray) -> float:
    """Largest CHSH value over local settings, from the correlation matrix.

    For a two-qubit state with correlation matrix T_ij = Tr(rho s_i x s_j)
    the optimum is 2*sqrt(m1 + m2) with m1, m2 the two largest eigenvalues
    of T^T T: 2 for product states, 2*sqrt(2) for Bell states.
    """
    full = _embed_two_qubit(rho)
    t = np.empty((3, 3))
    for i, pi in enumerate(_PAULIS):
        for j, pj in enumerate(_PAULIS):
            t[i, j] = float(np.real(np.trace(full @ np.kron(pi, pj))))
    ev = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return 2.0 * math.sqrt(max(ev[0] + ev[1], 0.0))


def bell_metrics(s: ProjectedPairState) -> dict:
    """Fidelity with the symmetric Bell state, CHSH maximum, side entropy.

    Fidelity is <Phi|rho|Phi> with |Phi> = (|+1,-1> + |-1,+1>)/sqrt(2) in
    the internal space; all three quantities are invariant under a global
    phase of the pair amplitude.
    """
    rho = internal_reduced_state(s)
    fidelity = float(
        0.5 * np.real(rho[0, 0] + rho[1, 1] + rho[0, 1] + rho[1, 0])
    )
    return {
        "fidelity": fidelity,
        "chsh": chsh_maximum(rho),
        "entropy": single_side_entropy(rho),
        "success_probability": s.success_probability,
    }


def free_pair_oracle(
    x_targets: np.ndarray,
    y_targets: np.ndarray,
    ramp: CouplingRamp,
    mu: float,
    t0: float,
    source_half_width: float,
    n_source: int = 61,
    n_time: int = 121,
) -> np.ndarray:
    """Quadrature evaluation of the free-space first-order amplitude.

    Independent check of :func:`pair_amplitude` for V = 0: the amplitude is

        f(x, y, t0) = -i * int_0^t0 dt' g(t') K(x - x', t0 - t')
                                            K(y - x', t0 - t') dx'

    with the free single-particle propagator in the mu frame,
    K(z, t) = exp(i mu t) * exp(i z^2 / (4 t)) / sqrt(4 pi i t), integrated
    over the source support by Simpson quadrature in x' and t'. Valid when
    the ramp switches off before t0 (no propagator singularity).
    """
    from scipy.integrate import simpson

    if not math.isfinite(ramp.t_off) or ramp.t_off >= t0:
        raise ParameterDomainError("oracle requires the source off before t0")
    ts = np.linspace(0.0, min(ramp.t_off + 6.0 / ramp.gamma, t0 - 1e-6), n_time)
    xs = np.linspace(-source_half_width, source_half_width, n_source)
    g_t = np.array([ramp.envelope(t) for t in ts])

    def kernel(z, tau):
        return np.exp(1j * mu * tau) * np.exp(1j * z**2 / (4.0 * tau)) / np.sqrt(
            4.0j * math.pi * tau
        )

    out = np.zeros((len(x_targets), len(y_targets)), dtype=complex)
    for i, xt in enumerate(x_targets):
        for j, yt in enumerate(y_targets):
            # integrand over (t', x'), vectorized in x'
            vals_t = np.empty(len(ts), dtype=complex)
            for it, tp in enumerate(ts):
                tau = t0 - tp
                integ = kernel(xt - xs, tau) * kernel(yt - xs, tau)
                vals_t[it] = g_t[it] * simpson(integ, x=xs)
            out[i, j] = -1j * simpson(vals_t, x=ts)
    return out
