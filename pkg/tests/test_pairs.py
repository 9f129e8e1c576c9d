import math

import numpy as np
import pytest

from atomsqueeze import (
    CouplingRamp,
    GridSpec,
    bell_metrics,
    internal_reduced_state,
    pair_amplitude,
    post_select,
    quadrant_decompose,
)
from atomsqueeze.errors import (
    EmptyPostSelectionError,
    ParameterDomainError,
    PerturbationInvalidError,
)
from atomsqueeze.pairs import (
    PairAmplitude,
    ProjectedPairState,
    chsh_maximum,
    free_pair_oracle,
    single_side_entropy,
)

A_REGION = 1.5
MU = 4.0


def pair_grid(n=256, half_width=24.0, dt=0.02):
    return GridSpec(x_min=-half_width, x_max=half_width, n_points=n, dt=dt,
                    boundary="dirichlet")


def pulse_ramp(g_peak=0.05, t_on=0.8, t_off=2.2, tau=0.35):
    return CouplingRamp(g0_peak=g_peak, gamma=1.0 / tau, shape="pulse",
                        t_on=t_on, t_off=t_off, x_lo=-A_REGION, x_hi=A_REGION)


def barrier(height, grid, center=3.0, sigma=0.8):
    return height * np.exp(-((grid.x - center) ** 2) / (2.0 * sigma**2))


@pytest.fixture(scope="module")
def symmetric_run():
    grid = pair_grid()
    fa = pair_amplitude(pulse_ramp(), grid, t0=6.0, mu=MU)
    return grid, fa


class TestPairAmplitude:
    def test_zero_coupling_zero_amplitude(self):
        grid = pair_grid(n=64, half_width=8.0, dt=0.05)
        ramp = CouplingRamp(g0_peak=0.0, gamma=4.0, shape="pulse", t_on=0.2,
                            t_off=0.6, x_lo=-1.0, x_hi=1.0)
        fa = pair_amplitude(ramp, grid, t0=1.0, mu=1.0)
        assert np.abs(fa.f).max() == 0.0
        assert fa.created_norm2 == 0.0

    def test_exchange_symmetry(self, symmetric_run):
        _, fa = symmetric_run
        scale = np.abs(fa.f).max()
        assert scale > 0
        assert np.abs(fa.f - fa.f.T).max() < 1e-10 * scale

    def test_escape_leaves_region(self, symmetric_run):
        grid, fa = symmetric_run
        dens = np.abs(fa.f) ** 2
        inside = np.abs(grid.x) <= A_REGION
        in_square = dens[np.ix_(inside, inside)].sum() / dens.sum()
        assert in_square < 5e-3
        # pointwise leakage metric shrinks as the pair escapes
        early = pair_amplitude(pulse_ramp(), grid, t0=3.0, mu=MU)
        assert fa.leakage < early.leakage

    def test_perturbative_scaling(self):
        # first order: amplitude linear in the coupling strength
        grid = pair_grid(n=128, half_width=12.0, dt=0.04)
        fa1 = pair_amplitude(pulse_ramp(g_peak=0.02), grid, t0=3.0, mu=MU)
        fa2 = pair_amplitude(pulse_ramp(g_peak=0.04), grid, t0=3.0, mu=MU)
        assert np.abs(fa2.f - 2.0 * fa1.f).max() < 1e-12 * np.abs(fa2.f).max()

    def test_perturbation_guard(self):
        grid = pair_grid(n=128, half_width=12.0, dt=0.04)
        with pytest.raises(PerturbationInvalidError):
            pair_amplitude(pulse_ramp(g_peak=30.0), grid, t0=3.0, mu=MU)

    def test_requires_pulse_off_before_t0(self):
        grid = pair_grid(n=64, half_width=8.0, dt=0.05)
        ramp = CouplingRamp(g0_peak=0.05, gamma=2.0, shape="tanh", t_on=0.5,
                            x_lo=-1.0, x_hi=1.0)
        with pytest.raises(ParameterDomainError):
            pair_amplitude(ramp, grid, t0=2.0, mu=MU)

    def test_matches_free_propagator_oracle(self):
        # independent quadrature oracle on a small free-space instance,
        # compared at off-region target points. The pulse tail ends well
        # before t0 (no propagator singularity); a strong two-sided
        # absorber removes the fast off-shell source components that free
        # space would radiate away but a closed box reflects.
        from atomsqueeze.dynamics import AbsorberSpec

        grid = GridSpec(x_min=-18.0, x_max=18.0, n_points=240, dt=0.01,
                        boundary="dirichlet",
                        absorber=AbsorberSpec(width=4.0, strength=30.0,
                                              two_sided=True))
        ramp = CouplingRamp(g0_peak=0.03, gamma=1.0 / 0.15, shape="pulse",
                            t_on=0.4, t_off=1.0, x_lo=-0.75, x_hi=0.75)
        t0 = 2.2
        fa = pair_amplitude(ramp, grid, t0=t0, mu=MU)
        targets = [-5.5, -4.0, 4.0, 5.5]
        ix = [int(np.argmin(np.abs(grid.x - t))) for t in targets]
        xt = grid.x[ix]
        oracle = free_pair_oracle(xt, xt, ramp, MU, t0,
                                  source_half_width=0.75,
                                  n_source=121, n_time=201)
        got = fa.f[np.ix_(ix, ix)]
        scale = np.abs(oracle).max()
        assert scale > 0
        assert np.abs(got - oracle).max() < 0.05 * scale

    def test_energy_shell_correlation(self, symmetric_run):
        # the two-atom light cone: with total kinetic energy pinned near
        # 2*mu, the escaped density concentrates on the radial shell
        # sqrt(x^2 + y^2) ~ 2*sqrt(2*mu)*(t0 - t_source)
        grid, fa = symmetric_run
        dens = np.abs(fa.f) ** 2
        x = grid.x
        rho = np.sqrt(x[:, None] ** 2 + x[None, :] ** 2)
        far = rho > 3.0
        w = dens[far]
        r = rho[far]
        hist, edges = np.histogram(r, bins=40, weights=w)
        r_peak = 0.5 * (edges[np.argmax(hist)] + edges[np.argmax(hist) + 1])
        t_mid = 1.5  # center of the source pulse
        assert r_peak == pytest.approx(
            2.0 * math.sqrt(2.0 * MU) * (fa.t0 - t_mid), rel=0.1
        )
        in_shell = w[np.abs(r - r_peak) / r_peak < 0.25].sum()
        assert in_shell > 0.8 * w.sum()


class TestQuadrants:
    def test_partition_is_exact(self, symmetric_run):
        _, fa = symmetric_run
        q = quadrant_decompose(fa)
        s = q.w_ll + q.w_lr + q.w_rl + q.w_rr + q.in_region_weight
        assert s == pytest.approx(q.total, rel=1e-12)
        assert q.in_region_weight >= 0

    def test_symmetric_weights(self, symmetric_run):
        _, fa = symmetric_run
        q = quadrant_decompose(fa)
        assert q.w_ll == pytest.approx(q.w_rr, rel=1e-10)
        assert q.w_lr == pytest.approx(q.w_rl, rel=1e-10)

    def test_single_quadrant_support(self):
        grid = pair_grid(n=64, half_width=8.0, dt=0.05)
        x = grid.x
        f = np.zeros((len(x), len(x)), dtype=complex)
        ll = np.where(x < -2.0)[0]
        f[np.ix_(ll, ll)] = 1.0
        fa = PairAmplitude(f=f, x=x, dx=grid.dx, a=2.0, t0=1.0,
                           created_norm2=1.0, leakage=0.0)
        q = quadrant_decompose(fa)
        assert q.w_ll > 0
        assert q.w_lr == q.w_rl == q.w_rr == 0.0


class TestPostSelection:
    def test_empty_post_selection(self):
        grid = pair_grid(n=64, half_width=8.0, dt=0.05)
        x = grid.x
        f = np.zeros((len(x), len(x)), dtype=complex)
        ll = np.where(x < -2.0)[0]
        f[np.ix_(ll, ll)] = 1.0
        fa = PairAmplitude(f=f, x=x, dx=grid.dx, a=2.0, t0=1.0,
                           created_norm2=1.0, leakage=0.0)
        with pytest.raises(EmptyPostSelectionError):
            post_select(quadrant_decompose(fa))

    def test_success_probability(self, symmetric_run):
        _, fa = symmetric_run
        q = quadrant_decompose(fa)
        s = post_select(q)
        assert s.success_probability == pytest.approx(
            (q.w_lr + q.w_rl) / q.total, rel=1e-12
        )
        # normalized after projection
        d2 = s.dx * s.dx
        total = (np.sum(np.abs(s.psi_a) ** 2) + np.sum(np.abs(s.psi_b) ** 2)) * d2
        assert total == pytest.approx(1.0, rel=1e-12)


class TestInternalState:
    def test_symmetric_case_maximally_entangled(self, symmetric_run):
        _, fa = symmetric_run
        rho = internal_reduced_state(post_select(quadrant_decompose(fa)))
        assert np.trace(rho).real == pytest.approx(1.0, rel=1e-12)
        # both branches equal and fully coherent: rho -> |Phi><Phi|
        assert rho[0, 0].real == pytest.approx(0.5, abs=1e-10)
        assert abs(rho[0, 1]) == pytest.approx(0.5, abs=1e-10)
        assert single_side_entropy(rho) == pytest.approx(math.log(2.0), abs=1e-10)

    def test_product_state(self):
        s = ProjectedPairState(
            psi_a=np.ones((4, 4), dtype=complex) / 4.0,
            psi_b=np.zeros((4, 4), dtype=complex),
            dx=1.0,
            success_probability=1.0,
        )
        rho = internal_reduced_state(s)
        assert single_side_entropy(rho) == 0.0
        m = bell_metrics(s)
        assert m["fidelity"] == pytest.approx(0.5, abs=1e-12)
        assert m["chsh"] == pytest.approx(2.0, abs=1e-9)
        assert m["entropy"] == 0.0


def chsh_by_angle_scan(rho2, n_angles=49):
    """Direct CHSH optimization over measurement settings (oracle).

    Scans unit Bloch vectors (theta, phi) on a product grid for all four
    settings, evaluating E(a, b) = a^T T b from the correlation matrix.
    Independent of the closed-form eigenvalue route; a lower bound that
    approaches the optimum as the grid refines.
    """
    from atomsqueeze.pairs import _PAULIS, _embed_two_qubit

    full = _embed_two_qubit(rho2)
    t = np.empty((3, 3))
    for i, pi in enumerate(_PAULIS):
        for j, pj in enumerate(_PAULIS):
            t[i, j] = float(np.real(np.trace(full @ np.kron(pi, pj))))
    thetas = np.linspace(0.0, math.pi, n_angles)
    phis = np.linspace(0.0, 2.0 * math.pi, 2 * n_angles)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    vecs = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    # E(a, b) = a^T T b; for fixed a, a' the optimal unit b, b' give exactly
    # |T^T (a + a')| and |T^T (a - a')|, so only (a, a') is scanned
    ta = vecs @ t
    sums = np.linalg.norm(ta[:, None, :] + ta[None, :, :], axis=2)
    diffs = np.linalg.norm(ta[:, None, :] - ta[None, :, :], axis=2)
    return float((sums + diffs).max())


class TestBellMetrics:
    def test_ideal_symmetric_values(self, symmetric_run):
        _, fa = symmetric_run
        m = bell_metrics(post_select(quadrant_decompose(fa)))
        assert m["fidelity"] >= 0.999
        assert m["chsh"] == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-3)
        assert m["entropy"] == pytest.approx(math.log(2.0), abs=1e-3)

    def test_chsh_against_angle_scan(self):
        # Horodecki closed form vs direct optimization over settings
        for rho in (
            np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),  # Bell
            np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),  # product
            np.array([[0.6, 0.3], [0.3, 0.4]], dtype=complex),  # partial
            np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, 0.3]]),  # complex c
        ):
            closed = chsh_maximum(rho)
            scanned = chsh_by_angle_scan(rho)
            assert scanned <= closed + 1e-6
            assert scanned == pytest.approx(closed, abs=0.02)

    def test_global_phase_invariance(self, symmetric_run):
        _, fa = symmetric_run
        rotated = PairAmplitude(
            f=fa.f * np.exp(1.23j), x=fa.x, dx=fa.dx, a=fa.a, t0=fa.t0,
            created_norm2=fa.created_norm2, leakage=fa.leakage,
        )
        m0 = bell_metrics(post_select(quadrant_decompose(fa)))
        m1 = bell_metrics(post_select(quadrant_decompose(rotated)))
        assert m1["fidelity"] == pytest.approx(m0["fidelity"], rel=1e-12)
        assert m1["chsh"] == pytest.approx(m0["chsh"], rel=1e-12)
        assert m1["entropy"] == pytest.approx(m0["entropy"], rel=1e-12)


class TestAsymmetryMonotonicity:
    def test_one_sided_barrier_degrades_all_metrics(self):
        # smoke version at coarse resolution; the acceptance suite runs the
        # full five-point sweep on the production grid
        grid = pair_grid(n=192, half_width=20.0, dt=0.03)
        heights = [0.0, 1.0, 2.0]
        fids, ents, chshs = [], [], []
        for h in heights:
            vplus = barrier(h, grid) if h > 0 else None
            fa = pair_amplitude(pulse_ramp(), grid, t0=5.0, mu=MU,
                                potential_plus=vplus)
            m = bell_metrics(post_select(quadrant_decompose(fa)))
            fids.append(m["fidelity"])
            ents.append(m["entropy"])
            chshs.append(m["chsh"])
        assert all(b < a for a, b in zip(fids, fids[1:]))
        assert all(b < a for a, b in zip(ents, ents[1:]))
        assert all(b < a for a, b in zip(chshs, chshs[1:]))
