import cmath
import math

import numpy as np
import pytest

from atomsqueeze import (
    DimensionlessParams,
    interior_modes,
    r_analytic,
    r_from_coefficients,
    r_scattering,
    solve_scattering,
)
from atomsqueeze.errors import (
    ClosedExteriorChannelError,
    InconsistentChannelsError,
)
from atomsqueeze.scattering import BogoliubovCoefficients


def char_poly_eigenvalues(d, M):
    """Oracle: roots of the characteristic polynomial of [[M+d,-1],[-1,M-d]]."""
    # lambda^2 - 2M lambda + (M^2 - d^2 - 1) = 0
    disc = math.sqrt(4 * M * M - 4 * (M * M - d * d - 1.0))
    return (M + disc / 2.0 - M + M, M - disc / 2.0)  # (M + s, M - s)


class TestInteriorModes:
    def test_resonant_symmetric(self):
        m = interior_modes(DimensionlessParams(d=0.0, big_m=10.0, kappa=1.0))
        assert m.eigenvalues == pytest.approx((11.0, 9.0))
        hi, lo = m.eigenvectors
        assert abs(hi[0]) == pytest.approx(1 / math.sqrt(2))
        assert hi[1] == pytest.approx(-hi[0])
        assert lo[1] == pytest.approx(lo[0])

    @pytest.mark.parametrize("d", [0.0, 0.5, 1.7, -2.3])
    def test_matches_characteristic_polynomial(self, d):
        M = 12.0
        got = interior_modes(DimensionlessParams(d=d, big_m=M, kappa=1.0))
        want_hi, want_lo = char_poly_eigenvalues(d, M)
        assert got.eigenvalues[0] == pytest.approx(want_hi, rel=1e-12)
        assert got.eigenvalues[1] == pytest.approx(want_lo, rel=1e-12)
        # eigenvector residuals of the defining matrix
        mat = np.array([[M + d, -1.0], [-1.0, M - d]])
        for lam, vec in zip(got.eigenvalues, got.eigenvectors):
            v = np.array(vec)
            assert np.linalg.norm(mat @ v - lam * v) < 1e-10
            assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-12)

    def test_evanescent_branch(self):
        m = interior_modes(DimensionlessParams(d=0.0, big_m=0.5, kappa=1.0))
        assert m.eigenvalues[1] < 0
        k_lo = m.wavevectors[1]
        assert k_lo.real == pytest.approx(0.0, abs=1e-14)
        assert k_lo.imag > 0

    def test_exterior_flags(self):
        m = interior_modes(DimensionlessParams(d=3.0, big_m=2.0, kappa=1.0))
        assert m.exterior_open == (True, False)


class TestSolveScattering:
    def test_zero_kappa_elastic(self):
        c = solve_scattering(DimensionlessParams(d=0.3, big_m=50.0, kappa=0.0))
        assert abs(c.alpha_p) == pytest.approx(1.0, abs=1e-12)
        assert abs(c.alpha_m) == pytest.approx(1.0, abs=1e-12)
        assert abs(c.beta_p) == pytest.approx(0.0, abs=1e-12)
        assert abs(c.beta_m) == pytest.approx(0.0, abs=1e-12)
        # hard-wall reflection phase in the origin-referenced convention
        assert c.alpha_p == pytest.approx(-1.0 + 0.0j, abs=1e-12)

    def test_closed_exterior_channel(self):
        with pytest.raises(ClosedExteriorChannelError):
            solve_scattering(DimensionlessParams(d=2.5, big_m=2.0, kappa=0.5))

    def test_cross_solver_reference_point(self):
        # analytic oracle at the same point: r = 1.2262 (Eq.-8 value at M=100
        # is within 1e-2 of the numerical scattering result)
        val = r_scattering(DimensionlessParams(d=0.0, big_m=100.0, kappa=1.0))
        ana = r_analytic(DimensionlessParams(d=0.0, big_m=100.0, kappa=1.0))
        assert val.r == pytest.approx(ana.r, abs=1e-2)
        assert val.r == pytest.approx(1.2306, abs=1e-3)  # frozen regression value

    def test_symplectic_constraints_on_grid(self):
        # acceptance-grade identity check on a 20x20 grid at M = 50
        worst_norm = 0.0
        worst_cross = 0.0
        for d in np.linspace(0.0, 3.0, 20):
            for kappa in np.linspace(0.05, 1.3, 20):
                c = solve_scattering(
                    DimensionlessParams(d=float(d), big_m=50.0, kappa=float(kappa))
                )
                n1, n2 = c.norm_defects()
                worst_norm = max(worst_norm, n1, n2)
                worst_cross = max(worst_cross, c.cross_defect())
        assert worst_norm < 1e-10
        assert worst_cross < 1e-10

    def test_channel_ratios_equal(self):
        for d in [0.0, 0.8, 2.1]:
            c = solve_scattering(DimensionlessParams(d=d, big_m=80.0, kappa=1.1))
            t_p = abs(c.beta_p) / abs(c.alpha_p)
            t_m = abs(c.beta_m) / abs(c.alpha_m)
            assert t_p == pytest.approx(t_m, abs=1e-12)

    def test_detuning_symmetry(self):
        for d in [0.4, 1.3, 2.6]:
            r_pos = r_scattering(DimensionlessParams(d=d, big_m=60.0, kappa=0.9)).r
            r_neg = r_scattering(DimensionlessParams(d=-d, big_m=60.0, kappa=0.9)).r
            assert r_pos == pytest.approx(r_neg, rel=1e-10)

    def test_evanescent_interior_handled(self):
        # beyond M < sqrt(1+d^2) the closed form fails but scattering runs
        c = solve_scattering(DimensionlessParams(d=2.0, big_m=2.1, kappa=0.8))
        n1, n2 = c.norm_defects()
        assert max(n1, n2) < 1e-10
        assert c.cross_defect() < 1e-10

    def test_condition_number_reported(self):
        c = solve_scattering(DimensionlessParams(d=0.0, big_m=50.0, kappa=0.7))
        assert c.condition_number > 1.0
        assert math.isfinite(c.condition_number)

    def test_ill_conditioned_warning_near_divergence(self, monkeypatch):
        # conditioning blows up approaching the pole near kappa = pi/2
        conds = []
        for kappa in (1.4, 1.55, 1.5707):
            c = solve_scattering(
                DimensionlessParams(d=0.0, big_m=50.0, kappa=kappa)
            )
            conds.append(c.condition_number)
        assert conds[0] < conds[1] < conds[2]
        assert conds[2] > 1e3 * conds[0]
        # the warning fires when the estimate exceeds the limit; the pole
        # itself sits between representable kappas, so exercise the guard
        # with a limit the near-pole point actually crosses
        from atomsqueeze import scattering as scat

        monkeypatch.setattr(scat, "CONDITION_LIMIT", 1e4)
        with pytest.warns(scat.IllConditionedWarning):
            solve_scattering(DimensionlessParams(d=0.0, big_m=50.0, kappa=1.5707))


class TestConvergenceToClosedForm:
    def test_monotone_in_m(self):
        d_grid = np.linspace(0.0, 3.0, 9)
        k_grid = np.linspace(0.05, 1.3, 9)
        worst = []
        for M in [10.0, 30.0, 100.0, 300.0]:
            w = 0.0
            for d in d_grid:
                for kappa in k_grid:
                    p = DimensionlessParams(d=float(d), big_m=M, kappa=float(kappa))
                    w = max(w, abs(r_scattering(p).r - r_analytic(p).r))
            worst.append(w)
        assert all(b < a for a, b in zip(worst, worst[1:]))
        assert worst[2] <= 0.01  # M = 100


class TestRFromCoefficients:
    def _coeffs(self, alpha, beta):
        return BogoliubovCoefficients(
            alpha_p=alpha,
            beta_p=beta,
            alpha_m=alpha,
            beta_m=beta,
            d=0.0,
            big_m=100.0,
            kappa=1.0,
            condition_number=1.0,
        )

    def test_no_beta_no_squeezing(self):
        assert r_from_coefficients(self._coeffs(1.0, 0.0)).r == 0.0

    def test_definitional_inversion(self):
        c = self._coeffs(cmath.exp(0.3j) * math.cosh(2.0), math.sinh(2.0))
        assert r_from_coefficients(c).r == pytest.approx(2.0, rel=1e-12)

    def test_inconsistent_channels_guard(self):
        c = BogoliubovCoefficients(
            alpha_p=2.0,
            beta_p=1.0,
            alpha_m=2.0,
            beta_m=1.4,
            d=0.0,
            big_m=100.0,
            kappa=1.0,
            condition_number=1.0,
        )
        with pytest.raises(InconsistentChannelsError):
            r_from_coefficients(c)

    def test_above_threshold_flag(self):
        c = self._coeffs(1.0, 1.2)
        assert r_from_coefficients(c).above_threshold
