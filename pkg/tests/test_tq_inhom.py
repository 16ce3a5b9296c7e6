import numpy as np
import pytest
from numpy.testing import assert_allclose

from sovchain.errors import ExceptionalAlpha, NonAdmissible, PoleAtXi
from sovchain.qalgebra import ChainModel, xi_shifted
from sovchain.trigpoly import TrigPoly
from sovchain import sovbasis as sb
from sovchain import spectrum as sp
from sovchain import tq_inhom as ti

ETA = 0.31 + 0.07j


def model(two_s, xi, kappa=1.0):
    return ChainModel(two_s=tuple(two_s), xi=tuple(xi), eta=ETA, kappa=kappa)


D1 = model([1], [0.0])
D2 = model([1, 1], [0.0, 0.7])
D3 = model([1, 2], [0.0, 0.7])

ZETA0 = ti.draw_zeta0(D3, np.random.default_rng(42))


@pytest.fixture(scope="module")
def d2_solutions():
    spec = sp.brute_force_spectrum(D2, seed=3)
    out = []
    for f in spec.functions:
        sol, retries = ti.solve_q_inhom_with_retries(D2, f, zeta0=ZETA0)
        assert retries == 0
        out.append((f, sol))
    return out


@pytest.fixture(scope="module")
def d3_solutions():
    spec = sp.brute_force_spectrum(D3, seed=3)
    return [
        (f, ti.solve_q_inhom_with_retries(D3, f, zeta0=ZETA0)[0])
        for f in spec.functions
    ]


class TestCorrectionTerm:
    def test_vanishes_at_every_rung(self):
        for n in range(1, D3.n_sites + 1):
            for h in range(D3.two_s[n - 1] + 1):
                val = ti.f_inhom(D3, 0.4 + 0.2j, xi_shifted(D3, n, h))
                assert abs(val) < 1e-13

    def test_single_site_explicit_form(self):
        # One spin-1/2 site: prefactor 2*exp(-eta), the free root shifted by
        # the lone lower rung, and two rung factors.
        xi0 = xi_shifted(D1, 1, 0)
        xi1 = xi_shifted(D1, 1, 1)
        x = 0.9 - 0.3j
        for lam in [0.2 + 0.1j, -0.6 + 0.8j]:
            expected = (
                2.0
                * np.exp(-ETA)
                * np.sinh(lam - x + xi1 + ETA)
                * np.sinh(lam - xi0)
                * np.sinh(lam - xi1)
            )
            assert_allclose(ti.f_inhom(D1, x, lam), expected, rtol=1e-12)

    def test_pointwise_matches_coefficient_route(self):
        x = 0.3 + 0.5j
        poly = ti.f_inhom_poly(D3, x)
        rng = np.random.default_rng(0)
        for lam in rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4):
            assert_allclose(
                poly(complex(lam)), ti.f_inhom(D3, x, complex(lam)), rtol=1e-11
            )


class TestSolve:
    def test_monic_product_reproduces_poly(self, d2_solutions):
        for _, sol in d2_solutions:
            rebuilt = TrigPoly.from_roots(sol.roots)
            diff = rebuilt - sol.poly
            assert diff.max_abs_coeff() < 1e-8 * sol.poly.max_abs_coeff()

    def test_equation_holds_on_grid(self, d2_solutions):
        for f, sol in d2_solutions:
            assert ti.inhom_grid_residual(D2, f, sol) < 1e-8

    def test_equation_holds_on_grid_mixed_spins(self, d3_solutions):
        for f, sol in d3_solutions:
            assert ti.inhom_grid_residual(D3, f, sol) < 1e-8

    def test_zeta0_independence(self, d3_solutions):
        other = ti.draw_zeta0(D3, np.random.default_rng(7))
        for f, sol in d3_solutions:
            sol2 = ti.solve_q_inhom(D3, f, 0.0, other)
            assert ti.root_multiset_distance(sol.roots, sol2.roots) < 1e-7

    def test_root_multisets_distinguish_eigenvalues(self, d3_solutions):
        roots = [sol.roots for _, sol in d3_solutions]
        assert len(roots) == D3.hilbert_dim
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                assert ti.root_multiset_distance(roots[i], roots[j]) > 1e-4

    def test_exceptional_alpha_detected_and_retried(self, d2_solutions):
        f, _ = d2_solutions[0]
        coeffs = ti.det_m_polynomial(D2, f, ZETA0)
        bad_alpha = np.log(np.roots(coeffs[::-1])[0])
        with pytest.raises(ExceptionalAlpha):
            ti.solve_q_inhom(D2, f, bad_alpha, ZETA0)
        sol, retries = ti.solve_q_inhom_with_retries(
            D2, f, zeta0=ZETA0, alpha=bad_alpha
        )
        assert 1 <= retries <= 3
        assert ti.inhom_grid_residual(D2, f, sol) < 1e-8

    def test_admissibility_guard(self):
        with pytest.raises(NonAdmissible):
            ti._require_admissible(np.array([1.0, 0.0, 2.0]))


class TestDeterminantIdentities:
    def test_beta_zero_closed_form(self, d2_solutions):
        f, _ = d2_solutions[0]
        coeffs = ti.det_m_polynomial(D2, f, ZETA0)
        closed = ti.det_m_zero_closed_form(D2, ZETA0)
        assert_allclose(coeffs[0], closed, rtol=1e-8)

    def test_beta_zero_closed_form_mixed_spins(self, d3_solutions):
        f, _ = d3_solutions[0]
        coeffs = ti.det_m_polynomial(D3, f, ZETA0)
        closed = ti.det_m_zero_closed_form(D3, ZETA0)
        assert_allclose(coeffs[0], closed, rtol=1e-8)

    def test_leading_coefficient(self, d3_solutions):
        for f, _ in d3_solutions:
            coeffs = ti.det_m_polynomial(D3, f, ZETA0)
            assert_allclose(
                coeffs[-1], ti.leading_det_coefficient(D3, f), rtol=1e-8
            )

    def test_constant_term_is_eigenvalue_independent(self, d2_solutions):
        dets = [
            ti.det_m_polynomial(D2, f, ZETA0)[0] for f, _ in d2_solutions
        ]
        assert np.max(np.abs(np.diff(dets))) < 1e-10 * abs(dets[0])


class TestReconstruction:
    def test_round_trip_base_values(self, d3_solutions):
        for f, sol in d3_solutions:
            rebuilt, _ = ti.t_from_q_inhom(D3, sol)
            diff = np.abs(
                np.array(rebuilt.base_values) - np.array(f.base_values)
            )
            assert np.max(diff) < 1e-8

    def test_bethe_residuals_small(self, d3_solutions):
        for _, sol in d3_solutions:
            assert np.max(ti.bethe_residuals_inhom(D3, sol)) < 1e-7

    def test_perturbed_root_fails_bethe(self, d3_solutions):
        _, sol = d3_solutions[0]
        bumped = ti.QFunctionInhom(
            model=sol.model,
            alpha=sol.alpha,
            zeta0=sol.zeta0,
            roots=(sol.roots[0] + 1e-3,) + sol.roots[1:],
            lambda_bar=sol.lambda_bar + 1e-3,
            poly=sol.poly,
            top_values=sol.top_values,
        )
        assert np.max(ti.bethe_residuals_inhom(D3, bumped)) > 1e-5

    def test_pole_at_base_point(self):
        roots = (D2.xi[0], 0.5 + 0.3j)
        sol = ti.QFunctionInhom(
            model=D2,
            alpha=0.0,
            zeta0=ZETA0,
            roots=roots,
            lambda_bar=complex(np.sum(roots)),
            poly=TrigPoly.from_roots(roots),
            top_values=(1.0, 1.0),
        )
        with pytest.raises(PoleAtXi):
            ti.t_from_q_inhom(D2, sol)


class TestEigenstateCoordinates:
    def test_gaussian_prefactor_is_one_at_zero(self):
        lam = 0.0
        assert np.exp(-lam * (lam + ETA - 2.0 * 0.37) / (2.0 * ETA)) == 1.0

    def test_dressed_ratios_equal_null_vector(self, d3_solutions):
        for f, sol in d3_solutions:
            qs, _, _ = sp.ladder_nullspace(D3, f)
            for site, arr in enumerate(ti.q_coordinates_inhom(D3, sol)):
                assert np.max(np.abs(arr / arr[0] - qs[site])) < 1e-9

    def test_assembled_states_are_eigenstates(self, d3_solutions):
        basis = sb.build_basis(D3)
        spec = sp.brute_force_spectrum(D3, seed=3)
        for (f, sol), column in zip(d3_solutions, spec.right.T):
            left, right = ti.eigenstates_from_q_inhom(D3, sol, basis)
            for lam in [0.25 + 0.4j, -0.7 - 0.2j]:
                assert sp.eigen_residual(D3, f, right, lam, "right") < 1e-8
                assert sp.eigen_residual(D3, f, left, lam, "left") < 1e-8
            cos = abs(np.vdot(right, column))
            cos /= np.linalg.norm(right) * np.linalg.norm(column)
            assert 1.0 - cos < 1e-8


class TestStructure:
    def test_degree_drop_of_combined_side(self, d3_solutions):
        for _, sol in d3_solutions:
            assert ti.degree_drop_residual(D3, sol) < 1e-9

    def test_combined_side_equals_eigenvalue_times_q(self, d3_solutions):
        # Coefficient-level identity: the combination degree-drops twice and
        # the quotient matches t * Q built from the other direction.
        for f, sol in d3_solutions:
            z = ti.z_combination(D3, sol)
            t_poly = TrigPoly.from_values(D3.xi, tuple(f(x) for x in D3.xi), m=0)
            tq = t_poly * sol.poly
            aligned = tq + TrigPoly(z.parity, z.m1, (0.0,) * (z.m2 + 1))
            diff = z - aligned
            assert diff.max_abs_coeff() < 1e-9 * z.max_abs_coeff()

    def test_correction_free_system_has_only_zero_solution(self, d2_solutions):
        for f, _ in d2_solutions:
            assert ti.homogeneous_rank_check(D2, f, 0.0, ZETA0) > 1e-4


def test_root_multiset_distance_handles_period():
    a = [0.3 + 0.1j, -0.2 + 3.0j]
    b = [-0.2 + 3.0j - 1j * np.pi, 0.3 + 0.1j]
    assert ti.root_multiset_distance(a, b) < 1e-14
    assert ti.root_multiset_distance(a, [0.3 + 0.1j]) == np.inf
