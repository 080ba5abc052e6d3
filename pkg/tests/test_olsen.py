import numpy as np
import pytest
from hypothesis import given, strategies as st

from idealsim import linalg
from idealsim.algebra import AlgebraElement, IdealSpec, Polynomial, poly_eval, quotient_norm
from idealsim.errors import InvalidInput, NotAnnihilated, NotInSigma, PreconditionViolation, QuotientEmpty
from idealsim.instances import (
    jordan_instance,
    jordan_matrix,
    nilpotent_instance,
    normal_quotient_instance,
    sigma_instance,
)
from idealsim.olsen import (
    approximate_olsen,
    fill_eigenvalue,
    kernel_triangularize,
    minimal_polynomial_factors,
    nilpotent_certificate,
    nilpotent_poly_radius,
    olsen_perturbation,
    sigma_membership,
    spectral_fill,
)

from conftest import cmat, match_multisets

seeds = st.integers(0, 2**31 - 1)
T = Polynomial([0, 1])
T2 = Polynomial([0, 0, 1])
J2 = np.array([[0, 1.0], [0, 0]])
IDEAL_22 = IdealSpec.of([2, 2], [0])
EXAMPLE = AlgebraElement.from_blocks(np.array([[0, 3.0], [0, 0]]), J2)


def random_ideal_perturbation(ideal, rng, scale=1.0):
    return AlgebraElement(ideal.signature, [
        scale * cmat(rng, n) if b in ideal.ideal_blocks else np.zeros((n, n))
        for b, n in enumerate(ideal.signature.block_dims)
    ])


class TestSigma:
    def test_nilpotent_quotient_is_member(self):
        member, margins = sigma_membership(EXAMPLE, IDEAL_22, [T])
        assert member and margins == [pytest.approx(1.0)]

    def test_normal_quotient_is_not_member(self):
        t = AlgebraElement.from_blocks(J2, np.diag([0.5, -1.0]))
        assert not sigma_membership(t, IDEAL_22, [T])[0]

    @given(seeds)
    def test_invariant_under_ideal_perturbation(self, seed):
        rng = np.random.default_rng(seed)
        ideal, t = sigma_instance(seed, [T, T2])
        k = random_ideal_perturbation(ideal, rng, scale=5.0)
        assert sigma_membership(t, ideal, [T, T2]) == sigma_membership(t + k, ideal, [T, T2])

    def test_zero_polynomial_is_never_in_sigma(self):
        assert not sigma_membership(EXAMPLE, IDEAL_22, [Polynomial([0])])[0]


class TestFill:
    def test_already_scalar(self):
        t = AlgebraElement.from_blocks(np.zeros((2, 2)), J2)
        assert spectral_fill(t, IDEAL_22).norm() == 0.0

    def test_example(self):
        filled = EXAMPLE + spectral_fill(EXAMPLE, IDEAL_22)
        assert fill_eigenvalue(EXAMPLE, IDEAL_22) == 0
        np.testing.assert_array_equal(filled.blocks[0], np.zeros((2, 2)))
        np.testing.assert_array_equal(filled.blocks[1], J2)
        np.testing.assert_array_equal(filled.eigenvalues(), np.zeros(4))

    @given(seeds)
    def test_spectrum_inside_quotient_spectrum(self, seed):
        ideal, t = normal_quotient_instance(seed)
        filled = t + spectral_fill(t, ideal)
        quotient_ev = np.concatenate([np.linalg.eigvals(t.blocks[b]) for b in ideal.quotient_blocks])
        for z in filled.eigenvalues():
            assert np.min(np.abs(quotient_ev - z)) <= 1e-8 * (1 + abs(z))

    @given(seeds)
    def test_idempotent(self, seed):
        ideal, t = normal_quotient_instance(seed)
        filled = t + spectral_fill(t, ideal)
        # T + (lambda_0 1 - T_b) is lambda_0 1 up to one rounding of the addition
        assert spectral_fill(filled, ideal).norm() <= 4 * np.finfo(float).eps * (1 + t.norm())

    def test_tie_break(self):
        ideal = IdealSpec.of([1, 2], [0])
        t = AlgebraElement.from_blocks([[5.0]], np.diag([1j, -1j]))
        assert fill_eigenvalue(t, ideal) == 1j
        t = AlgebraElement.from_blocks([[5.0]], np.diag([-1, 1]))
        assert fill_eigenvalue(t, ideal) == 1

    def test_needs_a_quotient(self):
        with pytest.raises(QuotientEmpty):
            spectral_fill(EXAMPLE, IdealSpec.whole([2, 2]))


class TestOlsen:
    def test_example(self):
        out = olsen_perturbation(EXAMPLE, IDEAL_22, [T])
        assert out.achieved[0] == pytest.approx(1.0, abs=1e-12)
        assert out.targets == [pytest.approx(1.0)]
        assert out.in_ideal_residual == 0.0

    def test_square_of_three_step_nilpotent(self):
        j3 = jordan_matrix([(0, 3)])
        ideal = IdealSpec.of([2, 3], [0])
        t = AlgebraElement.from_blocks(np.array([[1.0, 2.0], [0.5, -1.0]]), j3)
        assert quotient_norm(poly_eval(T2, t), ideal) == pytest.approx(1.0)
        out = olsen_perturbation(t, ideal, [T2])
        assert abs(out.achieved[0] - 1.0) <= 1e-6

    @given(seeds)
    def test_two_polynomials_one_perturbation(self, seed):
        ideal, t = sigma_instance(seed, [T, T2])
        out = olsen_perturbation(t, ideal, [T, T2])
        tk = t + out.k
        for p, target in zip([T, T2], out.targets):
            assert abs(poly_eval(p, tk).norm() - target) <= 1e-6
        assert out.in_ideal_residual <= 1e-12

    @given(seeds)
    def test_no_perturbation_beats_the_quotient(self, seed):
        rng = np.random.default_rng(seed)
        ideal, t = sigma_instance(seed, [T, T2])
        for _ in range(20):
            k = random_ideal_perturbation(ideal, rng, scale=float(rng.uniform(0.1, 3)))
            for p in (T, T2):
                assert poly_eval(p, t + k).norm() >= quotient_norm(poly_eval(p, t), ideal) - 1e-9

    def test_rejects_non_member(self):
        t = AlgebraElement.from_blocks(J2, np.diag([0.5, -1.0]))
        with pytest.raises(NotInSigma):
            olsen_perturbation(t, IDEAL_22, [T])


class TestApproximate:
    def test_normal_quotient(self):
        t = AlgebraElement.from_blocks(np.array([[0, 9.0], [0, 0]]), np.diag([0.5, -1.0]))
        out = approximate_olsen(t, IDEAL_22, [T], 1e-2)
        assert 1.0 - 1e-9 <= out.achieved[0] <= 1.0 + 1e-2

    @given(seeds)
    def test_schedule(self, seed):
        ideal, t = normal_quotient_instance(seed)
        polys = [T, Polynomial([-1, 0, 1])]
        for eps in (1e-1, 1e-2, 1e-3):
            out = approximate_olsen(t, ideal, polys, eps)
            for a, target in zip(out.achieved, out.targets):
                assert target - 1e-9 <= a <= target + eps + 1e-8

    def test_constant_polynomial(self):
        ideal, t = normal_quotient_instance(2)
        out = approximate_olsen(t, ideal, [Polynomial([1])], 1e-3)
        assert out.achieved == [1.0] and out.targets == [1.0]

    def test_rejects_bad_epsilon(self):
        with pytest.raises(InvalidInput):
            approximate_olsen(EXAMPLE, IDEAL_22, [T], 0.0)


class TestTriangularize:
    def test_jordan_block_is_fixed(self):
        j3 = jordan_matrix([(0, 3)])
        tri = kernel_triangularize(j3, [(0, 3)])
        np.testing.assert_allclose(np.abs(tri.u) @ np.abs(tri.u).T, np.eye(3), atol=1e-14)
        assert np.count_nonzero(np.abs(tri.u) > 1e-12) == 3
        assert tri.diagonal_scalars == [0, 0, 0]
        assert tri.residual == 0.0

    def test_diagonal(self):
        tri = kernel_triangularize(np.diag([2.0, 5.0]), [(2, 1), (5, 1)])
        assert tri.diagonal_scalars == [2, 5]
        assert tri.residual <= 1e-12

    def test_conjugated_jordan(self, rng):
        j = jordan_matrix([(1, 2), (3, 1)])
        g = np.eye(3) + 0.3 * cmat(rng, 3) / np.sqrt(3)
        t = g @ j @ np.linalg.inv(g)
        tri = kernel_triangularize(t, [(1, 2), (3, 1)])
        scalars = [s for s, d in zip(tri.chain_scalars, tri.chain_dims) for _ in range(d)]
        assert scalars == [1, 1, 3]
        assert tri.residual <= 1e-8
        assert tri.unitary_defect <= 1e-10
        assert tri.diagonal_defect <= 1e-8

    @given(seeds)
    def test_recovers_planted_structure(self, seed):
        inst = jordan_instance(seed)
        factors = minimal_polynomial_factors(inst.t)
        assert [k for _, k in factors] == [k for _, k in inst.planted_factors]
        for (z, _), (w, _) in zip(factors, inst.planted_factors):
            assert abs(z - w) <= 1e-7
        tri = kernel_triangularize(inst.t, factors)
        assert tri.residual <= 1e-8 * (1 + linalg.op_norm(inst.t))
        # unitary conjugation keeps the spectrum; the diagonal carries it with chain multiplicities
        x = tri.u.conj().T @ inst.t @ tri.u
        ev = np.linalg.eigvals(x)
        diag = [s for s, d in zip(tri.chain_scalars, tri.chain_dims) for _ in range(d)]
        assert match_multisets(np.diag(x), diag, 0) <= 1e-8
        assert match_multisets(ev, np.linalg.eigvals(inst.t), 0) <= 1e-4  # defective: eps ** (1/k)

    def test_rejects_wrong_factors(self):
        with pytest.raises(NotAnnihilated):
            kernel_triangularize(jordan_matrix([(0, 3)]), [(0, 2)])


class TestNilpotent:
    def test_constant_term(self):
        j3 = jordan_matrix([(0, 3)])
        assert nilpotent_poly_radius(j3, Polynomial([7, 0, 1])) == pytest.approx(7.0)
        assert nilpotent_poly_radius(j3, T) == 0.0

    @given(seeds)
    def test_certificate(self, seed):
        t, p = nilpotent_instance(seed)
        value = nilpotent_poly_radius(t, p)
        assert value == pytest.approx(abs(p(0.0)), abs=1e-8)
        assert abs(nilpotent_certificate(t, p) - value) <= 1e-8

    @given(seeds)
    def test_shifted_polynomial_is_nilpotent(self, seed):
        t, p = nilpotent_instance(seed)
        shifted = Polynomial([0] + list(p.coefficients[1:])) if p.degree >= 1 else Polynomial([0])
        assert nilpotent_certificate(t, shifted) <= 1e-8

    def test_rejects_non_nilpotent(self):
        with pytest.raises(PreconditionViolation):
            nilpotent_poly_radius(np.eye(2), T)
