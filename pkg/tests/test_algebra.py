import numpy as np
import pytest
from hypothesis import given, strategies as st

from idealsim import linalg
from idealsim.algebra import (
    AlgebraElement,
    AlgebraSignature,
    IdealSpec,
    Polynomial,
    commutator_defect,
    is_in_ideal,
    poly_eval,
    quotient_norm,
    quotient_spec_radius,
    random_commuting_family,
)
from idealsim.errors import GenerationFailure, InvalidInput

from conftest import cmat, match_multisets

seeds = st.integers(0, 2**32 - 1)
block_dims = st.lists(st.integers(1, 4), min_size=1, max_size=3)


@st.composite
def ideals(draw):
    dims = draw(block_dims)
    mask = draw(st.lists(st.booleans(), min_size=len(dims), max_size=len(dims)))
    return IdealSpec.of(dims, [b for b, m in enumerate(mask) if m])


def random_element(sig: AlgebraSignature, rng) -> AlgebraElement:
    return AlgebraElement(sig, [cmat(rng, n) for n in sig.block_dims])


def random_ideal_element(ideal: IdealSpec, rng) -> AlgebraElement:
    return AlgebraElement(ideal.signature, [
        cmat(rng, n) if b in ideal.ideal_blocks else np.zeros((n, n))
        for b, n in enumerate(ideal.signature.block_dims)
    ])


class TestTypes:
    def test_signature_validation(self):
        with pytest.raises(InvalidInput):
            AlgebraSignature(())
        with pytest.raises(InvalidInput):
            AlgebraSignature((2, 0))

    def test_ideal_validation(self):
        with pytest.raises(InvalidInput):
            IdealSpec.of([2, 2], [2])
        assert IdealSpec.of([2, 2], []).quotient_blocks == (0, 1)
        assert IdealSpec.whole([2, 3]).quotient_is_zero

    def test_element_validation(self):
        sig = AlgebraSignature((2, 1))
        with pytest.raises(InvalidInput):
            AlgebraElement(sig, [np.eye(2)])
        with pytest.raises(InvalidInput):
            AlgebraElement(sig, [np.eye(2), np.eye(2)])
        with pytest.raises(InvalidInput):
            AlgebraElement(sig, [np.eye(2), [[np.nan]]])

    def test_elements_are_immutable(self):
        a = AlgebraElement.from_blocks(np.eye(2))
        with pytest.raises(ValueError):
            a.blocks[0][0, 0] = 5

    def test_arithmetic(self, rng):
        sig = AlgebraSignature((2, 3))
        a, b = random_element(sig, rng), random_element(sig, rng)
        for x, y, op in [(a + b, None, np.add), (a - b, None, np.subtract), (a @ b, None, np.matmul)]:
            for k in range(2):
                np.testing.assert_allclose(x.blocks[k], op(a.blocks[k], b.blocks[k]))
        assert (a @ a.inv()).allclose(AlgebraElement.identity(sig), atol=1e-10)
        np.testing.assert_allclose((2 * a).blocks[1], 2 * a.blocks[1])
        assert a.norm() == max(linalg.op_norm(x) for x in a.blocks)

    def test_mismatched_signatures(self):
        with pytest.raises(InvalidInput):
            AlgebraElement.from_blocks(np.eye(2)) + AlgebraElement.from_blocks(np.eye(3))


class TestPolynomial:
    def test_degree_and_trailing_zeros(self):
        assert Polynomial([1, 2, 0, 0]).degree == 1
        assert Polynomial([0]).degree == -1
        assert Polynomial([]).degree == -1
        assert Polynomial([1, 2, 0]) == Polynomial([1, 2])

    def test_identity_poly(self, rng):
        a = AlgebraElement.from_blocks(cmat(rng, 3), cmat(rng, 2))
        assert poly_eval(Polynomial([0, 1]), a).allclose(a, atol=0)

    def test_square_minus_one_on_nilpotent(self):
        a = AlgebraElement.from_blocks(np.array([[0, 1], [0, 0]]))
        np.testing.assert_allclose(poly_eval(Polynomial([-1, 0, 1]), a).blocks[0], -np.eye(2))

    @given(seeds, st.integers(0, 4), st.integers(1, 4))
    def test_spectral_mapping(self, seed, deg, n):
        rng = np.random.default_rng(seed)
        p = Polynomial(rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1))
        m = cmat(rng, n) / np.sqrt(n)
        pa = poly_eval(p, AlgebraElement.from_blocks(m))
        assert match_multisets(np.linalg.eigvals(pa.blocks[0]), [p(z) for z in np.linalg.eigvals(m)], 0) <= 1e-8


class TestQuotient:
    def test_whole_ideal_is_zero(self, rng):
        a = AlgebraElement.from_blocks(cmat(rng, 2), cmat(rng, 3))
        assert quotient_norm(a, IdealSpec.whole([2, 3])) == 0.0
        assert quotient_spec_radius(a, IdealSpec.whole([2, 3])) == 0.0

    def test_single_surviving_block(self):
        a = AlgebraElement.from_blocks(np.array([[0, 5], [0, 0]]), np.array([[0.8]]))
        assert quotient_norm(a, IdealSpec.of([2, 1], [0])) == pytest.approx(0.8)

    def test_bounded_by_full_norm(self, rng):
        for _ in range(1000):
            dims = [int(d) for d in rng.integers(1, 4, int(rng.integers(1, 4)))]
            ideal = IdealSpec.of(dims, [b for b in range(len(dims)) if rng.random() < 0.5])
            a = random_element(ideal.signature, rng)
            assert quotient_norm(a, ideal) <= a.norm()

    @given(ideals(), seeds)
    def test_submultiplicative(self, ideal, seed):
        rng = np.random.default_rng(seed)
        a, b = random_element(ideal.signature, rng), random_element(ideal.signature, rng)
        qa, qb = quotient_norm(a, ideal), quotient_norm(b, ideal)
        assert quotient_norm(a @ b, ideal) <= qa * qb * (1 + 1e-12) + 1e-15

    @given(ideals(), seeds)
    def test_ideal_perturbation_is_invisible(self, ideal, seed):
        rng = np.random.default_rng(seed)
        a = random_element(ideal.signature, rng)
        i = random_ideal_element(ideal, rng)
        assert quotient_norm(a + i, ideal) == quotient_norm(a, ideal)

    @given(ideals(), seeds)
    def test_conjugation_by_ideal_similarity(self, ideal, seed):
        rng = np.random.default_rng(seed)
        a = random_element(ideal.signature, rng)
        e = random_ideal_element(ideal, rng) * 0.3
        y = AlgebraElement.identity(ideal.signature) + e
        assert quotient_norm(a.conjugate_by(y), ideal) == quotient_norm(a, ideal)

    @given(ideals(), seeds)
    def test_radius_is_blockwise_max(self, ideal, seed):
        a = random_element(ideal.signature, np.random.default_rng(seed))
        assert a.spec_radius() == max(linalg.spec_radius(b) for b in a.blocks)

    @given(ideals(), seeds, st.integers(0, 3))
    def test_poly_eval_commutes_with_quotient(self, ideal, seed, deg):
        rng = np.random.default_rng(seed)
        a = random_element(ideal.signature, rng)
        p = Polynomial(rng.standard_normal(deg + 1))
        pa = poly_eval(p, a)
        for b in ideal.quotient_blocks:
            single = poly_eval(p, AlgebraElement.from_blocks(a.blocks[b]))
            np.testing.assert_array_equal(pa.blocks[b], single.blocks[0])


class TestMembership:
    def test_zero_and_identity(self):
        ideal = IdealSpec.of([2, 2], [0])
        sig = ideal.signature
        assert is_in_ideal(AlgebraElement.zeros(sig), ideal)[0]
        assert not is_in_ideal(AlgebraElement.identity(sig), ideal)[0]
        assert is_in_ideal(AlgebraElement.identity(sig), IdealSpec.whole([2, 2]))[0]

    def test_reports_worst_off_ideal_entry(self):
        ideal = IdealSpec.of([1, 1], [0])
        ok, worst = is_in_ideal(AlgebraElement.from_blocks([[3.0]], [[1e-6]]), ideal)
        assert not ok and worst == pytest.approx(1e-6)


class TestFamilies:
    def test_single_element_radius(self):
        (a,) = random_commuting_family(IdealSpec.whole([3]), 1, seed=4, radius_target=0.7)
        assert a.spec_radius() == pytest.approx(0.7, abs=1e-8)

    def test_commuting_triple(self):
        ideal = IdealSpec.of([4, 3], [0])
        fam = random_commuting_family(ideal, 3, seed=9, radius_target=0.9, quotient_target=0.6)
        for j in range(3):
            for k in range(j + 1, 3):
                assert np.linalg.norm(
                    np.concatenate([(x @ y - y @ x).ravel() for x, y in zip(fam[j].blocks, fam[k].blocks)])
                ) <= 1e-12 * (1 + fam[j].norm() * fam[k].norm())
                assert commutator_defect(fam[j], fam[k]) <= 1e-12
        for a in fam:
            assert quotient_norm(a, ideal) == pytest.approx(0.6)
        assert max(a.spec_radius() for a in fam) == pytest.approx(0.9, abs=1e-8)

    def test_determinism(self):
        ideal = IdealSpec.of([3, 2], [1])
        f1 = random_commuting_family(ideal, 2, seed=5)
        f2 = random_commuting_family(ideal, 2, seed=5)
        f3 = random_commuting_family(ideal, 2, seed=6)
        assert all(a.allclose(b, atol=0) for a, b in zip(f1, f2))
        assert not all(a.allclose(b, atol=1e-6) for a, b in zip(f1, f3))

    def test_quotient_target_needs_a_quotient(self):
        with pytest.raises(GenerationFailure):
            random_commuting_family(IdealSpec.whole([2]), 1, seed=0, quotient_target=1.0)
