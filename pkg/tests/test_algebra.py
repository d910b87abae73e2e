import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ALL, sl2c
from nilkl import (
    HermitianLieData,
    build_family,
    change_frame,
    complexify,
    is_nilpotent_J,
    lower_central_series,
    random_two_step,
    realify,
    salamon_coframe,
    validate,
)
from nilkl.algebra import (
    complex_to_real_basis,
    induced_orthogonal,
    real_to_complex_basis,
    salamon_violation,
    standard_J,
)
from nilkl.catalog import random_unitary
from nilkl.errors import DimensionMismatch, InvalidStructure, NotUnitary


def test_basis_maps_are_inverse():
    for n in (1, 2, 4):
        P, Q = real_to_complex_basis(n), complex_to_real_basis(n)
        np.testing.assert_allclose(P @ Q, np.eye(2 * n), atol=1e-15)
        # J eps_a = eps_{n+a} and e_a is a +i eigenvector
        J = standard_J(n)
        E = Q[:n].T
        np.testing.assert_allclose(J @ E, 1j * E, atol=1e-15)


class TestValidate:
    def test_abelian(self):
        rep = validate(build_family("abelian", {"n": 3}))
        assert rep.valid and rep.antisymmetry_ok and rep.jacobi_residual == 0

    def test_iwasawa(self, iwasawa):
        rep = validate(iwasawa)
        assert rep.valid and rep.jacobi_residual == 0

    def test_deleted_partner_breaks_antisymmetry(self, iwasawa):
        C = np.array(iwasawa.C)
        C[2, 1, 0] = 0
        rep = validate(HermitianLieData(C, iwasawa.D))
        assert not rep.antisymmetry_ok and not rep.valid

    def test_jacobi_failure(self):
        # d phi_2 = phi_1 ^ conj(phi_1), d phi_1 = phi_2 ^ conj(phi_2) does not close
        D = np.zeros((2, 2, 2), dtype=complex)
        D[0, 1, 0] = -1
        D[1, 0, 1] = -1
        rep = validate(HermitianLieData(np.zeros_like(D), D))
        assert rep.antisymmetry_ok and not rep.valid

    def test_shape_checks(self):
        with pytest.raises(DimensionMismatch):
            HermitianLieData(np.zeros((2, 2, 2)), np.zeros((3, 3, 3)))
        with pytest.raises(DimensionMismatch):
            HermitianLieData(np.zeros((2, 2)), np.zeros((2, 2)))
        with pytest.raises(InvalidStructure):
            HermitianLieData(np.full((1, 1, 1), np.nan), np.zeros((1, 1, 1)))

    @pytest.mark.parametrize("data", ALL, ids=lambda d: d.label)
    def test_complex_and_real_jacobi_agree(self, data):
        rep = validate(data)
        assert rep.valid
        assert rep.jacobi_residual < 1e-12 * max(1, rep.scale**2)
        assert rep.real_jacobi_residual < 1e-12 * max(1, rep.scale**2)

    def test_realify_rejects_invalid(self, iwasawa):
        C = np.array(iwasawa.C)
        C[2, 1, 0] = 0
        with pytest.raises(InvalidStructure):
            realify(HermitianLieData(C, iwasawa.D))


class TestRealify:
    def test_kodaira_bracket(self):
        lam = 1.7
        L = realify(build_family("kodaira", {"lambda": lam})).bracket
        expected = np.zeros((4, 4, 4))
        expected[0, 2, 3], expected[2, 0, 3] = np.sqrt(2) * lam, -np.sqrt(2) * lam
        np.testing.assert_allclose(L, expected, atol=1e-14)

    def test_iwasawa_is_complex_heisenberg(self, iwasawa):
        real = realify(iwasawa)
        # complex bilinear bracket: [J x, y] = J [x, y]
        JL = np.einsum("xa,xbc->abc", real.J, real.bracket)
        LJ = np.einsum("abx,cx->abc", real.bracket, real.J)
        np.testing.assert_allclose(JL, LJ, atol=1e-14)

    @pytest.mark.parametrize("data", ALL, ids=lambda d: d.label)
    def test_round_trip(self, data):
        back = complexify(realify(data))
        np.testing.assert_allclose(back.C, data.C, atol=1e-13)
        np.testing.assert_allclose(back.D, data.D, atol=1e-13)

    @pytest.mark.parametrize("data", ALL, ids=lambda d: d.label)
    def test_real_bracket_is_antisymmetric(self, data):
        L = realify(data).bracket
        np.testing.assert_allclose(L, -L.transpose(1, 0, 2), atol=1e-14)


class TestChangeFrame:
    def test_diagonal_phase(self, iwasawa):
        theta = 0.83
        U = np.diag([np.exp(1j * theta), 1, 1])
        C = change_frame(iwasawa, U).C
        assert C[2, 0, 1] == pytest.approx(np.exp(1j * theta) * iwasawa.C[2, 0, 1])

    def test_not_unitary(self, kodaira):
        with pytest.raises(NotUnitary):
            change_frame(kodaira, np.diag([2.0, 1.0]))
        with pytest.raises(DimensionMismatch):
            change_frame(kodaira, np.ones((2, 3)))

    @given(st.integers(0, 10_000), st.integers(0, 10_000))
    def test_functorial(self, s1, s2):
        data = random_two_step(4, 2, seed=s1)
        U1, U2 = random_unitary(4, s1 + 1), random_unitary(4, s2)
        twice = change_frame(change_frame(data, U1), U2)
        once = change_frame(data, U2 @ U1)
        np.testing.assert_allclose(twice.C, once.C, atol=1e-12)
        np.testing.assert_allclose(twice.D, once.D, atol=1e-12)

    @given(st.integers(0, 10_000))
    def test_real_bracket_transforms_orthogonally(self, seed):
        data = random_two_step(3, 2, seed=seed)
        U = random_unitary(3, seed)
        O = induced_orthogonal(U)
        np.testing.assert_allclose(O @ O.T, np.eye(6), atol=1e-13)
        np.testing.assert_allclose(O @ standard_J(3), standard_J(3) @ O, atol=1e-13)
        L = realify(data).bracket
        L2 = realify(change_frame(data, U)).bracket
        np.testing.assert_allclose(L2, np.einsum("Aa,Bb,abc,Cc->ABC", O, O, L, O), atol=1e-12)

    @given(st.integers(0, 10_000))
    def test_validity_is_frame_invariant(self, seed):
        data = random_two_step(4, 3, seed=seed)
        assert validate(change_frame(data, random_unitary(4, seed))).valid


class TestSeries:
    def test_kodaira(self, kodaira):
        rep = lower_central_series(kodaira)
        assert rep.dims == [4, 1, 0] and rep.step == 2 and rep.nilpotent

    def test_iwasawa(self, iwasawa):
        rep = lower_central_series(iwasawa)
        assert rep.dims == [6, 2, 0] and rep.nilpotent

    def test_abelian(self):
        rep = lower_central_series(build_family("abelian", {"n": 2}))
        assert rep.dims == [4, 0] and rep.step == 1

    def test_n1_solvable_not_nilpotent(self):
        D = np.ones((1, 1, 1), dtype=complex)
        rep = lower_central_series(HermitianLieData(np.zeros_like(D), D))
        assert not rep.nilpotent and rep.step is None and rep.dims[-1] == 1

    def test_sl2c(self):
        assert not lower_central_series(sl2c()).nilpotent

    @given(st.integers(1, 5), st.data())
    def test_two_step(self, n, data):
        r = data.draw(st.integers(1, n))
        seed = data.draw(st.integers(0, 10_000))
        rep = lower_central_series(random_two_step(n, r, seed))
        assert rep.nilpotent and len(rep.dims) <= 3


class TestNilpotentJ:
    def test_kodaira(self, kodaira):
        ok, dims = is_nilpotent_J(kodaira)
        assert ok

    def test_n1_solvable(self):
        D = np.ones((1, 1, 1), dtype=complex)
        assert is_nilpotent_J(HermitianLieData(np.zeros_like(D), D)) == (False, [0])

    @pytest.mark.parametrize("data", ALL, ids=lambda d: d.label)
    def test_implies_nilpotent(self, data):
        if is_nilpotent_J(data)[0]:
            assert lower_central_series(data).nilpotent


class TestSalamon:
    def test_abelian(self):
        res = salamon_coframe(build_family("abelian", {"n": 3}))
        assert res.success and res.filtration == [3]
        np.testing.assert_allclose(np.abs(res.U), np.eye(3), atol=1e-14)

    def test_iwasawa(self, iwasawa):
        res = salamon_coframe(iwasawa)
        assert res.success and res.filtration == [2, 3]

    def test_n1_solvable(self):
        D = np.ones((1, 1, 1), dtype=complex)
        res = salamon_coframe(HermitianLieData(np.zeros_like(D), D))
        assert not res.success and res.filtration == [0]

    @pytest.mark.parametrize("data", ALL, ids=lambda d: d.label)
    def test_agrees_with_nilpotent_J(self, data):
        res = salamon_coframe(data)
        assert res.success == is_nilpotent_J(data)[0]
        if res.success:
            assert salamon_violation(change_frame(data, res.U)) < 1e-10 * max(1, data.scale)
