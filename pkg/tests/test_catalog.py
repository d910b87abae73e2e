import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ALL
from nilkl import build_family, is_nilpotent_J, lower_central_series, random_two_step, validate
from nilkl.catalog import (
    COR12_SHAPES,
    COR12_VARIANTS,
    CoframeDifferentials,
    cor12_coframe,
    cor12_latex,
    from_coframe,
    perturb,
    random_unitary,
    solve_n6b_y,
    to_coframe,
    two_step_rank,
)
from nilkl.classify import classify_skl
from nilkl.connections import kl_residual, structure_curvature, torsion_covariant_derivative
from nilkl.algebra import standard_J
from nilkl.errors import BadRange, InvalidStructure, JacobiViolation, ParamOutOfRange, UnknownFamily
from nilkl.forms import metric_form_residuals


class TestCoframe:
    def test_empty_is_abelian(self):
        data = from_coframe(CoframeDifferentials(3))
        assert not data.C.any() and not data.D.any() and data.n == 3

    def test_kodaira(self):
        data = from_coframe(CoframeDifferentials(2, {}, {2: [(1, 1, 0.8)]}))
        assert data.D[0, 1, 0] == -0.8
        assert np.count_nonzero(data.D) == 1 and not data.C.any()

    def test_solvable_example_is_accepted(self):
        # d phi_2 = phi_2 ^ conj(phi_1) closes (d^2 phi_2 = 0); the algebra is solvable
        data = from_coframe(CoframeDifferentials(2, {}, {2: [(2, 1, 1.0)]}))
        assert validate(data).valid
        assert not lower_central_series(data).nilpotent

    def test_non_closing_table(self):
        cd = CoframeDifferentials(2, {}, {1: [(2, 2, 1.0)], 2: [(1, 1, 1.0)]})
        with pytest.raises(JacobiViolation):
            from_coframe(cd)

    def test_bad_indices(self):
        with pytest.raises(BadRange):
            CoframeDifferentials(2, {}, {3: [(1, 1, 1.0)]})
        with pytest.raises(BadRange):
            CoframeDifferentials(2, {2: [(1, 1, 1.0)]})
        with pytest.raises(BadRange):
            CoframeDifferentials(0)

    @pytest.mark.parametrize("data", ALL, ids=lambda d: d.label)
    def test_round_trip(self, data):
        back = from_coframe(to_coframe(data))
        np.testing.assert_allclose(back.C, data.C, atol=1e-15)
        np.testing.assert_allclose(back.D, data.D, atol=1e-15)


class TestFamilies:
    def test_cor12_n2(self):
        data = build_family("cor12", {"n": 2, "lambda": 1.0})
        assert data.D[0, 1, 0] == -1
        assert np.count_nonzero(data.D) == 1 and not data.C.any()

    def test_iwasawa(self, iwasawa):
        assert iwasawa.C[2, 0, 1] == 1 and iwasawa.C[2, 1, 0] == -1
        assert np.count_nonzero(iwasawa.C) == 2 and not iwasawa.D.any()

    def test_abelian(self):
        data = build_family("abelian", {"n": 4})
        assert data.n == 4 and not data.C.any() and not data.D.any()

    def test_errors(self):
        with pytest.raises(UnknownFamily):
            build_family("heisenberg")
        with pytest.raises(ParamOutOfRange):
            build_family("kodaira", {"lambda": 0.0})
        with pytest.raises(ParamOutOfRange):
            build_family("kodaira", {"mu": 1.0})
        with pytest.raises(ParamOutOfRange):
            build_family("abelian", {"n": 0})
        with pytest.raises(UnknownFamily):
            build_family("cor12", {"n": 4, "variant": "c"})
        with pytest.raises(ParamOutOfRange):
            build_family("cor12", {"n": 5, "variant": "b", "lambda2": -1.0})

    def test_nine_forms(self):
        assert len(COR12_VARIANTS) == 9
        assert set(COR12_VARIANTS) == set(COR12_SHAPES)

    def test_latex(self):
        assert cor12_latex(3) == [r"d\varphi_3=\lambda\varphi_1\overline{\varphi}_1+ia\varphi_2\overline{\varphi}_2"]

    def test_n6b_constraint(self):
        params = dict(lambda2=1.5, a=0.7, b=-1.3, c=0.4, x=0.9)
        y = solve_n6b_y(**params)
        assert params["x"] * y == pytest.approx(-params["b"] * params["c"] * (1 + 0.49 / 2.25))
        build_family("cor12", {"n": 6, "variant": "b", **params, "y": y})
        with pytest.raises(ParamOutOfRange):
            build_family("cor12", {"n": 6, "variant": "b", **params, "y": y + 0.1})
        with pytest.raises(ParamOutOfRange):
            solve_n6b_y(1.0, 0.0, 1.0, 1.0, 0.0)
        assert solve_n6b_y(1.0, 0.3, 0.0, 1.0, 0.0) == 0.0

    @given(st.sampled_from(sorted(COR12_VARIANTS)), st.integers(0, 2**32 - 1))
    def test_in_range_parameters_are_skl(self, key, seed):
        rng = np.random.default_rng(seed)
        n, variant = key
        params = {}
        for name in COR12_VARIANTS[key]:
            if name == "y":
                continue
            params[name] = rng.uniform(0.2, 2.0) if name.startswith("lambda") else rng.uniform(-2, 2)
        if key == (6, "b"):
            params["x"] = float(np.sign(params["x"]) * max(abs(params["x"]), 0.3))
        data = build_family("cor12", {"n": n, "variant": variant, **params})
        assert metric_form_residuals(data).pluriclosed < 1e-12 * max(1, data.scale**2)
        d, db = torsion_covariant_derivative(data, "strominger")
        assert max(np.abs(d).max(), np.abs(db).max()) < 1e-10
        assert kl_residual(structure_curvature(data, "strominger"), standard_J(n)).max() < 1e-10

    def test_uncompensated_n5b_is_valid_but_not_skl(self):
        cd = cor12_coframe(5, "b", compensate=False, lambda1=1.0, lambda2=1.0, a=1.0, b=1.0, c=0.0)
        data = from_coframe(cd)
        dec = classify_skl(data)
        assert not dec.verdict and dec.stage == "pluriclosed"
        assert dec.residuals["pluriclosed"] == pytest.approx(2.0)


class TestRandom:
    def test_r_equals_n(self):
        data = random_two_step(3, 3, seed=1)
        assert not data.C.any() and not data.D.any()

    @given(st.integers(1, 6), st.data())
    def test_valid_two_step_nilpotent_J(self, n, draw):
        r = draw.draw(st.integers(1, n))
        seed = draw.draw(st.integers(0, 2**32 - 1))
        data = random_two_step(n, r, seed)
        rep = validate(data)
        assert rep.jacobi_residual < 1e-14 and rep.real_jacobi_residual < 1e-14
        assert len(lower_central_series(data).dims) <= 3
        assert is_nilpotent_J(data)[0]

    def test_deterministic(self):
        a, b = random_two_step(5, 2, 42), random_two_step(5, 2, 42)
        assert a.C.tobytes() == b.C.tobytes() and a.D.tobytes() == b.D.tobytes()
        assert random_two_step(5, 2, 43).D.tobytes() != a.D.tobytes()

    def test_bad_range(self):
        with pytest.raises(BadRange):
            random_two_step(3, 0, 1)
        with pytest.raises(BadRange):
            random_two_step(3, 4, 1)

    def test_rank(self):
        assert two_step_rank(random_two_step(5, 2, 0)) in (2, 3, 4)
        assert two_step_rank(build_family("abelian", {"n": 3})) == 2

    def test_random_unitary(self):
        U = random_unitary(4, 1)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-14)


class TestPerturb:
    def test_zero_magnitude(self, kodaira):
        assert perturb(kodaira, 0.0, seed=1) is kodaira

    def test_kodaira_stays_valid(self, kodaira):
        data = perturb(kodaira, 1.0, seed=3)
        rep = validate(data)
        assert rep.valid and rep.jacobi_residual < 1e-14
        assert not np.array_equal(data.D, kodaira.D)

    def test_rejects_non_two_step(self):
        data = build_family("cor12", {"n": 6, "variant": "c", "a": 0.3, "b": 0.5, "c": 0.2})
        with pytest.raises(InvalidStructure):
            perturb(data, 0.1, seed=0, r=4)
        with pytest.raises(BadRange):
            perturb(data, 0.1, seed=0, r=6)

    def test_rotated_structure_needs_r(self):
        from nilkl import change_frame

        data = change_frame(random_two_step(4, 2, 1), random_unitary(4, 2))
        with pytest.raises(InvalidStructure):
            perturb(data, 0.1, seed=0)
