"""Lie-Hermitian structures encoded by complex structure constants.

A structure is a Lie algebra ``g`` with an integrable complex structure ``J``
and a compatible inner product.  Fix a unitary basis ``e_1..e_n`` of
``g^{1,0}``; everything is then determined by two arrays::

    C[j, i, k] = <[e_i, e_k], conj(e_j)>
    D[j, i, k] = <[conj(e_j), e_k], e_i>

Arrays are 0-based; every external interface (files, form keys, coframe
tables) uses 1-based indices.  Brackets are rebuilt as::

    [e_i, e_k]       = sum_j C[j,i,k] e_j
    [conj(e_j), e_k] = sum_i -conj(D[k,i,j]) e_i + sum_i D[j,i,k] conj(e_i)

with the remaining brackets fixed by conjugation.  A (0,1)-component of
``[e_i, e_k]`` has no slot, so non-integrable ``J`` cannot be expressed.

The real basis is ``eps_1..eps_2n`` with ``e_a = (eps_a - i eps_{n+a})/sqrt 2``
and ``J eps_a = eps_{n+a}``.  Exterior derivatives of invariant forms follow
``d alpha(X, Y) = -alpha([X, Y])``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, InvalidStructure, NotUnitary

DEFAULT_TOL = 1e-8
RANK_TOL = 1e-9
UNITARY_TOL = 1e-10

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class HermitianLieData:
    """Complex structure constants ``(C, D)`` under a fixed unitary frame.

    Arrays are copied, cast to complex128 and frozen.  Antisymmetry of ``C``
    is checked by :func:`validate`, not here, so that malformed inputs can
    still be inspected.
    """

    C: np.ndarray
    D: np.ndarray
    label: str | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        C = np.array(self.C, dtype=np.complex128)
        D = np.array(self.D, dtype=np.complex128)
        if C.ndim != 3 or len(set(C.shape)) != 1 or C.shape[0] < 1:
            raise DimensionMismatch(f"C must be n x n x n, got shape {C.shape}")
        if D.shape != C.shape:
            raise DimensionMismatch(f"D shape {D.shape} does not match C shape {C.shape}")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(D))):
            raise InvalidStructure("structure constants must be finite")
        C.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def scale(self) -> float:
        """max(|C|_inf, |D|_inf); the unit used to normalise residuals."""
        return float(max(np.abs(self.C).max(), np.abs(self.D).max()))

    def cached(self, key, compute):
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def with_label(self, label: str | None) -> "HermitianLieData":
        return HermitianLieData(self.C, self.D, label)

    def __repr__(self):
        return f"HermitianLieData(n={self.n}, label={self.label!r})"


def zero_data(n: int, label: str | None = None) -> HermitianLieData:
    z = np.zeros((n, n, n), dtype=np.complex128)
    return HermitianLieData(z, z, label)


def normalized(residual: float, scale: float, degree: int) -> float:
    """Divide a residual homogeneous of ``degree`` in (C, D) by ``scale**degree``.

    Makes verdicts invariant under rescaling of the metric.  A zero scale
    means every residual is exactly zero, so the raw value is returned.
    """
    if scale <= 0.0:
        return float(residual)
    return float(residual) / scale**degree


@dataclass(frozen=True)
class RealLieData:
    """Real bracket on the orthonormal basis ``eps``.

    ``bracket[a, b, c]`` is the ``eps_c`` coefficient of ``[eps_a, eps_b]``.
    """

    bracket: np.ndarray
    J: np.ndarray

    @property
    def dim(self) -> int:
        return self.bracket.shape[0]


@dataclass(frozen=True)
class ValidationReport:
    antisymmetry_ok: bool
    jacobi_residual: float
    jacobi_breakdown: tuple[float, float, float]
    real_jacobi_residual: float
    scale: float
    tol: float
    valid: bool


class SeriesReport(NamedTuple):
    dims: list[int]
    step: int | None
    nilpotent: bool


class SalamonResult(NamedTuple):
    success: bool
    U: np.ndarray
    filtration: list[int]


# ---------------------------------------------------------------------------
# basis changes between (e, conj e) and eps
# ---------------------------------------------------------------------------

def real_to_complex_basis(n: int) -> np.ndarray:
    """P with ``eps_A = sum_a P[A, a] f_a`` where ``f = (e_1..e_n, conj e_1..conj e_n)``."""
    P = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for a in range(n):
        P[a, a] = P[a, n + a] = 1 / _SQRT2
        P[n + a, a] = 1j / _SQRT2
        P[n + a, n + a] = -1j / _SQRT2
    return P


def complex_to_real_basis(n: int) -> np.ndarray:
    """Q with ``f_a = sum_A Q[a, A] eps_A``; the inverse of :func:`real_to_complex_basis`."""
    Q = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for a in range(n):
        Q[a, a] = 1 / _SQRT2
        Q[a, n + a] = -1j / _SQRT2
        Q[n + a, a] = 1 / _SQRT2
        Q[n + a, n + a] = 1j / _SQRT2
    return Q


def standard_J(n: int) -> np.ndarray:
    """Matrix of J on eps: column c holds the coordinates of ``J eps_c``."""
    J = np.zeros((2 * n, 2 * n))
    J[n:, :n] = np.eye(n)
    J[:n, n:] = -np.eye(n)
    return J


def complex_bracket(data: HermitianLieData) -> np.ndarray:
    """Bracket tensor on ``f``: ``B[a, b, c]`` is the ``f_c`` coefficient of ``[f_a, f_b]``."""

    def build():
        n, C, D = data.n, data.C, data.D
        B = np.zeros((2 * n, 2 * n, 2 * n), dtype=np.complex128)
        h, a = slice(0, n), slice(n, 2 * n)
        B[h, h, h] = np.einsum("jik->ikj", C)
        B[a, a, a] = np.conj(B[h, h, h])
        # [conj e_j, e_k]: e_i part -conj(D[k,i,j]), conj e_i part D[j,i,k]
        B[a, h, h] = -np.conj(np.einsum("kij->jki", D))
        B[a, h, a] = np.einsum("jik->jki", D)
        B[h, a, :] = -np.transpose(B[a, h, :], (1, 0, 2))
        B.setflags(write=False)
        return B

    return data.cached("complex_bracket", build)


def _real_bracket(data: HermitianLieData) -> np.ndarray:
    def build():
        n = data.n
        P, Q = real_to_complex_basis(n), complex_to_real_basis(n)
        L = np.einsum("Aa,Bb,abc,cC->ABC", P, P, complex_bracket(data), Q, optimize=True)
        L = np.ascontiguousarray(L.real)
        L.setflags(write=False)
        return L

    return data.cached("real_bracket", build)


def _jacobi_tensor(bracket: np.ndarray) -> np.ndarray:
    """Cyclic sum ``[[x_a,x_b],x_c] + [[x_b,x_c],x_a] + [[x_c,x_a],x_b]`` for any bracket tensor."""
    t = np.einsum("abe,ecd->abcd", bracket, bracket)
    return t + np.transpose(t, (2, 0, 1, 3)) + np.transpose(t, (1, 2, 0, 3))


def jacobi_families(data: HermitianLieData) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three families of Jacobi identities written in (C, D), indexed ``[i, j, k, l]``."""
    C, D = data.C, data.D
    Db = np.conj(D)
    F1 = (np.einsum("rij,lrk->ijkl", C, C)
          + np.einsum("rjk,lri->ijkl", C, C)
          + np.einsum("rki,lrj->ijkl", C, C))
    F2 = (np.einsum("rik,ljr->ijkl", C, D)
          + np.einsum("rji,lrk->ijkl", D, D)
          - np.einsum("rjk,lri->ijkl", D, D))
    F3 = (np.einsum("rik,rjl->ijkl", C, Db)
          - np.einsum("jrk,irl->ijkl", C, Db)
          + np.einsum("jri,krl->ijkl", C, Db)
          - np.einsum("lri,kjr->ijkl", D, Db)
          + np.einsum("lrk,ijr->ijkl", D, Db))
    return F1, F2, F3


def _is_antisymmetric(C: np.ndarray) -> bool:
    return bool(np.array_equal(C, -np.transpose(C, (0, 2, 1))))


def _antisymmetrize(C: np.ndarray) -> np.ndarray:
    return 0.5 * (C - np.transpose(C, (0, 2, 1)))


def validate(data: HermitianLieData, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check antisymmetry of ``C`` and the Jacobi identity.

    ``jacobi_residual`` is the largest entry of the three (C, D) families;
    ``real_jacobi_residual`` is the same identity evaluated on the real
    bracket.  Validity compares the residual divided by ``scale**2`` with
    ``tol`` so that the decision does not depend on the size of the constants.
    """
    antisym = _is_antisymmetric(data.C)
    fams = jacobi_families(data)
    breakdown = tuple(float(np.abs(F).max()) for F in fams)
    residual = max(breakdown)
    real_res = float(np.abs(_jacobi_tensor(_real_bracket(data))).max())
    scale = data.scale
    valid = antisym and normalized(residual, scale, 2) < tol and normalized(real_res, scale, 2) < tol
    return ValidationReport(antisym, residual, breakdown, real_res, scale, tol, valid)


def require_valid(data: HermitianLieData, tol: float = DEFAULT_TOL) -> None:
    def check():
        return validate(data, tol)

    report = data.cached(("validate", tol), check)
    if not report.valid:
        raise InvalidStructure(
            f"invalid structure {data.label or ''}: antisymmetry_ok={report.antisymmetry_ok}, "
            f"jacobi_residual={report.jacobi_residual:.3e}")


def realify(data: HermitianLieData) -> RealLieData:
    require_valid(data)
    return RealLieData(_real_bracket(data), standard_J(data.n))


def complexify(real: RealLieData) -> HermitianLieData:
    """Read (C, D) back off a real bracket; inverse of :func:`realify`."""
    n = real.dim // 2
    P, Q = real_to_complex_basis(n), complex_to_real_basis(n)
    B = np.einsum("aA,bB,ABC,Cc->abc", Q, Q, real.bracket, P, optimize=True)
    h, a = slice(0, n), slice(n, 2 * n)
    C = _antisymmetrize(np.einsum("ikj->jik", B[h, h, h]))
    D = np.einsum("jki->jik", B[a, h, a])
    return HermitianLieData(C, D)


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

def check_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionMismatch(f"U must be square, got {U.shape}")
    dev = np.abs(U.conj().T @ U - np.eye(U.shape[0])).max()
    if dev > tol:
        raise NotUnitary(f"U^H U deviates from the identity by {dev:.3e}")
    return U


def change_frame(data: HermitianLieData, U: np.ndarray) -> HermitianLieData:
    """Constants in the frame ``e'_a = sum_b U[a, b] e_b``."""
    U = check_unitary(U)
    if U.shape[0] != data.n:
        raise DimensionMismatch(f"U is {U.shape[0]}x{U.shape[0]}, structure has n={data.n}")
    Ub = U.conj()
    C = np.einsum("ia,kb,jc,cab->jik", U, U, Ub, data.C, optimize=True)
    D = np.einsum("ia,kb,jc,cab->jik", U, U, Ub, data.D, optimize=True)
    if _is_antisymmetric(data.C):
        C = _antisymmetrize(C)
    return HermitianLieData(C, D, data.label)


def induced_orthogonal(U: np.ndarray) -> np.ndarray:
    """Real orthogonal O with ``eps'_A = sum_B O[A, B] eps_B`` for the frame change U."""
    A, B = U.real, U.imag
    return np.block([[A, B], [-B, A]])


# ---------------------------------------------------------------------------
# linear algebra helpers
# ---------------------------------------------------------------------------

def _threshold(s: np.ndarray, scale: float) -> float:
    top = s.max() if s.size else 0.0
    return RANK_TOL * max(top, scale)


def span_basis(vectors: np.ndarray, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis (as columns) of the span of the rows of ``vectors``."""
    dim = vectors.shape[1]
    if vectors.size == 0:
        return np.zeros((dim, 0), dtype=vectors.dtype)
    _, s, vh = np.linalg.svd(vectors, full_matrices=False)
    keep = s > _threshold(s, scale)
    if not keep.any():
        return np.zeros((dim, 0), dtype=vectors.dtype)
    return vh[keep].T


def null_space(A: np.ndarray, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{x : A x = 0}``."""
    dim = A.shape[1]
    if A.size == 0:
        return np.eye(dim, dtype=A.dtype)
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > _threshold(s, scale)))
    return vh[rank:].conj().T


def complement_projector(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the complement of the column span of ``basis``."""
    m = basis.shape[0]
    return np.eye(m) - basis @ basis.conj().T


# ---------------------------------------------------------------------------
# series and filtrations
# ---------------------------------------------------------------------------

def lower_central_series(data: HermitianLieData) -> SeriesReport:
    """Real dimensions of g, [g,g], [[g,g],g], ... until zero or stationary."""
    require_valid(data)
    L = _real_bracket(data)
    m = L.shape[0]
    scale = float(np.abs(L).max())
    V = np.eye(m)
    dims = [m]
    while dims[-1] > 0:
        brackets = np.einsum("abc,bk->akc", L, V).reshape(-1, m)
        V = span_basis(brackets, scale)
        if V.shape[1] == dims[-1]:
            return SeriesReport(dims, None, False)
        dims.append(V.shape[1])
    return SeriesReport(dims, len(dims) - 1, True)


def is_nilpotent_J(data: HermitianLieData) -> tuple[bool, list[int]]:
    """J-adapted ascending series ``a_l = {X : [X,g], [JX,g] in a_{l-1}}``."""
    require_valid(data)
    L = _real_bracket(data)
    m = L.shape[0]
    J = standard_J(data.n)
    scale = float(np.abs(L).max())
    # ad[(B, c), A] = eps_c coefficient of [eps_A, eps_B]
    ad = np.transpose(L, (1, 2, 0)).reshape(m * m, m)
    basis = np.zeros((m, 0))
    dims: list[int] = []
    while True:
        proj = np.kron(np.eye(m), complement_projector(basis))
        A = np.vstack([proj @ ad, proj @ ad @ J])
        nxt = null_space(A, scale)
        dims.append(nxt.shape[1])
        if nxt.shape[1] == m:
            return True, dims
        if nxt.shape[1] <= basis.shape[1]:
            return False, dims
        basis = nxt


def _holomorphic_brackets(data: HermitianLieData, K: np.ndarray) -> np.ndarray:
    """``g^{1,0}`` parts of ``[X, Y]`` for all pairs of columns X, Y of K (f-coordinates)."""
    B = complex_bracket(data)
    n = data.n
    pairs = np.einsum("ax,by,abc->xyc", K, K, B, optimize=True)
    return pairs[..., :n].reshape(-1, n)


def closed_forms(data: HermitianLieData, within: np.ndarray | None = None) -> np.ndarray:
    """Rows spanning the (1,0)-forms ``alpha`` with ``d alpha`` in the ideal of ``within``.

    A (1,0)-form is given by its row of values on ``e``.  ``within`` holds
    orthonormal rows of previously found forms; ``None`` means closed forms.
    """
    n = data.n
    if within is None or within.shape[0] == 0:
        K = np.eye(2 * n, dtype=np.complex128)
    else:
        hol = null_space(within)  # vectors of g^{1,0} killed by every form in ``within``
        K = np.zeros((2 * n, hol.shape[1] + n), dtype=np.complex128)
        K[:n, : hol.shape[1]] = hol
        K[n:, hol.shape[1]:] = np.eye(n)
    V = _holomorphic_brackets(data, K)
    # alpha(v) = sum_j a_j v_j must vanish for every bracket v
    return null_space(V, data.scale).T


def _extend_rows(rows: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Append to orthonormal ``rows`` an orthonormal basis of ``span(new)`` modulo ``span(rows)``."""
    if rows.shape[0]:
        new = new - (new @ rows.conj().T) @ rows
    extra = span_basis(new, 1.0).T
    return np.vstack([rows, extra]) if rows.shape[0] else extra


def coframe_to_frame(rows: np.ndarray) -> np.ndarray:
    """Frame change U for the unitary coframe ``phi'_i = sum_j rows[i, j] phi_j``."""
    return np.conj(rows)


def salamon_coframe(data: HermitianLieData) -> SalamonResult:
    """Ascending filtration by ``d``-ideals and the adapted unitary frame change."""
    require_valid(data)
    n = data.n
    rows = np.zeros((0, n), dtype=np.complex128)
    filtration: list[int] = []
    while True:
        W = closed_forms(data, rows)
        grown = _extend_rows(rows, W)
        filtration.append(grown.shape[0])
        if grown.shape[0] == n:
            return SalamonResult(True, coframe_to_frame(grown), filtration)
        if grown.shape[0] == rows.shape[0]:
            return SalamonResult(False, np.eye(n, dtype=np.complex128), filtration)
        rows = grown


def salamon_violation(data: HermitianLieData) -> float:
    """Largest entry breaking ``C[j,i,k] = 0 unless j > i or j > k`` and ``D[i,j,k] = 0 unless j > i``."""
    n = data.n
    j, i, k = np.indices((n, n, n))
    c_bad = ~((j > i) | (j > k))
    ii, jj, _ = np.indices((n, n, n))
    d_bad = ~(jj > ii)
    worst = 0.0
    if c_bad.any():
        worst = max(worst, float(np.abs(data.C[c_bad]).max()))
    if d_bad.any():
        worst = max(worst, float(np.abs(data.D[d_bad]).max()))
    return worst
