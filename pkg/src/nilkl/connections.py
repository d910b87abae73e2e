"""Torsion, canonical connections, curvature and Kähler-like residuals.

Hermitian connections are given by ``A[j, i, k] = <nabla_{e_k} e_i, conj(e_j)>``.
Metric compatibility fixes the (0,1)-derivatives::

    <nabla_{conj e_k} e_i, conj(e_j)> = -conj(A[i, j, k])

Every connection is also carried as a real array on the orthonormal basis
``eps``: ``real[a, b, c] = <nabla_{eps_a} eps_b, eps_c>``.  Curvature is
always evaluated from the real array, so one routine serves all four kinds.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .algebra import (
    HermitianLieData,
    RealLieData,
    complex_to_real_basis,
    real_to_complex_basis,
    realify,
    require_valid,
    standard_J,
)
from .errors import DimensionMismatch, UnknownKind
from .forms import InvariantForm, MatrixForm


class ConnectionKind(str, Enum):
    CHERN = "chern"
    STROMINGER = "strominger"
    GAUDUCHON0 = "gauduchon0"
    RIEMANNIAN = "riemannian"


HERMITIAN_KINDS = (ConnectionKind.CHERN, ConnectionKind.STROMINGER, ConnectionKind.GAUDUCHON0)
ALL_KINDS = HERMITIAN_KINDS + (ConnectionKind.RIEMANNIAN,)


def as_kind(kind) -> ConnectionKind:
    try:
        return ConnectionKind(kind)
    except ValueError:
        raise UnknownKind(f"unknown connection kind {kind!r}; expected one of "
                          f"{[k.value for k in ConnectionKind]}") from None


@dataclass(frozen=True)
class ChernTorsion:
    """``T[j, i, k]`` with ``T(e_i, e_k) = 2 sum_j T[j, i, k] e_j``."""

    T: np.ndarray


@dataclass(frozen=True)
class ConnectionCoefficients:
    kind: ConnectionKind
    complex: np.ndarray | None
    real: np.ndarray


@dataclass(frozen=True)
class CurvatureTensor:
    """``R[a, b, c, d] = <R(eps_a, eps_b) eps_c, eps_d>``."""

    R: np.ndarray


@dataclass(frozen=True)
class KLResidual:
    sym: float
    jinv: float

    def max(self) -> float:
        return max(self.sym, self.jinv)


def chern_torsion(data: HermitianLieData) -> ChernTorsion:
    require_valid(data)
    C, D = data.C, data.D
    # grouped so that the result is exactly antisymmetric in floating point
    T = 0.5 * ((np.transpose(D, (0, 2, 1)) - D) - C)
    return ChernTorsion(T)


def hermitian_coefficients(data: HermitianLieData, kind) -> np.ndarray:
    kind = as_kind(kind)
    C, D = data.C, data.D
    Dt = np.transpose(D, (0, 2, 1))
    if kind is ConnectionKind.CHERN:
        return D.copy()
    if kind is ConnectionKind.STROMINGER:
        return -C + Dt
    if kind is ConnectionKind.GAUDUCHON0:
        return D + chern_torsion(data).T
    raise UnknownKind(f"{kind.value} is not a Hermitian connection")


def complex_frame_coefficients(A: np.ndarray) -> np.ndarray:
    """``G[a, b, c]``: the ``f_c`` coefficient of ``nabla_{f_a} f_b`` on ``f = (e, conj e)``."""
    n = A.shape[0]
    G = np.zeros((2 * n, 2 * n, 2 * n), dtype=np.complex128)
    h, a = slice(0, n), slice(n, 2 * n)
    G[h, h, h] = np.einsum("jik->kij", A)                   # nabla_{e_k} e_i
    G[a, h, h] = -np.conj(np.einsum("ijk->kij", A))         # nabla_{conj e_k} e_i
    G[h, a, a] = -np.einsum("ijk->kij", A)                  # nabla_{e_k} conj e_i
    G[a, a, a] = np.conj(np.einsum("jik->kij", A))          # nabla_{conj e_k} conj e_i
    return G


def _to_real(G: np.ndarray) -> np.ndarray:
    n = G.shape[0] // 2
    P, Q = real_to_complex_basis(n), complex_to_real_basis(n)
    return np.einsum("Aa,Bb,abc,cC->ABC", P, P, G, Q, optimize=True).real


def _to_complex_frame(G_real: np.ndarray) -> np.ndarray:
    n = G_real.shape[0] // 2
    P, Q = real_to_complex_basis(n), complex_to_real_basis(n)
    return np.einsum("aA,bB,ABC,Cc->abc", Q, Q, G_real, P, optimize=True)


def levi_civita(bracket: np.ndarray) -> np.ndarray:
    """Koszul formula on an orthonormal basis with constant coefficients."""
    L = bracket
    return 0.5 * (L - np.transpose(L, (2, 0, 1)) + np.transpose(L, (1, 2, 0)))


def connection(data: HermitianLieData, kind) -> ConnectionCoefficients:
    kind = as_kind(kind)
    require_valid(data)

    def build():
        if kind is ConnectionKind.RIEMANNIAN:
            return ConnectionCoefficients(kind, None, levi_civita(realify(data).bracket))
        A = hermitian_coefficients(data, kind)
        return ConnectionCoefficients(kind, A, _to_real(complex_frame_coefficients(A)))

    return data.cached(("connection", kind), build)


def real_torsion(conn: ConnectionCoefficients, real_data: RealLieData) -> np.ndarray:
    """``Tor[a, b, c] = <nabla_a eps_b - nabla_b eps_a - [eps_a, eps_b], eps_c>``."""
    G = conn.real
    return G - np.transpose(G, (1, 0, 2)) - real_data.bracket


def curvature(conn: ConnectionCoefficients, real_data: RealLieData) -> CurvatureTensor:
    G, L = conn.real, real_data.bracket
    if G.shape != L.shape:
        raise DimensionMismatch(f"connection shape {G.shape} vs bracket shape {L.shape}")
    R = (np.einsum("bce,aed->abcd", G, G)
         - np.einsum("ace,bed->abcd", G, G)
         - np.einsum("abe,ecd->abcd", L, G))
    return CurvatureTensor(R)


def structure_curvature(data: HermitianLieData, kind) -> CurvatureTensor:
    kind = as_kind(kind)
    return data.cached(("curvature", kind), lambda: curvature(connection(data, kind), realify(data)))


def holomorphic_basis(J: np.ndarray) -> np.ndarray:
    """Unitary basis of the +i eigenspace of J, as columns in eps-coordinates."""
    m = J.shape[0]
    n = m // 2
    if np.array_equal(J, standard_J(n)):
        return complex_to_real_basis(n)[:n].T
    vals, vecs = np.linalg.eig(J)
    plus = vecs[:, np.abs(vals - 1j) < 1e-6]
    q, _ = np.linalg.qr(plus)
    return q


def kl_residual(R: CurvatureTensor | np.ndarray, J: np.ndarray) -> KLResidual:
    """Residuals of the two Kähler-like curvature symmetries.

    ``sym`` measures ``R(X,Y,Z,W) - R(Z,Y,X,W)`` for X, Z of type (1,0) and
    Y, W of type (0,1) (complex-bilinear extension of R).  Read over all real
    vectors, that identity together with the Bianchi identity would force
    R = 0 even for Kähler metrics.  ``jinv`` measures
    ``R(X,Y,JZ,JW) - R(X,Y,Z,W)`` over the real basis.
    """
    R = R.R if isinstance(R, CurvatureTensor) else R
    m = R.shape[0]
    if R.shape != (m, m, m, m) or J.shape != (m, m):
        raise DimensionMismatch(f"curvature shape {R.shape} and J shape {J.shape} disagree")
    E = holomorphic_basis(J)
    Eb = E.conj()
    mixed = np.einsum("ABCD,Ai,Bj,Ck,Dl->ijkl", R, E, Eb, E, Eb, optimize=True)
    sym = np.abs(mixed - np.transpose(mixed, (2, 1, 0, 3))).max()
    RJ = np.einsum("abxy,xc,yd->abcd", R, J, J, optimize=True)
    jinv = np.abs(RJ - R).max()
    return KLResidual(float(sym), float(jinv))


def _covariant_derivatives(T: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``T[j,i,k]`` differentiated along ``e_l`` and ``conj e_l``; outputs indexed ``[j, i, k, l]``."""
    Gb = np.conj(G)
    deriv = (-np.einsum("jpk,pil->jikl", T, G)
             - np.einsum("jip,pkl->jikl", T, G)
             + np.einsum("pik,jpl->jikl", T, G))
    deriv_bar = (np.einsum("jpk,ipl->jikl", T, Gb)
                 + np.einsum("jip,kpl->jikl", T, Gb)
                 - np.einsum("pik,pjl->jikl", T, Gb))
    return deriv, deriv_bar


def torsion_covariant_derivative(data: HermitianLieData, kind) -> tuple[np.ndarray, np.ndarray]:
    """``(T^j_{ik,l}, T^j_{ik,lbar})`` as arrays indexed ``[j, i, k, l]``."""
    kind = as_kind(kind)
    require_valid(data)
    G = hermitian_coefficients(data, kind)
    return data.cached(("torsion_derivative", kind),
                       lambda: _covariant_derivatives(chern_torsion(data).T, G))


def chern_expansion(data: HermitianLieData) -> np.ndarray:
    """``2 T^j_{ik;lbar}`` expanded in D alone (the Jacobi identity eliminates C)."""
    D = data.D
    Db = np.conj(D)
    anti = D - np.transpose(D, (0, 2, 1))        # anti[j, a, b] = D[j,a,b] - D[j,b,a]
    return (-np.einsum("jrk,irl->jikl", anti, Db)
            - np.einsum("jir,krl->jikl", anti, Db)
            + np.einsum("rik,rjl->jikl", anti, Db)
            + np.einsum("lri,kjr->jikl", D, Db)
            - np.einsum("lrk,ijr->jikl", D, Db))


@dataclass(frozen=True)
class RKLNecessary:
    lemma_first: float
    lemma_second: float
    tcbar: float

    def max(self) -> float:
        return max(self.lemma_first, self.lemma_second, self.tcbar)


def tcbar_residual(data: HermitianLieData) -> np.ndarray:
    T = chern_torsion(data).T
    Gb = np.conj(hermitian_coefficients(data, ConnectionKind.GAUDUCHON0))
    Cb = np.conj(data.C)
    return (np.einsum("jrk,irl->jikl", T, Gb)
            + np.einsum("jir,krl->jikl", T, Gb)
            + np.einsum("rik,rjl->jikl", T, Cb)
            - np.einsum("lrk,irj->jikl", T, Gb)
            - np.einsum("lir,krj->jikl", T, Gb))


def rkl_necessary_residuals(data: HermitianLieData) -> RKLNecessary:
    """Residuals of the two torsion identities forced by a Kähler-like Levi-Civita curvature."""
    require_valid(data)
    T = chern_torsion(data).T
    deriv, deriv_bar = torsion_covariant_derivative(data, ConnectionKind.GAUDUCHON0)
    quad = np.einsum("rik,jrl->jikl", T, T)
    first = np.abs(deriv - quad).max()
    second = np.abs(deriv_bar - np.transpose(deriv_bar, (3, 1, 2, 0))).max()
    tc = np.abs(tcbar_residual(data)).max()
    return RKLNecessary(float(first), float(second), float(tc))


def _one_form(n: int, hol: np.ndarray, anti: np.ndarray) -> InvariantForm:
    coeffs = {1 << k: hol[k] for k in range(n)}
    coeffs.update({1 << (n + k): anti[k] for k in range(n)})
    return InvariantForm(n, coeffs)


def connection_matrices(data: HermitianLieData) -> tuple[MatrixForm, MatrixForm, MatrixForm]:
    """``(theta, theta1, theta2)``: Chern matrix, (1,0)-block and (0,1)-block of the Levi-Civita matrix.

    With ``nabla e = theta1 e + conj(theta2) conj(e)``.
    """
    n = data.n
    D = data.D
    T = chern_torsion(data).T
    theta = [[_one_form(n, D[j, i, :], -np.conj(D[i, j, :])) for j in range(n)] for i in range(n)]
    gamma = [[_one_form(n, T[j, i, :], -np.conj(T[i, j, :])) for j in range(n)] for i in range(n)]
    zero = np.zeros(n)
    theta2 = [[_one_form(n, np.conj(T[:, i, j]), zero) for j in range(n)] for i in range(n)]
    theta_m = MatrixForm(theta)
    return theta_m, theta_m + MatrixForm(gamma), MatrixForm(theta2)


def theta2_form(data: HermitianLieData) -> MatrixForm:
    """``Theta2 = d theta2 - theta2 ^ theta1 - conj(theta1) ^ theta2``."""
    require_valid(data)
    _, theta1, theta2 = connection_matrices(data)
    return theta2.d(data) - (theta2 ^ theta1) - (theta1.conj() ^ theta2)


def theta2_residual(data: HermitianLieData) -> float:
    return data.cached("theta2_residual", lambda: theta2_form(data).norm())


def standard_J_for(data: HermitianLieData) -> np.ndarray:
    return standard_J(data.n)
