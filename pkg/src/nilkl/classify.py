"""Decision procedures for the Strominger, Chern and Riemannian Kähler-like conditions.

Every decision compares scale-normalised residuals (see
:func:`nilkl.algebra.normalized`) against ``tol`` and is cross-checked
against the curvature symmetries computed directly from the connection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    HermitianLieData,
    _real_bracket,
    _extend_rows,
    change_frame,
    closed_forms,
    coframe_to_frame,
    is_nilpotent_J,
    lower_central_series,
    normalized,
    require_valid,
)
from .connections import (
    ConnectionKind,
    kl_residual,
    rkl_necessary_residuals,
    standard_J_for,
    structure_curvature,
    theta2_residual,
    torsion_covariant_derivative,
)
from .errors import (
    InternalConsistencyError,
    NotCommuting,
    NotNilpotent,
    NotNormal,
    TheoremViolation,
)
from .forms import InvariantForm, del_op, delbar_op, fundamental_form

SKL_STAGES = (
    "pluriclosed",
    "strominger-torsion",
    "efv",
    "abelian-J",
    "normal-commuting",
    "diagonalize",
    "eq-Y",
)


@dataclass(frozen=True)
class SKLNormalForm:
    """``d phi_i = 0`` (i <= r), ``d phi_a = sum_i Y[i, a-r] phi_i ^ conj(phi_i)`` in the frame ``U e``.

    Real form: ``[eps_i, eps_{n+i}] = lambdas[i] X[i]`` for i < s, all other
    brackets zero.
    """

    r: int
    s: int
    Y: np.ndarray
    lambdas: np.ndarray
    X: np.ndarray
    U: np.ndarray

    @property
    def n(self) -> int:
        return self.U.shape[0]

    def real_brackets(self) -> np.ndarray:
        """``lambda_i X_i`` recomputed from Y as ``sqrt2 (-Im Y, Re Y)`` on the (eps_a, eps_{n+a}) slots."""
        n, r = self.n, self.r
        out = np.zeros((self.s, 2 * n))
        out[:, r:n] = -np.sqrt(2.0) * self.Y[: self.s].imag
        out[:, n + r:] = np.sqrt(2.0) * self.Y[: self.s].real
        return out


@dataclass
class KLDecision:
    """Verdict, first failing stage (or ``"all-passed"``) and normalised residuals."""

    verdict: bool
    stage: str
    residuals: dict[str, float]
    normal_form: SKLNormalForm | None = None
    details: dict = field(default_factory=dict)


def _norm(x) -> float:
    x = np.asarray(x)
    return float(np.abs(x).max()) if x.size else 0.0


# ---------------------------------------------------------------------------
# simultaneous diagonalisation
# ---------------------------------------------------------------------------

def _refine(mats: list[np.ndarray], Q: np.ndarray, rng, scale: float, tol: float, depth: int) -> np.ndarray:
    """Columns diagonalising every ``Q^H M Q``; ``Q`` spans a common invariant subspace."""
    k = Q.shape[1]
    sub = [Q.conj().T @ M @ Q for M in mats]
    if k == 1 or all(_norm(B - np.trace(B) / k * np.eye(k)) <= tol * scale for B in sub):
        return Q
    if depth > 32:
        raise InternalConsistencyError("simultaneous diagonalisation failed to separate eigenspaces")
    H = np.zeros((k, k), dtype=np.complex128)
    for B in sub:
        t, s = rng.standard_normal(2)
        H += t * (B + B.conj().T) + s * 1j * (B - B.conj().T)
    w, V = np.linalg.eigh(H)
    gap = 1e-6 * max(_norm(H), 1e-300)
    blocks, start = [], 0
    for idx in range(1, k + 1):
        if idx == k or w[idx] - w[idx - 1] > gap:
            blocks.append(V[:, start:idx])
            start = idx
    if len(blocks) == 1:
        # unlucky draw: everything clustered; try another combination
        return _refine(mats, Q, rng, scale, tol, depth + 1)
    return np.hstack([_refine(mats, Q @ Vb, rng, scale, tol, depth + 1) for Vb in blocks])


def simultaneous_diagonalize(mats, tol: float = DEFAULT_TOL, seed: int = 0):
    """Unitary ``U`` with every ``U M U^H`` diagonal, for commuting normal matrices.

    Returns ``(U, diagonals, residual)`` where residual is the largest
    off-diagonal magnitude.  Preconditions are checked relative to the
    largest entry of the inputs.
    """
    mats = [np.asarray(M, dtype=np.complex128) for M in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    k = mats[0].shape[0]
    if any(M.shape != (k, k) for M in mats):
        raise ValueError("matrices must share one square shape")
    scale = max(_norm(M) for M in mats)
    for idx, M in enumerate(mats):
        dev = normalized(_norm(M @ M.conj().T - M.conj().T @ M), scale, 2)
        if dev > tol:
            raise NotNormal(f"matrix {idx} is not normal: normalized residual {dev:.3e}")
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            dev = normalized(_norm(mats[a] @ mats[b] - mats[b] @ mats[a]), scale, 2)
            if dev > tol:
                raise NotCommuting(f"matrices {a} and {b} do not commute: normalized residual {dev:.3e}")
    rng = np.random.default_rng(seed)
    V = _refine(mats, np.eye(k, dtype=np.complex128), rng, scale, max(tol, 1e-12), 0)
    U = V.conj().T
    conj = [U @ M @ U.conj().T for M in mats]
    off = max(_norm(Mc - np.diag(np.diag(Mc))) for Mc in conj)
    return U, [np.diag(Mc).copy() for Mc in conj], float(off)


# ---------------------------------------------------------------------------
# Strominger Kähler-like
# ---------------------------------------------------------------------------

def pluriclosed_formula(Y: np.ndarray, n: int) -> InvariantForm:
    """``del delbar omega`` for ``d phi_a = sum_i Y[i, a-r] phi_i ^ conj(phi_i)`` with closed phi_1..phi_r."""
    Y = np.asarray(Y, dtype=np.complex128)
    r = Y.shape[0]
    coeffs: dict[int, complex] = {}
    for i in range(r):
        for k in range(r):
            if i == k:
                continue
            c = -1j * np.sum(Y[i] * np.conj(Y[k]))
            # phi_i phibar_i phi_k phibar_k reordered to phi_i phi_k phibar_i phibar_k
            lo, hi = min(i, k), max(i, k)
            mask = (1 << lo) | (1 << hi) | (1 << (n + lo)) | (1 << (n + hi))
            coeffs[mask] = coeffs.get(mask, 0) - c
    return InvariantForm(n, coeffs)


def eq_y_residual(Y: np.ndarray) -> float:
    """``max_{i != k} |sum_a Y_ia conj(Y_ka) + conj(Y_ia) Y_ka|``."""
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.shape[0] < 2 or Y.shape[1] == 0:
        return 0.0
    G = Y @ Y.conj().T
    E = G + G.conj()
    np.fill_diagonal(E, 0)
    return _norm(E)


def efv_pattern_violation(data: HermitianLieData, r: int) -> float:
    """Largest entry outside ``C[a,i,k]``, ``D[i,a,k]`` with ``i, k < r <= a``."""
    C = np.array(data.C)
    D = np.array(data.D)
    C[r:, :r, :r] = 0
    D[:r, r:, :r] = 0
    return max(_norm(C), _norm(D))


def _pluriclosed_raw(data: HermitianLieData) -> float:
    return del_op(delbar_op(fundamental_form(data.n), data), data).norm()


def _kl_normalized(data: HermitianLieData, kind) -> float:
    kl = kl_residual(structure_curvature(data, kind), standard_J_for(data))
    return normalized(kl.max(), data.scale, 2)


def _check_agreement(name: str, verdict: bool, other: bool, detail: str) -> None:
    if verdict != other:
        raise InternalConsistencyError(f"{name}: stage pipeline says {verdict}, curvature says {other} ({detail})")


def classify_skl(data: HermitianLieData, tol: float = DEFAULT_TOL, seed: int = 0) -> KLDecision:
    """Strominger Kähler-like test for nilpotent structures, with the normal form when it holds."""
    require_valid(data)
    if not lower_central_series(data).nilpotent:
        raise NotNilpotent("the SKL normal form applies to nilpotent Lie algebras only")
    n, M = data.n, data.scale
    res: dict[str, float] = {}
    details: dict = {}

    res["pluriclosed"] = normalized(_pluriclosed_raw(data), M, 2)
    details["pluriclosed_raw"] = _pluriclosed_raw(data)
    d1, d2 = torsion_covariant_derivative(data, ConnectionKind.STROMINGER)
    res["strominger-torsion"] = normalized(max(_norm(d1), _norm(d2)), M, 2)

    # closed (1,0)-forms first, then their orthogonal complement
    W = closed_forms(data)
    r = W.shape[0]
    rows = _extend_rows(W, np.eye(n, dtype=np.complex128))
    U = coframe_to_frame(rows)
    red = change_frame(data, U)
    details["r"] = r
    res["efv"] = normalized(efv_pattern_violation(red, r), M, 1)
    res["abelian-J"] = normalized(_norm(red.C), M, 1)

    Dmats = [red.D[:r, a, :r].T for a in range(r, n)]  # (i, j) entry D[j, a, i]
    normal_dev = max((_norm(X @ X.conj().T - X.conj().T @ X) for X in Dmats), default=0.0)
    comm_dev = max((_norm(Dmats[a] @ Dmats[b] - Dmats[b] @ Dmats[a])
                    for a in range(len(Dmats)) for b in range(a + 1, len(Dmats))), default=0.0)
    res["normal-commuting"] = normalized(max(normal_dev, comm_dev), M, 2)

    nf = None
    if res["normal-commuting"] < tol and Dmats and r > 0:
        P, _, off = simultaneous_diagonalize(Dmats, tol, seed)
        res["diagonalize"] = normalized(off, M, 1)
        U2 = np.eye(n, dtype=np.complex128)
        U2[:r, :r] = P
        U = U2 @ U
        red = change_frame(data, U)
        Y = np.stack([-np.conj(red.D[np.arange(r), a, np.arange(r)]) for a in range(r, n)], axis=1)
        # with C = 0, a column xi_a = 0 would be a closed form outside the closed space
        zero_cols = [a for a in range(Y.shape[1]) if normalized(_norm(Y[:, a]), M, 1) < tol]
        if zero_cols and res["abelian-J"] < tol and res["efv"] < tol:
            raise InternalConsistencyError(f"closed-form count r={r} missed columns {zero_cols}")
        res["eq-Y"] = normalized(eq_y_residual(Y), M, 2)
        nf = _assemble(Y, r, n, U, M, tol)
    elif r == n:
        # no non-closed directions: abelian algebra, Kähler
        res["diagonalize"] = 0.0
        res["eq-Y"] = 0.0
        nf = SKLNormalForm(n, 0, np.zeros((n, 0), dtype=np.complex128), np.zeros(0),
                           np.zeros((0, 2 * n)), U)

    verdict = all(v < tol for v in res.values()) and "eq-Y" in res
    failed = [s for s in SKL_STAGES if s in res and res[s] >= tol]
    stage = failed[0] if failed else ("all-passed" if verdict else "diagonalize")
    details["failed_stages"] = failed
    kl = _kl_normalized(data, ConnectionKind.STROMINGER)
    details["strominger_kl"] = kl
    _check_agreement("SKL", verdict, kl < tol, f"normalized Strominger KL residual {kl:.3e}")
    return KLDecision(verdict, stage, res, nf if verdict else None, details)


def _assemble(Y: np.ndarray, r: int, n: int, U: np.ndarray, M: float, tol: float) -> SKLNormalForm:
    lam = np.sqrt(2.0) * np.linalg.norm(Y, axis=1)
    nonzero = np.array([normalized(l, M, 1) >= tol for l in lam], dtype=bool)
    order = sorted(range(r), key=lambda i: (not nonzero[i], -lam[i]))
    Pm = np.eye(r)[order]
    U3 = np.eye(n, dtype=np.complex128)
    U3[:r, :r] = Pm
    Y = Y[order]
    s = int(nonzero.sum())
    lambdas = lam[order][:s]
    X = np.zeros((s, 2 * n))
    X[:, r:n] = -np.sqrt(2.0) * Y[:s].imag / lambdas[:, None]
    X[:, n + r:] = np.sqrt(2.0) * Y[:s].real / lambdas[:, None]
    return SKLNormalForm(r, s, Y, lambdas, X, U3 @ U)


# ---------------------------------------------------------------------------
# Chern and Riemannian Kähler-like
# ---------------------------------------------------------------------------

def classify_ckl(data: HermitianLieData, tol: float = DEFAULT_TOL) -> KLDecision:
    """Chern Kähler-like iff the Chern torsion has vanishing (0,1)-derivative."""
    require_valid(data)
    M = data.scale
    _, tbar = torsion_covariant_derivative(data, ConnectionKind.CHERN)
    res = {"chern-torsion-derivative": normalized(_norm(tbar), M, 2)}
    verdict = res["chern-torsion-derivative"] < tol
    kl = _kl_normalized(data, ConnectionKind.CHERN)
    _check_agreement("CKL", verdict, kl < tol, f"normalized Chern KL residual {kl:.3e}")
    chern_flat = normalized(_norm(structure_curvature(data, ConnectionKind.CHERN).R), M, 2)
    D_norm = normalized(_norm(data.D), M, 1)
    nilpotent = lower_central_series(data).nilpotent
    details = {"chern_kl": kl, "chern_flat": chern_flat, "D_norm": D_norm, "nilpotent": nilpotent}
    if not verdict:
        idx = np.unravel_index(np.argmax(np.abs(tbar)), tbar.shape)
        details["witness"] = (tuple(int(i) + 1 for i in idx), complex(tbar[idx]))
    if nilpotent and verdict and not (chern_flat < tol and D_norm < tol):
        raise TheoremViolation(
            f"nilpotent and Chern Kähler-like but chern_flat={chern_flat:.3e}, D_norm={D_norm:.3e}")
    return KLDecision(verdict, "all-passed" if verdict else "chern-torsion-derivative", res, None, details)


def classify_rkl(data: HermitianLieData, tol: float = DEFAULT_TOL) -> KLDecision:
    """Riemannian Kähler-like test from the Levi-Civita curvature symmetries."""
    require_valid(data)
    M = data.scale
    kl = kl_residual(structure_curvature(data, ConnectionKind.RIEMANNIAN), standard_J_for(data))
    res = {"riemannian-kl": normalized(kl.max(), M, 2)}
    verdict = res["riemannian-kl"] < tol
    nec = rkl_necessary_residuals(data)
    nil_J, _ = is_nilpotent_J(data)
    details = {
        "kl_sym": normalized(kl.sym, M, 2),
        "kl_jinv": normalized(kl.jinv, M, 2),
        "theta2": normalized(theta2_residual(data), M, 2),
        "rkl_necessary": normalized(nec.max(), M, 2),
        "bracket_norm": normalized(_norm(_real_bracket(data)), M, 1),
        "nilpotent_J": nil_J,
    }
    _check_agreement("RKL", verdict, details["theta2"] < tol, f"normalized Theta2 {details['theta2']:.3e}")
    if nil_J and verdict and not details["bracket_norm"] < tol:
        raise TheoremViolation(f"nilpotent J and Riemannian Kähler-like but bracket norm {details['bracket_norm']:.3e}")
    return KLDecision(verdict, "all-passed" if verdict else "riemannian-kl", res, None, details)
