"""Example structures, coframe tables and seeded generators.

Coframe tables list the differentials of a unitary coframe ``phi``::

    d phi_j = sum hol[j]   (i, k, c) : c phi_i ^ phi_k
            + sum mixed[j] (i, k, c) : c phi_i ^ conj(phi_k)

and convert to constants through the structure equation
``C[j,i,k] = -hol`` (antisymmetrised) and ``D[i,j,k] = -conj(mixed)``.

Random structures use the two-step pattern: only ``C[a,i,k]`` and
``D[i,a,k]`` with ``i, k < r <= a`` are nonzero.  Every bracket then lands
in ``span(e_a, conj(e_a))``, which is central, so each term of each Jacobi
identity contains a bracket with a central element and vanishes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .algebra import HermitianLieData, validate, zero_data
from .errors import BadRange, InvalidStructure, JacobiViolation, ParamOutOfRange, UnknownFamily

Term = tuple[int, int, complex]

_TOL = 1e-8


@dataclass(frozen=True)
class CoframeDifferentials:
    """1-based table of ``d phi_j``; ``hol[j]`` and ``mixed[j]`` hold ``(i, k, c)`` triples."""

    n: int
    hol: Mapping[int, list[Term]] = field(default_factory=dict)
    mixed: Mapping[int, list[Term]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise BadRange(f"n must be positive, got {self.n}")
        for table, strict in ((self.hol, True), (self.mixed, False)):
            for j, terms in table.items():
                if not 1 <= j <= self.n:
                    raise BadRange(f"form index {j} outside 1..{self.n}")
                for i, k, _ in terms:
                    if not (1 <= i <= self.n and 1 <= k <= self.n):
                        raise BadRange(f"term ({i}, {k}) in d phi_{j} outside 1..{self.n}")
                    if strict and i == k:
                        raise BadRange(f"phi_{i} ^ phi_{i} vanishes; drop it from d phi_{j}")

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        C = np.zeros((n, n, n), dtype=np.complex128)
        D = np.zeros((n, n, n), dtype=np.complex128)
        for j, terms in self.hol.items():
            for i, k, c in terms:
                C[j - 1, i - 1, k - 1] -= c
                C[j - 1, k - 1, i - 1] += c
        for j, terms in self.mixed.items():
            for i, k, c in terms:
                D[i - 1, j - 1, k - 1] -= np.conj(c)
        return C, D


def from_coframe(cd: CoframeDifferentials, label: str | None = None, tol: float = _TOL) -> HermitianLieData:
    """Constants of a coframe table; raises JacobiViolation unless ``d^2 = 0``."""
    C, D = cd.to_arrays()
    data = HermitianLieData(C, D, label)
    report = validate(data, tol)
    if not report.valid:
        raise JacobiViolation(
            f"differentials do not close: normalized Jacobi residual {report.jacobi_residual:.3e}"
        )
    return data


def to_coframe(data: HermitianLieData) -> CoframeDifferentials:
    """Read the structure equation forwards; exact zeros are dropped."""
    n = data.n
    hol: dict[int, list[Term]] = {}
    mixed: dict[int, list[Term]] = {}
    for j in range(n):
        h = [(i + 1, k + 1, complex(-data.C[j, i, k]))
             for i in range(n) for k in range(i + 1, n) if data.C[j, i, k] != 0]
        m = [(i + 1, k + 1, complex(-np.conj(data.D[i, j, k])))
             for i in range(n) for k in range(n) if data.D[i, j, k] != 0]
        if h:
            hol[j + 1] = h
        if m:
            mixed[j + 1] = m
    return CoframeDifferentials(n, hol, mixed)


# ---------------------------------------------------------------------------
# named families
# ---------------------------------------------------------------------------

FAMILY_NAMES = ("abelian", "kodaira", "iwasawa", "cor12")

#: expected (r, s) for generic parameters
COR12_SHAPES: dict[tuple[int, str], tuple[int, int]] = {
    (2, "a"): (1, 1), (3, "a"): (2, 2), (4, "a"): (3, 2), (4, "b"): (2, 2),
    (5, "a"): (4, 2), (5, "b"): (3, 3), (6, "a"): (5, 2), (6, "b"): (4, 4), (6, "c"): (3, 3),
}


def _real_param(params: Mapping, key: str, default: float) -> float:
    value = params.get(key, default)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParamOutOfRange(f"parameter {key} must be real, got {value!r}") from None
    if not np.isfinite(value):
        raise ParamOutOfRange(f"parameter {key} must be finite")
    return value


def _check_keys(params: Mapping, allowed) -> None:
    extra = set(params) - set(allowed)
    if extra:
        raise ParamOutOfRange(f"unexpected parameters {sorted(extra)}; allowed {sorted(allowed)}")


def solve_n6b_y(lambda2: float, a: float, b: float, c: float, x: float) -> float:
    """The ``y`` making the (3,4) pair condition hold for the n=6 (b) form."""
    target = -b * c * (1.0 + a * a / lambda2**2)
    if x != 0.0:
        return target / x
    if target == 0.0:
        return 0.0
    raise ParamOutOfRange("x = 0 with b*c != 0 admits no y satisfying the pair condition")


# (n, variant) -> {j: [(i, latex coefficient, value(p, compensate))]} for
# d phi_j = sum coefficient * phi_i ^ conj(phi_i)
def _LAM(k: str):
    return lambda p, comp: p[k]


def _IM(k: str):
    return lambda p, comp: 1j * p[k]


def _shifted(im: str, a: str, b: str):
    return lambda p, comp: 1j * p[im] - (p[a] * p[b] / p["lambda2"] if comp else 0.0)


COR12_TABLE: dict[tuple[int, str], dict[int, list]] = {
    (2, "a"): {2: [(1, r"\lambda", _LAM("lambda"))]},
    (3, "a"): {3: [(1, r"\lambda", _LAM("lambda")), (2, "ia", _IM("a"))]},
    (4, "a"): {4: [(1, r"\lambda", _LAM("lambda")), (2, "ia", _IM("a"))]},
    (4, "b"): {3: [(1, r"\lambda_1", _LAM("lambda1")), (2, "ia", _IM("a"))],
               4: [(2, r"\lambda_2", _LAM("lambda2"))]},
    (5, "a"): {5: [(1, r"\lambda", _LAM("lambda")), (2, "ia", _IM("a"))]},
    (5, "b"): {4: [(1, r"\lambda_1", _LAM("lambda1")), (2, "ia", _IM("a")), (3, "ib", _IM("b"))],
               5: [(2, r"\lambda_2", _LAM("lambda2")),
                   (3, r"(ic-\frac{ab}{\lambda_2})", _shifted("c", "a", "b"))]},
    (6, "a"): {6: [(1, r"\lambda", _LAM("lambda")), (2, "ia", _IM("a"))]},
    (6, "b"): {5: [(1, r"\lambda_1", _LAM("lambda1")), (2, "ia", _IM("a")), (3, "ib", _IM("b")),
                   (4, "ic", _IM("c"))],
               6: [(2, r"\lambda_2", _LAM("lambda2")),
                   (3, r"(ix-\frac{ab}{\lambda_2})", _shifted("x", "a", "b")),
                   (4, r"(iy-\frac{ac}{\lambda_2})", _shifted("y", "a", "c"))]},
    (6, "c"): {4: [(1, r"\lambda_1", _LAM("lambda1")), (2, "ia", _IM("a")), (3, "ib", _IM("b"))],
               5: [(2, r"\lambda_2", _LAM("lambda2")),
                   (3, r"(ic-\frac{ab}{\lambda_2})", _shifted("c", "a", "b"))],
               6: [(3, r"\lambda_3", _LAM("lambda3"))]},
}

COR12_VARIANTS: dict[tuple[int, str], tuple[str, ...]] = {
    (2, "a"): ("lambda",),
    (3, "a"): ("lambda", "a"),
    (4, "a"): ("lambda", "a"),
    (4, "b"): ("lambda1", "lambda2", "a"),
    (5, "a"): ("lambda", "a"),
    (5, "b"): ("lambda1", "lambda2", "a", "b", "c"),
    (6, "a"): ("lambda", "a"),
    (6, "b"): ("lambda1", "lambda2", "a", "b", "c", "x", "y"),
    (6, "c"): ("lambda1", "lambda2", "lambda3", "a", "b", "c"),
}


def cor12_latex(n: int, variant: str = "a") -> list[str]:
    """The nonzero differentials of a normal form as LaTeX, one equation per form."""
    table = COR12_TABLE[(n, variant)]
    out = []
    for j, terms in sorted(table.items()):
        rhs = "+".join(rf"{tex}\varphi_{i}\overline{{\varphi}}_{i}" for i, tex, _ in terms)
        out.append(rf"d\varphi_{j}={rhs}")
    return out


def cor12_coframe(n: int, variant: str = "a", *, compensate: bool = True, **params) -> CoframeDifferentials:
    """Coframe table of one low-dimensional SKL normal form.

    Missing lambdas default to 1 and other constants to 0.  For n=6 (b) an
    omitted ``y`` is solved from the pair condition.  ``compensate=False``
    drops the ``-ab/lambda2`` and ``-ac/lambda2`` terms; the result is still a
    Lie algebra but no longer pluriclosed.
    """
    key = (int(n), str(variant))
    if key not in COR12_TABLE:
        raise UnknownFamily(f"no normal form for n={n}, variant={variant!r}; "
                            f"known: {sorted(COR12_VARIANTS)}")
    names = COR12_VARIANTS[key]
    _check_keys(params, names)
    p = {k: _real_param(params, k, 1.0 if k.startswith("lambda") else 0.0) for k in names}
    if p.get("lambda", 0.0) < 0:
        raise ParamOutOfRange("lambda must be >= 0")
    for k in ("lambda1", "lambda2", "lambda3"):
        if k in p and p[k] <= 0:
            raise ParamOutOfRange(f"{k} must be > 0")
    if key == (6, "b"):
        l2, a, b, c, x = (p[k] for k in ("lambda2", "a", "b", "c", "x"))
        if "y" not in params:
            p["y"] = solve_n6b_y(l2, a, b, c, x) if compensate else 0.0
        elif compensate:
            y = p["y"]
            resid = x * y + b * c * (1.0 + a * a / l2**2)
            if abs(resid) > 1e-12 * max(1.0, abs(x * y), abs(b * c) * (1 + a * a / l2**2)):
                raise ParamOutOfRange(
                    f"n=6 (b) needs x*y = -b*c*(1 + a^2/lambda2^2); residual {resid:.3e}")
    mixed: dict[int, list[Term]] = {}
    for j, terms in COR12_TABLE[key].items():
        row = [(i, i, complex(value(p, compensate))) for i, _, value in terms]
        row = [t for t in row if t[2] != 0]
        if row:
            mixed[j] = row
    return CoframeDifferentials(key[0], {}, mixed)


def build_family(name: str, params: Mapping | None = None) -> HermitianLieData:
    """Structure constants of a named example.

    ``abelian`` (n), ``kodaira`` (lambda > 0), ``iwasawa`` and ``cor12``
    (n, variant, then the real constants of that normal form).
    """
    params = dict(params or {})
    if name == "abelian":
        _check_keys(params, ("n",))
        n = int(_real_param(params, "n", 1))
        if n < 1:
            raise ParamOutOfRange("abelian needs n >= 1")
        return zero_data(n, f"abelian(n={n})")
    if name == "kodaira":
        _check_keys(params, ("lambda",))
        lam = _real_param(params, "lambda", 1.0)
        if lam <= 0:
            raise ParamOutOfRange("kodaira needs lambda > 0")
        cd = CoframeDifferentials(2, {}, {2: [(1, 1, lam)]})
        return from_coframe(cd, f"kodaira(lambda={lam!r})")
    if name == "iwasawa":
        _check_keys(params, ())
        cd = CoframeDifferentials(3, {3: [(1, 2, -1.0)]}, {})
        return from_coframe(cd, "iwasawa")
    if name == "cor12":
        n = int(_real_param(params, "n", 2))
        variant = str(params.pop("variant", "a"))
        params.pop("n", None)
        cd = cor12_coframe(n, variant, **params)
        shown = ",".join(f"{k}={params[k]!r}" for k in sorted(params))
        return from_coframe(cd, f"cor12(n={n},variant={variant}{',' if shown else ''}{shown})")
    raise UnknownFamily(f"unknown family {name!r}; known: {', '.join(FAMILY_NAMES)}")


# ---------------------------------------------------------------------------
# seeded generators
# ---------------------------------------------------------------------------

def _uniform_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-1.0, 1.0, shape)


def random_two_step(n: int, r: int, seed=None, *, with_C: bool = True, with_D: bool = True) -> HermitianLieData:
    """Random structure in the two-step pattern with ``r`` central-free directions.

    Entries have independent uniform real and imaginary parts in [-1, 1].
    """
    if not (isinstance(n, (int, np.integer)) and isinstance(r, (int, np.integer))):
        raise BadRange("n and r must be integers")
    if not 1 <= r <= n:
        raise BadRange(f"need 1 <= r <= n, got n={n}, r={r}")
    rng = np.random.default_rng(seed)
    C = np.zeros((n, n, n), dtype=np.complex128)
    D = np.zeros((n, n, n), dtype=np.complex128)
    m = n - r
    if m and with_C:
        block = _uniform_complex(rng, (m, r, r))
        C[r:, :r, :r] = block - block.transpose(0, 2, 1)
    if m and with_D:
        D[:r, r:, :r] = _uniform_complex(rng, (r, m, r))
    return HermitianLieData(C, D, f"two-step(n={n},r={r},seed={seed})")


def two_step_rank(data: HermitianLieData) -> int | None:
    """Largest r < n for which ``data`` fits the two-step pattern, else None."""
    n = data.n
    for r in range(n - 1, 0, -1):
        C = data.C.copy()
        C[r:, :r, :r] = 0
        D = data.D.copy()
        D[:r, r:, :r] = 0
        if not C.any() and not D.any():
            return r
    return None


def perturb(data: HermitianLieData, magnitude: float, seed=None, r: int | None = None) -> HermitianLieData:
    """Add seeded noise of size ``magnitude`` to the admissible ``D`` entries."""
    if r is None:
        r = two_step_rank(data)
        if r is None:
            raise InvalidStructure("structure does not fit any two-step pattern; pass r explicitly")
    elif not 1 <= r < data.n:
        raise BadRange(f"need 1 <= r < n, got r={r}")
    else:
        probe = two_step_rank(data)
        if probe is None or probe < r:
            C = data.C.copy(); C[r:, :r, :r] = 0
            D = data.D.copy(); D[:r, r:, :r] = 0
            if C.any() or D.any():
                raise InvalidStructure(f"structure does not fit the two-step pattern with r={r}")
    if magnitude == 0:
        return data
    rng = np.random.default_rng(seed)
    D = np.array(data.D)
    n = data.n
    D[:r, r:, :r] += magnitude * _uniform_complex(rng, (r, n - r, r))
    return HermitianLieData(data.C, D, data.label)


def from_normal_form(nf) -> HermitianLieData:
    """Rebuild ``d phi_a = sum_i Y[i, a] phi_i ^ conj(phi_i)`` from an SKL normal form."""
    Y = np.asarray(nf.Y, dtype=np.complex128)
    r = nf.r
    n = r + Y.shape[1]
    D = np.zeros((n, n, n), dtype=np.complex128)
    for a in range(Y.shape[1]):
        for i in range(r):
            D[i, r + a, i] = -np.conj(Y[i, a])
    return HermitianLieData(np.zeros_like(D), D, "normal-form")


def random_unitary(n: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary from the QR factorisation of a complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
