"""Exterior calculus on left-invariant complex forms.

A monomial is stored as a bitmask over the ``2n`` generators: bit ``a`` is
``phi_{a+1}`` and bit ``n + a`` is ``conj(phi_{a+1})``.  The canonical
ordering of a monomial is increasing bit index, i.e. ``phi_I ^ conj(phi_J)``
with ``I`` and ``J`` sorted, which is exactly the ``(I, J)`` key exposed by
:attr:`InvariantForm.terms`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .algebra import HermitianLieData, require_valid
from .errors import DimensionMismatch


def _wedge_sign(a: int, b: int) -> int:
    """Sign of reordering ``mono(a) ^ mono(b)`` into canonical order (masks disjoint)."""
    swaps = 0
    while b:
        low = b & -b
        swaps += (a & ~((low << 1) - 1)).bit_count()
        b ^= low
    return -1 if swaps & 1 else 1


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True, eq=False)
class InvariantForm:
    """A left-invariant complex form as a sparse map from monomials to coefficients."""

    n: int
    coeffs: Mapping[int, complex]

    def __post_init__(self):
        clean = {m: complex(c) for m, c in self.coeffs.items() if c != 0}
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, n: int) -> "InvariantForm":
        return cls(n, {})

    @classmethod
    def from_terms(cls, n: int, terms: Mapping[tuple[tuple[int, ...], tuple[int, ...]], complex]):
        """Build from ``{(I, J): c}`` with 1-based index tuples (any order; signs applied)."""
        out: dict[int, complex] = {}
        for (I, J), c in terms.items():
            form = InvariantForm(n, {0: c})
            for i in I:
                form = form ^ phi(i, n)
            for j in J:
                form = form ^ phibar(j, n)
            for m, v in form.coeffs.items():
                out[m] = out.get(m, 0) + v
        return cls(n, out)

    @property
    def terms(self) -> dict[tuple[tuple[int, ...], tuple[int, ...]], complex]:
        n = self.n
        out = {}
        for m, c in self.coeffs.items():
            bits = _bits(m)
            I = tuple(b + 1 for b in bits if b < n)
            J = tuple(b - n + 1 for b in bits if b >= n)
            out[(I, J)] = c
        return out

    def bidegrees(self) -> set[tuple[int, int]]:
        return {_bidegree(m, self.n) for m in self.coeffs}

    def component(self, p: int, q: int) -> "InvariantForm":
        return InvariantForm(self.n, {m: c for m, c in self.coeffs.items() if _bidegree(m, self.n) == (p, q)})

    def norm(self) -> float:
        """Largest absolute canonical coefficient."""
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def conj(self) -> "InvariantForm":
        n = self.n
        low = (1 << n) - 1
        out = {}
        for m, c in self.coeffs.items():
            hol, anti = m & low, m >> n
            sign = -1 if (hol.bit_count() * anti.bit_count()) & 1 else 1
            out[anti | (hol << n)] = sign * np.conj(c)
        return InvariantForm(n, out)

    def _check(self, other: "InvariantForm"):
        if self.n != other.n:
            raise DimensionMismatch(f"forms of different dimension: {self.n} vs {other.n}")

    def __add__(self, other: "InvariantForm") -> "InvariantForm":
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return InvariantForm(self.n, out)

    def __neg__(self) -> "InvariantForm":
        return InvariantForm(self.n, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: "InvariantForm") -> "InvariantForm":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "InvariantForm":
        return InvariantForm(self.n, {m: scalar * c for m, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "InvariantForm") -> "InvariantForm":
        return wedge(self, other)

    def __repr__(self):
        parts = []
        for (I, J), c in sorted(self.terms.items()):
            mono = "^".join([f"phi{i}" for i in I] + [f"phibar{j}" for j in J]) or "1"
            parts.append(f"({c:.6g}) {mono}")
        return "InvariantForm(" + (" + ".join(parts) or "0") + ")"


def _bidegree(mask: int, n: int) -> tuple[int, int]:
    low = (1 << n) - 1
    return (mask & low).bit_count(), (mask >> n).bit_count()


def phi(i: int, n: int) -> InvariantForm:
    """The (1,0)-form ``phi_i`` (1-based)."""
    if not 1 <= i <= n:
        raise IndexError(f"phi index {i} out of range 1..{n}")
    return InvariantForm(n, {1 << (i - 1): 1.0})


def phibar(i: int, n: int) -> InvariantForm:
    if not 1 <= i <= n:
        raise IndexError(f"phibar index {i} out of range 1..{n}")
    return InvariantForm(n, {1 << (n + i - 1): 1.0})


def wedge(a: InvariantForm, b: InvariantForm) -> InvariantForm:
    a._check(b)
    out: dict[int, complex] = {}
    for ma, ca in a.coeffs.items():
        for mb, cb in b.coeffs.items():
            if ma & mb:
                continue
            m = ma | mb
            out[m] = out.get(m, 0) + _wedge_sign(ma, mb) * ca * cb
    return InvariantForm(a.n, out)


def fundamental_form(n: int) -> InvariantForm:
    """``omega = i sum_k phi_k ^ conj(phi_k)``."""
    return InvariantForm(n, {(1 << k) | (1 << (n + k)): 1j for k in range(n)})


def generator_differentials(data: HermitianLieData) -> list[dict[int, complex]]:
    """``d`` of each generator as a {mask: coefficient} map, from the structure equation.

    ``d phi_j = -1/2 sum C[j,i,k] phi_i^phi_k - sum conj(D[i,j,k]) phi_i^conj(phi_k)``.
    """

    def build():
        n, C, D = data.n, data.C, data.D
        gens: list[dict[int, complex]] = []
        for j in range(n):
            t: dict[int, complex] = {}
            for i in range(n):
                for k in range(i + 1, n):
                    c = -0.5 * (C[j, i, k] - C[j, k, i])
                    if c != 0:
                        t[(1 << i) | (1 << k)] = c
                for k in range(n):
                    c = -np.conj(D[i, j, k])
                    if c != 0:
                        t[(1 << i) | (1 << (n + k))] = c
            gens.append(t)
        for j in range(n):
            conj_t = {}
            for m, c in gens[j].items():
                hol, anti = m & ((1 << n) - 1), m >> n
                sign = -1 if (hol.bit_count() * anti.bit_count()) & 1 else 1
                conj_t[anti | (hol << n)] = sign * np.conj(c)
            gens.append(conj_t)
        return gens

    return data.cached("generator_differentials", build)


def _d_monomial(mask: int, gens: list[dict[int, complex]], cache: dict) -> dict[int, complex]:
    if mask in cache:
        return cache[mask]
    out: dict[int, complex] = {}
    bits = _bits(mask)
    for pos, g in enumerate(bits):
        rest = mask ^ (1 << g)
        prefix = rest & ((1 << g) - 1)
        suffix = rest ^ prefix
        base = -1 if pos & 1 else 1
        for t, c in gens[g].items():
            if t & rest:
                continue
            sign = base * _wedge_sign(prefix, t) * _wedge_sign(prefix | t, suffix)
            m = rest | t
            out[m] = out.get(m, 0) + sign * c
    cache[mask] = out
    return out


def d_operator(form: InvariantForm, data: HermitianLieData) -> InvariantForm:
    """Exterior derivative, extended from the generators as an antiderivation."""
    if form.n != data.n:
        raise DimensionMismatch(f"form has n={form.n}, structure has n={data.n}")
    require_valid(data)
    gens = generator_differentials(data)
    cache = data.cached("d_monomial_cache", dict)
    out: dict[int, complex] = {}
    for m, c in form.coeffs.items():
        for mm, v in _d_monomial(m, gens, cache).items():
            out[mm] = out.get(mm, 0) + c * v
    return InvariantForm(form.n, out)


def bidegree_split(form: InvariantForm, data: HermitianLieData) -> tuple[InvariantForm, InvariantForm]:
    """``(del form, delbar form)``: the (p+1, q) and (p, q+1) parts of ``d`` per component."""
    n = form.n
    dl: dict[int, complex] = {}
    dbar: dict[int, complex] = {}
    for p, q in sorted(form.bidegrees()):
        image = d_operator(form.component(p, q), data)
        for m, c in image.coeffs.items():
            bd = _bidegree(m, n)
            if bd == (p + 1, q):
                dl[m] = dl.get(m, 0) + c
            elif bd == (p, q + 1):
                dbar[m] = dbar.get(m, 0) + c
            else:
                raise AssertionError(f"d produced bidegree {bd} from ({p}, {q})")
    return InvariantForm(n, dl), InvariantForm(n, dbar)


def del_op(form: InvariantForm, data: HermitianLieData) -> InvariantForm:
    return bidegree_split(form, data)[0]


def delbar_op(form: InvariantForm, data: HermitianLieData) -> InvariantForm:
    return bidegree_split(form, data)[1]


@dataclass(frozen=True)
class MetricResiduals:
    kahler: float
    pluriclosed: float
    balanced: float


def metric_form_residuals(data: HermitianLieData) -> MetricResiduals:
    """Sup-norms of ``d omega``, ``del delbar omega`` and ``d(omega^(n-1))``."""
    require_valid(data)
    n = data.n
    omega = fundamental_form(n)
    kahler = d_operator(omega, data).norm()
    pluri = del_op(delbar_op(omega, data), data).norm()
    if n == 1:
        balanced = 0.0
    else:
        power = omega
        for _ in range(n - 2):
            power = power ^ omega
        balanced = d_operator(power, data).norm()
    return MetricResiduals(kahler, pluri, balanced)


def basis_forms(n: int, degree: int | None = None) -> Iterable[InvariantForm]:
    """All canonical monomials, optionally restricted to one total degree."""
    for m in range(1 << (2 * n)):
        if degree is None or m.bit_count() == degree:
            yield InvariantForm(n, {m: 1.0})


def degree_masks(n: int, degree: int) -> list[int]:
    """Canonical monomials of one total degree, in increasing bit order."""
    return [m for m in range(1 << (2 * n)) if m.bit_count() == degree]


def d_matrix(data: HermitianLieData, degree: int) -> np.ndarray:
    """Matrix of ``d`` from degree to degree + 1 in the bases of :func:`degree_masks`."""
    require_valid(data)
    n = data.n
    gens = generator_differentials(data)
    cache = data.cached("d_monomial_cache", dict)
    cols = degree_masks(n, degree)
    rows = {m: idx for idx, m in enumerate(degree_masks(n, degree + 1))}
    out = np.zeros((len(rows), len(cols)), dtype=np.complex128)
    for j, m in enumerate(cols):
        for mm, v in _d_monomial(m, gens, cache).items():
            out[rows[mm], j] += v
    return out


class MatrixForm:
    """Square matrix whose entries are invariant forms; products use the wedge."""

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        size = len(rows)
        if any(len(r) != size for r in rows):
            raise DimensionMismatch("MatrixForm must be square")
        ns = {e.n for r in rows for e in r}
        if len(ns) > 1:
            raise DimensionMismatch(f"MatrixForm entries of mixed dimension {sorted(ns)}")
        self.entries = tuple(tuple(r) for r in rows)
        self.size = size
        self.n = ns.pop() if ns else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def _map(self, fn) -> "MatrixForm":
        return MatrixForm([[fn(e) for e in r] for r in self.entries])

    def conj(self) -> "MatrixForm":
        return self._map(InvariantForm.conj)

    def d(self, data: HermitianLieData) -> "MatrixForm":
        return self._map(lambda e: d_operator(e, data))

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __xor__(self, other: "MatrixForm") -> "MatrixForm":
        size = self.size
        out = []
        for i in range(size):
            row = []
            for j in range(size):
                acc = InvariantForm.zero(self.n)
                for k in range(size):
                    acc = acc + (self.entries[i][k] ^ other.entries[k][j])
                row.append(acc)
            out.append(row)
        return MatrixForm(out)

    def norm(self) -> float:
        return max((e.norm() for r in self.entries for e in r), default=0.0)
