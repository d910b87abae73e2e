"""The ten acceptance checks, shared by ``nilkl selftest`` and the test suite.

Each check returns a :class:`CriterionResult`; none of them raises on a
failed comparison, so a run always reports all ten lines.
"""

from __future__ import annotations

import contextlib
import io
import json
import random
import re
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .algebra import HermitianLieData, change_frame, is_nilpotent_J, normalized, _real_bracket
from .catalog import (
    COR12_SHAPES,
    COR12_TABLE,
    COR12_VARIANTS,
    build_family,
    cor12_coframe,
    cor12_latex,
    from_coframe,
    from_normal_form,
    random_two_step,
    random_unitary,
    solve_n6b_y,
)
from .classify import classify_ckl, classify_rkl, classify_skl, eq_y_residual, pluriclosed_formula
from .connections import (
    ALL_KINDS,
    ConnectionKind,
    chern_expansion,
    kl_residual,
    standard_J_for,
    structure_curvature,
    theta2_residual,
    torsion_covariant_derivative,
)
from .forms import d_matrix, del_op, delbar_op, fundamental_form
from .report import build_report, render_json, structure_to_json

TAU = 1e-8


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}: {self.detail}"


def _max(x) -> float:
    x = np.asarray(x)
    return float(np.abs(x).max()) if x.size else 0.0


# ---------------------------------------------------------------------------
# shared populations
# ---------------------------------------------------------------------------

def draw_cor12_params(key: tuple[int, str], rng: np.random.Generator) -> dict:
    """Lambdas uniform in [0.1, 10], other constants in [-5, 5]; n=6 (b) keeps |y| <= 5."""
    while True:
        p = {"n": key[0], "variant": key[1]}
        for name in COR12_VARIANTS[key]:
            if name == "y":
                continue
            p[name] = rng.uniform(0.1, 10.0) if name.startswith("lambda") else rng.uniform(-5.0, 5.0)
        if key != (6, "b"):
            return p
        y = solve_n6b_y(p["lambda2"], p["a"], p["b"], p["c"], p["x"])
        if abs(y) <= 5.0:
            p["y"] = y
            return p


def negative_controls() -> dict[str, HermitianLieData]:
    """n=5 (b) and n=6 (b) with the compensating terms removed."""
    n5 = cor12_coframe(5, "b", compensate=False, lambda1=1, lambda2=1, a=1, b=1, c=1)
    s = np.sqrt(2.0)
    n6 = cor12_coframe(6, "b", compensate=False, lambda1=1, lambda2=1, a=1, b=1, c=1, x=s, y=-s)
    return {"n5b-uncompensated": from_coframe(n5, "n5b-uncompensated"),
            "n6b-uncompensated": from_coframe(n6, "n6b-uncompensated")}


CATALOG_PARAMS = {"a": 0.7, "b": -1.3, "c": 0.4, "x": 0.9}


@lru_cache(maxsize=None)
def catalog_structures() -> tuple[HermitianLieData, ...]:
    out = [build_family("abelian", {"n": n}) for n in range(1, 7)]
    out += [build_family("kodaira", {"lambda": lam}) for lam in (0.5, 1.0, 2.0)]
    out.append(build_family("iwasawa"))
    for key in COR12_TABLE:
        p = {"n": key[0], "variant": key[1]}
        p.update({k: v for k, v in CATALOG_PARAMS.items() if k in COR12_VARIANTS[key]})
        out.append(build_family("cor12", p))
    out += list(negative_controls().values())
    return tuple(out)


@lru_cache(maxsize=None)
def random_population(per_shape: int = 72) -> tuple[HermitianLieData, ...]:
    """Two-step structures over n = 2..5 and every r, alternating which blocks are drawn."""
    out = []
    for n in range(2, 6):
        for r in range(1, n + 1):
            for seed in range(per_shape):
                flavour = seed % 3
                out.append(random_two_step(n, r, seed=(n, r, seed),
                                           with_C=flavour != 0, with_D=flavour != 1))
    return tuple(out)


def _skl_curvature(d):
    return normalized(kl_residual(structure_curvature(d, ConnectionKind.STROMINGER), standard_J_for(d)).max(),
                      d.scale, 2)


def _pluri(d):
    return normalized(del_op(delbar_op(fundamental_form(d.n), d), d).norm(), d.scale, 2)


def _strom_dt(d):
    a, b = torsion_covariant_derivative(d, ConnectionKind.STROMINGER)
    return normalized(max(_max(a), _max(b)), d.scale, 2)


def _chern_tbar(d):
    return normalized(_max(torsion_covariant_derivative(d, ConnectionKind.CHERN)[1]), d.scale, 2)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def _normalise_tex(text: str) -> str:
    return re.sub(r"\\(qquad|quad|,|!|;| )|\s", "", text)


def quote_check(paper: str | Path | None) -> tuple[bool | None, str]:
    """Whether every family equation appears verbatim in the given text; None if no text is available."""
    path = Path(paper) if paper else None
    if path is None or not path.exists():
        return None, "quote check not run (paper source not found)"
    source = _normalise_tex(path.read_text())
    missing = []
    for key in COR12_TABLE:
        for eq in cor12_latex(*key):
            e = _normalise_tex(eq)
            pos = source.find(e)
            if pos < 0 or source[pos + len(e): pos + len(e) + 1] in "+-":
                missing.append(eq)
    if missing:
        return False, f"missing equations {missing}"
    return True, f"{sum(len(t) for t in COR12_TABLE.values())} equations found verbatim"


def criterion_1(paper=None, draws: int = 20) -> CriterionResult:
    rng = np.random.default_rng(1)
    failures, worst = [], 0.0
    for key, shape in COR12_SHAPES.items():
        for _ in range(draws):
            p = draw_cor12_params(key, rng)
            d = build_family("cor12", p)
            dec = classify_skl(d, TAU)
            res = max(_pluri(d), _strom_dt(d), _skl_curvature(d))
            worst = max(worst, res)
            nf = dec.normal_form
            if not dec.verdict or (nf.r, nf.s) != shape or res >= TAU:
                failures.append((key, p))
    quoted, qmsg = quote_check(paper)
    ok = not failures and quoted is not False
    detail = (f"{len(COR12_SHAPES)} families x {draws} draws, {len(failures)} failures, "
              f"max residual {worst:.1e}; {qmsg}")
    return CriterionResult(1, "normal-form families are SKL with expected (r, s)", ok, detail)


def criterion_2() -> CriterionResult:
    parts, ok = [], True
    for name, d in negative_controls().items():
        dec = classify_skl(d, TAU)
        r = d.n - 2
        Y = np.stack([-np.conj(d.D[np.arange(r), a, np.arange(r)]) for a in range(r, d.n)], axis=1)
        raw = eq_y_residual(Y)
        good = (not dec.verdict and dec.stage == "pluriclosed"
                and dec.residuals["pluriclosed"] >= 0.5 and abs(raw - 2.0) < 1e-12)
        ok &= good
        parts.append(f"{name}: stage={dec.stage} normalized={dec.residuals['pluriclosed']:.3g} raw={raw:.3g}")
    return CriterionResult(2, "uncompensated families fail at the pluriclosed stage", ok, "; ".join(parts))


def criterion_3() -> CriterionResult:
    pop = random_population()
    bad = 0
    positives = 0
    for d in pop:
        a = _chern_tbar(d) < TAU
        b = normalized(_max(structure_curvature(d, ConnectionKind.CHERN).R), d.scale, 2) < TAU
        c = normalized(_max(d.D), d.scale, 1) < TAU
        bad += not (a == b == c)
        positives += a
    iw = build_family("iwasawa")
    iw_vals = (_max(torsion_covariant_derivative(iw, "chern")[1]),
               _max(structure_curvature(iw, "chern").R), _max(iw.D))
    ok = bad == 0 and len(pop) >= 1000 and iw_vals == (0.0, 0.0, 0.0)
    return CriterionResult(3, "Chern KL <=> Chern flat <=> D = 0", ok,
                           f"{len(pop)} structures, {positives} positive, {bad} mismatches; "
                           f"iwasawa residuals {iw_vals}")


def criterion_4() -> CriterionResult:
    pop = random_population()
    bad = non_nilJ = positives = 0
    for d in pop:
        nil_J, _ = is_nilpotent_J(d)
        non_nilJ += not nil_J
        kl = normalized(kl_residual(structure_curvature(d, "riemannian"), standard_J_for(d)).max(), d.scale, 2)
        br = normalized(_max(_real_bracket(d)), d.scale, 1)
        bad += (kl < TAU) != (br < TAU)
        positives += kl < TAU
    ok = bad == 0 and non_nilJ == 0
    return CriterionResult(4, "Riemannian KL <=> abelian (nilpotent J)", ok,
                           f"{len(pop)} structures, {non_nilJ} without nilpotent J, "
                           f"{positives} positive, {bad} mismatches")


def criterion_5() -> CriterionResult:
    structures = list(catalog_structures()) + list(random_population())
    band = (1e-10, 1e-6)
    disagreements = excluded = 0
    counts = [0, 0, 0]
    for d in structures:
        skl_curv = _skl_curvature(d)
        skl_crit = max(_pluri(d), _strom_dt(d))
        ckl_curv = normalized(kl_residual(structure_curvature(d, "chern"), standard_J_for(d)).max(), d.scale, 2)
        ckl_crit = _chern_tbar(d)
        rkl_curv = normalized(kl_residual(structure_curvature(d, "riemannian"), standard_J_for(d)).max(),
                              d.scale, 2)
        rkl_crit = normalized(theta2_residual(d), d.scale, 2)
        values = (skl_curv, skl_crit, ckl_curv, ckl_crit, rkl_curv, rkl_crit)
        if any(band[0] <= v <= band[1] for v in values):
            excluded += 1
            continue
        pairs = ((skl_curv, skl_crit), (ckl_curv, ckl_crit), (rkl_curv, rkl_crit))
        for idx, (u, v) in enumerate(pairs):
            disagreements += (u < TAU) != (v < TAU)
            counts[idx] += u < TAU
        disagreements += classify_skl(d, TAU).verdict != (skl_curv < TAU)
    ok = disagreements == 0 and excluded == 0
    return CriterionResult(5, "curvature decisions match the torsion/form criteria", ok,
                           f"{len(structures)} structures, positives SKL/CKL/RKL={counts}, "
                           f"{disagreements} disagreements, {excluded} in rejection band")


def criterion_6() -> CriterionResult:
    worst, ok = 0.0, True
    for n in range(1, 7):
        d = build_family("abelian", {"n": n})
        worst = max([worst] + [_max(structure_curvature(d, k).R) for k in ALL_KINDS])
        ok &= classify_skl(d).verdict and classify_ckl(d).verdict and classify_rkl(d).verdict
    ok &= worst < 1e-12
    return CriterionResult(6, "abelian structures are flat and Kähler-like", bool(ok),
                           f"n=1..6, max curvature {worst:.1e}")


def theorem_shaped(seed: int) -> HermitianLieData:
    """``d phi_a = sum_i Y_ia phi_i ^ conj(phi_i)`` with random Y (not necessarily pluriclosed)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    r = int(rng.integers(1, n))
    Y = rng.uniform(-1, 1, (r, n - r)) + 1j * rng.uniform(-1, 1, (r, n - r))
    D = np.zeros((n, n, n), dtype=np.complex128)
    for a in range(n - r):
        for i in range(r):
            D[i, r + a, i] = -np.conj(Y[i, a])
    return HermitianLieData(np.zeros_like(D), D, f"shaped({seed})")


def criterion_7() -> CriterionResult:
    d2 = 0.0
    for seed in range(100):
        n = 2 + seed % 4
        base = random_two_step(n, max(1, n - 1 - seed % 2), seed=seed)
        d = change_frame(base, random_unitary(n, seed))
        # column j of d_{k+1} d_k is d^2 of the j-th basis form of degree k
        mats = [d_matrix(d, k) for k in range(2 * n)]
        d2 = max([d2] + [_max(mats[k + 1] @ mats[k]) for k in range(2 * n - 1)])
    shaped = [theorem_shaped(s) for s in range(60)]
    shaped += [c for c in catalog_structures() if c.label and c.label.startswith(("cor12", "n5b", "n6b"))]
    dd = 0.0
    for d in shaped:
        r = _closed_count(d)
        Y = np.stack([-np.conj(d.D[np.arange(r), a, np.arange(r)]) for a in range(r, d.n)], axis=1)
        engine = del_op(delbar_op(fundamental_form(d.n), d), d)
        dd = max(dd, (engine - pluriclosed_formula(Y, d.n)).norm())
    ok = d2 < 1e-12 and dd < 1e-12
    return CriterionResult(7, "d^2 = 0 and the closed formula for del delbar omega", ok,
                           f"max |d^2| {d2:.1e} over 100 structures; formula gap {dd:.1e} over {len(shaped)}")


def _closed_count(d: HermitianLieData) -> int:
    """Number of leading coframe forms with zero differential in the defining frame."""
    r = 0
    while r < d.n and not d.D[:, r, :].any() and not d.C[r].any():
        r += 1
    return r


def criterion_8() -> CriterionResult:
    structures = list(catalog_structures()) + list(random_population())[::4]
    anti = d8 = 0.0
    for d in structures:
        for k in ALL_KINDS:
            R = structure_curvature(d, k).R
            anti = max(anti, normalized(_max(R + R.transpose(1, 0, 2, 3)), d.scale, 2),
                       normalized(_max(R + R.transpose(0, 1, 3, 2)), d.scale, 2))
        tbar = torsion_covariant_derivative(d, "chern")[1]
        d8 = max(d8, normalized(_max(chern_expansion(d) - 2 * tbar), d.scale, 2))
    ok = anti < 1e-12 and d8 < 1e-12
    return CriterionResult(8, "curvature antisymmetry and the D-only torsion expansion", ok,
                           f"{len(structures)} structures, antisymmetry {anti:.1e}, expansion gap {d8:.1e}")


def criterion_9() -> CriterionResult:
    structures = list(catalog_structures()) + list(random_population())
    rng = np.random.default_rng(9)
    for key in COR12_TABLE:
        d = build_family("cor12", draw_cor12_params(key, rng))
        structures.append(change_frame(d, random_unitary(d.n, rng)))
    gap, count = 0.0, 0
    for d in structures:
        dec = classify_skl(d, TAU)
        if not dec.verdict:
            continue
        count += 1
        nf = dec.normal_form
        moved = change_frame(d, nf.U)
        rebuilt = from_normal_form(nf)
        gap = max(gap, _max(moved.C - rebuilt.C), _max(moved.D - rebuilt.D))
    lam_gap = max(abs(classify_skl(build_family("kodaira", {"lambda": lam})).normal_form.lambdas[0]
                      - np.sqrt(2.0) * lam) for lam in (0.5, 1.0, 2.0))
    ok = gap < 1e-10 and lam_gap < 1e-12 and count > 0
    return CriterionResult(9, "normal form rebuilds the input frame", ok,
                           f"{count} SKL structures, max gap {gap:.1e}; kodaira lambda gap {lam_gap:.1e}")


def _analyze_json(path: Path) -> str:
    from .cli import main

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["analyze", str(path), "--json"])
    if code != 0:
        raise RuntimeError(f"analyze exited with {code}")
    return buf.getvalue()


def criterion_10() -> CriterionResult:
    mismatches = 0
    structures = catalog_structures()
    shuffler = random.Random(10)
    with tempfile.TemporaryDirectory() as tmp:
        for idx, d in enumerate(structures):
            obj = structure_to_json(d)
            base = Path(tmp) / f"s{idx}.json"
            base.write_text(json.dumps(obj))
            first, second = _analyze_json(base), _analyze_json(base)
            for rep in range(2):
                perm = dict(obj, C=shuffler.sample(obj["C"], len(obj["C"])),
                            D=shuffler.sample(obj["D"], len(obj["D"])))
                other = Path(tmp) / f"s{idx}p{rep}.json"
                other.write_text(json.dumps(perm))
                mismatches += _analyze_json(other) != first
            mismatches += first != second
            mismatches += render_json(build_report(d)) != first
    return CriterionResult(10, "analyze --json is deterministic and order independent", mismatches == 0,
                           f"{len(structures)} catalog structures, {mismatches} mismatches")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(paper=None) -> list[CriterionResult]:
    if paper is None:
        for guess in (Path.cwd() / "paper.md", Path(__file__).resolve().parents[2] / "paper.md"):
            if guess.exists():
                paper = guess
                break
    results = []
    for idx, check in enumerate(CRITERIA, start=1):
        try:
            results.append(check(paper) if idx == 1 else check())
        except Exception as exc:  # report, do not abort the remaining checks
            results.append(CriterionResult(idx, check.__name__, False, f"raised {type(exc).__name__}: {exc}"))
    return results
