"""Structure files and the analysis report.

File format (JSON, 1-based indices, complex numbers as ``re, im``)::

    {"n": 2, "C": [[j, i, k, re, im], ...], "D": [[j, i, k, re, im], ...]}
    {"n": 2, "terms": {"2": {"hol": [[i, k, re, im]], "mixed": [[i, k, re, im]]}}}

Only ``i < k`` entries of ``C`` (and of ``hol``) are listed; the rest follow
by antisymmetry.  Repeated index triples are rejected.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    HermitianLieData,
    _real_bracket,
    is_nilpotent_J,
    lower_central_series,
    normalized,
    validate,
)
from .catalog import CoframeDifferentials, from_coframe
from .classify import classify_ckl, classify_rkl, classify_skl
from .connections import ALL_KINDS, chern_torsion, kl_residual, standard_J_for, structure_curvature
from .errors import InvalidStructure, NotNilpotent, ParseError
from .forms import metric_form_residuals

SCHEMA = "nilkl/1"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {x!r}")
    x = float(x)
    if not np.isfinite(x):
        raise ParseError(f"{where}: non-finite number")
    return x


def _index(x, n: int, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer index, got {x!r}")
    if not 1 <= x <= n:
        raise ParseError(f"{where}: index {x} outside 1..{n}")
    return x


def _entries(rows, width: int, n: int, where: str) -> list[tuple]:
    if not isinstance(rows, list):
        raise ParseError(f"{where}: expected a list")
    out = []
    for pos, row in enumerate(rows):
        loc = f"{where}[{pos}]"
        if not isinstance(row, list) or len(row) != width:
            raise ParseError(f"{loc}: expected {width} values")
        idx = tuple(_index(v, n, loc) for v in row[: width - 2])
        out.append(idx + (complex(_number(row[-2], loc), _number(row[-1], loc)),))
    return out


def _reject_duplicates(entries: list[tuple], where: str, pair_slots: tuple[int, int] | None) -> None:
    seen = set()
    for e in entries:
        key = e[:-1]
        if key in seen:
            raise ParseError(f"{where}: duplicate entry for indices {list(key)}")
        seen.add(key)
    if pair_slots is None:
        return
    a, b = pair_slots
    for e in entries:
        key = list(e[:-1])
        if key[a] == key[b]:
            raise ParseError(f"{where}: entry {key} has equal antisymmetric indices")
        if key[a] > key[b]:
            swapped = key.copy()
            swapped[a], swapped[b] = key[b], key[a]
            if tuple(swapped) in seen:
                raise ParseError(f"{where}: conflicting antisymmetric pair {key} and {swapped}")
            raise ParseError(f"{where}: entry {key} must list the smaller index first")


def parse_structure(obj, label: str | None = None, check: bool = True) -> HermitianLieData:
    """Build constants from an already-decoded JSON object.

    With ``check`` (the default) a structure failing :func:`validate` raises
    InvalidStructure; ``check=False`` returns it for inspection.
    """
    if not isinstance(obj, dict):
        raise ParseError("top level must be a JSON object")
    n = obj.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError(f"'n' must be a positive integer, got {n!r}")
    if "terms" in obj:
        if set(obj) - {"n", "terms", "label"}:
            raise ParseError(f"unknown keys {sorted(set(obj) - {'n', 'terms', 'label'})}")
        terms = obj["terms"]
        if not isinstance(terms, dict):
            raise ParseError("'terms' must be an object keyed by form index")
        hol, mixed = {}, {}
        for key, spec in terms.items():
            try:
                j = int(key)
            except ValueError:
                raise ParseError(f"terms key {key!r} is not an integer") from None
            _index(j, n, "terms")
            if not isinstance(spec, dict) or set(spec) - {"hol", "mixed"}:
                raise ParseError(f"terms[{key}] must have only 'hol' and 'mixed' lists")
            h = _entries(spec.get("hol", []), 4, n, f"terms[{key}].hol")
            m = _entries(spec.get("mixed", []), 4, n, f"terms[{key}].mixed")
            _reject_duplicates(h, f"terms[{key}].hol", (0, 1))
            _reject_duplicates(m, f"terms[{key}].mixed", None)
            hol[j], mixed[j] = h, m
        cd = CoframeDifferentials(n, hol, mixed)
        if check:
            return from_coframe(cd, label or obj.get("label"))
        return HermitianLieData(*cd.to_arrays(), label or obj.get("label"))
    if set(obj) - {"n", "C", "D", "label"}:
        raise ParseError(f"unknown keys {sorted(set(obj) - {'n', 'C', 'D', 'label'})}")
    Ce = _entries(obj.get("C", []), 5, n, "C")
    De = _entries(obj.get("D", []), 5, n, "D")
    _reject_duplicates(Ce, "C", (1, 2))
    _reject_duplicates(De, "D", None)
    C = np.zeros((n, n, n), dtype=np.complex128)
    D = np.zeros((n, n, n), dtype=np.complex128)
    for j, i, k, c in Ce:
        C[j - 1, i - 1, k - 1] = c
        C[j - 1, k - 1, i - 1] = -c
    for j, i, k, c in De:
        D[j - 1, i - 1, k - 1] = c
    data = HermitianLieData(C, D, label or obj.get("label"))
    report = validate(data)
    if check and not report.valid:
        raise InvalidStructure(f"not a Lie algebra: normalized Jacobi residual {report.jacobi_residual:.3e}")
    return data


def parse_structure_file(path, check: bool = True) -> HermitianLieData:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_structure(obj, label=None, check=check)


def _pair(z: complex) -> list[float]:
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def structure_to_json(data: HermitianLieData) -> dict:
    """Inverse of :func:`parse_structure` (structure-constant mode)."""
    n = data.n
    C = [[j + 1, i + 1, k + 1, *_pair(data.C[j, i, k])]
         for j in range(n) for i in range(n) for k in range(i + 1, n) if data.C[j, i, k] != 0]
    D = [[j + 1, i + 1, k + 1, *_pair(data.D[j, i, k])]
         for j in range(n) for i in range(n) for k in range(n) if data.D[j, i, k] != 0]
    out = {"n": n, "C": C, "D": D}
    if data.label:
        out["label"] = data.label
    return out


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def digest(data: HermitianLieData) -> str:
    """sha256 of the constants; independent of how the input entries were ordered."""
    h = hashlib.sha256()
    h.update(str(data.n).encode())
    for arr in (data.C, data.D):
        h.update(np.ascontiguousarray(arr + 0.0).tobytes())
    return h.hexdigest()


def _check(residual: float, tol: float) -> dict:
    return {"residual": float(residual), "holds": bool(residual < tol)}


def _complex_list(a) -> list:
    return [_pair(z) for z in np.ravel(a)]


def build_report(data: HermitianLieData, tol: float = DEFAULT_TOL, seed: int = 0) -> dict:
    """Every quantity the library computes for one structure, as plain JSON data."""
    val = validate(data, tol)
    report: dict = {
        "schema": SCHEMA,
        "input": {"digest": digest(data), "n": data.n, "scale": data.scale},
        "tol": tol,
        "seed": seed,
        "validity": {
            "valid": bool(val.valid),
            "antisymmetry_ok": bool(val.antisymmetry_ok),
            "jacobi": _check(val.jacobi_residual, tol),
            "jacobi_breakdown": [float(x) for x in val.jacobi_breakdown],
            "real_jacobi": _check(val.real_jacobi_residual, tol),
        },
    }
    if not val.valid:
        return report
    M = data.scale
    series = lower_central_series(data)
    nil_J, nil_J_dims = is_nilpotent_J(data)
    report["algebra"] = {
        "nilpotent": bool(series.nilpotent),
        "step": series.step,
        "series_dims": series.dims,
        "nilpotent_J": bool(nil_J),
        "nilpotent_J_dims": nil_J_dims,
        "abelian_J": _check(normalized(np.abs(data.C).max(), M, 1), tol),
        "bracket_norm": _check(normalized(np.abs(_real_bracket(data)).max(), M, 1), tol),
    }
    mres = metric_form_residuals(data)
    report["metric"] = {
        "kahler": _check(normalized(mres.kahler, M, 1), tol),
        "pluriclosed": _check(normalized(mres.pluriclosed, M, 2), tol),
        "balanced": _check(normalized(mres.balanced, M, 1), tol),
        "torsion_norm": float(normalized(np.abs(chern_torsion(data).T).max(), M, 1)),
    }
    J = standard_J_for(data)
    conns = {}
    for kind in ALL_KINDS:
        R = structure_curvature(data, kind)
        kl = kl_residual(R, J)
        conns[kind.value] = {
            "curvature_norm": _check(normalized(np.abs(R.R).max(), M, 2), tol),
            "kl_sym": _check(normalized(kl.sym, M, 2), tol),
            "kl_jinv": _check(normalized(kl.jinv, M, 2), tol),
        }
        conns[kind.value]["flat"] = conns[kind.value]["curvature_norm"]["holds"]
    report["connections"] = conns

    try:
        skl = classify_skl(data, tol, seed)
    except NotNilpotent:
        report["skl"] = {"verdict": None, "stage": "not-nilpotent"}
    else:
        block = {"verdict": skl.verdict, "stage": skl.stage,
                 "residuals": {k: float(v) for k, v in skl.residuals.items()},
                 "failed_stages": skl.details["failed_stages"], "r": skl.details["r"]}
        nf = skl.normal_form
        if nf is not None:
            block.update({
                "s": nf.s,
                "lambdas": [float(x) for x in nf.lambdas],
                "Y": [_complex_list(row) for row in nf.Y],
                "X": [[float(x) + 0.0 for x in row] for row in nf.X],
                "U": [_complex_list(row) for row in nf.U],
            })
        report["skl"] = block
    ckl = classify_ckl(data, tol)
    report["ckl"] = {
        "verdict": ckl.verdict, "stage": ckl.stage,
        "residuals": {k: float(v) for k, v in ckl.residuals.items()},
        "chern_flat": _check(ckl.details["chern_flat"], tol),
        "D_norm": _check(ckl.details["D_norm"], tol),
    }
    if "witness" in ckl.details:
        idx, value = ckl.details["witness"]
        report["ckl"]["witness"] = {"component": list(idx), "value": _pair(value)}
    rkl = classify_rkl(data, tol)
    report["rkl"] = {
        "verdict": rkl.verdict, "stage": rkl.stage,
        "residuals": {k: float(v) for k, v in rkl.residuals.items()},
        "theta2": _check(rkl.details["theta2"], tol),
        "rkl_necessary": _check(rkl.details["rkl_necessary"], tol),
        "bracket_norm": _check(rkl.details["bracket_norm"], tol),
        "nilpotent_J": rkl.details["nilpotent_J"],
    }
    return report


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if isinstance(x, dict) and "residual" in x:
        return f"{'yes' if x['holds'] else 'no ':3s}  ({x['residual']:.3e})"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def render_text(report: dict) -> str:
    """Human-readable table of the same report."""
    lines = [f"structure {report['input']['digest'][:16]}  n={report['input']['n']}  "
             f"scale={report['input']['scale']:.6g}  tol={report['tol']:g}"]
    v = report["validity"]
    lines.append(f"valid              {'yes' if v['valid'] else 'no'}  (jacobi {v['jacobi']['residual']:.3e})")
    if not v["valid"]:
        return "\n".join(lines) + "\n"
    a = report["algebra"]
    lines += [
        f"nilpotent          {'yes' if a['nilpotent'] else 'no'}  step={a['step']}  dims={a['series_dims']}",
        f"nilpotent J        {'yes' if a['nilpotent_J'] else 'no'}  dims={a['nilpotent_J_dims']}",
        f"abelian J          {_fmt(a['abelian_J'])}",
    ]
    m = report["metric"]
    for key in ("kahler", "pluriclosed", "balanced"):
        lines.append(f"{key:<19s}{_fmt(m[key])}")
    lines.append(f"torsion norm       {m['torsion_norm']:.6g}")
    lines.append("connection         flat   KL-sym               KL-J")
    for kind, c in report["connections"].items():
        lines.append(f"  {kind:<17s}{'yes' if c['flat'] else 'no ':4s}  {_fmt(c['kl_sym']):20s} {_fmt(c['kl_jinv'])}")
    s = report["skl"]
    verdict = {True: "yes", False: "no", None: "n/a"}[s["verdict"]]
    extra = ""
    if s.get("verdict"):
        extra = f"  r={s['r']} s={s['s']} lambdas={[round(x, 12) for x in s['lambdas']]}"
    lines.append(f"Strominger KL      {verdict}  stage={s['stage']}{extra}")
    c = report["ckl"]
    lines.append(f"Chern KL           {'yes' if c['verdict'] else 'no'}  stage={c['stage']}  "
                 f"flat={_fmt(c['chern_flat'])}")
    r = report["rkl"]
    lines.append(f"Riemannian KL      {'yes' if r['verdict'] else 'no'}  stage={r['stage']}  "
                 f"theta2={_fmt(r['theta2'])}")
    return "\n".join(lines) + "\n"
