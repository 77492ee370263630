"""Command-line interface: problem files in, JSON reports out.

Problem documents are JSON with one top-level key: ``builtin`` (name plus
params), ``pencil`` (full schema: m, components, rows), or ``sector``
(geometry, sides, named rhs/dirichlet evaluators, grid).  Every report
embeds the run's seed, discretization, tool version, and a content digest
of the inputs; payload bytes are deterministic for identical inputs.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PencilError
from .multiplicity import jordan_system
from .nep import NepOptions, Rectangle, beyn_eigs
from .pencil import (BCTerm, BoundaryRow, Component, PencilOperator,
                     PencilProblem, TrigPoly, builtin_problem, discretize,
                     validate_problem)
from .report import (WeightLine, adjoint_symmetry_check, eval_singular,
                     fredholm_verdict, singular_functions, strip_scan)
from .sector import (PolarGrid, SectorProblem2D, convergence_study,
                     fit_exponent, refine_grid, resolvent_scan, ring_norms,
                     solve_sector, weighted_norm)

__all__ = ["parse_problem_file", "serialize_problem", "run", "main"]


# ---------------------------------------------------------------------------
# named evaluators for sector documents (callables cannot live in files)


def _rhs_builtins():
    return {
        "zero": lambda r, phi: np.zeros_like(np.asarray(r), dtype=complex),
        "one": lambda r, phi: np.ones_like(np.asarray(r), dtype=complex),
    }


def _dirichlet_builtins(d: float):
    return {
        "zero": lambda phi: np.zeros_like(np.asarray(phi), dtype=complex),
        "sin2phi": lambda phi: np.sin(2 * np.asarray(phi)) + 0j,
        "sin2phi_plus_1": lambda phi: np.sin(2 * np.asarray(phi)) + 1.0 + 0j,
        "sin2phi_sin4phi": lambda phi: (np.sin(2 * np.asarray(phi))
                                        + 0.3 * np.sin(4 * np.asarray(phi)) + 0j),
        "mode1": lambda phi: np.sin(math.pi * np.asarray(phi) / d) + 0j,
    }


# ---------------------------------------------------------------------------
# JSON <-> problem objects


def _as_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ValueError(f"{where}: expected number or [re, im] pair, got {v!r}")


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _coeff_from_json(v, where: str):
    if isinstance(v, dict):
        cos = {int(k): _as_complex(c, f"{where}.cos[{k}]")
               for k, c in (v.get("cos") or {}).items()}
        sin = {int(k): _as_complex(c, f"{where}.sin[{k}]")
               for k, c in (v.get("sin") or {}).items()}
        return TrigPoly.make(_as_complex(v.get("const", 0.0), f"{where}.const"),
                             cos, sin)
    return _as_complex(v, where)


def _coeff_to_json(c):
    if isinstance(c, TrigPoly):
        return {"const": _pair(c.const),
                "cos": {str(k): _pair(a) for k, a in c.cos},
                "sin": {str(k): _pair(b) for k, b in c.sin}}
    if isinstance(c, (int, float, complex)):
        return _pair(complex(c))
    raise ValueError("only constant and trig-poly coefficients serialize")


def _operator_from_json(doc, where: str) -> PencilOperator:
    terms = {}
    for i, t in enumerate(doc.get("terms", ())):
        key = (int(t["dphi"]), int(t["lam"]))
        terms[key] = _coeff_from_json(t["coeff"], f"{where}.terms[{i}].coeff")
    return PencilOperator(order=int(doc["order"]), terms=terms)


def _operator_to_json(op: PencilOperator):
    return {"order": op.order,
            "terms": [{"dphi": a1, "lam": a2, "coeff": _coeff_to_json(c)}
                      for (a1, a2), c in op.sorted_terms()]}


def _pencil_from_json(doc) -> PencilProblem:
    comps = tuple(
        Component(interval=(float(c["interval"][0]), float(c["interval"][1])),
                  operator=_operator_from_json(c["operator"],
                                               f"components[{i}].operator"))
        for i, c in enumerate(doc["components"])
    )
    rows = []
    for i, r in enumerate(doc["rows"]):
        terms = tuple(
            BCTerm(source=int(t["source"]), shift=float(t["shift"]),
                   chi=float(t["chi"]),
                   op=_operator_from_json(t["op"], f"rows[{i}].terms[{j}].op"))
            for j, t in enumerate(r["terms"])
        )
        rows.append(BoundaryRow(
            component=int(r["component"]), side=str(r["side"]),
            row_order=int(r["row_order"]), terms=terms,
            kind=str(r.get("kind", "standard")),
            match_order=(None if r.get("match_order") is None
                         else int(r["match_order"])),
        ))
    symbol = doc.get("symbol")
    if symbol is not None:
        symbol = tuple(_as_complex(s, f"symbol[{i}]")
                       for i, s in enumerate(symbol))
    return PencilProblem(m=int(doc["m"]), components=comps,
                         rows=tuple(rows), symbol=symbol)


def _pencil_to_json(p: PencilProblem):
    return {
        "m": p.m,
        "components": [{"interval": [c.interval[0], c.interval[1]],
                        "operator": _operator_to_json(c.operator)}
                       for c in p.components],
        "rows": [{"component": r.component, "side": r.side,
                  "row_order": r.row_order, "kind": r.kind,
                  "match_order": r.match_order,
                  "terms": [{"source": t.source, "shift": t.shift,
                             "chi": t.chi, "op": _operator_to_json(t.op)}
                            for t in r.terms]}
                 for r in p.rows],
        "symbol": None if p.symbol is None else [_pair(s) for s in p.symbol],
    }


def _sector_from_json(doc) -> tuple[SectorProblem2D, PolarGrid | None]:
    d = float(doc["d"])
    sides = []
    for i, s in enumerate(doc.get("sides", ())):
        sides.append((float(s["alpha"]), float(s["shift"])))
    rhs_name = doc.get("rhs", "zero")
    dir_name = doc.get("dirichlet", "zero")
    rhs_reg, dir_reg = _rhs_builtins(), _dirichlet_builtins(d)
    if rhs_name not in rhs_reg:
        raise ValueError(f"rhs: unknown evaluator {rhs_name!r} "
                         f"(available: {sorted(rhs_reg)})")
    if dir_name not in dir_reg:
        raise ValueError(f"dirichlet: unknown evaluator {dir_name!r} "
                         f"(available: {sorted(dir_reg)})")
    prob = SectorProblem2D(
        d=d, R=float(doc.get("R", 1.0)), r0=float(doc.get("r0", 1e-3)),
        c=_as_complex(doc.get("c", 0.0), "c"), sides=tuple(sides),
        rhs=rhs_reg[rhs_name], dirichlet=dir_reg[dir_name])
    grid = None
    if "grid" in doc:
        g = doc["grid"]
        grid = PolarGrid(n_r=int(g["n_r"]), n_a=int(g["n_a"]),
                         rho_g=float(g.get("rho_g", 0.7)))
    return prob, grid


def _load_document(text: str):
    """Returns (kind, problem, grid_or_None) from document text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ValueError("document root must be an object")
    if "builtin" in doc:
        p = builtin_problem(doc["builtin"], doc.get("params"))
        return "pencil", p, None
    if "pencil" in doc:
        p = _pencil_from_json(doc["pencil"])
        diags = validate_problem(p)
        if diags:
            raise ValueError("; ".join(diags))
        return "pencil", p, None
    if "sector" in doc:
        prob, grid = _sector_from_json(doc["sector"])
        return "sector", prob, grid
    raise ValueError("document needs a 'builtin', 'pencil' or 'sector' key")


def parse_problem_file(text: str) -> PencilProblem | SectorProblem2D:
    """Parse a problem document; raises ValueError naming the bad key."""
    _, prob, _ = _load_document(text)
    return prob


def serialize_problem(p: PencilProblem) -> str:
    """Inverse of parse_problem_file for pencil problems (round-trips)."""
    return json.dumps({"pencil": _pencil_to_json(p)}, indent=2,
                      sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# payload plumbing


def _quantize(v: float) -> float:
    """Report floats at 12 significant digits, zeros snapped.

    Last-bit noise (thread count, BLAS kernel choice) must not leak into
    report bytes; 12 digits keeps every documented tolerance visible.
    """
    if v == 0.0 or abs(v) < 1e-15:
        return 0.0
    return float(f"{v:.12g}")


def _jsonify(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return [_quantize(z.real), _quantize(z.imag)]
    if isinstance(obj, (float, np.floating)):
        return _quantize(float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def _digest(file_bytes: bytes, flags: dict) -> str:
    h = hashlib.sha256()
    h.update(file_bytes)
    h.update(json.dumps(_jsonify(flags), sort_keys=True).encode())
    return h.hexdigest()


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(_jsonify(report), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(_quantize(v)) if isinstance(v, float)
                              else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _sorted_eigs(items):
    return sorted(items, key=lambda e: (e.lam.imag, e.lam.real))


# ---------------------------------------------------------------------------
# verbs


def _need_pencil(kind, prob, verb):
    if kind != "pencil":
        raise ValueError(f"{verb} needs a pencil problem document")
    return prob


def _need_sector(kind, prob, grid, args, verb):
    if kind != "sector":
        raise ValueError(f"{verb} needs a sector problem document")
    if grid is None:
        raise ValueError(f"{verb}: document must carry a grid block")
    return prob, grid


def _cmd_eigs(kind, prob, grid, args, opts):
    p = _need_pencil(kind, prob, "eigs")
    d = discretize(p, args.nphi)
    rect = Rectangle(*args.rect)
    ests = _sorted_eigs(beyn_eigs(p, d, rect, opts))
    return {"rect": list(args.rect),
            "count": len(ests),
            "eigenvalues": [e.lam for e in ests],
            "sigma_min": [e.sigma_min for e in ests],
            "stable": [bool(e.resolution_stable) for e in ests]}


def _cmd_strip_check(kind, prob, grid, args, opts):
    p = _need_pencil(kind, prob, "strip-check")
    d = discretize(p, args.nphi)
    recs = strip_scan(p, d, args.h2, args.h1, args.rehw, opts)
    return {"h2": args.h2, "h1": args.h1,
            "records": [{"lam": r.lam,
                         "ranks": [c.rank for c in r.chains],
                         "geometric": r.geometric_mult,
                         "algebraic": r.algebraic_mult} for r in recs]}


def _cmd_jordan(kind, prob, grid, args, opts):
    p = _need_pencil(kind, prob, "jordan")
    d = discretize(p, args.nphi)
    rec = jordan_system(p, d, complex(args.lam[0], args.lam[1]), opts)
    return {"lam": rec.lam,
            "ranks": [c.rank for c in rec.chains],
            "geometric": rec.geometric_mult,
            "algebraic": rec.algebraic_mult}


def _cmd_asym(kind, prob, grid, args, opts):
    p = _need_pencil(kind, prob, "asym")
    d = discretize(p, args.nphi)
    rec = jordan_system(p, d, complex(args.lam[0], args.lam[1]), opts)
    funcs = singular_functions(rec, d)
    out = []
    for f in funcs:
        entry = {"k": f.k, "chain": f.chain_index, "lam": f.lam}
        if args.at is not None:
            entry["value_at"] = eval_singular(f, (args.at[0], args.at[1]))
        out.append(entry)
    return {"lam": rec.lam, "functions": out}


def _cmd_verdict(kind, prob, grid, args, opts):
    p = _need_pencil(kind, prob, "verdict")
    d = discretize(p, args.nphi)
    wl = WeightLine(a=args.a, l=args.l, m=p.m)
    v = fredholm_verdict(p, d, wl, args.rehw, opts)
    return {"a": args.a, "l": args.l, "beta": wl.beta,
            "status": v.status,
            "witnesses": list(v.witnesses),
            "notes": v.notes}


def _cmd_adjoint_check(kind, prob, grid, args, opts):
    p = _need_pencil(kind, prob, "adjoint-check")
    d = discretize(p, args.nphi)
    rep = adjoint_symmetry_check(p, d, Rectangle(*args.rect), opts)
    return {"rect": list(args.rect),
            "mapped_rect": [rep.mapped_rect.re_min, rep.mapped_rect.re_max,
                            rep.mapped_rect.im_min, rep.mapped_rect.im_max],
            "spectrum": list(rep.spectrum),
            "adjoint_spectrum": list(rep.adjoint_spectrum),
            "hausdorff": rep.hausdorff}


def _cmd_sector_solve(kind, prob, grid, args, opts):
    sp2, g = _need_sector(kind, prob, grid, args, "sector-solve")
    sol = solve_sector(sp2, g)
    rings = ring_norms(sol)
    if args.csv:
        _write_csv(args.csv, ["r", "l2_ring_norm"], rings)
    from .sector import _l2
    return {"grid": {"n_r": g.n_r, "n_a": g.n_a, "rho_g": g.rho_g},
            "l2_norm": _l2(sol.values, sol.rs, sol.phis),
            "residual": sol.residual,
            "cond_estimate": sol.cond_estimate,
            "stats": sol.stats,
            "rings": [list(t) for t in rings]}


def _cmd_exponent_fit(kind, prob, grid, args, opts):
    sp2, g = _need_sector(kind, prob, grid, args, "exponent-fit")
    sol = solve_sector(sp2, g)
    beta, r2 = fit_exponent(sol, (args.window[0], args.window[1]))
    if args.csv:
        _write_csv(args.csv, ["r", "l2_ring_norm"], ring_norms(sol))
    return {"window": list(args.window), "beta": beta, "r2_fit": r2}


def _cmd_resolvent_scan(kind, prob, grid, args, opts):
    sp2, g = _need_sector(kind, prob, grid, args, "resolvent-scan")
    ps = [float(s) for s in args.pvals.split(",")]
    scan = resolvent_scan(sp2, args.h, ps, g)
    if args.csv:
        _write_csv(args.csv, ["p", "l2_norm"],
                   list(zip(scan.p_values, scan.norms)))
    return {"h": scan.h, "p_values": list(scan.p_values),
            "norms": list(scan.norms), "slope": scan.slope}


def _cmd_convergence(kind, prob, grid, args, opts):
    g0 = PolarGrid(args.base[0], args.base[1], args.rho)
    grids = [g0]
    for _ in range(args.levels - 1):
        grids.append(refine_grid(grids[-1]))
    rec = convergence_study(args.case, grids)
    return {"case": rec.name,
            "shapes": [list(s) for s in rec.shapes],
            "l2_errors": list(rec.l2_errors),
            "max_errors": list(rec.max_errors),
            "l2_order": rec.l2_order,
            "max_order": rec.max_order,
            "note": rec.note}


def _cmd_norm(kind, prob, grid, args, opts):
    sp2, g = _need_sector(kind, prob, grid, args, "norm")
    sol = solve_sector(sp2, g)
    val = weighted_norm(sol, args.a, args.k, args.flavor)
    return {"a": args.a, "k": args.k, "flavor": args.flavor, "value": val}


_VERBS = {
    "eigs": _cmd_eigs,
    "strip-check": _cmd_strip_check,
    "jordan": _cmd_jordan,
    "asym": _cmd_asym,
    "verdict": _cmd_verdict,
    "adjoint-check": _cmd_adjoint_check,
    "sector-solve": _cmd_sector_solve,
    "exponent-fit": _cmd_exponent_fit,
    "resolvent-scan": _cmd_resolvent_scan,
    "convergence": _cmd_convergence,
    "norm": _cmd_norm,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="cornerpencil",
                  description="operator pencils at corners and sector solves")
    sub = top.add_subparsers(dest="verb", required=True)

    def common(p, problem=True):
        if problem:
            p.add_argument("--problem", required=True, help="problem JSON file")
        p.add_argument("--out", default=None, help="report path (default stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--nphi", type=int, default=64)

    p = sub.add_parser("eigs"); common(p)
    p.add_argument("--rect", type=float, nargs=4, required=True,
                   metavar=("REMIN", "REMAX", "IMMIN", "IMMAX"))
    p.add_argument("--probe", type=int, default=16)

    p = sub.add_parser("strip-check"); common(p)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--h1", type=float, required=True)
    p.add_argument("--rehw", type=float, default=10.0)
    p.add_argument("--probe", type=int, default=16)

    p = sub.add_parser("jordan"); common(p)
    p.add_argument("--lam", type=float, nargs=2, required=True,
                   metavar=("RE", "IM"))

    p = sub.add_parser("asym"); common(p)
    p.add_argument("--lam", type=float, nargs=2, required=True,
                   metavar=("RE", "IM"))
    p.add_argument("--at", type=float, nargs=2, default=None,
                   metavar=("R", "PHI"))

    p = sub.add_parser("verdict"); common(p)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--rehw", type=float, default=10.0)

    p = sub.add_parser("adjoint-check"); common(p)
    p.add_argument("--rect", type=float, nargs=4, required=True,
                   metavar=("REMIN", "REMAX", "IMMIN", "IMMAX"))
    p.add_argument("--probe", type=int, default=16)

    p = sub.add_parser("sector-solve"); common(p)
    p.add_argument("--csv", default=None, help="ring-norm CSV sidecar")

    p = sub.add_parser("exponent-fit"); common(p)
    p.add_argument("--window", type=float, nargs=2, required=True,
                   metavar=("RLO", "RHI"))
    p.add_argument("--csv", default=None)

    p = sub.add_parser("resolvent-scan"); common(p)
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--pvals", required=True,
                   help="comma-separated increasing p values")
    p.add_argument("--csv", default=None)

    p = sub.add_parser("convergence"); common(p, problem=False)
    p.add_argument("--case", required=True,
                   choices=["smooth_compliant", "singular_leading", "zero"])
    p.add_argument("--base", type=int, nargs=2, default=(32, 33),
                   metavar=("NR", "NA"))
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--rho", type=float, default=0.7)

    p = sub.add_parser("norm"); common(p)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--k", type=int, required=True, choices=[0, 1, 2])
    p.add_argument("--flavor", required=True, choices=["H", "E"])
    return top


def run(argv: list[str]) -> int:
    """Execute one command; returns the exit status (0 ok, 1 usage, 2 domain)."""
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1

    flags = {k: v for k, v in vars(args).items() if k not in ("out",)}
    file_bytes = b""
    kind, prob, grid = None, None, None
    try:
        if getattr(args, "problem", None):
            path = Path(args.problem)
            if not path.exists():
                print(f"usage error: no such file: {path}", file=sys.stderr)
                return 1
            file_bytes = path.read_bytes()
            try:
                kind, prob, grid = _load_document(file_bytes.decode())
            except ValueError as err:
                print(f"usage error: {path}: {err}", file=sys.stderr)
                return 1

        opts = NepOptions(seed=args.seed,
                          probe_rank=getattr(args, "probe", 16))
        payload = _VERBS[args.verb](kind, prob, grid, args, opts)
    except PencilError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1

    if kind == "sector" and grid is not None:
        disc = {"n_r": grid.n_r, "n_a": grid.n_a, "rho_g": grid.rho_g}
    elif kind == "pencil":
        disc = {"n_phi": args.nphi}
    else:
        disc = {"n_r": args.base[0], "n_a": args.base[1], "rho_g": args.rho}

    report = {"verb": args.verb,
              "input_digest": _digest(file_bytes, flags),
              "version": __version__,
              "seed": args.seed,
              "discretization": disc,
              "payload": payload}
    _emit(report, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)
