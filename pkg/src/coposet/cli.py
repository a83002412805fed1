"""Command line interface: ``coposet <command> ...``.

Exit codes: 0 success, 1 mathematical negative (not copositive, not
extremal, counterexample found, expectation missed), 2 input error,
3 numerical alarm.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import coposcheck, faceform, floquet, gallery, supports
from .errors import InputError, NumericalAlarm, PremiseError
from .numkernel import Tolerance, as_sym, is_psd

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_ALARM = 0, 1, 2, 3


# ------------------------------------------------------------------ I/O


def canonical_json(obj) -> str:
    """Sorted keys, floats printed with 17 significant digits."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {canonical_json(v)}" for k, v in sorted(obj.items()))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return canonical_json(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise NumericalAlarm("non-finite value in output")
        text = format(x, ".17g")
        if not any(ch in text for ch in ".en"):
            text += ".0"
        return text
    if obj is None:
        return "null"
    return json.dumps(obj)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def read_matrix(path: str) -> np.ndarray:
    """Matrix from JSON {"n", "rows"} or header-free CSV."""
    text = _read_text(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
            rows = np.array(obj["rows"], dtype=float)
            n = int(obj.get("n", rows.shape[0]))
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"bad matrix JSON: {exc}") from exc
        if rows.shape != (n, n):
            raise InputError(f"matrix JSON declares n = {n} but rows have shape {rows.shape}")
    else:
        try:
            rows = np.array([[float(x) for x in r] for r in csv.reader(io.StringIO(text)) if r],
                            dtype=float)
        except ValueError as exc:
            raise InputError(f"bad matrix CSV: {exc}") from exc
    a = as_sym(rows, check=False)
    gap = float(np.max(np.abs(rows - rows.T)))
    if gap > 1e-12 * max(1.0, float(np.max(np.abs(rows)))):
        print(f"warning: input asymmetric by {gap:.3g}; using (A + A^T)/2", file=sys.stderr)
    return a


def read_collection(path: str) -> supports.ZeroCollection:
    try:
        obj = json.loads(_read_text(path))
    except ValueError as exc:
        raise InputError(f"bad collection JSON: {exc}") from exc
    return supports.ZeroCollection.from_json(obj)


def _one_based(support) -> list[int]:
    return [i + 1 for i in support]


def _complex_list(values) -> list[list[float]]:
    """(re, im, |z|) triples."""
    return [[float(np.real(z)), float(np.imag(z)), float(abs(z))] for z in values]


# ------------------------------------------------------------- commands


def cmd_gallery(args, tol):
    rng = np.random.default_rng(args.seed)
    out: dict = {}
    kind = args.kind
    if kind == "horn":
        a = gallery.horn()
    elif kind == "tmatrix":
        theta = args.theta if args.theta else rng.uniform(0.05, 0.6, 5)
        a = gallery.t_matrix(theta)
        out["theta"] = list(theta)
    elif kind == "deg":
        a = gallery.deg_extremal(args.n or 5)
    elif kind == "reg":
        a = gallery.reg_extremal(args.n or 5)
    elif kind == "family6":
        phi = args.phi if args.phi else rng.uniform(0.05, 0.95, 3)
        a, v, c = gallery.family6(phi)
        out.update(phi=list(phi), minimal_zeros=[v[:, j] for j in range(6)], u=c.to_json()["u"])
    elif kind == "slack":
        n = args.n or 5
        c = gallery.polygon_slack_collection(gallery.regular_polygon_rays(n, args.jitter, rng))
        basis = floquet.periodic_solution_space(c, tol)
        a = basis @ basis.T
        out["u"] = c.to_json()["u"]
    else:  # argparse restricts the choices
        raise InputError(f"unknown gallery kind {kind}")
    out.update(n=a.shape[0], rows=a)
    return EXIT_OK, out


def _exceptional(a, crit, copositive, psd):
    if crit is not None:
        return crit.verdict is coposcheck.CriterionVerdict.COPOSITIVE_EXCEPTIONAL
    if not copositive or psd or a.shape[0] <= 4 or np.all(a >= 0):
        return False
    return None


def cmd_verify(args, tol):
    a = read_matrix(args.matrix)
    oracle = coposcheck.oracle_copositive(a, tol, args.depth_cap)
    oracle_cop = None if oracle.verdict is coposcheck.OracleVerdict.INCONCLUSIVE else \
        oracle.verdict is coposcheck.OracleVerdict.COPOSITIVE
    notes = []
    c = read_collection(args.collection) if args.collection else None
    if c is None and a.shape[0] >= 5:
        try:
            c = supports.zeros_from_matrix(a, tol)
        except PremiseError as exc:
            notes.append(f"no circulant zero collection: {exc}")
    crit = None
    if c is not None:
        try:
            crit = coposcheck.circulant_criterion(a, c, tol)
        except PremiseError as exc:
            notes.append(f"circulant criterion not applicable: {exc}")
    copositive = crit.verdict.copositive if crit is not None else oracle_cop
    agreement = None if crit is None or oracle_cop is None else crit.verdict.copositive == oracle_cop
    psd = is_psd(a, tol)
    out = {
        "copositive": copositive,
        "psd": psd,
        "oracle_agreement": agreement,
        "notes": notes,
    }
    if copositive:
        report = coposcheck.enumerate_zeros(a, tol)
        ext = coposcheck.is_extremal(a, tol, report)
        out.update(exceptional=_exceptional(a, crit, True, psd), extremal=ext.extremal,
                   zero_kind=report.kind.value,
                   minimal_supports=[_one_based(s) for s in report.minimal_supports])
    else:
        violator = oracle.violator if oracle.violator is not None else (crit.witness if crit else None)
        out.update(exceptional=False if copositive is False else None,
                   extremal=False if copositive is False else None,
                   zero_kind=coposcheck.ZeroKind.NOT_COPOSITIVE.value if copositive is False else None,
                   minimal_supports=[], violator=violator)
    if agreement is False or copositive is None:
        return EXIT_ALARM, out
    if args.expect:
        return (EXIT_OK if copositive == (args.expect == "copositive") else EXIT_NEGATIVE), out
    return (EXIT_OK if copositive else EXIT_NEGATIVE), out


def cmd_zeros(args, tol):
    a = read_matrix(args.matrix)
    report = coposcheck.enumerate_zeros(a, tol)
    out = {
        "kind": report.kind.value,
        "zeros": [{"support": _one_based(z.support), "generator": z.generator,
                   "minimal": z.minimal, "corank": z.corank} for z in report.zeros],
        "minimal_supports": [_one_based(s) for s in report.minimal_supports],
        "notes": report.notes,
    }
    code = EXIT_NEGATIVE if report.kind is coposcheck.ZeroKind.NOT_COPOSITIVE else EXIT_OK
    return code, out


def cmd_extremal(args, tol):
    a = read_matrix(args.matrix)
    res = coposcheck.is_extremal(a, tol)
    out = {
        "extremal": res.extremal,
        "solution_dim": res.solution_dim,
        "residual": res.residual,
        "zero_kind": res.report.kind.value,
        "minimal_supports": [_one_based(s) for s in res.report.minimal_supports],
    }
    return (EXIT_OK if res.extremal else EXIT_NEGATIVE), out


def _collection_path(args) -> str:
    path = args.collection_flag or args.collection
    if not path:
        raise InputError("a zero collection file is required")
    return path


def cmd_floquet(args, tol):
    c = read_collection(_collection_path(args))
    mono = floquet.monodromy(floquet.system_from_collection(c))
    rank_u = supports.rank_of_U(c, tol)
    out = {
        "n": c.n,
        "rank_U": rank_u,
        "periodic_dim": c.n - rank_u,
        "monodromy": mono.matrix,
        "det": mono.det,
        "det_expected": float(np.prod([c.vector(j)[j] for j in range(c.n)])),
        "multipliers": _complex_list(mono.multipliers),
        "clusters": [{"value": _complex_list([z])[0], "multiplicity": k} for z, k in mono.clusters()],
        "on_unit_circle": mono.on_unit_circle(),
        "multiplier_one_geometric": mono.geometric_multiplicity(1.0, tol),
    }
    return EXIT_OK, out


def cmd_face(args, tol):
    c = read_collection(_collection_path(args))
    member = read_matrix(args.member) if args.member else None
    report = faceform.classify_face(c, tol, member)
    out = report.to_json()
    out["k"] = report.psd_dim
    if member is not None:
        form = faceform.lambda_of(member, c, tol)
        status = faceform.check_membership(form, tol)
        out["member"] = {"status": status.status.value, "reason": status.reason,
                         "margins": status.margins, "form": form.mat}
    return EXIT_OK, out


def cmd_conjecture(args, tol):
    report = gallery.conjecture_search(args.n, args.resolution, args.threads)
    out = report.to_json()
    out["counterexample_details"] = out.pop("counterexamples")
    out["counterexamples"] = len(report.counterexamples)
    return (EXIT_NEGATIVE if report.counterexamples else EXIT_OK), out


def cmd_decompose(args, tol):
    t = read_matrix(args.matrix)
    dec = gallery.toeplitz_decompose(t, tol)
    err = float(np.max(np.abs(dec.reconstruct(t.shape[0]) - t)))
    return EXIT_OK, {"angles": dec.angles, "weights": dec.weights, "reconstruction_error": err}


COMMANDS = {
    "gallery": cmd_gallery,
    "verify": cmd_verify,
    "zeros": cmd_zeros,
    "extremal": cmd_extremal,
    "floquet": cmd_floquet,
    "face": cmd_face,
    "conjecture": cmd_conjecture,
    "decompose": cmd_decompose,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-eps", type=float, default=1e-9)
    common.add_argument("--psd-eps", type=float, default=1e-9)
    common.add_argument("--match-eps", type=float, default=1e-8)
    common.add_argument("--depth-cap", type=int, default=24, help="oracle bisection depth")
    common.add_argument("--threads", type=int, default=None, help="worker cap (also COPOSET_THREADS)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--output", "-o", default=None, help="write JSON here instead of stdout")

    parser = argparse.ArgumentParser(prog="coposet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gallery", parents=[common], help="emit an explicit matrix")
    p.add_argument("kind", choices=["horn", "tmatrix", "deg", "reg", "family6", "slack"])
    p.add_argument("--n", type=int)
    p.add_argument("--theta", type=float, nargs=5)
    p.add_argument("--phi", type=float, nargs=3)
    p.add_argument("--jitter", type=float, default=0.0, help="ray angle noise for slack")

    p = sub.add_parser("verify", parents=[common], help="copositivity, exceptionality, extremality")
    p.add_argument("matrix")
    p.add_argument("--collection")
    p.add_argument("--expect", choices=["copositive", "not-copositive"])

    for name, text in (("zeros", "enumerate zero supports"), ("extremal", "extremality test"),
                       ("decompose", "split a singular PSD Toeplitz matrix into cosine atoms")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("matrix")

    p = sub.add_parser("floquet", parents=[common], help="monodromy of a zero collection")
    p.add_argument("collection", nargs="?")
    p.add_argument("--collection", dest="collection_flag")

    p = sub.add_parser("face", parents=[common], help="classify the face of a zero collection")
    p.add_argument("collection", nargs="?")
    p.add_argument("--collection", dest="collection_flag")
    p.add_argument("--member")

    p = sub.add_parser("conjecture", parents=[common], help="grid search on core coefficient signs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--resolution", type=int, default=40)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        tol = Tolerance(args.rank_eps, args.psd_eps, args.match_eps)
        code, out = COMMANDS[args.command](args, tol)
    except (InputError, PremiseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalAlarm as exc:
        print(f"numerical alarm: {exc}", file=sys.stderr)
        return EXIT_ALARM
    text = canonical_json(out) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code
