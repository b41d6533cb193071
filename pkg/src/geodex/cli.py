"""Command line front end: ``geodex <command> ...``.

Exit codes: 0 when every check passes, 1 for a certified violation or failed
verification, 2 for usage, parse, or scan budget errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from .io import (
    SchemaError,
    certificate_to_dict,
    certificates_to_doc,
    load_certificates,
    load_system,
    system_to_dict,
)
from .iteration import index_of_iterate, index_parity, mean_index
from .jump import (
    BudgetExhausted,
    SearchError,
    attach_verification,
    dual_certificate,
    find_certificates,
    mbar_of,
    verify_certificate,
)
from .katok import InadmissibleAngleData, KatokParameters, default_weights, katok_system
from .loop_homology import average_betti, betti_table, mean_euler, morse_audit, resonance_check
from .multiplicity import multiplicity_verdict
from .normal_form import nullity_at
from .scalar import Surd, format_scalar, parse_scalar

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2
_SHOW = 8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _exact(x) -> str:
    if isinstance(x, Surd):
        return format_scalar(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def _num(x, approx: bool):
    out = {"exact": _exact(x)}
    if approx:
        out["approx"] = float(x)
    return out


def _show_num(v) -> str:
    if isinstance(v, dict) and "exact" in v:
        return v["exact"] + (f" (~{v['approx']:.6g})" if "approx" in v else "")
    return str(v)


def _table(rows: list[dict], cols: list[str]) -> str:
    cells = [[_show_num(r.get(c, "")) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines)


def _emit(args, report: dict, text: str) -> None:
    if args.format == "structured":
        print(json.dumps(report, indent=2))
    else:
        print(text)


# -- commands --------------------------------------------------------------

def cmd_iterate(args) -> int:
    s = load_system(args.model)
    rows = []
    for label, g in zip(s.labels(), s.geodesics):
        parity, eps = index_parity(g, args.m)
        rows.append(
            {
                "label": label,
                "index": index_of_iterate(g, args.m),
                "nullity": nullity_at(g.decomp, args.m),
                "parity": parity,
                "epsilon": eps,
            }
        )
    report = {"command": "iterate", "m": args.m, "geodesics": rows}
    _emit(args, report, f"m = {args.m}\n" + _table(rows, ["label", "index", "nullity", "parity", "epsilon"]))
    return EXIT_OK


def cmd_mean_index(args) -> int:
    s = load_system(args.model)
    rows = [{"label": lab, "mean_index": _num(mean_index(g), args.approx)} for lab, g in zip(s.labels(), s.geodesics)]
    _emit(args, {"command": "mean-index", "geodesics": rows}, _table(rows, ["label", "mean_index"]))
    return EXIT_OK


def cmd_nullity(args) -> int:
    s = load_system(args.model)
    rows = [{"label": lab, "nullity": nullity_at(g.decomp, args.m)} for lab, g in zip(s.labels(), s.geodesics)]
    _emit(args, {"command": "nullity", "m": args.m, "geodesics": rows}, f"m = {args.m}\n" + _table(rows, ["label", "nullity"]))
    return EXIT_OK


def cmd_betti(args) -> int:
    if args.n < 1 or args.max < 0:
        raise UsageError("betti: --n must be positive and --max non-negative")
    values = betti_table(args.n, args.max)
    avg = average_betti(args.n)
    report = {"command": "betti", "n": args.n, "max": args.max, "betti": values, "average": _num(avg, args.approx)}
    rows = [{"j": j, "beta": b} for j, b in enumerate(values)]
    text = _table(rows, ["j", "beta"]) + "\n" + ",".join(map(str, values)) + f"\naverage = {_show_num(report['average'])}"
    _emit(args, report, text)
    return EXIT_OK


def cmd_morse_audit(args) -> int:
    s = load_system(args.model)
    audit = morse_audit(s, args.cap)
    report = {
        "command": "morse-audit",
        "cap": args.cap,
        "ok": audit.ok,
        "all_even": audit.all_even,
        "morse": audit.morse,
        "betti": audit.betti,
        "violations": [{"degree": p, "kind": k, "message": m} for p, k, m in audit.violations],
    }
    if audit.ok:
        text = f"ok: M_p = beta_p checks pass for p <= {args.cap}" if audit.all_even else f"ok: Morse inequalities hold for p <= {args.cap}"
    else:
        msgs = [v["message"] for v in report["violations"]]
        text = "\n".join(msgs[:_SHOW])
        if len(msgs) > _SHOW:
            text += f"\n... {len(msgs) - _SHOW} more (use --format structured for all)"
    _emit(args, report, text)
    return EXIT_OK if audit.ok else EXIT_VIOLATION


def cmd_resonance(args) -> int:
    s = load_system(args.model)
    res = resonance_check(s)
    terms = [
        {"label": lab, "chi_hat": _num(chi, args.approx), "mean_index": _num(mu, args.approx)}
        for lab, chi, mu in res.terms
    ]
    report = {
        "command": "resonance",
        "verdict": res.verdict,
        "lhs": _num(res.lhs, args.approx),
        "rhs": _num(res.rhs, args.approx),
        "terms": terms,
    }
    rel = "=" if res.holds else "!="
    text = _table(terms, ["label", "chi_hat", "mean_index"]) + f"\nLHS = {_show_num(report['lhs'])} {rel} RHS = {_show_num(report['rhs'])}  [{res.verdict}]"
    _emit(args, report, text)
    return EXIT_OK if res.holds else EXIT_VIOLATION


def _cert_rows(certs) -> list[dict]:
    return [{"N": c.N, "m": " ".join(map(str, c.m)), "chi": " ".join(map(str, c.chi))} for c in certs]


def _write(path: Optional[str], doc: dict) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(json.dumps(doc, indent=2) + "\n")


def cmd_jump_find(args) -> int:
    s = load_system(args.model)
    models = list(s.geodesics)
    mbar = args.mbar or mbar_of(models)
    M0 = args.M0 or s.n
    certs = find_certificates(
        models,
        mbar,
        M0,
        parse_scalar(args.eps).to_fraction(),
        args.limit,
        delta=parse_scalar(args.delta).to_fraction() if args.delta else None,
        budget=args.budget,
        workers=args.workers,
    )
    certs = [attach_verification(models, c) for c in certs]
    doc = certificates_to_doc(certs)
    _write(args.out, doc)
    _emit(args, doc, f"mbar = {mbar}, M0 = {M0}, delta = {_exact(certs[0].delta)}\n" + _table(_cert_rows(certs), ["N", "m", "chi"]))
    return EXIT_OK


def cmd_jump_verify(args) -> int:
    s = load_system(args.model)
    models = list(s.geodesics)
    out, ok = [], True
    lines = []
    for c in load_certificates(args.cert):
        rep = verify_certificate(models, c)
        ok &= rep.ok
        fails = [{"model": k, "m": m, "check": chk, "detail": det} for k, m, chk, det in rep.failures]
        out.append({"N": c.N, "ok": rep.ok, "failures": fails, "records": rep.records})
        lines.append(f"N = {c.N}: " + ("verified" if rep.ok else "FAILED"))
        lines += [f"  model {f['model']}, m = {f['m']}: {f['check']}: {f['detail']}" for f in fails]
    report = {"command": "jump verify", "ok": ok, "certificates": out}
    _emit(args, report, "\n".join(lines))
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_jump_dual(args) -> int:
    s = load_system(args.model)
    models = list(s.geodesics)
    cert = load_certificates(args.cert)[0]
    rep = verify_certificate(models, cert)
    if not rep.ok:
        k, m, chk, det = rep.failures[0]
        print(f"certificate does not verify: model {k}, m = {m}: {chk}: {det}", file=sys.stderr)
        return EXIT_VIOLATION
    dual = attach_verification(models, dual_certificate(models, cert, budget=args.budget, workers=args.workers))
    doc = certificates_to_doc([dual])
    _write(args.out, doc)
    deltas = [r["Delta"] for r in verify_certificate(models, dual).records]
    _emit(args, doc, f"dual of N = {cert.N}: N' = {dual.N}, m' = {list(dual.m)}, Delta' = {deltas}")
    return EXIT_OK


def cmd_katok_gen(args) -> int:
    weights = tuple(args.weights) if args.weights else default_weights(args.n)
    params = KatokParameters(args.n, parse_scalar(args.alpha), weights)
    bad = params.problems()
    if bad:
        raise UsageError("katok gen: " + "; ".join(bad))
    try:
        s = katok_system(params, group_label=args.group_label, cap=args.cap)
    except InadmissibleAngleData as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VIOLATION
    doc = system_to_dict(s, f"Katok system, n={args.n}, alpha={args.alpha}, weights={weights}")
    _write(args.out, doc)
    rows = [
        {"label": lab, "initial_index": g.initial_index, "mean_index": _num(mean_index(g), args.approx)}
        for lab, g in zip(s.labels(), s.geodesics)
    ]
    _emit(args, doc, _table(rows, ["label", "initial_index", "mean_index"]))
    return EXIT_OK


def cmd_multiplicity(args) -> int:
    s = load_system(args.model)
    v = multiplicity_verdict(s, parse_scalar(args.eps).to_fraction(), budget=args.budget, workers=args.workers)
    report = {"command": "multiplicity", "consistent": v.consistent, "stage": v.stage, "message": v.message}
    if v.certificates:
        report["certificates"] = [certificate_to_dict(c) for c in v.certificates]
    if v.report:
        report["counts"] = v.report.counts
        report["nonhyperbolic"] = v.report.nonhyperbolic_labels
        report["rows"] = v.report.rows
    if v.claim1:
        report["claim1"] = {"holds": v.claim1.holds, "lhs": _exact(v.claim1.lhs), "rhs": _exact(v.claim1.rhs)}
    if v.step2:
        report["step2"] = {"ok": v.step2.ok, "witnesses": [list(w) for w in v.step2.witnesses], "M_2N": v.step2.M_2N}
    if v.morse_sum:
        report["morse_sum"] = {k: (_exact(x) if isinstance(x, Fraction) else x) for k, x in v.morse_sum.items()}
    _emit(args, report, v.summary)
    return EXIT_OK if v.consistent else EXIT_VIOLATION


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("table", "structured"), default="table")
    common.add_argument("--approx", action="store_true", help="add decimal approximations")

    p = _Parser(prog="geodex", description="Index iteration, loop homology audits and jump certificates.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def model_cmd(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("model")
        sp.set_defaults(func=func)
        return sp

    sp = model_cmd("iterate", cmd_iterate, "index, nullity and parity of c^m")
    sp.add_argument("--m", type=int, required=True)
    model_cmd("mean-index", cmd_mean_index, "exact mean indices")
    sp = model_cmd("nullity", cmd_nullity, "nullity of c^m")
    sp.add_argument("--m", type=int, required=True)

    sp = sub.add_parser("betti", parents=[common], help="equivariant Betti numbers")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--max", type=int, required=True)
    sp.set_defaults(func=cmd_betti)

    sp = model_cmd("morse-audit", cmd_morse_audit, "Morse inequalities against Betti numbers")
    sp.add_argument("--cap", type=int, default=200)
    model_cmd("resonance", cmd_resonance, "resonance identity")

    search = _Parser(add_help=False)
    search.add_argument("--budget", type=int, default=None, help="largest N to scan (default GEODEX_SCAN_BUDGET or 10^7)")
    search.add_argument("--workers", type=int, default=None)

    jp = sub.add_parser("jump", help="jump certificates")
    jsub = jp.add_subparsers(dest="jump_command", parser_class=_Parser)
    jsub.required = True
    sp = jsub.add_parser("find", parents=[common, search])
    sp.add_argument("model")
    sp.add_argument("--eps", default="1/100")
    sp.add_argument("--delta", default=None)
    sp.add_argument("--M0", type=int, default=None, help="required divisor of N (default n)")
    sp.add_argument("--mbar", type=int, default=None)
    sp.add_argument("--limit", type=int, default=5)
    sp.add_argument("-o", "--out", default=None)
    sp.set_defaults(func=cmd_jump_find)
    sp = jsub.add_parser("verify", parents=[common])
    sp.add_argument("model")
    sp.add_argument("cert")
    sp.set_defaults(func=cmd_jump_verify)
    sp = jsub.add_parser("dual", parents=[common, search])
    sp.add_argument("model")
    sp.add_argument("cert")
    sp.add_argument("-o", "--out", default=None)
    sp.set_defaults(func=cmd_jump_dual)

    kp = sub.add_parser("katok", help="Katok systems")
    ksub = kp.add_subparsers(dest="katok_command", parser_class=_Parser)
    ksub.required = True
    sp = ksub.add_parser("gen", parents=[common])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--weights", type=int, nargs="+", default=None)
    sp.add_argument("--group-label", default="trivial")
    sp.add_argument("--cap", type=int, default=100)
    sp.add_argument("-o", "--out", default=None)
    sp.set_defaults(func=cmd_katok_gen)

    sp = model_cmd("multiplicity", cmd_multiplicity, "replay the multiplicity argument")
    sp.add_argument("--eps", default="1/100")
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "budget", None) is not None and args.budget < 1:
            raise UsageError("--budget must be positive")
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    except (SchemaError, FileNotFoundError, SearchError, BudgetExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
