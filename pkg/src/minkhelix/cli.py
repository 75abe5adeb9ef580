"""Command-line interface.

Exit codes:
    0   helix detected (analyze) / success
    1   verify: at least one criterion failed
    2   usage error (argparse)
    3   analyze: not a helix
    4   analyze: invariant-constant non-helix (constant H, no fixed axis)
    10  input error (files, parsing, grids, profile specs)
    11  geometry error (non-spacelike, vanishing curvature, sign flips)
    12  numerical error (non-finite integration state, ill-conditioned fit)
"""
import argparse
import json
import sys

from . import presets, verify
from .curves import load_curve, save_curve
from .errors import HelixToolkitError, InputError
from .helix import (
    VERDICT_HELIX,
    VERDICT_INVARIANT_CONSTANT,
    VERDICT_NOT_HELIX,
    Tolerances,
    detect_helix,
)
from .synthesis import profile_from_spec, synthesize

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_NOT_HELIX = 3
EXIT_INVARIANT_CONSTANT = 4
VERDICT_EXIT = {
    VERDICT_HELIX: EXIT_OK,
    VERDICT_NOT_HELIX: EXIT_NOT_HELIX,
    VERDICT_INVARIANT_CONSTANT: EXIT_INVARIANT_CONSTANT,
}


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _groups(text):
    out = [g.strip() for g in text.split(",") if g.strip()]
    bad = [g for g in out if g not in verify.GROUPS]
    if bad or not out:
        raise argparse.ArgumentTypeError(
            f"unknown group(s) {bad or text!r}; choose from {', '.join(verify.GROUPS)}")
    return out


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="minkhelix",
        description="Frenet frames and helix detection for spacelike curves in Minkowski 4-space.",
        epilog="exit codes: 0 helix/ok, 1 verify failed, 2 usage, 3 not helix, "
               "4 invariant-constant non-helix, 10 input, 11 geometry, 12 numerical",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run helix detection on a curve CSV or a preset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("curve", nargs="?", help="curve CSV with header s,x1,x2,x3,x4")
    src.add_argument("--preset", choices=sorted(presets.PRESETS), help="named preset curve")
    p.add_argument("--h", type=_positive, help="grid step for presets")
    p.add_argument("--s-max", type=_positive, help="interval end for presets")
    p.add_argument("--tol-H", type=_positive, help="invariant constancy tolerance")
    p.add_argument("--tol-U", type=_positive, help="axis residual tolerance")
    p.add_argument("--null-tol", type=_positive, help="relative null tolerance")
    p.add_argument("--plot-csv", help="write s,r,theta,H,f,m,n,axis_residual_pointwise here")
    p.add_argument("--report", help="also write the JSON report to this path")

    p = sub.add_parser("synthesize", help="integrate the Frenet system for a profile spec")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("spec", nargs="?", help="profile spec JSON file")
    src.add_argument("--preset", choices=[n for n, q in presets.PRESETS.items() if q.kind == "synthesized"],
                     help="named synthesized preset instead of a spec file")
    p.add_argument("output", help="output curve CSV")
    p.add_argument("--h", type=_positive, help="override the spec step")
    p.add_argument("--s-max", type=_positive, help="override the spec interval end")
    p.add_argument("--reorthonormalize", type=int, default=0, metavar="N",
                   help="re-orthonormalize the carried frame every N steps (default off)")
    p.add_argument("--report", help="write the synthesis summary JSON here")

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--only", type=_groups, action="append",
                   help=f"comma-separated groups: {', '.join(verify.GROUPS)}")
    p.add_argument("--tol-H", type=_positive, help="invariant tolerance on the sampled path")
    p.add_argument("--report", help="write the summary JSON here")

    p = sub.add_parser("presets", help="list the named presets")
    p.add_argument("--json", action="store_true", help="print as JSON")
    return parser


def cmd_analyze(args):
    if args.preset:
        curve = presets.get_preset(args.preset).build(h=args.h, s_max=args.s_max)
    else:
        if args.h is not None or args.s_max is not None:
            raise InputError("--h and --s-max apply to presets only")
        curve = load_curve(args.curve)
    tol = Tolerances(tol_H=args.tol_H, tol_U=args.tol_U)
    if args.null_tol is not None:
        tol.null_tol = args.null_tol
    report = detect_helix(curve, tol)
    text = report.to_json(indent=2) + "\n"
    sys.stdout.write(text)
    if args.report:
        _write(args.report, text)
    if args.plot_csv:
        _write(args.plot_csv, report.plot_csv())
    print(f"verdict: {report.verdict}", file=sys.stderr)
    return VERDICT_EXIT[report.verdict]


def _load_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(spec, dict):
        raise InputError(f"{path}: profile spec must be a JSON object")
    return spec


def cmd_synthesize(args):
    if args.preset:
        profile = presets.get_preset(args.preset).profile(h=args.h, s_max=args.s_max)
    else:
        spec = _load_spec(args.spec)
        if args.h is not None:
            spec["h"] = args.h
        if args.s_max is not None:
            spec["s_max"] = args.s_max
        profile = profile_from_spec(spec)
    if args.reorthonormalize < 0:
        raise InputError("--reorthonormalize must be >= 0")
    result = synthesize(profile, reorthonormalize_every=args.reorthonormalize)
    save_curve(result.curve, args.output)
    summary = dict(output=args.output, rows=len(result.curve), kind=profile.kind,
                   eps1=profile.eps1, eps2=profile.eps2, h=profile.h,
                   s_range=[float(result.curve.s[0]), float(result.curve.s[-1])],
                   gram_drift=result.gram_drift, gram_drift_relative=result.gram_drift_relative,
                   frame_scale=result.frame_scale)
    text = json.dumps(summary, indent=2) + "\n"
    sys.stdout.write(text)
    if args.report:
        _write(args.report, text)
    return EXIT_OK


def cmd_verify(args):
    settings = verify.Settings()
    if args.tol_H is not None:
        settings.tol_H_sampled = args.tol_H
    only = [g for chunk in args.only for g in chunk] if args.only else None
    results = verify.run_verify(only, settings)
    for r in results:
        print(r.line())
        for c in r.clauses:
            if not c.passed:
                print(f"       {c.name}: {c.value} (needs {c.threshold})")
    data = verify.summary(results, settings)
    print(f"{data['n_passed']}/{data['n_total']} criteria passed")
    if args.report:
        _write(args.report, json.dumps(data, indent=2) + "\n")
    return EXIT_OK if data["passed"] else EXIT_VERIFY_FAILED


def cmd_presets(args):
    rows = presets.listing()
    if args.json:
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        print(f"{r['name']:<{width}}  {r['kind']:<11}  expect {r['expected']:<28}  {r['provenance']}")
    return EXIT_OK


COMMANDS = dict(analyze=cmd_analyze, synthesize=cmd_synthesize, verify=cmd_verify, presets=cmd_presets)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except HelixToolkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
