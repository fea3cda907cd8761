"""Command line interface: ``sepcoset-lab <command> ...``.

Exit codes: 0 pass, 1 a checked statement failed, 2 usage or load error,
3 inconclusive at the exploration budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction

from . import suites
from .boundary_pairs import f4_split
from .cber import parse_seq, phi_pair_tailcheck, tail_equivalent
from .group_model import IDENTITY, ModelError, builtin, load_model
from .relative_graph import (
    BudgetError,
    ExplorationBudget,
    ModelInconsistency,
    PartialityError,
    UnstableError,
    all_geodesics,
    ball_elements,
    delta_estimate,
    estimate_C,
    rel_distance,
    xh_distance_fn,
)
from .rays import RayScheme, WindowError, format_scheme, parse_scheme, phi_prefix, pigeonhole_K
from .separating_cosets import TheoremViolation, sep_cosets
from .y_graph import (
    acylindricity_probe,
    export_members,
    hausdorff_gap,
    import_members,
    stable_y_distance,
    y_ball,
    y_distance,
)

SCHEMA = "sepcoset-lab/1"
CACHE_ENV = "SEPCOSET_CACHE_DIR"
SUITE_ORDER = ["isolated", "metric", "3c", "4c", "order", "sepcosets", "qi", "rays", "phi", "k", "f4", "cber"]
DEFAULT_D = {"free_cyclic": 5, "free_product": 1}

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --- argument parsing --------------------------------------------------------
def _positive(text: str):
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"D must be positive, got {text}")
    return int(v) if v.denominator == 1 else v


def _budget(text: str) -> ExplorationBudget:
    try:
        R, L, cap = (int(x) for x in text.split(","))
        return ExplorationBudget(R, L, cap)
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget must be R,L,cap with non-negative integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="fc",
                        help="built-in model (fc, fp) or path to a [model] file (default: fc)")
    common.add_argument("--D", type=_positive, default=None,
                        help="separation threshold D > 0 (default: 5 for fc, 1 for fp)")
    common.add_argument("--budget", type=_budget, default=ExplorationBudget(),
                        help="exploration budget R,L,cap (default: 1,8,256)")
    common.add_argument("--seed", type=int, default=0, help="seed for every sampler")
    common.add_argument("--radius", type=int, default=6, help="ball radius for sampling")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", default=None, help="write the report here (a directory for verify/estimate)")

    p = argparse.ArgumentParser(prog="sepcoset-lab", description="Separating cosets in relative Cayley graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dist", parents=[common], help="relative distance (and Y-distance when --D is given)")
    s.add_argument("f")
    s.add_argument("g")
    s = sub.add_parser("geodesics", parents=[common], help="all geodesic label sequences f -> g")
    s.add_argument("f")
    s.add_argument("g")
    s = sub.add_parser("sepcosets", parents=[common], help="ordered separating cosets S(f, g; D)")
    s.add_argument("f", nargs="?", default="1")
    s.add_argument("g", nargs="?", default="1")
    sub.add_parser("yball", parents=[common], help="members of Y in the ball of --radius")
    s = sub.add_parser("verify", parents=[common], help="run property suites")
    s.add_argument("suite", nargs="?", default="all", choices=["all"] + SUITE_ORDER)
    s.add_argument("--samples", type=int, default=100, help="sample size for the sampled suites")
    s.add_argument("--polygons", type=int, default=2000, help="geodesic polygons behind the constant C")
    s = sub.add_parser("estimate", parents=[common], help="empirical constants (labelled ESTIMATE)")
    s.add_argument("--samples", type=int, default=1000, help="polygons for the constant C")
    s = sub.add_parser("phi", parents=[common], help="lex-least geodesic labels to an element or a ray scheme")
    s.add_argument("target")
    s.add_argument("--depth", type=int, default=None, help="truncation depth for a scheme target")
    s = sub.add_parser("tailcheck", parents=[common],
                       help="tail equivalence of two sequences, or of lex-least labels of two schemes")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--g", default="1", help="translating element for schemes")
    s.add_argument("--depth", type=int, default=8)
    s = sub.add_parser("f4", parents=[common], help="split the window of (xi, eta) through zeta")
    s.add_argument("xi")
    s.add_argument("eta")
    s.add_argument("zeta")
    s.add_argument("--window", type=int, default=6)
    s.add_argument("--C-hat", dest="c_hat", type=Fraction, default=None, help="constant C (default: estimate)")
    s = sub.add_parser("probe", parents=[common], help="acylindricity probe (labelled ESTIMATE)")
    s.add_argument("--eps", type=int, default=1)
    s.add_argument("--sep", type=int, default=3)
    s.add_argument("--pairs", type=int, default=2)
    return p


# --- model and cache ---------------------------------------------------------
def load(spec: str):
    if spec in ("fc", "fp", "free_cyclic", "free_product"):
        return builtin(spec)
    if not os.path.exists(spec):
        raise ModelError(f"no such model file or built-in: {spec!r}")
    return load_model(spec)


def _cache_file(model, D, b):
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    name = "".join(c if c.isalnum() else "_" for c in f"{model.describe()}_{D}_{b.as_text()}")
    return os.path.join(root, f"ymember_{name}.json")


def load_cache(model, D, b) -> int:
    path = _cache_file(model, D, b)
    if path is None or not os.path.exists(path):
        return 0
    with open(path) as fh:
        return import_members(model, json.load(fh))


def save_cache(model, D, b):
    path = _cache_file(model, D, b)
    if path is None:
        return
    os.makedirs(os.path.dirname(path), exist_ok=True)
    rows = export_members(model)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(rows, fh)
    os.replace(tmp, path)


# --- output ------------------------------------------------------------------
def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def render(report: dict, fmt: str, rows=None) -> str:
    """Deterministic text for a report; ``rows`` (a list of dicts) drive csv."""
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        rows = _jsonable(rows if rows is not None else [report])
        keys = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v for k, v in r.items()})
        return buf.getvalue()
    lines = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        else:
            lines.append(f"{prefix}: {json.dumps(v, sort_keys=True) if isinstance(v, list) else v}")

    walk("", report)
    return "\n".join(lines) + "\n"


def emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w") as fh:
        fh.write(text)


# --- commands ----------------------------------------------------------------
def _header(args, model, D) -> dict:
    return {"schema": SCHEMA, "command": args.command, "model": model.describe(), "D": D,
            "budget": args.budget.as_text(), "seed": args.seed}


def cmd_dist(args, model, D):
    f, g = model.parse(args.f), model.parse(args.g)
    d, stable = rel_distance(model, f, g, args.budget)
    rep = _header(args, model, D)
    rep.update({"f": model.format(f), "g": model.format(g), "distance": d.to_json(), "stable": stable})
    if args.D is not None:
        dy, ys = y_distance(model, f, g, D, args.budget)
        rep.update({"y_distance": dy.to_json(), "y_stable": ys})
    return rep, None, EXIT_PASS if stable else EXIT_INCONCLUSIVE


def cmd_geodesics(args, model, D):
    f, g = model.parse(args.f), model.parse(args.g)
    gs = all_geodesics(model, f, g, args.budget)
    _, stable = rel_distance(model, f, g, args.budget)
    paths = [[model.format_letter(s) for s in p.labels] for p in gs.paths]
    rep = _header(args, model, D)
    rep.update({"f": model.format(f), "g": model.format(g), "distance": gs.distance.to_json(),
                "stable": stable, "overflow": gs.overflow, "geodesics": paths})
    rows = [{"index": i, "labels": " ".join(p)} for i, p in enumerate(paths)]
    return rep, rows, EXIT_PASS if stable and not gs.overflow else EXIT_INCONCLUSIVE


def _record(model, r) -> dict:
    return {"index": r.index, "coset": model.format(r.coset.rep), "family": r.coset.lam,
            "entrance": model.format(r.entrance), "exit": model.format(r.exit), "gap": r.gap.to_json(),
            "distance": r.distance}


def cmd_sepcosets(args, model, D):
    f, g = model.parse(args.f), model.parse(args.g)
    recs = [_record(model, r) for r in sep_cosets(model, f, g, D, args.budget)]
    rep = _header(args, model, D)
    rep.update({"f": model.format(f), "g": model.format(g), "records": recs})
    return rep, recs, EXIT_PASS


def cmd_yball(args, model, D):
    yb = y_ball(model, args.radius, D, args.budget)
    members = [model.format(g) for g in yb.members]
    rep = _header(args, model, D)
    rep.update({"radius": args.radius, "count": len(members), "members": members})
    return rep, [{"member": m} for m in members], EXIT_PASS


def cmd_verify(args, model, D):
    cfg = suites.VerifyConfig(getattr(model, "kind", "model"), D, args.budget, args.radius, args.seed, args.samples,
                                args.polygons)
    names = SUITE_ORDER if args.suite == "all" else [args.suite]
    props, state = suites.run_suites(model, cfg, names)
    statuses = [p.status for p in props]
    overall = "fail" if "fail" in statuses else "inconclusive" if "inconclusive" in statuses else "pass"
    rep = _header(args, model, D)
    rep.update({"config": cfg.to_json(), "suites": names, "properties": [p.to_json() for p in props],
                "status": overall, "C_hat": state.C_hat,
                "growth": state.growth, "running_max_tail": state.running_max[-1:] if state.running_max else []})
    rows = [{"name": p.name, "status": p.status, "instances": p.instances, "skipped": p.skipped,
             "statement": p.statement} for p in props]
    code = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[overall]
    return rep, rows, code, {"growth": state.growth, "running": state.running_max}


def cmd_estimate(args, model, D):
    b = args.budget
    est = estimate_C(model, b, samples=args.samples, radius=min(args.radius, 4), seed=args.seed)
    rng = random.Random(args.seed)
    pool = ball_elements(model, min(args.radius, 3))
    points = sorted(rng.sample(pool, min(8, len(pool))), key=model.shortlex_key)
    rep = _header(args, model, D)
    consts = {"C_hat": {"value": est.C, "polygons": est.n_polygons, "isolated": est.n_isolated,
                        "worst": list(est.worst) if est.worst else None, "label": "ESTIMATE"}}
    try:
        consts["delta_X"] = {"value": delta_estimate(points, xh_distance_fn(model, b)), "points": len(points),
                             "label": "ESTIMATE"}
        consts["delta_Y"] = {"value": delta_estimate(points, lambda x, y: stable_y_distance(model, x, y, D, b)),
                             "points": len(points), "label": "ESTIMATE"}
        pairs = [(rng.choice(pool), rng.choice(pool)) for _ in range(3)]
        consts["M_X"] = {"value": max(hausdorff_gap(model, x, y, D, b) for x, y in pairs), "pairs": len(pairs),
                         "label": "ESTIMATE"}
    except (PartialityError, UnstableError) as e:
        consts["partial"] = str(e)
    k = pigeonhole_K(model, 4 * est.C, b)
    consts["K"] = {"value": k.K, "threshold": 4 * est.C, "counts": k.counts}
    consts["D_auto"] = max(3 * est.C, Fraction(1))
    rep["constants"] = consts
    rows = [{"constant": k, "value": v["value"] if isinstance(v, dict) else v} for k, v in sorted(consts.items())]
    return rep, rows, EXIT_PASS, {"running": [str(x) for x in est.running_max]}


def _scheme_or_element(model, text):
    if "period" in text:
        return parse_scheme(model, text)
    return model.parse(text)


def cmd_phi(args, model, D):
    target = _scheme_or_element(model, args.target)
    if isinstance(target, RayScheme):
        if args.depth is None:
            raise UsageError("a scheme target needs --depth")
        res = phi_prefix(model, target, args.budget, D=D, depth=args.depth)
    else:
        res = phi_prefix(model, target, args.budget)
    rep = _header(args, model, D)
    rep.update({"target": res.target, "labels": [model.format_letter(s) for s in res.labels],
                "certified": res.certified})
    return rep, [{"position": i, "label": model.format_letter(s), "certified": i < res.certified}
                 for i, s in enumerate(res.labels)], EXIT_PASS


def cmd_tailcheck(args, model, D):
    rep = _header(args, model, D)
    if "per=" in args.first and "per=" in args.second:
        w0, w1 = parse_seq(args.first), parse_seq(args.second)
        eq, wit = tail_equivalent(w0, w1)
        rep.update({"first": str(w0), "second": str(w1), "equivalent": eq, "witness": list(wit) if wit else None})
        return rep, None, EXIT_PASS
    s1, s2 = parse_scheme(model, args.first), parse_scheme(model, args.second)
    v = phi_pair_tailcheck(model, s1, s2, model.parse(args.g), D, args.budget, args.depth)
    rep.update({"first": format_scheme(model, s1), "second": format_scheme(model, s2), "g": args.g,
                "verdict": v.verdict, "witness": list(v.witness) if v.witness else None,
                "same_direction": v.same_direction, "compared": v.compared, "reason": v.reason})
    return rep, None, EXIT_INCONCLUSIVE if v.verdict == "inconclusive" else EXIT_PASS


def cmd_f4(args, model, D):
    xi, eta, zeta = (parse_scheme(model, t) for t in (args.xi, args.eta, args.zeta))
    C = args.c_hat
    if C is None:
        C = estimate_C(model, args.budget, samples=200, seed=args.seed).C
    res = f4_split(model, xi, eta, zeta, args.window, D, args.budget, C_hat=C)
    fmt = lambda cs: [model.format(c.rep) for c in cs]
    rep = _header(args, model, D)
    rep.update({"window": args.window, "C_hat": C, "S": fmt(res.S), "left": fmt(res.left),
                "right": fmt(res.right), "F": fmt(res.F)})
    return rep, None, EXIT_PASS


def cmd_probe(args, model, D):
    res = acylindricity_probe(model, args.eps, args.sep, D, args.budget, min(args.radius, 3),
                              n_pairs=args.pairs, seed=args.seed)
    rep = _header(args, model, D)
    rep.update({"eps": args.eps, "sep": args.sep, "probe": res})
    return rep, None, EXIT_PASS


COMMANDS = {
    "dist": cmd_dist, "geodesics": cmd_geodesics, "sepcosets": cmd_sepcosets, "yball": cmd_yball,
    "verify": cmd_verify, "estimate": cmd_estimate, "phi": cmd_phi, "tailcheck": cmd_tailcheck,
    "f4": cmd_f4, "probe": cmd_probe,
}


def _write(args, model, rep, rows, figs) -> None:
    text = render(rep, args.format, rows)
    if args.out and args.command in ("verify", "estimate"):
        os.makedirs(args.out, exist_ok=True)
        emit(text, os.path.join(args.out, f"report.{args.format}"))
        if figs:
            from .figures import write_figures
            growth = [tuple(r) for r in figs.get("growth") or []]
            running = [Fraction(x) for x in figs.get("running") or []]
            write_figures(args.out, growth, running, f"{model.describe()} D={rep['D']}")
    else:
        emit(text, args.out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        model = load(args.model)
    except (ModelError, OSError, ValueError) as e:
        print(f"error: cannot load model: {e}", file=sys.stderr)
        return EXIT_USAGE
    D = args.D if args.D is not None else DEFAULT_D.get(getattr(model, "kind", ""), 1)
    load_cache(model, D, args.budget)
    try:
        out = COMMANDS[args.command](args, model, D)
    except UsageError as e:
        parser.error(str(e))
    except (ModelError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TheoremViolation, ModelInconsistency) as e:
        print(f"violation: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (PartialityError, UnstableError, WindowError, BudgetError) as e:
        print(f"inconclusive: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    rep, rows, code = out[:3]
    figs = out[3] if len(out) > 3 else None
    _write(args, model, rep, rows, figs)
    save_cache(model, D, args.budget)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
