"""Batch command line: compute parameter rows, verify atomic properties,
run multi-level creature transforms, and manipulate finite fragments.

Exit codes: 0 verified success, 1 property failure (a counterexample or
failure record is still written), 2 usage error, 3 capacity or
infeasibility (the requested object cannot exist at the requested size).
All outputs are deterministic; randomized generation is seeded and the
seed is recorded in the output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from fractions import Fraction

from .errors import (
    CapacityExceeded,
    CreatureLabError,
    ModulusTooDeep,
    SizeInfeasible,
    UsageError,
)
from . import atomic
from .mlcore import (
    ml_enlarge,
    ml_halve,
    ml_homogenize,
    ml_merge,
    ml_nor_z,
    ml_norm_cmp,
    ml_successor_check,
    ml_validate,
)
from .conditions import (
    FiniteCondition,
    NameTable,
    cond_leq,
    cond_poss,
    cond_separate_support,
    cond_validate,
    cover_step,
    evade_step,
    halving_step,
    rapid_read,
)
from .params import ParamRow, make_toy_profile, params_exact, params_validate
from .serialize import (
    atomic_param_from_json,
    creature_from_json,
    creature_to_json,
    id_from_json,
    parse_rational,
    read_json,
    write_json,
)


def _seeded_int(seed: int, *parts) -> int:
    payload = repr((seed,) + parts).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def _load_profile(args):
    return make_toy_profile(read_json(args.profile))


def _load_creature(path):
    return creature_from_json(read_json(path))


def _load_fragment(path) -> FiniteCondition:
    return FiniteCondition.from_json(read_json(path))


def _parse_id(text):
    try:
        return id_from_json(json.loads(text))
    except json.JSONDecodeError:
        return text


# ---------------------------------------------------------------------------
# params
# ---------------------------------------------------------------------------


def _cmd_params(args):
    n = args.level
    cache_dir = os.environ.get("CREATURE_LAB_CACHE")
    row = None
    if cache_dir:
        cache_path = os.path.join(cache_dir, f"params-{n}.json")
        if os.path.exists(cache_path):
            row = ParamRow.from_json(read_json(cache_path))
    if row is None:
        row = params_exact(n)
        if cache_dir:
            os.makedirs(cache_dir, exist_ok=True)
            write_json(os.path.join(cache_dir, f"params-{n}.json"), row.to_json())
    report = params_validate(row)
    resolved = {}
    for name, value in row.fields.items():
        try:
            resolved[name] = value.eval_exact()
        except CreatureLabError:
            pass
    ok = all(e["verdict"] in ("holds", "constructor-dependent") for e in report)
    return (0 if ok else 1), {"row": row.to_json(), "resolved": resolved,
                              "report": report}


# ---------------------------------------------------------------------------
# atomic
# ---------------------------------------------------------------------------


def _default_witness(p):
    """A maximal-norm creature of p, the natural check target."""
    if hasattr(p, "top"):
        return p.top()
    best = None
    for w in p.ids():
        if best is None or p.nor(w) > p.nor(best):
            best = w
    return best


def _cmd_atomic_verify(args):
    p = atomic_param_from_json(read_json(args.infile))
    prop = args.property
    if prop == "axioms":
        cert = atomic.validate_atomic(p)
    else:
        w = _parse_id(args.w) if args.w else _default_witness(p)
        if prop == "big":
            if args.B is None:
                raise UsageError("--B is required for the bigness check")
            cert = atomic.check_bigness(p, w, args.B, parse_rational(args.x),
                                        mode=args.mode, hereditary=args.hereditary)
        elif prop == "halving":
            cert = atomic.check_halving(p, w, parse_rational(args.x))
        elif prop == "decisive":
            if args.K is None or args.m is None:
                raise UsageError("--K and --m are required for the decisiveness check")
            cert = atomic.check_decisive(p, w, args.K, args.m,
                                         parse_rational(args.x), mode=args.mode)
        elif prop == "nice":
            if args.M is None:
                raise UsageError("--M is required for the niceness check")
            cert = atomic.check_nice(p, args.M, parse_rational(args.m_max))
        else:
            raise UsageError(f"unknown property: {prop!r}")
    return (0 if cert.verdict else 1), {"certificate": cert.to_json()}


def _cmd_atomic_make_nice(args):
    m_max = parse_rational(args.m_max)
    bits = args.budget_bits
    budget = atomic.ScaleBudget(1 << bits, 1 << bits) if bits else None
    p = atomic.make_nice(args.M, m_max, budget=budget)
    cert = atomic.check_nice(p, args.M, m_max)
    size = len(p.base())
    return (0 if cert.verdict else 1), {
        "parameter": {"kind": "nice-construction", "M": args.M,
                      "m_max": str(parse_rational(args.m_max)), "base_size": size,
                      "param_hash": p.param_hash()},
        "certificate": cert.to_json(),
    }


def _load_product(args):
    """A product document: {'coordinates': [{'param': {...}, 'w': id}, ...]}."""
    doc = read_json(args.infile)
    coords = doc.get("coordinates")
    if not coords:
        raise UsageError("product document needs a non-empty 'coordinates' list")
    params = [atomic_param_from_json(c["param"]) for c in coords]
    ws = [id_from_json(c["w"]) for c in coords]
    return params, ws


def _norm_repr(v) -> str:
    return str(v.approx()) if hasattr(v, "approx") else str(v)


def _cmd_atomic_homogenize(args):
    params, ws = _load_product(args)
    indexes = [{v: j for j, v in enumerate(sorted(p.val(w), key=repr))}
               for p, w in zip(params, ws)]

    def F(point):
        idx = tuple(indexes[i][v] for i, v in enumerate(point))
        return _seeded_int(args.seed, idx) % args.range_size

    x = parse_rational(args.x) if args.x else None
    new_ws, value, report = atomic.homogenize_product(params, ws, F, args.range_size, x=x)
    return 0, {
        "seed": args.seed,
        "value": value,
        "ws": [repr(w) for w in new_ws],
        "norms": [_norm_repr(p.nor(w)) for p, w in zip(params, new_ws)],
        "report": json.loads(json.dumps(report, default=repr)),
    }


def _cmd_atomic_order(args):
    params, ws = _load_product(args)
    order, new_ws = atomic.decisive_order(params, ws, parse_rational(args.x))
    return 0, {"order": order, "ws": [repr(w) for w in new_ws]}


def _cmd_atomic_disjoint(args):
    doc = read_json(args.infile)
    p = atomic_param_from_json(doc["param"])
    w1, w2 = id_from_json(doc["w1"]), id_from_json(doc["w2"])
    v1, v2 = atomic.disjoint_successors(p, w1, w2, parse_rational(args.x))
    return 0, {"v1": repr(v1), "v2": repr(v2),
               "val1": sorted(map(repr, p.val(v1))),
               "val2": sorted(map(repr, p.val(v2)))}


# ---------------------------------------------------------------------------
# ml
# ---------------------------------------------------------------------------


def _creature_result(c, profile, extra=None):
    out = {"creature": creature_to_json(c),
           "z_approx": ml_nor_z(c, profile).approx()}
    if extra:
        out.update(extra)
    return out


def _cmd_ml_check(args):
    profile = _load_profile(args)
    c = _load_creature(args.infile)
    ml_validate(c, profile)
    if args.against:
        parent = _load_creature(args.against)
        ok, diag = ml_successor_check(c, parent, c.n, profile,
                                      enumerate_axiom=args.enumerate)
        return (0 if ok else 1), {"valid": True, "successor": ok, "diagnostics": diag}
    return 0, {"valid": True}


def _cmd_ml_norm(args):
    profile = _load_profile(args)
    c = _load_creature(args.infile)
    result = _creature_result(c, profile)
    if args.threshold is not None:
        t = parse_rational(args.threshold)
        cmp = ml_norm_cmp(c, c.n, profile, t)
        result["threshold"] = str(t)
        result["norm_exceeds_threshold"] = cmp > 0
        return (0 if cmp > 0 else 1), result
    return 0, result


def _cmd_ml_halve(args):
    profile = _load_profile(args)
    c = _load_creature(args.infile)
    out = ml_halve(c, c.n, profile)
    return 0, _creature_result(out, profile)


def _cmd_ml_merge(args):
    profile = _load_profile(args)
    c1 = _load_creature(args.infile)
    c2 = _load_creature(args.infile2)
    enum1 = args.enum.split(',') if args.enum else sorted(c1.u, key=str)
    enum2 = args.enum2.split(',') if args.enum2 else sorted(c2.u, key=str)
    out = ml_merge(c1, c2, enum1, enum2, c1.n, profile)
    return 0, _creature_result(out, profile)


def _cmd_ml_enlarge(args):
    profile = _load_profile(args)
    c = _load_creature(args.infile)
    out = ml_enlarge(c, args.index, c.n, profile)
    return 0, _creature_result(out, profile, {"added": sorted(out.u - c.u, key=str)})


def _cmd_ml_homogenize(args):
    profile = _load_profile(args)
    c = _load_creature(args.infile)

    def G(nu):
        return _seeded_int(args.seed, nu.values) % args.range_size

    out, g_prime = ml_homogenize(c, c.n, profile, G, args.range_size)
    return 0, _creature_result(out, profile, {
        "seed": args.seed,
        "factored": [[eta.to_json(), v] for eta, v in sorted(
            g_prime.items(), key=lambda kv: kv[0].values)],
    })


# ---------------------------------------------------------------------------
# cond
# ---------------------------------------------------------------------------


def _cmd_cond_poss(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)
    cond_validate(p, profile)
    n = args.n if args.n is not None else p.height
    branches = cond_poss(p, n, profile, method=args.method)
    return 0, {"n": n, "count": len(branches),
               "branches": [nu.to_json() for nu in branches]}


def _cmd_cond_leq(args):
    profile = _load_profile(args)
    q = _load_fragment(args.infile)
    p = _load_fragment(args.against)
    ok, diag = cond_leq(q, p, profile)
    return (0 if ok else 1), {"extends": ok, "diagnostics": diag}


def _cmd_cond_separate(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)
    q = cond_separate_support(p, profile)
    return 0, {"fragment": q.to_json()}


def _cmd_cond_rapid_read(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)
    r = NameTable.from_json(read_json(args.name))
    q = rapid_read(p, args.M, r, profile)
    return 0, {"M": args.M, "fragment": q.to_json()}


def _cmd_cond_halve_step(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)

    if args.oracle == "never":
        oracle = lambda cand: None
    elif args.oracle == "accept":
        oracle = lambda cand: cand
    else:
        raise UsageError(f"unknown oracle policy: {args.oracle!r}")
    q, case_log = halving_step(p, args.M, parse_rational(args.floor),
                               oracle, profile)
    return 0, {"fragment": q.to_json(),
               "cases": [[kind, nu.to_json()] for kind, nu in case_log]}


def _cmd_cond_cover(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)
    r = NameTable.from_json(read_json(args.name))
    q_n, Y = cover_step(p, args.n, r, args.eps, profile)
    return 0, {"level": Y["level"], "indices": Y["indices"],
               "table": {json.dumps(list(k)): v for k, v in Y["table"].items()}}


def _cmd_cond_evade(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)
    doc = read_json(args.cover)
    Y = {"level": doc["level"], "indices": doc["indices"],
         "table": {tuple(tuple(x) if isinstance(x, list) else x
                         for x in json.loads(k)): set(v)
                   for k, v in doc["table"].items()}}
    c = evade_step(p, args.n, Y, args.beta, profile)
    return 0, {"creature": creature_to_json(c)}


# ---------------------------------------------------------------------------
# demo
# ---------------------------------------------------------------------------


def _cmd_demo_generic_sample(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)
    cond_validate(p, profile)
    branches = cond_poss(p, p.height, profile)
    rng = random.Random(args.seed)
    nu = branches[rng.randrange(len(branches))]
    return 0, {"seed": args.seed, "count": len(branches),
               "branch": nu.to_json()}


def _cmd_demo_distinguish(args):
    profile = _load_profile(args)
    p = _load_fragment(args.infile)
    cond_validate(p, profile)
    i, j = args.i, args.j
    for idx in (i, j):
        if idx not in p.dom:
            raise UsageError(f"index {idx!r} is not in the fragment's domain")
    for nu in cond_poss(p, p.height, profile):
        got = nu.as_dict()
        for n in range(p.height):
            a, b = got.get((n, i)), got.get((n, j))
            if a is not None and b is not None and a != b:
                return 0, {"level": n, "i": i, "j": j,
                           "value_i": a, "value_j": b,
                           "branch": nu.to_json()}
    return 1, {"i": i, "j": j,
               "failure": "every branch agrees on the two indices at every level"}


# ---------------------------------------------------------------------------
# argument tree
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="creature-lab",
                  description="Verification workbench for norm-carrying "
                              "creature parameters and finite fragments.")
    sub = top.add_subparsers(dest="command", required=True)

    def add(parent, name, func, **kw):
        p = parent.add_parser(name, **kw)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output path (atomic write); default stdout")
        return p

    p = add(sub, "params", _cmd_params, help="compute and validate a parameter row")
    p.add_argument("--level", type=int, required=True)

    at = sub.add_parser("atomic", help="atomic parameter checks and transforms")
    at_sub = at.add_subparsers(dest="atomic_command", required=True)

    p = add(at_sub, "verify", _cmd_atomic_verify, help="verify an atomic property")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--property", required=True,
                   choices=["axioms", "big", "halving", "decisive", "nice"])
    p.add_argument("--w", help="creature id (JSON literal); default the top creature")
    p.add_argument("--B", type=int)
    p.add_argument("--x", default="1")
    p.add_argument("--K", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--m-max", default="2")
    p.add_argument("--mode", default="auto", choices=["auto", "exhaustive", "analytic"])
    p.add_argument("--hereditary", action="store_true")

    p = add(at_sub, "make-nice", _cmd_atomic_make_nice,
            help="construct a parameter certified nice at the given scale")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--m-max", required=True)
    p.add_argument("--budget-bits", type=int)

    p = add(at_sub, "homogenize", _cmd_atomic_homogenize,
            help="shrink a creature tuple until a seeded function is constant")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--range", dest="range_size", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x")

    p = add(at_sub, "order", _cmd_atomic_order,
            help="arrange a creature tuple into a decisive order")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--x", default="1")

    p = add(at_sub, "disjoint", _cmd_atomic_disjoint,
            help="shrink two creatures to disjoint value sets")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--x", default="1")

    ml = sub.add_parser("ml", help="multi-level creature transforms")
    ml_sub = ml.add_subparsers(dest="ml_command", required=True)

    def ml_cmd(name, func, **kw):
        p = add(ml_sub, name, func, **kw)
        p.add_argument("--profile", required=True)
        p.add_argument("--in", dest="infile", required=True)
        return p

    p = ml_cmd("check", _cmd_ml_check, help="validate a creature, optionally as a successor")
    p.add_argument("--against", help="candidate parent creature")
    p.add_argument("--enumerate", action="store_true",
                   help="also replay the enumerated successor condition")
    p = ml_cmd("norm", _cmd_ml_norm, help="report the exact norm input z")
    p.add_argument("--threshold", help="exit 1 unless nor exceeds this rational")
    ml_cmd("halve", _cmd_ml_halve, help="apply the halving transform")
    p = ml_cmd("merge", _cmd_ml_merge, help="merge two same-type creatures")
    p.add_argument("--in2", dest="infile2", required=True)
    p.add_argument("--enum", help="comma list enumerating the first support")
    p.add_argument("--enum2", help="comma list enumerating the second support")
    p = ml_cmd("enlarge", _cmd_ml_enlarge, help="extend the support by one index")
    p.add_argument("--index", required=True)
    p = ml_cmd("homogenize", _cmd_ml_homogenize,
               help="shrink until a seeded labelling factors through the trunk")
    p.add_argument("--range", dest="range_size", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)

    co = sub.add_parser("cond", help="finite fragment operations")
    co_sub = co.add_subparsers(dest="cond_command", required=True)

    def co_cmd(name, func, **kw):
        p = add(co_sub, name, func, **kw)
        p.add_argument("--profile", required=True)
        p.add_argument("--in", dest="infile", required=True)
        return p

    p = co_cmd("poss", _cmd_cond_poss, help="enumerate branches up to a height")
    p.add_argument("--n", type=int)
    p.add_argument("--method", default="inductive", choices=["inductive", "local"])
    p = co_cmd("leq", _cmd_cond_leq, help="check the extension relation")
    p.add_argument("--against", required=True, help="the weaker fragment")
    co_cmd("separate", _cmd_cond_separate,
           help="make same-level selector creatures pairwise value-disjoint")
    p = co_cmd("rapid-read", _cmd_cond_rapid_read,
               help="shorten a name's decision modulus level by level")
    p.add_argument("--name", required=True)
    p.add_argument("--M", type=int, required=True)
    p = co_cmd("halve-step", _cmd_cond_halve_step,
               help="case split over base branches, halving undecided ones")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--floor", default="1")
    p.add_argument("--oracle", default="never", choices=["never", "accept"])
    p = co_cmd("cover", _cmd_cond_cover,
               help="tabulate the small per-branch value sets of a name")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--name", required=True)
    p = co_cmd("evade", _cmd_cond_evade,
               help="shrink one level so a fresh index avoids a cover table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cover", required=True)
    p.add_argument("--beta", required=True)

    de = sub.add_parser("demo", help="worked examples on fragments")
    de_sub = de.add_subparsers(dest="demo_command", required=True)
    p = add(de_sub, "generic-sample", _cmd_demo_generic_sample,
            help="print one seeded random branch of a fragment")
    p.add_argument("--profile", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--seed", type=int, default=0)
    p = add(de_sub, "distinguish", _cmd_demo_distinguish,
            help="find a branch giving two indices different values")
    p.add_argument("--profile", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--i", required=True)
    p.add_argument("--j", required=True)

    return top


def _emit(result: dict, out_path) -> None:
    if out_path:
        write_json(out_path, result)
    else:
        sys.stdout.write(json.dumps(result, indent=2, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, result = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except (CapacityExceeded, SizeInfeasible, ModulusTooDeep) as exc:
        sys.stderr.write(f"infeasible: {type(exc).__name__}: {exc}\n")
        return 3
    except CreatureLabError as exc:
        sys.stderr.write(f"property failure: {type(exc).__name__}: {exc}\n")
        return 1
    _emit(result, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
