"""``dgrid`` command-line entry point.

Exit codes: 0 success, 1 runtime failure (unavailable, unauthorized,
infeasible, failed assertion), 2 usage/parameter error, 3 format/parse
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, codec, erasure_coding, fragmentation, secret_sharing
from .allocation import (AllocationPlan, CostModel, classify_scenario, optimal_allocate,
                         plan_allocation, plan_cost)
from .errors import DataGridError, InfeasibleError, InstanceTooLargeError, ParameterError
from .gridsim import run_scenario
from .rng import check_seed, fresh_seed
from .share import Scheme, ShareParams
from .shareformat import Manifest, load_share, save_share, share_filename
from .topology import load_topology


def _seed(text: str) -> int:
    if text == "random":
        return fresh_seed()
    try:
        return check_seed(int(text, 0))
    except (ValueError, ParameterError):
        raise argparse.ArgumentTypeError(f"seed must be an integer in [0, 2^64) or 'random', got {text!r}")


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _require_seed(args) -> int:
    if args.seed is None:
        raise ParameterError("--seed is required (pass an integer, or 'random' for fresh entropy)")
    return args.seed


def _write_family(args, shares, src: Path) -> None:
    out_dir = Path(args.out_dir) if args.out_dir else src.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for share in shares:
        name = share_filename(src.name, share.index)
        save_share(out_dir / name, share)
        names.append(name)
    first = shares[0]
    manifest = Manifest(first.object_id, first.scheme, first.params.k, first.params.n, tuple(names))
    manifest_path = out_dir / f"{src.name}.manifest.json"
    manifest_path.write_text(manifest.to_json())
    _emit(args, {"object_id": first.object_id.hex(), "scheme": first.scheme.label,
                 "k": first.params.k, "n": first.params.n,
                 "shares": [str(out_dir / n) for n in names], "manifest": str(manifest_path)},
          "\n".join([f"object {first.object_id.hex()} scheme={first.scheme.label} "
                     f"k={first.params.k} n={first.params.n}"]
                    + [f"wrote {out_dir / n}" for n in names] + [f"wrote {manifest_path}"]))


def _gather(args):
    paths = [Path(p) for p in args.shares]
    if args.manifest:
        mpath = Path(args.manifest)
        manifest = Manifest.from_json(mpath.read_text())
        paths += [mpath.parent / n for n in manifest.shares if (mpath.parent / n).exists()]
    if not paths:
        raise ParameterError("give share files or --manifest")
    seen, shares = set(), []
    for p in paths:
        if p.resolve() in seen:
            continue
        seen.add(p.resolve())
        shares.append(load_share(p))
    return shares


def _restore(args, expected: set[Scheme]) -> int:
    shares = _gather(args)
    if shares[0].scheme not in expected:
        raise ParameterError(f"{args.command} cannot handle {shares[0].scheme.label} shares")
    if shares[0].scheme == Scheme.FRAGMENT:
        data = fragmentation.reassemble(shares)
    else:
        family = sorted(shares, key=lambda s: s.index)
        data = codec.recombine(family)
    Path(args.out).write_bytes(data)
    _emit(args, {"out": args.out, "bytes": len(data), "shares_used": len(shares)},
          f"wrote {args.out} ({len(data)} bytes from {len(shares)} shares)")
    return 0


def cmd_split(args) -> int:
    src = Path(args.input)
    shares = secret_sharing.split(src.read_bytes(), ShareParams(args.k, args.n), _require_seed(args))
    _write_family(args, shares, src)
    return 0


def cmd_encode(args) -> int:
    src = Path(args.input)
    data = src.read_bytes()
    if args.sealed:
        shares = erasure_coding.sealed_encode(data, args.k, args.n, _require_seed(args))
    else:
        shares = erasure_coding.encode(data, args.k, args.n)
    _write_family(args, shares, src)
    return 0


def cmd_fragment(args) -> int:
    src = Path(args.input)
    data = src.read_bytes()
    if args.ranges:
        try:
            ranges = tuple(tuple(int(x) for x in r.split(":")) for r in args.ranges.split(","))
        except ValueError:
            raise ParameterError(f"bad --ranges {args.ranges!r}; expected START:END,...") from None
        scheme = fragmentation.FragmentationScheme(len(data), ranges)
    elif args.n:
        scheme = fragmentation.FragmentationScheme.even(len(data), args.n)
    else:
        raise ParameterError("give --n or --ranges")
    _write_family(args, fragmentation.fragment(data, scheme), src)
    return 0


def _pick_object(topo, name: str | None) -> str:
    if name:
        return name
    objects = topo.objects()
    if len(objects) != 1:
        raise ParameterError(f"topology has demand for {objects or 'no objects'}; pass --object")
    return objects[0]


def cmd_plan(args) -> int:
    topo = load_topology(args.topology)
    obj = _pick_object(topo, args.object)
    params = ShareParams(args.k, args.n)
    model = CostModel(args.alpha, -(-args.size // args.k) if args.scheme != "shamir" else args.size)
    budget = args.budget if args.budget is not None else args.n
    if args.exact:
        plan = optimal_allocate(topo, obj, params, model, budget, args.limit)
    else:
        plan = plan_allocation(topo, obj, params, model, budget, args.limit)
    cost = plan_cost(topo, plan, model)
    scenario = classify_scenario(topo, plan)
    if args.out:
        Path(args.out).write_text(plan.to_json(model.share_size))
    shares = {str(i): sorted(v) for i, v in plan.placements.items()}
    lines = [f"object {obj} k={params.k} n={params.n} budget={budget} "
             f"method={'exact' if args.exact else 'greedy'} share_size={model.share_size}"]
    lines += [f"share {i}: {' '.join(v)}" for i, v in shares.items()]
    lines += [f"cost access={cost.access:g} storage={cost.storage:g} total={cost.total:g}",
              f"scenario {scenario.value}"]
    _emit(args, {"object": obj, "k": params.k, "n": params.n, "budget": budget,
                 "method": "exact" if args.exact else "greedy", "share_size": model.share_size,
                 "placements": shares,
                 "cost": {"access": cost.access, "storage": cost.storage, "total": cost.total},
                 "scenario": scenario.value}, "\n".join(lines))
    return 0


def cmd_simulate(args) -> int:
    topo = load_topology(args.topology)
    result = run_scenario(topo, Path(args.script).read_text(), _require_seed(args))
    sys.stdout.write(result.to_json() if args.json else result.to_text())
    return 1 if result.failed_assertions else 0


def cmd_analyze(args) -> int:
    topo = load_topology(args.topology)
    plan = AllocationPlan.from_json(Path(args.plan).read_text())
    if args.k is not None:
        plan = plan.with_params(ShareParams(args.k, plan.params.n))
    for node in plan.nodes():
        topo.require(node)
    threat = analysis.ThreatModel.from_topology(topo, plan.params.k)
    if args.trials is not None:
        if args.exact:
            raise ParameterError("--exact and --trials are mutually exclusive")
        report = analysis.monte_carlo(plan, threat, args.trials, _require_seed(args))
    else:
        report = analysis.exact_report(plan, threat)
    try:
        access = plan_cost(topo, plan, CostModel()).access
    except InfeasibleError:
        access = None
    doc = report.as_dict() | {"access_cost": access, "k": plan.params.k, "nodes": len(plan.nodes())}
    lines = [f"method {report.method}" + (f" trials={report.trials}" if report.trials else ""),
             f"breach_prob {report.breach_prob:.6g}" + (
                 f" +/- {report.breach_stderr:.3g}" if report.breach_stderr is not None else ""),
             f"availability {report.availability:.6g}" + (
                 f" +/- {report.availability_stderr:.3g}" if report.availability_stderr is not None else ""),
             f"expected_access_cost {'infeasible' if access is None else format(access, 'g')}"]
    _emit(args, doc, "\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgrid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    def writer(p):
        p.add_argument("input", help="file to partition")
        p.add_argument("--out-dir", help="directory for .dgsh files and manifest (default: next to input)")
        return p

    def reader(p):
        p.add_argument("shares", nargs="*", help=".dgsh share files")
        p.add_argument("--manifest", help="manifest listing the share files")
        p.add_argument("--out", required=True, help="where to write the reconstructed file")
        return p

    p = common(writer(sub.add_parser("split", help="Shamir-split a file")))
    p.add_argument("--k", type=int, required=True, help="threshold")
    p.add_argument("--n", type=int, required=True, help="number of shares")
    p.add_argument("--seed", type=_seed, help="integer seed, or 'random'")
    p.set_defaults(func=cmd_split)

    p = common(reader(sub.add_parser("combine", help="rebuild a file from Shamir shares")))
    p.set_defaults(func=lambda a: _restore(a, {Scheme.SHAMIR}))

    p = common(writer(sub.add_parser("encode", help="erasure-code a file")))
    p.add_argument("--k", type=int, required=True, help="data stripes")
    p.add_argument("--n", type=int, required=True, help="total shares")
    p.add_argument("--sealed", action="store_true", help="encrypt, code, and Shamir-split the key")
    p.add_argument("--seed", type=_seed, help="integer seed, or 'random' (needed with --sealed)")
    p.set_defaults(func=cmd_encode)

    p = common(reader(sub.add_parser("decode", help="rebuild a file from coded shares")))
    p.set_defaults(func=lambda a: _restore(a, {Scheme.RS_SYSTEMATIC, Scheme.RS_SEALED}))

    p = common(writer(sub.add_parser("fragment", help="cut a file into byte ranges")))
    p.add_argument("--n", type=int, help="number of equal fragments")
    p.add_argument("--ranges", help="explicit START:END,... byte ranges")
    p.set_defaults(func=cmd_fragment)

    p = common(reader(sub.add_parser("reassemble", help="rebuild a file from fragments")))
    p.set_defaults(func=lambda a: _restore(a, {Scheme.FRAGMENT}))

    p = common(sub.add_parser("plan", help="place share replicas on a topology"))
    p.add_argument("topology")
    p.add_argument("--size", type=int, required=True, help="object size in bytes")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=int, help="max total replicas (default n)")
    p.add_argument("--alpha", type=float, default=0.0, help="storage cost per byte")
    p.add_argument("--limit", type=int, default=1, help="max distinct shares per node")
    p.add_argument("--scheme", choices=["shamir", "rs"], default="shamir",
                   help="sets the share size: shamir=size, rs=ceil(size/k)")
    p.add_argument("--object", help="object id in the topology's demand lines")
    p.add_argument("--exact", action="store_true", help="exhaustive oracle (small instances only)")
    p.add_argument("--out", help="write the plan document here")
    p.set_defaults(func=cmd_plan)

    p = common(sub.add_parser("simulate", help="run a scenario script on a simulated grid"))
    p.add_argument("topology")
    p.add_argument("script")
    p.add_argument("--seed", type=_seed)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("analyze", help="breach / availability of a plan"))
    p.add_argument("topology")
    p.add_argument("plan")
    p.add_argument("--k", type=int, help="override the plan's threshold")
    p.add_argument("--exact", action="store_true", help="exact enumeration (default)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials instead of enumeration")
    p.add_argument("--seed", type=_seed, help="seed for --trials")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataGridError as exc:
        print(f"dgrid {args.command}: {exc}", file=sys.stderr)
        if isinstance(exc, InstanceTooLargeError) and args.command == "analyze":
            print("hint: use --trials N --seed S for Monte Carlo", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"dgrid {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
