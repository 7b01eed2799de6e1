"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 infeasible / nothing found within budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._rational import as_fraction, fraction_str
from .consensus import (
    ConsensusNotFoundError,
    consensus_division_lp,
    consensus_division_min_cuts,
    reduce_consensus_to_electricity,
)
from .egalitarian import egalitarian_additive, egalitarian_uniform, gfs_allocation
from .io import (
    PROFILES,
    generate_instance,
    instance_to_dict,
    load_instance,
    load_schedule,
    metrics_to_dict,
    save_instance,
    save_schedule,
)
from .model import InfeasibleAllocationError, InstanceError, check_feasible, compute_metrics
from .packing import PackingNotFoundError, TooManyAgentsError, best_packing_ratio, bin_pack, q_times_bin_pack
from .proportional import allocate_identical_additive, allocate_uniform_identical

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2

STRATEGIES = (
    "uniform-identical",
    "evenpaz",
    "egalitarian-uniform",
    "gfs",
    "egalitarian-additive",
    "packing",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def run_strategy(inst, strategy: str, time_budget: float = 10.0, q_max: int = 6):
    """Run one strategy; returns ``(allocation, info)`` where ``info`` feeds the provenance block."""
    info: dict = {"solver": strategy, "optimal": True}
    if strategy == "uniform-identical":
        A = allocate_uniform_identical(inst)
    elif strategy == "evenpaz":
        A = allocate_identical_additive(inst)
        info["optimal"] = None  # proportional guarantee, not an optimum
    elif strategy == "egalitarian-uniform":
        dist, r = egalitarian_uniform(inst)
        A = dist.to_allocation(inst.n, inst.horizon)
        info["r"] = fraction_str(r)
        info["shares"] = {_set_label(inst, S): fraction_str(x) for S, x in dist.support}
    elif strategy == "gfs":
        dist = gfs_allocation(inst)
        A = dist.to_allocation(inst.n, inst.horizon)
        info["shares"] = {_set_label(inst, S): fraction_str(x) for S, x in dist.support}
        info["tight_groups"] = [list(g) for g in dist.tight_groups]
    elif strategy == "egalitarian-additive":
        _, A, r = egalitarian_additive(inst)
        info["r"] = fraction_str(r)
    elif strategy == "packing":
        best = best_packing_ratio(inst.demands, inst.supply, q_max, time_budget=time_budget)
        A = best.packing.to_allocation(inst.n, inst.horizon)
        info.update(q=best.q, k=best.k, r=fraction_str(best.ratio), q_max=q_max, optimal=best.optimal)
    else:
        raise UsageError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    return A, info


def _set_label(inst, S) -> str:
    return "{" + ",".join(str(inst.agents[i].id if inst.agents[i].id is not None else i) for i in S.members) + "}"


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def cmd_solve(args):
    inst = load_instance(args.instance, normalize=args.normalize)
    A, info = run_strategy(inst, args.strategy, args.time_budget_secs, args.q_max)
    metrics = compute_metrics(inst, A)
    info["parameters"] = {"normalize": args.normalize, "time_budget_secs": args.time_budget_secs}
    if args.out:
        side = save_schedule(args.out, inst, A, metrics, info)
        print(f"wrote {args.out} and {side}")
    _print_json({"metrics": metrics_to_dict(metrics), "provenance": info})
    return EXIT_OK


def cmd_check(args):
    inst = load_instance(args.instance, normalize=args.normalize)
    A = load_schedule(args.schedule, inst)
    report = check_feasible(inst, A)
    if report.ok:
        print("ok")
        return EXIT_OK
    for v in report.violations:
        print(
            f"violation [{fraction_str(v.start)}, {fraction_str(v.end)}): "
            f"load {fraction_str(v.load)} > supply {fraction_str(inst.supply)}"
        )
    return EXIT_INFEASIBLE


def cmd_metrics(args):
    inst = load_instance(args.instance, normalize=args.normalize)
    A = load_schedule(args.schedule, inst)
    _print_json(metrics_to_dict(compute_metrics(inst, A)))
    return EXIT_OK


def cmd_pack(args):
    inst = load_instance(args.instance, normalize=False)
    _, k_ffd = bin_pack(inst.demands, inst.supply, "ffd")
    bins, k = bin_pack(inst.demands, inst.supply, "exact", time_budget=args.time_budget_secs)
    packings = []
    for q in range(1, args.q + 1):
        p = q_times_bin_pack(inst.demands, inst.supply, q, time_budget=args.time_budget_secs)
        packings.append(
            {
                "q": q,
                "k": p.k,
                "ratio": fraction_str(p.ratio),
                "optimal": p.optimal,
                "bins": [_set_label(inst, b) for b in p.bins],
            }
        )
    best = max(packings, key=lambda p: (as_fraction(p["ratio"]), -p["q"]))
    _print_json(
        {
            "bin_pack": {"ffd_k": k_ffd, "exact_k": k, "bins": bins},
            "q_times": packings,
            "best": {"q": best["q"], "k": best["k"], "ratio": best["ratio"], "q_max": args.q},
        }
    )
    return EXIT_OK


def _division_dict(div):
    return {
        "k": div.k,
        "cut_count": div.cut_count,
        "deviation": None if div.deviation is None else fraction_str(div.deviation),
        "intervals": [[fraction_str(a), fraction_str(b), lab] for a, b, lab in div.intervals],
    }


def cmd_consensus(args):
    inst = load_instance(args.instance, normalize=True)
    vals = list(inst.utilities)
    if args.method == "lp":
        div = consensus_division_lp(vals, args.k)
    else:
        try:
            div = consensus_division_min_cuts(
                vals, args.k, args.epsilon, time_budget=args.time_budget_secs
            )
        except ConsensusNotFoundError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_INFEASIBLE
    _print_json(_division_dict(div))
    return EXIT_OK


def cmd_reduce(args):
    inst = load_instance(args.instance, normalize=True)
    reduced = reduce_consensus_to_electricity(list(inst.utilities))
    if args.out:
        save_instance(reduced, args.out)
        print(f"wrote {args.out}")
    else:
        _print_json(instance_to_dict(reduced))
    return EXIT_OK


def cmd_gen(args):
    inst = generate_instance(
        args.seed, args.n, args.supply, args.horizon, args.segments, args.profile
    )
    doc = instance_to_dict(inst)
    doc["provenance"] = {
        "generator": "generate_instance",
        "seed": args.seed,
        "n": args.n,
        "segments": args.segments,
        "profile": args.profile,
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def compare_rows(inst, strategies, time_budget=10.0, q_max=6):
    """One row per strategy (fixed order); inapplicable strategies carry an ``error`` entry."""
    rows = []
    for s in strategies:
        try:
            A, info = run_strategy(inst, s, time_budget, q_max)
            m = compute_metrics(inst, A)
            rows.append({"strategy": s, "metrics": m, "info": info})
        except (InstanceError, TooManyAgentsError, PackingNotFoundError, ValueError) as exc:
            rows.append({"strategy": s, "error": str(exc)})
    return rows


def cmd_compare(args):
    inst = load_instance(args.instance, normalize=args.normalize)
    strategies = args.strategies or list(STRATEGIES)
    for s in strategies:
        if s not in STRATEGIES:
            raise UsageError(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
    rows = compare_rows(inst, strategies, args.time_budget_secs, args.q_max)
    header = f"{'strategy':<22}{'eg':>10}{'ut':>10}{'ef':>10}{'switches':>10}  shares"
    print(header)
    print("-" * len(header))
    for row in rows:
        if "error" in row:
            print(f"{row['strategy']:<22}{'n/a':>10}{'':>10}{'':>10}{'':>10}  {row['error']}")
            continue
        m = row["metrics"]
        shares = row["info"].get("shares")
        share_txt = " ".join(f"{k}:{v}" for k, v in shares.items()) if shares else ""
        print(
            f"{row['strategy']:<22}{float(m.egalitarian):>10.6f}{float(m.utilitarian):>10.6f}"
            f"{float(m.max_difference):>10.6f}{m.switch_count:>10d}  {share_txt}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairshed", description="Fair electricity distribution under a supply cap.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, schedule=False):
        sp.add_argument("instance", help="instance JSON file")
        if schedule:
            sp.add_argument("schedule", help="schedule CSV file")
        sp.add_argument("--normalize", dest="normalize", action="store_true", default=True)
        sp.add_argument("--no-normalize", dest="normalize", action="store_false")
        sp.add_argument("--time-budget-secs", type=float, default=10.0)

    sp = sub.add_parser("solve", help="compute a schedule")
    common(sp)
    sp.add_argument("--strategy", required=True, choices=STRATEGIES)
    sp.add_argument("--q-max", type=int, default=6)
    sp.add_argument("--out", help="schedule CSV to write (metrics go to a .metrics.json sidecar)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("check", help="validate a schedule against the supply")
    common(sp, schedule=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("metrics", help="eg/ut/ef/switch metrics of a schedule")
    common(sp, schedule=True)
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("pack", help="bin packing and q-times bin packing of the demands")
    common(sp)
    sp.add_argument("--q", type=int, default=2)
    sp.set_defaults(func=cmd_pack)

    sp = sub.add_parser("consensus", help="consensus k-division of the agents' utilities")
    common(sp)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--epsilon", type=float, default=1e-6)
    sp.add_argument("--method", choices=("min-cuts", "lp"), default="min-cuts")
    sp.set_defaults(func=cmd_consensus)

    sp = sub.add_parser("reduce", help="electricity instance encoding a 2-consensus division")
    common(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("gen", help="random instance")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=5)
    sp.add_argument("--supply", default="10")
    sp.add_argument("--horizon", default="24")
    sp.add_argument("--segments", type=int, default=4)
    sp.add_argument("--profile", choices=PROFILES, default="uniform-random")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("compare", help="tabulate several strategies on one instance")
    common(sp)
    sp.add_argument("--strategies", nargs="+")
    sp.add_argument("--q-max", type=int, default=6)
    sp.set_defaults(func=cmd_compare)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleAllocationError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (TooManyAgentsError, PackingNotFoundError) as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
