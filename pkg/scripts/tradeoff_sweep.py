"""Sweep the replica budget and report cost, breach probability and availability.

Each row is the greedy plan for one budget on the given topology, so the
output shows how extra replicas buy access cost and availability at the
price of exposure.
"""

import argparse
import csv
import sys
from pathlib import Path

from datagrid.allocation import CostModel, plan_allocation, plan_cost
from datagrid.analysis import ThreatModel, exact_report
from datagrid.errors import InfeasibleError
from datagrid.share import ShareParams
from datagrid.topology import load_topology

DEFAULT_TOPOLOGY = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "campus.topo"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("topology", nargs="?", default=DEFAULT_TOPOLOGY)
    ap.add_argument("--object", default="report")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--max-budget", type=int, default=9)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--limit", type=int, default=1)
    args = ap.parse_args(argv)

    topo = load_topology(args.topology)
    params = ShareParams(args.k, args.n)
    model = CostModel(args.alpha, 1)
    threat = ThreatModel.from_topology(topo, params.k)
    out = csv.writer(sys.stdout)
    out.writerow(["budget", "replicas", "access", "storage", "total", "breach_prob", "availability"])
    for budget in range(params.k, args.max_budget + 1):
        try:
            plan = plan_allocation(topo, args.object, params, model, budget, args.limit)
        except InfeasibleError as exc:
            print(f"# budget {budget}: {exc}", file=sys.stderr)
            continue
        cost = plan_cost(topo, plan, model)
        rep = exact_report(plan, threat)
        out.writerow([budget, plan.replica_count, f"{cost.access:g}", f"{cost.storage:g}", f"{cost.total:g}",
                      f"{rep.breach_prob:.6f}", f"{rep.availability:.6f}"])


if __name__ == "__main__":
    main()
