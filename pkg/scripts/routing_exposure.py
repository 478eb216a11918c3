"""Per-link traffic fractions of one flow under randomised downhill routing.

With source-side exclusion, two equal-length branches split traffic
exactly in half; wider fan-outs spread it close to evenly.
"""

import argparse

from datagrid.instances import branch_topology, grid_topology, line_topology
from datagrid.routing import FlowState, link_exposure

SHAPES = {
    "line": lambda: (line_topology(4), "s", "d"),
    "diamond": lambda: (branch_topology(2), "s", "d"),
    "3-branch": lambda: (branch_topology(3), "s", "d"),
    "grid4": lambda: (grid_topology(4, 4), "r0c0", "r3c3"),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shape", choices=sorted(SHAPES), action="append")
    ap.add_argument("--packets", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    for name in args.shape or sorted(SHAPES):
        topo, src, dst = SHAPES[name]()
        print(f"{name}: {src} -> {dst}, {args.packets} packets")
        exposure = link_exposure(topo, FlowState(src, dst), args.packets, args.seed)
        for (a, b), frac in sorted(exposure.items(), key=lambda kv: (-kv[1], kv[0])):
            print(f"  {a}--{b}  {frac:.4f}")


if __name__ == "__main__":
    main()
