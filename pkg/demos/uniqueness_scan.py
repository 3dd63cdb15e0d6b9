"""Map where the minimizer around a disk stops being unique.

With the source fixed at p = (-2, 0), a target q straight behind the unit
disk can be reached by wrapping either way at the same cost, so the
minimizer is not unique exactly on the shadow ray behind the disk. The scan
solves a grid of targets with several starts each, clusters the outcomes,
and labels every cell. The printout is an ASCII map: '2' marks cells with
two tied minimizers, '.' a unique one, '#' an infeasible cell inside or
hugging the disk.

The default grid takes roughly a minute on one core. Shrink it with
--delta 0.5 for a quicker, coarser look.

Run from the repository root:

    python3 demos/uniqueness_scan.py [--delta 0.25] [--jobs 1]
"""

import argparse

import numpy as np

from tautpath import (InsufficientData, Label, SolveConfig, Sphere,
                      estimate_dimension, scan)

P = np.array([-2.0, 0.0])
REGION = [[-1.0, 3.5], [-1.5, 1.5]]

GLYPHS = {
    Label.UNIQUE.value: ".",
    Label.NON_UNIQUE.value: "2",
    Label.INFEASIBLE.value: "#",
    Label.UNCONVERGED.value: "?",
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--delta", type=float, default=0.25,
                        help="grid spacing (default 0.25)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes (default 1)")
    args = parser.parse_args()

    disk = Sphere(np.zeros(2), 1.0)
    config = SolveConfig(n_segments=96, n_starts=3, grad_tol=1e-8, seed=0)
    scan_map = scan(P, disk, REGION, args.delta, config, jobs=args.jobs)

    xs, ys = scan_map.axes
    print("target grid %d x %d, spacing %.3g, source p = (%.3g, %.3g)"
          % (len(xs), len(ys), scan_map.delta, P[0], P[1]))
    print()
    # Rows print from the top down, so reverse the y axis.
    for j in reversed(range(len(ys))):
        row = "".join(GLYPHS[scan_map.labels[i, j]] for i in range(len(xs)))
        print("  %s" % row)
    print()

    counts = scan_map.label_counts()
    print("labels: %d unique, %d non-unique, %d infeasible, %d unconverged"
          % (counts[Label.UNIQUE.value], counts[Label.NON_UNIQUE.value],
             counts[Label.INFEASIBLE.value], counts[Label.UNCONVERGED.value]))

    try:
        dimension = estimate_dimension(scan_map)
        print("box-counting dimension of the non-unique set: %.2f "
              "(a ray has dimension 1)" % dimension)
    except InsufficientData as exc:
        print("dimension estimate skipped: %s" % exc)


if __name__ == "__main__":
    main()
