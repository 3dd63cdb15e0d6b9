"""Empirical mapping of where the shortest-path problem has multiple answers.

For a fixed exterior point p, each grid point q in a rectangular region is
solved by multi-start optimization. The converged curves are clustered by
Hausdorff distance; clusters whose energies tie with the best one count as
distinct minimizers. Grid points then receive a label: Unique (one cluster),
NonUnique (several tied clusters), Infeasible (inside or hugging the
obstacle), or Unconverged. A box-counting fit over the NonUnique points
estimates the dimension of the non-uniqueness set.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .curve import DiscreteCurve
from .errors import EmptyInput, InsufficientData
from .obstacle import ConvexObstacle, Region
from .optimizer import SolveConfig, SolveResult, solve

_ENERGY_EQUAL_TOL = 1e-5
_MIN_DIMENSION_POINTS = 10
_DIMENSION_SCALES = 4


class Label(str, Enum):
    UNIQUE = "Unique"
    NON_UNIQUE = "NonUnique"
    INFEASIBLE = "Infeasible"
    UNCONVERGED = "Unconverged"


@dataclass
class MinimizerCluster:
    """A group of starts that found the same curve: the lowest-energy member
    represents the cluster."""

    representative: DiscreteCurve
    energy: float
    members: int


@dataclass
class ScanMap:
    """Labels, best energies, and minimizer counts over a q-grid.

    axes holds the per-dimension grid coordinates; labels, energies, and
    cluster_counts are arrays of shape (len(axes[0]), len(axes[1]), ...).
    """

    p: np.ndarray
    axes: list
    delta: float
    labels: np.ndarray
    energies: np.ndarray
    cluster_counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    def grid_points(self) -> np.ndarray:
        """All grid coordinates as an array of shape (prod(shape), dim)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def label_counts(self) -> dict:
        flat = self.labels.ravel()
        return {lab.value: int(np.sum(flat == lab.value)) for lab in Label}

    def points_with_label(self, label: Label) -> np.ndarray:
        mask = (self.labels == label.value).ravel()
        return self.grid_points()[mask]

    def to_csv_text(self) -> str:
        dim = len(self.axes)
        names = ["qx", "qy", "qz"][:dim] if dim <= 3 else [f"q{i}" for i in range(dim)]
        lines = [",".join(names + ["label", "energy", "clusters"])]
        pts = self.grid_points()
        flat_labels = self.labels.ravel()
        flat_energy = self.energies.ravel()
        flat_counts = self.cluster_counts.ravel()
        for i in range(len(pts)):
            coords = ",".join("%.17g" % c for c in pts[i])
            lines.append("%s,%s,%.17g,%d" % (coords, flat_labels[i], flat_energy[i],
                                             flat_counts[i]))
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w") as handle:
            handle.write(self.to_csv_text())

    def to_json_dict(self) -> dict:
        return {
            "schema_version": "1",
            "p": [float(v) for v in self.p],
            "delta": self.delta,
            "axes": [[float(v) for v in axis] for axis in self.axes],
            "labels": self.labels.ravel().tolist(),
            "energies": [None if np.isnan(e) else float(e)
                         for e in self.energies.ravel()],
            "cluster_counts": self.cluster_counts.ravel().tolist(),
            "metadata": dict(self.metadata),
        }


def hausdorff_distance(a: DiscreteCurve, b: DiscreteCurve) -> float:
    """Symmetric Hausdorff distance between the node sets of two curves."""
    forward = directed_hausdorff(a.nodes, b.nodes)[0]
    backward = directed_hausdorff(b.nodes, a.nodes)[0]
    return max(forward, backward)


def cluster_minimizers(results: list, cluster_tol: float,
                       energy_equal_tol: float = _ENERGY_EQUAL_TOL) -> list:
    """Single-linkage clustering of converged results by Hausdorff distance.

    Returns only the minimizer clusters: those whose energy ties the best
    cluster within energy_equal_tol relative, sorted by energy. Non-converged
    results are ignored; an empty admitted set raises EmptyInput.
    """
    admitted = [r for r in results if r.converged]
    if not admitted:
        raise EmptyInput("no converged results to cluster")

    count = len(admitted)
    parent = list(range(count))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(count):
        for j in range(i + 1, count):
            if hausdorff_distance(admitted[i].curve, admitted[j].curve) <= cluster_tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    groups: dict = {}
    for i in range(count):
        groups.setdefault(find(i), []).append(admitted[i])

    clusters = []
    for members in groups.values():
        best = min(members, key=lambda r: r.energy)
        clusters.append(MinimizerCluster(representative=best.curve,
                                         energy=best.energy,
                                         members=len(members)))
    clusters.sort(key=lambda c: c.energy)
    best_energy = clusters[0].energy
    cutoff = best_energy * (1.0 + energy_equal_tol) + 1e-300
    return [c for c in clusters if c.energy <= cutoff]


def _scan_axes(region, delta: float) -> list:
    axes = []
    for lo, hi in region:
        lo = float(lo)
        hi = float(hi)
        if hi <= lo:
            raise ValueError("region intervals must have positive width")
        count = int(round((hi - lo) / delta)) + 1
        axes.append(np.linspace(lo, hi, count))
    return axes


def _classify_point(p: np.ndarray, q: np.ndarray, obstacle: ConvexObstacle,
                    config: SolveConfig, cluster_tol: float,
                    energy_equal_tol: float):
    results = solve(p, q, obstacle, config)
    converged = [r for r in results if r.converged]
    if not converged:
        best = min((r.energy for r in results), default=float("nan"))
        return Label.UNCONVERGED.value, best, 0
    clusters = cluster_minimizers(converged, cluster_tol, energy_equal_tol)
    label = Label.UNIQUE.value if len(clusters) == 1 else Label.NON_UNIQUE.value
    return label, clusters[0].energy, len(clusters)


def _scan_worker(args):
    index, p, q, obstacle, config, cluster_tol, energy_equal_tol = args
    return index, _classify_point(p, q, obstacle, config, cluster_tol,
                                  energy_equal_tol)


def scan(p, obstacle: ConvexObstacle, region, delta: float,
         config: SolveConfig | None = None, *, cluster_tol: float | None = None,
         energy_equal_tol: float = _ENERGY_EQUAL_TOL, jobs: int = 1) -> ScanMap:
    """Label every grid point of the region by minimizer multiplicity.

    Grid points inside the obstacle or within delta of it are Infeasible and
    keep a NaN energy. The remaining points are independent work items; with
    jobs > 1 they are dispatched to a process pool and reduced by grid index,
    so the output is deterministic for a fixed seed regardless of scheduling.
    """
    p = np.asarray(p, dtype=float)
    if obstacle.contains(p) is not Region.EXTERIOR:
        raise ValueError("p must be strictly exterior to the obstacle")
    cfg = config or SolveConfig()
    tol = cluster_tol if cluster_tol is not None else 0.02 * obstacle.diameter
    axes = _scan_axes(region, delta)
    shape = tuple(len(a) for a in axes)

    labels = np.full(shape, Label.INFEASIBLE.value, dtype="<U12")
    energies = np.full(shape, np.nan)
    counts = np.zeros(shape, dtype=int)

    work = []
    for index in itertools.product(*(range(s) for s in shape)):
        q = np.array([axes[d][index[d]] for d in range(len(axes))])
        if obstacle.contains(q) is not Region.EXTERIOR:
            continue
        projected = obstacle.project_to_boundary(q)
        if np.linalg.norm(q - projected) < delta * (1.0 - 1e-12):
            continue
        work.append((index, p, q, obstacle, cfg, tol, energy_equal_tol))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_scan_worker, work, chunksize=8))
    else:
        outcomes = [_scan_worker(item) for item in work]

    for index, (label, energy, count) in outcomes:
        labels[index] = label
        energies[index] = energy
        counts[index] = count

    return ScanMap(p=p, axes=axes, delta=float(axes[0][1] - axes[0][0]),
                   labels=labels, energies=energies, cluster_counts=counts)


def estimate_dimension(scan_map: ScanMap, n_scales: int = _DIMENSION_SCALES) -> float:
    """Box-counting dimension of the NonUnique point set.

    Counts occupied boxes at scales delta * 2^k for k = 0..n_scales-1 and
    returns the least-squares slope of log N against log(1/scale). Requires
    at least 10 NonUnique points and 4 scales.
    """
    if n_scales < 4:
        raise ValueError("need at least 4 scales for a stable fit")
    points = scan_map.points_with_label(Label.NON_UNIQUE)
    if len(points) < _MIN_DIMENSION_POINTS:
        raise InsufficientData(
            f"need at least {_MIN_DIMENSION_POINTS} NonUnique points, "
            f"found {len(points)}")
    origin = np.array([axis[0] for axis in scan_map.axes])
    log_inv_scale = []
    log_count = []
    for k in range(n_scales):
        eps = scan_map.delta * (2.0 ** k)
        cells = np.floor((points - origin) / eps + 1e-9).astype(int)
        occupied = len({tuple(row) for row in cells})
        log_inv_scale.append(np.log(1.0 / eps))
        log_count.append(np.log(occupied))
    slope = np.polyfit(log_inv_scale, log_count, 1)[0]
    return float(slope)
