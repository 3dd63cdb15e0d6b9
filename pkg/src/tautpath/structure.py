"""Structural verification of candidate minimizing curves.

A minimizer around a smooth convex obstacle decomposes into a straight
approach, a single boundary-contact run that follows a geodesic of the
surface, and a straight exit, with tangential (C^1) junctions. The
functions here measure how far a discrete curve deviates from that shape:
straightness of the free parts, tangency of the approach chords at the
contact points, absence of tangential acceleration along the contact run,
the second-difference residual against the surface's curvature term, and
the curvature bound.

The curvature jump at each end of a contact run generally falls between
two nodes, so every node whose second-difference stencil spans a run
boundary (the run endpoint and its free neighbor) straddles the jump.
Those junction nodes are excluded from the geodesic and second-difference
pass/fail statistics and reported separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .curve import DiscreteCurve
from .errors import NotConstantSpeed
from .geometry import index_runs
from .obstacle import ConvexObstacle

_ENDPOINT_MATCH_TOL = 1e-7


@dataclass
class StructureTolerances:
    """Thresholds for the pass/fail gate.

    contact_tol is an absolute distance; None means 1e-6 times the obstacle
    diameter. junction_angle_tol of None means 4*pi/N for an N-segment curve.
    """

    contact_tol: float | None = None
    straightness_tol: float = 1e-6
    tangency_tol: float = 1e-4
    geodesic_tol: float = 5e-3
    curvature_slack: float = 0.05
    junction_angle_tol: float | None = None


@dataclass
class StructureReport:
    coincidence_runs: list[tuple[int, int]]
    straightness_residual: float
    tangency_residual_p: float
    tangency_residual_q: float
    geodesic_residual: float
    el_residual: float
    curvature_ratio: float
    junction_angle: float
    expects_contact: bool
    passed: bool
    failures: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": "1",
            "coincidence_runs": [[int(a), int(b)] for a, b in self.coincidence_runs],
            "straightness_residual": self.straightness_residual,
            "tangency_residual_p": self.tangency_residual_p,
            "tangency_residual_q": self.tangency_residual_q,
            "geodesic_residual": self.geodesic_residual,
            "el_residual": self.el_residual,
            "curvature_ratio": self.curvature_ratio,
            "junction_angle": self.junction_angle,
            "expects_contact": self.expects_contact,
            "passed": self.passed,
            "failures": list(self.failures),
        }


@dataclass
class ElResidualProfile:
    """Raw per-node second-difference residuals for interior nodes.

    residuals[k] belongs to node node_indices[k]. junction_indices lists the
    nodes whose stencil spans a contact-run boundary (each run endpoint and
    its free neighbor), where a one-sided curvature jump keeps the residual
    bounded but nonvanishing.
    """

    node_indices: np.ndarray
    residuals: np.ndarray
    junction_indices: list[int]
    contact_mask: np.ndarray


def _contact_distance(nodes: np.ndarray, obstacle: ConvexObstacle) -> np.ndarray:
    projected = obstacle.project_many(nodes)
    return np.linalg.norm(nodes - projected, axis=1)


def extract_coincidence(curve: DiscreteCurve, obstacle: ConvexObstacle,
                        contact_tol: float | None = None) -> list[tuple[int, int]]:
    """Maximal runs [i_start, i_end] of consecutive nodes on the boundary.

    A node is in contact when its distance to the boundary is at most
    contact_tol (default 1e-6 times the obstacle diameter). Zero runs is the
    expected output when the endpoint chord clears the obstacle.
    """
    tol = contact_tol if contact_tol is not None else 1e-6 * obstacle.diameter
    close = _contact_distance(curve.nodes, obstacle) <= tol
    return index_runs(close)


def chord_clears_obstacle(obstacle: ConvexObstacle, p, q) -> bool:
    """True when the straight segment from p to q stays outside the obstacle.

    The level function restricted to a line is convex, so a bounded scalar
    minimization finds its global minimum. Grazing contact counts as clear.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)

    def phi_on_chord(t: float) -> float:
        return obstacle.phi(p + t * (q - p))

    result = minimize_scalar(phi_on_chord, bounds=(0.0, 1.0), method="bounded",
                             options={"xatol": 1e-12})
    lowest = min(result.fun, phi_on_chord(0.0), phi_on_chord(1.0))
    return bool(lowest >= -obstacle.boundary_tol)


def _free_intervals(runs: list[tuple[int, int]], last: int) -> list[tuple[int, int]]:
    """Maximal index ranges strictly outside the contact runs.

    These are the pieces whose chords must be straight. Contact nodes are
    excluded: the chord from the last free node into a run cuts the corner
    at the junction and belongs to no straight piece.
    """
    if not runs:
        return [(0, last)]
    intervals = []
    cursor = 0
    for a, b in runs:
        intervals.append((cursor, a - 1))
        cursor = b + 1
    intervals.append((cursor, last))
    return [(a, b) for a, b in intervals if b > a]


def _chord_deviation(nodes: np.ndarray) -> float:
    """Max distance of nodes from the segment joining the first and last,
    divided by the segment length."""
    a, b = nodes[0], nodes[-1]
    chord = b - a
    chord_len = float(np.linalg.norm(chord))
    if chord_len < 1e-300 or len(nodes) <= 2:
        return 0.0
    direction = chord / chord_len
    rel = nodes[1:-1] - a
    along = rel @ direction
    perp = rel - np.outer(along, direction)
    return float(np.linalg.norm(perp, axis=1).max() / chord_len)


def _turning_angle(nodes: np.ndarray, i: int) -> float:
    before = nodes[i] - nodes[i - 1]
    after = nodes[i + 1] - nodes[i]
    nb = np.linalg.norm(before)
    na = np.linalg.norm(after)
    if nb < 1e-300 or na < 1e-300:
        return 0.0
    cosang = float(np.dot(before, after) / (nb * na))
    return float(np.arccos(np.clip(cosang, -1.0, 1.0)))


def _el_terms(curve: DiscreteCurve, obstacle: ConvexObstacle, contact_tol: float):
    """Second differences, curvature terms, and masks shared by the checks.

    Returns (d2, accel_term, contact_mask, junction_set) for interior nodes
    1..N-1. accel_term is A(v, v) at contact nodes with the centered velocity
    projected onto the tangent plane, zero elsewhere.
    """
    nodes = curve.nodes
    n = curve.n_segments
    d2 = nodes[:-2] - 2.0 * nodes[1:-1] + nodes[2:]
    dist = _contact_distance(nodes, obstacle)
    close = dist <= contact_tol
    contact_mask = close[1:-1]
    junction_set = set()
    for a, b in index_runs(close):
        for j in (a - 1, a, b, b + 1):
            if 1 <= j <= n - 1:
                junction_set.add(j)

    accel = np.zeros_like(d2)
    idx = np.nonzero(contact_mask)[0]
    for k in idx:
        i = k + 1
        y = obstacle.project_to_boundary(nodes[i])
        nu = obstacle.normal(y)
        v = 0.5 * n * (nodes[i + 1] - nodes[i - 1])
        v_t = v - np.dot(v, nu) * nu
        if np.linalg.norm(v_t) < 1e-300:
            continue
        accel[k] = obstacle.second_fundamental_form(y, v_t)
    return d2, accel, contact_mask, junction_set


def el_residual_profile(curve: DiscreteCurve, obstacle: ConvexObstacle,
                        contact_tol: float | None = None) -> ElResidualProfile:
    """Per-node residual |N^2 (u_{i+1} - 2 u_i + u_{i-1}) - A_i| for interior
    nodes, where A_i is the surface curvature term at contact nodes and zero
    on free nodes. Values are in raw acceleration units (speed squared over
    curvature radius); divide by length squared for a scale-free number.
    """
    if curve.speed_variation() > 0.01:
        raise NotConstantSpeed("residual profile requires a constant-speed curve")
    tol = contact_tol if contact_tol is not None else 1e-6 * obstacle.diameter
    n = curve.n_segments
    d2, accel, contact_mask, junction_set = _el_terms(curve, obstacle, tol)
    residuals = np.linalg.norm(n * n * d2 - accel, axis=1)
    return ElResidualProfile(
        node_indices=np.arange(1, n),
        residuals=residuals,
        junction_indices=sorted(junction_set),
        contact_mask=contact_mask,
    )


def verify_structure(curve: DiscreteCurve, obstacle: ConvexObstacle, p, q,
                     tols: StructureTolerances | None = None) -> StructureReport:
    """Measure every structural residual and apply the pass/fail gate.

    When the endpoint chord clears the obstacle the expected shape is a
    straight segment with zero contact runs; otherwise exactly one contact
    run of at least two nodes with straight free parts, tangent junctions,
    geodesic contact motion, and curvature at most the obstacle's maximum.
    """
    tols = tols or StructureTolerances()
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    scale = max(obstacle.diameter, float(np.linalg.norm(q - p)))
    if (np.linalg.norm(curve.p - p) > _ENDPOINT_MATCH_TOL * scale
            or np.linalg.norm(curve.q - q) > _ENDPOINT_MATCH_TOL * scale):
        raise ValueError("curve endpoints do not match the given p, q")
    if curve.speed_variation() > 0.01:
        raise NotConstantSpeed("structure checks require a constant-speed curve")

    tol = tols.contact_tol if tols.contact_tol is not None else 1e-6 * obstacle.diameter
    n = curve.n_segments
    nodes = curve.nodes
    runs = extract_coincidence(curve, obstacle, tol)
    expects_contact = not chord_clears_obstacle(obstacle, p, q)

    straightness = 0.0
    for a, b in _free_intervals(runs, n):
        straightness = max(straightness, _chord_deviation(nodes[a:b + 1]))

    if runs:
        xa = nodes[runs[0][0]]
        xb = nodes[runs[-1][1]]
        nu_a = obstacle.normal(obstacle.project_to_boundary(xa))
        nu_b = obstacle.normal(obstacle.project_to_boundary(xb))
        da = float(np.linalg.norm(xa - p))
        db = float(np.linalg.norm(xb - q))
        tangency_p = abs(float(np.dot(xa - p, nu_a))) / da if da > 1e-300 else 0.0
        tangency_q = abs(float(np.dot(xb - q, nu_b))) / db if db > 1e-300 else 0.0
    else:
        tangency_p = tangency_q = 0.0

    d2, accel, contact_mask, junction_set = _el_terms(curve, obstacle, tol)
    interior = np.arange(1, n)
    is_junction = np.isin(interior, sorted(junction_set))

    geodesic = 0.0
    for k in np.nonzero(contact_mask & ~is_junction)[0]:
        i = k + 1
        mag = float(np.linalg.norm(d2[k]))
        if mag < 1e-300:
            continue
        nu = obstacle.normal(obstacle.project_to_boundary(nodes[i]))
        tangential = d2[k] - np.dot(d2[k], nu) * nu
        geodesic = max(geodesic, float(np.linalg.norm(tangential)) / mag)

    raw = np.linalg.norm(n * n * d2 - accel, axis=1)
    length = curve.length()
    keep = ~is_junction
    el = float(raw[keep].max() / (length * length)) if np.any(keep) else 0.0

    curvature_ratio = curve.max_discrete_curvature() / obstacle.kappa_max

    junction_angle = 0.0
    for a, b in runs:
        for i in (a, b):
            if 0 < i < n:
                junction_angle = max(junction_angle, _turning_angle(nodes, i))

    failures = []
    jtol = tols.junction_angle_tol if tols.junction_angle_tol is not None else 4.0 * np.pi / n
    if expects_contact:
        if len(runs) != 1:
            failures.append(f"expected exactly one contact run, found {len(runs)}")
        elif runs[0][1] - runs[0][0] + 1 < 2:
            failures.append("contact run has fewer than 2 nodes")
        if tangency_p > tols.tangency_tol:
            failures.append(f"tangency residual at p is {tangency_p:.3g}")
        if tangency_q > tols.tangency_tol:
            failures.append(f"tangency residual at q is {tangency_q:.3g}")
        if geodesic > tols.geodesic_tol:
            failures.append(f"geodesic residual is {geodesic:.3g}")
        if junction_angle > jtol:
            failures.append(f"junction turning angle is {junction_angle:.3g}")
    else:
        if runs:
            failures.append(f"expected zero contact runs, found {len(runs)}")
    if straightness > tols.straightness_tol:
        failures.append(f"straightness residual is {straightness:.3g}")
    if curvature_ratio > 1.0 + tols.curvature_slack:
        failures.append(f"curvature ratio is {curvature_ratio:.3g}")

    return StructureReport(
        coincidence_runs=runs,
        straightness_residual=straightness,
        tangency_residual_p=tangency_p,
        tangency_residual_q=tangency_q,
        geodesic_residual=geodesic,
        el_residual=el,
        curvature_ratio=curvature_ratio,
        junction_angle=junction_angle,
        expects_contact=expects_contact,
        passed=not failures,
        failures=failures,
    )
