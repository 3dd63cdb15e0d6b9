"""Closed-form minimizers around a ball and vision-boundary computation.

For a ball the global minimizer is explicit: when the chord from p to q
misses the ball it is the straight segment; otherwise it runs straight to a
tangency point, follows the great-circle arc in the plane spanned by p, q,
and the center, and leaves straight to q. Lengths:

    length = sqrt(|p-c|^2 - r^2) + sqrt(|q-c|^2 - r^2) + r * arc_angle
    arc_angle = angle(p-c, q-c) - arccos(r/|p-c|) - arccos(r/|q-c|)

and energy = length^2 for the constant-speed parameterization. When p, c, q
are collinear with c strictly between, every plane through the axis carries
a minimizer (a rotational family).

The vision boundary of p is the set of boundary points x whose tangent plane
passes through p: (x - p) . normal(x) = 0. It separates the part of the
boundary visible from p from the hidden part.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .curve import DiscreteCurve, straight_line
from .errors import InfeasiblePoint
from .geometry import orthonormal_complement, point_segment_distance, unit
from .obstacle import ConvexObstacle, Region, Sphere

_MISS_TOL = 1e-12  # relative to the radius, for the segment-miss test


class Multiplicity(enum.Enum):
    UNIQUE = "Unique"
    ROTATIONAL_FAMILY = "RotationalFamily"


@dataclass
class VisionBoundarySample:
    """Sampled points of a vision boundary with their tangency residuals."""

    points: np.ndarray     # (m, n)
    residuals: np.ndarray  # (m,) values of |(x - p) . normal(x)|

    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0


@dataclass
class SphereSolution:
    """Closed-form minimizer data for a ball obstacle.

    tangent_point_p / tangent_point_q are None in the segment case
    (arc_angle == 0). plane_u / plane_v span the plane of the reported
    minimizer; for a rotational family this is one fixed representative.
    """

    p: np.ndarray
    q: np.ndarray
    center: np.ndarray
    radius: float
    length: float
    energy: float
    arc_angle: float
    tangent_point_p: np.ndarray | None
    tangent_point_q: np.ndarray | None
    multiplicity: Multiplicity
    plane_u: np.ndarray | None
    plane_v: np.ndarray | None

    def to_json_dict(self) -> dict:
        def vec(v):
            return None if v is None else np.asarray(v).tolist()

        return {
            "schema_version": "1",
            "p": vec(self.p),
            "q": vec(self.q),
            "center": vec(self.center),
            "radius": self.radius,
            "length": self.length,
            "energy": self.energy,
            "arc_angle": self.arc_angle,
            "tangent_point_p": vec(self.tangent_point_p),
            "tangent_point_q": vec(self.tangent_point_q),
            "multiplicity": self.multiplicity.value,
        }


def solve_sphere(center, radius, p, q, collinearity_tol: float = 1e-9) -> SphereSolution:
    """Exact minimizer length/energy for a ball of the given center and radius.

    Raises InfeasiblePoint unless p and q are strictly exterior. The segment
    case is decided by exact point-to-segment distance with a 1e-12 * radius
    tolerance; a grazing chord counts as the segment case.
    """
    center = np.asarray(center, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    radius = float(radius)
    dp = p - center
    dq = q - center
    rp = float(np.linalg.norm(dp))
    rq = float(np.linalg.norm(dq))
    if rp <= radius or rq <= radius:
        raise InfeasiblePoint("endpoints must be strictly exterior to the ball")

    if point_segment_distance(center, p, q) >= radius * (1.0 - _MISS_TOL):
        length = float(np.linalg.norm(q - p))
        return SphereSolution(
            p=p, q=q, center=center, radius=radius,
            length=length, energy=length * length, arc_angle=0.0,
            tangent_point_p=None, tangent_point_q=None,
            multiplicity=Multiplicity.UNIQUE, plane_u=None, plane_v=None,
        )

    e1 = dp / rp
    w = dq - float(dq @ e1) * e1
    wnorm = float(np.linalg.norm(w))
    sin_theta = wnorm / rq
    cos_theta = float(dq @ e1) / rq
    theta = float(np.arctan2(wnorm / rq, cos_theta))

    rotational = sin_theta <= collinearity_tol and cos_theta < 0.0
    if wnorm > collinearity_tol * rq:
        e2 = w / wnorm
    else:
        # collinear through the center: pick a fixed representative plane
        e2 = orthonormal_complement(e1)[0]

    alpha_p = float(np.arccos(np.clip(radius / rp, -1.0, 1.0)))
    alpha_q = float(np.arccos(np.clip(radius / rq, -1.0, 1.0)))
    arc_angle = theta - alpha_p - alpha_q
    if arc_angle <= 0.0:
        # guaranteed positive when the chord meets the ball; allow fp dust
        if arc_angle < -1e-9:
            raise AssertionError(f"negative arc angle {arc_angle:g} in wrap case")
        arc_angle = 0.0

    t_p = center + radius * (np.cos(alpha_p) * e1 + np.sin(alpha_p) * e2)
    psi_q = theta - alpha_q
    t_q = center + radius * (np.cos(psi_q) * e1 + np.sin(psi_q) * e2)

    length = float(np.sqrt(rp * rp - radius * radius)
                   + np.sqrt(rq * rq - radius * radius)
                   + radius * arc_angle)
    return SphereSolution(
        p=p, q=q, center=center, radius=radius,
        length=length, energy=length * length, arc_angle=arc_angle,
        tangent_point_p=t_p, tangent_point_q=t_q,
        multiplicity=(Multiplicity.ROTATIONAL_FAMILY if rotational else Multiplicity.UNIQUE),
        plane_u=e1, plane_v=e2,
    )


def sphere_solution_to_curve(solution: SphereSolution, n_segments: int) -> DiscreteCurve:
    """Constant-speed discretization of a closed-form minimizer.

    Nodes sit at equal arclength steps along the segment-arc-segment path,
    so every chord spans the same path length and the speed variation is of
    order (length / n_segments)^2. Tangent points generally fall between
    nodes rather than on them; per-piece node counts would instead leave a
    piece-to-piece speed mismatch of order 1 / n_segments.
    """
    if solution.arc_angle == 0.0:
        return straight_line(solution.p, solution.q, n_segments)
    if n_segments < 3:
        raise ValueError("need at least 3 segments for a wrapping path")

    r = solution.radius
    c = solution.center
    e1, e2 = solution.plane_u, solution.plane_v
    t_p, t_q = solution.tangent_point_p, solution.tangent_point_q
    len_p = float(np.linalg.norm(t_p - solution.p))
    len_arc = r * solution.arc_angle
    len_q = float(np.linalg.norm(solution.q - t_q))
    total = len_p + len_arc + len_q

    alpha_p = float(np.arccos(np.clip(r / np.linalg.norm(solution.p - c), -1.0, 1.0)))
    s = total * np.arange(n_segments + 1) / n_segments
    nodes = np.empty((n_segments + 1, solution.p.size))
    on_first = s < len_p
    on_last = s > len_p + len_arc
    on_arc = ~on_first & ~on_last

    if np.any(on_first):
        t = (s[on_first] / len_p)[:, None]
        nodes[on_first] = (1.0 - t) * solution.p + t * t_p
    angles = alpha_p + (s[on_arc] - len_p) / r
    nodes[on_arc] = c + r * (np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2)
    if np.any(on_last):
        t = ((s[on_last] - len_p - len_arc) / len_q)[:, None]
        nodes[on_last] = (1.0 - t) * t_q + t * solution.q
    nodes[0] = solution.p
    nodes[-1] = solution.q
    return DiscreteCurve(nodes)


def vision_boundary(obstacle: ConvexObstacle, p, n_samples: int = 16,
                    seed: int = 0) -> VisionBoundarySample:
    """Sample the vision boundary of p: points x with (x - p) . normal(x) = 0.

    For a ball the set is a round (n-2)-sphere and is sampled exactly; in
    the plane it has exactly two points and both are returned. Other
    obstacles are handled by root-solving the tangency condition along
    boundary arcs from the front (facing p) to the back.
    """
    p = np.asarray(p, dtype=float)
    if obstacle.contains(p) is not Region.EXTERIOR:
        raise InfeasiblePoint("vision boundary requires a strictly exterior point")

    if isinstance(obstacle, Sphere):
        return _vision_boundary_sphere(obstacle, p, n_samples, seed)
    return _vision_boundary_generic(obstacle, p, n_samples)


def _vision_boundary_sphere(obstacle: Sphere, p, n_samples, seed) -> VisionBoundarySample:
    c, r = obstacle.center, obstacle.radius
    dp = p - c
    dist = float(np.linalg.norm(dp))
    axis = dp / dist
    cos_a = r / dist
    ring_center = c + r * cos_a * axis
    rho = r * float(np.sqrt(max(0.0, 1.0 - cos_a * cos_a)))
    comp = orthonormal_complement(axis)
    n = obstacle.dimension
    if n == 2:
        pts = np.array([ring_center + rho * comp[0], ring_center - rho * comp[0]])
    elif n == 3:
        ang = 2.0 * np.pi * np.arange(n_samples) / max(1, n_samples)
        pts = ring_center + rho * (np.cos(ang)[:, None] * comp[0] + np.sin(ang)[:, None] * comp[1])
    else:
        rng = np.random.RandomState(seed)
        raw = rng.standard_normal((n_samples, n - 1))
        raw /= np.linalg.norm(raw, axis=1)[:, None]
        pts = ring_center + rho * raw @ comp
    residuals = np.abs(np.einsum("ij,ij->i", pts - p, obstacle.normal_many(pts)))
    return VisionBoundarySample(points=pts, residuals=residuals)


def _vision_boundary_generic(obstacle: ConvexObstacle, p, n_samples) -> VisionBoundarySample:
    interior = obstacle.reference_interior_point()
    axis = unit(p - interior)
    comp = orthonormal_complement(axis)
    n = obstacle.dimension
    if n == 2:
        seed_dirs = [comp[0], -comp[0]]
    else:
        ang = 2.0 * np.pi * np.arange(n_samples) / max(1, n_samples)
        seed_dirs = [np.cos(a) * comp[0] + np.sin(a) * comp[1] for a in ang]

    def tangency(t, w):
        x = obstacle.boundary_point_along(np.cos(t) * axis + np.sin(t) * w)
        return float((x - p) @ obstacle.normal(x))

    pts = []
    for w in seed_dirs:
        grid = np.linspace(1e-9, np.pi - 1e-9, 48)
        values = [tangency(t, w) for t in grid]
        t_root = None
        for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
            if fa == 0.0:
                t_root = a
                break
            if fa < 0.0 <= fb:
                t_root = brentq(tangency, a, b, args=(w,), xtol=1e-14)
                break
        if t_root is None:
            raise InfeasiblePoint("no tangency sign change; is the point exterior?")
        pts.append(obstacle.boundary_point_along(np.cos(t_root) * axis + np.sin(t_root) * w))
    pts = np.array(pts)
    residuals = np.array([abs(float((x - p) @ obstacle.normal(x))) for x in pts])
    return VisionBoundarySample(points=pts, residuals=residuals)
