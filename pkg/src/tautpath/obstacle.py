"""Smooth bounded convex obstacles given as level sets phi < 0.

Each obstacle exposes the scalar field phi (negative inside, zero on the
boundary, positive outside), its first two derivatives, nearest-point
projection onto the boundary, outward unit normals, and the second
fundamental form used by the curvature checks.

Sign convention: for the unit sphere, second_fundamental_form(y, v)
returns -|v|^2 * normal(y), i.e. the curvature vector of a boundary
geodesic points into the obstacle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateGradient, NonConvergence, NotTangent

_GRAD_EPS = 1e-13


class Region(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


class ConvexObstacle:
    """Base class; subclasses fill in the scalar field and metadata.

    Attributes
    ----------
    dimension : int
        Ambient dimension n (>= 2).
    kappa_max : float
        Maximum principal curvature over the boundary.
    kappa_min : float or None
        Minimum principal curvature, None when unknown. Zero flags flat
        boundary pieces.
    diameter : float
        Diameter of the obstacle, used to scale tolerances.
    """

    dimension: int
    kappa_max: float
    kappa_min: float | None
    diameter: float

    @property
    def boundary_tol(self) -> float:
        """Default classification band around phi = 0."""
        return 1e-9 * self.diameter

    # --- scalar field -------------------------------------------------

    def phi(self, x) -> float:
        raise NotImplementedError

    def grad_phi(self, x) -> np.ndarray:
        raise NotImplementedError

    def hess_phi(self, x) -> np.ndarray:
        raise NotImplementedError

    def phi_many(self, points) -> np.ndarray:
        """phi evaluated on an (m, n) array of points."""
        pts = np.asarray(points, dtype=float)
        return np.array([self.phi(p) for p in pts])

    # --- classification -----------------------------------------------

    def contains(self, x, tol: float | None = None) -> Region:
        """Classify a point by the sign of phi with a boundary band."""
        band = self.boundary_tol if tol is None else tol
        value = self.phi(np.asarray(x, dtype=float))
        if value < -band:
            return Region.INTERIOR
        if value > band:
            return Region.EXTERIOR
        return Region.BOUNDARY

    def is_exterior(self, x, tol: float | None = None) -> bool:
        return self.contains(x, tol) is Region.EXTERIOR

    # --- projection ----------------------------------------------------

    def project_to_boundary(self, x) -> np.ndarray:
        """Nearest boundary point to x (unique for exterior x by convexity)."""
        return self.project_many(np.asarray(x, dtype=float)[None, :])[0]

    def project_many(self, points) -> np.ndarray:
        raise NotImplementedError

    # --- normals and curvature ------------------------------------------

    def normal(self, y) -> np.ndarray:
        """Outward unit normal at a boundary point."""
        g = self.grad_phi(np.asarray(y, dtype=float))
        norm = float(np.linalg.norm(g))
        if norm < _GRAD_EPS:
            raise DegenerateGradient(f"gradient norm {norm:g} at {y}")
        return g / norm

    def normal_many(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.array([self.normal(p) for p in pts])

    def second_fundamental_form(self, y, v, tangent_tol: float = 1e-6) -> np.ndarray:
        """Curvature vector A(v, v) at boundary point y for tangent v.

        Computed from the level-set Hessian: A(v, v) = -(v^T H v / |grad phi|) nu.
        Raises NotTangent when |v . nu| > tangent_tol * |v|.
        """
        y = np.asarray(y, dtype=float)
        v = np.asarray(v, dtype=float)
        nu = self.normal(y)
        speed = float(np.linalg.norm(v))
        if speed > 0.0 and abs(float(v @ nu)) > tangent_tol * speed:
            raise NotTangent(f"v . nu = {float(v @ nu):g} for |v| = {speed:g}")
        h = self.hess_phi(y)
        gnorm = float(np.linalg.norm(self.grad_phi(y)))
        return -(float(v @ h @ v) / gnorm) * nu

    # --- geometry helpers ------------------------------------------------

    def reference_interior_point(self) -> np.ndarray:
        raise NotImplementedError

    def circumradius(self) -> float:
        """Radius of a ball around the reference point containing the obstacle."""
        return 0.5 * self.diameter

    def boundary_point_along(self, direction, origin=None) -> np.ndarray:
        """Boundary point hit by the ray origin + t * direction, t > 0.

        origin defaults to the reference interior point.
        """
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        o = self.reference_interior_point() if origin is None else np.asarray(origin, dtype=float)
        lo, hi = 0.0, self.diameter
        tries = 0
        while self.phi(o + hi * d) < 0.0:
            hi *= 2.0
            tries += 1
            if tries > 60:
                raise NonConvergence("ray never left the obstacle")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.phi(o + mid * d) < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, hi):
                break
        t = 0.5 * (lo + hi)
        y = o + t * d
        # one-dimensional Newton polish along the ray
        for _ in range(5):
            dphi = float(self.grad_phi(y) @ d)
            if abs(dphi) < _GRAD_EPS:
                break
            t -= self.phi(y) / dphi
            y = o + t * d
        return y

    def to_config(self) -> dict:
        raise ConfigError(f"{type(self).__name__} is not config-serializable")


@dataclass(eq=False)
class Sphere(ConvexObstacle):
    """Ball of given center and radius; phi(x) = |x - center| - radius."""

    center: np.ndarray
    radius: float
    kappa_min: float | None = field(init=False)

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.radius = float(self.radius)
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.center.ndim != 1 or self.center.size < 2:
            raise ValueError("center must be a vector of dimension >= 2")
        self.dimension = self.center.size
        self.kappa_max = 1.0 / self.radius
        self.kappa_min = 1.0 / self.radius
        self.diameter = 2.0 * self.radius

    def phi(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.center) - self.radius)

    def grad_phi(self, x) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.center
        norm = float(np.linalg.norm(d))
        if norm < _GRAD_EPS:
            raise DegenerateGradient("gradient undefined at the center")
        return d / norm

    def hess_phi(self, x) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.center
        norm = float(np.linalg.norm(d))
        if norm < _GRAD_EPS:
            raise DegenerateGradient("Hessian undefined at the center")
        u = d / norm
        return (np.eye(self.dimension) - np.outer(u, u)) / norm

    def phi_many(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.linalg.norm(pts - self.center, axis=1) - self.radius

    def project_many(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        d = pts - self.center
        norms = np.linalg.norm(d, axis=1)
        if np.any(norms < _GRAD_EPS):
            raise DegenerateGradient("projection undefined at the center")
        return self.center + d * (self.radius / norms)[:, None]

    def normal_many(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        d = pts - self.center
        norms = np.linalg.norm(d, axis=1)
        if np.any(norms < _GRAD_EPS):
            raise DegenerateGradient("normal undefined at the center")
        return d / norms[:, None]

    def reference_interior_point(self) -> np.ndarray:
        return self.center.copy()

    def circumradius(self) -> float:
        return self.radius

    def boundary_point_along(self, direction, origin=None) -> np.ndarray:
        if origin is None:
            d = np.asarray(direction, dtype=float)
            return self.center + self.radius * d / np.linalg.norm(d)
        return super().boundary_point_along(direction, origin)

    def to_config(self) -> dict:
        return {"kind": "sphere", "center": self.center.tolist(), "radius": self.radius}


@dataclass(eq=False)
class Ellipsoid(ConvexObstacle):
    """Axis-aligned ellipsoid; phi(x) = sum(((x - center) / semi_axes)^2) - 1.

    Nearest-point projection solves the KKT condition y = x - lam * grad phi(y),
    phi(y) = 0. Eliminating y componentwise gives a scalar secular equation in
    lam, solved by safeguarded Newton from the radially scaled initial point.
    """

    center: np.ndarray
    semi_axes: np.ndarray
    kappa_min: float | None = field(init=False)

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.semi_axes = np.asarray(self.semi_axes, dtype=float)
        if self.center.shape != self.semi_axes.shape or self.center.ndim != 1:
            raise ValueError("center and semi_axes must be vectors of equal length")
        if self.center.size < 2:
            raise ValueError("dimension must be >= 2")
        if np.any(self.semi_axes <= 0.0):
            raise ValueError("semi-axes must be positive")
        self.dimension = self.center.size
        a_max = float(np.max(self.semi_axes))
        a_min = float(np.min(self.semi_axes))
        self.kappa_max = a_max / a_min**2
        self.kappa_min = a_min / a_max**2
        self.diameter = 2.0 * a_max
        self._d = 2.0 / self.semi_axes**2  # diagonal of the Hessian

    def phi(self, x) -> float:
        w = (np.asarray(x, dtype=float) - self.center) / self.semi_axes
        return float(w @ w - 1.0)

    def grad_phi(self, x) -> np.ndarray:
        return 2.0 * (np.asarray(x, dtype=float) - self.center) / self.semi_axes**2

    def hess_phi(self, x) -> np.ndarray:
        return np.diag(self._d)

    def phi_many(self, points) -> np.ndarray:
        w = (np.asarray(points, dtype=float) - self.center) / self.semi_axes
        return np.einsum("ij,ij->i", w, w) - 1.0

    def normal_many(self, points) -> np.ndarray:
        g = 2.0 * (np.asarray(points, dtype=float) - self.center) / self.semi_axes**2
        norms = np.linalg.norm(g, axis=1)
        if np.any(norms < _GRAD_EPS):
            raise DegenerateGradient("normal undefined at the center")
        return g / norms[:, None]

    def project_many(self, points, max_iters: int = 100, tol: float = 1e-12) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        x = pts - self.center
        if np.any(np.linalg.norm(x, axis=1) < _GRAD_EPS * self.diameter):
            raise DegenerateGradient("projection undefined at the center")
        d = self._d
        w2 = (x / self.semi_axes) ** 2  # weights of the secular equation

        # g(lam) = sum_i w2_i / (1 + lam d_i)^2 - 1 is convex and decreasing on
        # the branch containing the nearest point. Bracket, then Newton with
        # bisection safeguard (this is the damped-Newton KKT solve reduced to
        # one variable per point).
        active = w2 > 1e-30
        pole = np.where(active, d, 0.0).max(axis=1)
        pole = np.where(pole > 0.0, pole, np.inf)
        g0 = w2.sum(axis=1) - 1.0

        # initial lam from the radially scaled boundary point
        scale = 1.0 / np.sqrt(w2.sum(axis=1))
        y0 = x * scale[:, None]
        grad0 = 2.0 * y0 / self.semi_axes**2
        lam = np.einsum("ij,ij->i", x - y0, grad0) / np.einsum("ij,ij->i", grad0, grad0)

        lo = np.where(g0 >= 0.0, 0.0, -(1.0 - 1e-9) / pole)
        hi = np.where(g0 >= 0.0, np.inf, 0.0)
        lam = np.clip(lam, lo, np.where(np.isfinite(hi), hi, lam))

        def g_val(lam_vec):
            denom = 1.0 + lam_vec[:, None] * d
            t = w2 / denom**2
            return t.sum(axis=1) - 1.0, -2.0 * (t * d / denom).sum(axis=1)

        converged = np.zeros(len(x), dtype=bool)
        for _ in range(max_iters):
            val, dval = g_val(lam)
            lo = np.where(val > 0.0, np.maximum(lo, lam), lo)
            hi = np.where(val < 0.0, np.minimum(hi, lam), hi)
            converged = np.abs(val) <= tol
            if converged.all():
                break
            step = np.where(dval != 0.0, -val / dval, 0.0)
            trial = lam + step
            bad = (trial <= lo) | (trial >= hi) | ~np.isfinite(trial)
            fallback = np.where(np.isfinite(hi), 0.5 * (lo + hi), lam + np.abs(lam) + 1.0)
            lam = np.where(converged, lam, np.where(bad, fallback, trial))
        else:
            raise NonConvergence("ellipsoid projection did not converge")

        y = x / (1.0 + lam[:, None] * d)
        return self.center + y

    def reference_interior_point(self) -> np.ndarray:
        return self.center.copy()

    def circumradius(self) -> float:
        return float(np.max(self.semi_axes))

    def boundary_point_along(self, direction, origin=None) -> np.ndarray:
        if origin is None:
            d = np.asarray(direction, dtype=float)
            w = d / self.semi_axes
            return self.center + d / np.linalg.norm(w)
        return super().boundary_point_along(direction, origin)

    def to_config(self) -> dict:
        return {
            "kind": "ellipsoid",
            "center": self.center.tolist(),
            "semi_axes": self.semi_axes.tolist(),
        }


class ImplicitConvex(ConvexObstacle):
    """Convex obstacle from user-supplied phi, gradient, and Hessian callables.

    Parameters
    ----------
    phi_fn, grad_fn, hess_fn : callables
        Scalar field (negative inside), its gradient, and Hessian.
    dimension : int
        Ambient dimension.
    kappa_max : float
        Maximum principal curvature bound (supplied, not derived).
    diameter : float
        Obstacle diameter, used to scale tolerances.
    interior_point : array-like, optional
        A point strictly inside; defaults to the origin.
    kappa_min : float, optional
        Minimum principal curvature when known; zero flags flat pieces.

    Convexity is spot-checked at construction by sampling boundary points and
    testing the tangential Hessian for positive semidefiniteness; failures
    raise ValueError with the offending sample.
    """

    def __init__(self, phi_fn, grad_fn, hess_fn, dimension, kappa_max, diameter,
                 interior_point=None, kappa_min=None, spot_check: int = 32):
        self._phi = phi_fn
        self._grad = grad_fn
        self._hess = hess_fn
        self.dimension = int(dimension)
        self.kappa_max = float(kappa_max)
        self.kappa_min = None if kappa_min is None else float(kappa_min)
        self.diameter = float(diameter)
        if interior_point is None:
            interior_point = np.zeros(self.dimension)
        self._interior = np.asarray(interior_point, dtype=float)
        if self._phi(self._interior) >= 0.0:
            raise ValueError("interior_point is not strictly inside the obstacle")
        if spot_check:
            self._spot_check_convexity(spot_check)

    def _spot_check_convexity(self, n_samples: int):
        rng = np.random.RandomState(20240817)
        for k in range(n_samples):
            d = rng.standard_normal(self.dimension)
            d /= np.linalg.norm(d)
            y = self.boundary_point_along(d)
            g = self._grad(y)
            gnorm = float(np.linalg.norm(g))
            if gnorm < _GRAD_EPS:
                raise ValueError(f"gradient vanishes on the boundary near {y}")
            nu = g / gnorm
            h = np.asarray(self._hess(y), dtype=float)
            proj = np.eye(self.dimension) - np.outer(nu, nu)
            tangential = proj @ h @ proj
            min_eig = float(np.linalg.eigvalsh(tangential)[0])
            if min_eig < -1e-8 * max(1.0, float(np.abs(h).max())):
                raise ValueError(
                    f"tangential Hessian has negative eigenvalue {min_eig:g} at "
                    f"boundary sample {y}; obstacle is not convex"
                )

    def phi(self, x) -> float:
        return float(self._phi(np.asarray(x, dtype=float)))

    def grad_phi(self, x) -> np.ndarray:
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)

    def hess_phi(self, x) -> np.ndarray:
        return np.asarray(self._hess(np.asarray(x, dtype=float)), dtype=float)

    def reference_interior_point(self) -> np.ndarray:
        return self._interior.copy()

    def project_many(self, points, max_iters: int = 100, tol: float = 1e-12) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.array([self._project_one(p, max_iters, tol) for p in pts])

    def _project_one(self, x, max_iters: int, tol: float) -> np.ndarray:
        """Damped Newton on the KKT system y = x - lam grad(y), phi(y) = 0."""
        delta = x - self._interior
        if np.linalg.norm(delta) < _GRAD_EPS * self.diameter:
            raise DegenerateGradient("projection undefined at the interior reference point")
        y = self.boundary_point_along(delta)
        g = self.grad_phi(y)
        lam = float((x - y) @ g) / float(g @ g)
        n = self.dimension

        def residual(y_, lam_):
            g_ = self.grad_phi(y_)
            return np.concatenate([y_ - x + lam_ * g_, [self.phi(y_)]]), g_

        res, g = residual(y, lam)
        for _ in range(max_iters):
            norm = float(np.linalg.norm(res))
            if norm <= tol:
                return y
            jac = np.zeros((n + 1, n + 1))
            jac[:n, :n] = np.eye(n) + lam * self.hess_phi(y)
            jac[:n, n] = g
            jac[n, :n] = g
            try:
                step = np.linalg.solve(jac, -res)
            except np.linalg.LinAlgError:
                raise NonConvergence("singular KKT Jacobian in projection")
            scale = 1.0
            for _ in range(30):
                y_new = y + scale * step[:n]
                lam_new = lam + scale * step[n]
                res_new, g_new = residual(y_new, lam_new)
                if float(np.linalg.norm(res_new)) < norm:
                    y, lam, res, g = y_new, lam_new, res_new, g_new
                    break
                scale *= 0.5
            else:
                raise NonConvergence("projection line search stalled")
        raise NonConvergence("implicit projection did not converge")


def obstacle_from_config(spec: dict) -> ConvexObstacle:
    """Build a Sphere or Ellipsoid from a config dictionary."""
    if not isinstance(spec, dict):
        raise ConfigError("obstacle must be an object")
    kind = spec.get("kind")
    if kind == "sphere":
        allowed = {"kind", "center", "radius"}
        unknown = set(spec) - allowed
        if unknown:
            raise ConfigError(f"unknown obstacle field: {sorted(unknown)[0]}")
        if "center" not in spec or "radius" not in spec:
            raise ConfigError("sphere needs center and radius")
        return Sphere(np.asarray(spec["center"], dtype=float), float(spec["radius"]))
    if kind == "ellipsoid":
        allowed = {"kind", "center", "semi_axes"}
        unknown = set(spec) - allowed
        if unknown:
            raise ConfigError(f"unknown obstacle field: {sorted(unknown)[0]}")
        if "center" not in spec or "semi_axes" not in spec:
            raise ConfigError("ellipsoid needs center and semi_axes")
        return Ellipsoid(
            np.asarray(spec["center"], dtype=float),
            np.asarray(spec["semi_axes"], dtype=float),
        )
    raise ConfigError(f"unknown obstacle kind: {kind!r}")
