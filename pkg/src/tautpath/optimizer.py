"""Projected gradient descent for discrete obstacle-avoiding curves.

The discrete energy N * sum |u_{i+1} - u_i|^2 is minimized over curves with
fixed endpoints whose nodes stay outside the obstacle. Infeasible nodes are
projected back to the boundary after every step. Multi-start initialization
bends trial curves around the obstacle in planes through the endpoint axis,
since minimizers on opposite sides are separated by an energy barrier.

Convergence is declared on the KKT residual: at boundary nodes the energy
gradient may point outward (the obstacle pushes back); everywhere else it
must vanish. The reported statistic is the max per-node norm of the reduced
second difference, i.e. the gradient divided by 2N. At an exact discrete
stationary point it is zero up to roundoff.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .curve import DiscreteCurve, straight_line
from .errors import InfeasibleEndpoints
from .geometry import index_runs, orthonormal_complement, unit
from .obstacle import ConvexObstacle, Region

log = logging.getLogger("tautpath")

_TAU_MAX = 0.245          # step in second-difference units; 0.25 is the momentum stability edge
_TAU_MIN = 1e-12
_REPARAM_PERIOD = 500
_REPARAM_GUARD = 0.005    # skip in-loop reparameterization below 0.5% speed spread
_POSTPROCESS_ROUNDS = 3
_CENTER_EPS = 1e-12       # relative node-at-center detection
_CENTER_NUDGE = 1e-9      # relative perturbation applied before projecting


@dataclass
class FixedStep:
    """Constant step on the raw energy gradient: u <- P(u - eta * grad E).

    The gradient scales with n_segments; eta must stay below
    1 / (4 * n_segments) for stability.
    """

    eta: float


@dataclass
class BacktrackingArmijo:
    """Backtracking line search with the sufficient-decrease constant c."""

    c: float = 1e-4
    shrink: float = 0.5


@dataclass
class SolveConfig:
    n_segments: int = 512
    max_iters: int = 200000
    step_rule: FixedStep | BacktrackingArmijo = field(default_factory=BacktrackingArmijo)
    grad_tol: float = 1e-10
    n_starts: int = 8
    seed: int = 0
    record_every: int = 0  # record (iteration, energy) every k iterations

    def __post_init__(self):
        if self.n_segments < 2:
            raise ValueError("n_segments must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.record_every < 0:
            raise ValueError("record_every must be >= 0")


@dataclass
class SolveResult:
    """One start's outcome. energy/length describe the final postprocessed
    curve (constant-speed, feasible); energy_raw is the pre-postprocessing
    value; grad_stat is the convergence statistic at termination."""

    curve: DiscreteCurve
    energy: float
    length: float
    iterations: int
    converged: bool
    start_index: int
    energy_raw: float
    grad_stat: float
    trace: list | None = None


def _second_diff(nodes: np.ndarray) -> np.ndarray:
    return nodes[:-2] - 2.0 * nodes[1:-1] + nodes[2:]


def _energy(nodes: np.ndarray) -> float:
    d = np.diff(nodes, axis=0)
    return (len(nodes) - 1) * float(np.einsum("ij,ij->", d, d))


def _energy_decrease(old: np.ndarray, new: np.ndarray) -> float:
    """E(old) - E(new) in difference form, immune to the cancellation that
    makes direct subtraction of two nearly equal energies useless near the
    minimum."""
    d_old = np.diff(old, axis=0)
    d_new = np.diff(new, axis=0)
    return (len(old) - 1) * float(np.einsum("ij,ij->", d_old - d_new, d_old + d_new))


def _nudge_singular(points: np.ndarray, obstacle: ConvexObstacle) -> np.ndarray:
    """Perturb nodes sitting at the projection-singular reference point."""
    ref = obstacle.reference_interior_point()
    bad = np.linalg.norm(points - ref, axis=1) < _CENTER_EPS * obstacle.diameter
    if np.any(bad):
        points = points.copy()
        points[bad, -1] += _CENTER_NUDGE * obstacle.diameter
    return points


def _project_infeasible(nodes: np.ndarray, obstacle: ConvexObstacle) -> np.ndarray:
    """Replace every node with phi < 0 by its boundary projection."""
    phi = obstacle.phi_many(nodes)
    mask = phi < 0.0
    if not np.any(mask):
        return nodes
    out = nodes.copy()
    out[mask] = obstacle.project_many(_nudge_singular(nodes[mask], obstacle))
    return out


def project_curve_feasible(curve: DiscreteCurve, obstacle: ConvexObstacle) -> DiscreteCurve:
    """Project every interior-of-obstacle node onto the boundary.

    Nodes at the projection-singular reference point are nudged by
    1e-9 * diameter along the last coordinate axis first.
    """
    return DiscreteCurve(_project_infeasible(curve.nodes, obstacle))


def _kkt_stat(nodes: np.ndarray, obstacle: ConvexObstacle, band: float) -> float:
    """Max per-node norm of the KKT-reduced second difference."""
    d2 = _second_diff(nodes)
    if d2.size == 0:
        return 0.0
    phi = obstacle.phi_many(nodes[1:-1])
    contact = phi <= band
    if np.any(contact):
        nu = obstacle.normal_many(nodes[1:-1][contact])
        comp = np.einsum("ij,ij->i", d2[contact], nu)
        allowed = np.minimum(comp, 0.0)  # inward-pointing d2 is the obstacle's push-back
        d2 = d2.copy()
        d2[contact] -= allowed[:, None] * nu
    return float(np.linalg.norm(d2, axis=1).max())


def initial_curves(p, q, obstacle: ConvexObstacle, n_starts: int,
                   n_segments: int, seed: int = 0) -> list[DiscreteCurve]:
    """Feasible multi-start curves: the projected chord plus bent detours.

    Start 0 projects the straight chord onto feasibility. Starts k >= 1 bow
    the chord sideways with a sin(pi t) bump of amplitude 1.5 * circumradius
    in directions at uniform angles around the p-q axis (the first one
    opposite the degenerate-node nudge direction), then project. The
    construction is deterministic; seed is accepted for reproducibility
    bookkeeping.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if obstacle.contains(p) is not Region.EXTERIOR or obstacle.contains(q) is not Region.EXTERIOR:
        raise InfeasibleEndpoints("both endpoints must be strictly exterior")
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")

    base = straight_line(p, q, n_segments)
    starts = [project_curve_feasible(base, obstacle)]
    if n_starts == 1:
        return starts

    delta = q - p
    if float(np.linalg.norm(delta)) < 1e-14 * max(1.0, obstacle.diameter):
        # Coincident endpoints leave the detour plane free; any fixed axis
        # works, and descent collapses the loops back to the point.
        axis = np.zeros(p.size)
        axis[0] = 1.0
    else:
        axis = unit(delta)
    comp = orthonormal_complement(axis)
    amp = 1.5 * obstacle.circumradius()
    bump = np.sin(np.pi * np.linspace(0.0, 1.0, n_segments + 1))[:, None]
    bump[0] = bump[-1] = 0.0  # sin(pi) roundoff must not move the endpoints
    n_detours = n_starts - 1
    for k in range(n_detours):
        if p.size == 2:
            w = -comp[0] if k % 2 == 0 else comp[0]
        else:
            ang = np.pi + 2.0 * np.pi * k / n_detours
            w = np.cos(ang) * comp[0] + np.sin(ang) * comp[1]
        bent = DiscreteCurve(base.nodes + amp * bump * w)
        starts.append(project_curve_feasible(bent, obstacle))
    return starts


def _minimize_one(nodes: np.ndarray, obstacle: ConvexObstacle, cfg: SolveConfig):
    """Run the projected descent from one start; returns raw nodes and stats."""
    u = nodes.copy()
    band = obstacle.boundary_tol
    armijo = isinstance(cfg.step_rule, BacktrackingArmijo)
    n = len(u) - 1
    if armijo:
        tau = _TAU_MAX
        c_suff = cfg.step_rule.c
        shrink = cfg.step_rule.shrink
    else:
        tau = 2.0 * n * cfg.step_rule.eta

    u_prev = u
    t_mom = 1.0
    trace = [] if cfg.record_every else None
    stat = _kkt_stat(u, obstacle, band)
    iterations = 0
    checkpoint_energy = _energy(u)

    def proj_step(base: np.ndarray, step_tau: float) -> np.ndarray:
        cand = base.copy()
        cand[1:-1] = base[1:-1] + step_tau * _second_diff(base)
        return _project_infeasible(cand, obstacle)

    while iterations < cfg.max_iters and stat > cfg.grad_tol:
        iterations += 1
        moved = False
        if armijo:
            if t_mom > 1.0:
                t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
                beta = (t_mom - 1.0) / t_next
                y = u + beta * (u - u_prev)
                cand = proj_step(y, tau)
                if _energy_decrease(u, cand) >= 0.0:
                    u_prev, u, t_mom = u, cand, t_next
                    moved = True
                else:
                    t_mom = 1.0
            if not moved:
                while True:
                    cand = proj_step(u, tau)
                    decrease = _energy_decrease(u, cand)
                    delta = cand - u
                    needed = (2.0 * n * c_suff / tau) * float(np.einsum("ij,ij->", delta, delta))
                    if decrease >= needed:
                        u_prev, u = u, cand
                        t_mom = 2.0  # re-arm momentum next iteration
                        tau = min(tau / shrink, _TAU_MAX)
                        break
                    tau *= shrink
                    if tau < _TAU_MIN:
                        log.debug("line search stalled at iteration %d", iterations)
                        stat = _kkt_stat(u, obstacle, band)
                        if trace is not None:
                            trace.append((iterations, _energy(u)))
                        return u, iterations, stat, trace
        else:
            u_prev, u = u, proj_step(u, tau)

        if armijo and iterations % 100 == 0:
            current = _energy(u)
            assert current <= checkpoint_energy * (1.0 + 1e-12), \
                "energy increased under Armijo descent"
            checkpoint_energy = current

        if iterations % _REPARAM_PERIOD == 0:
            curve = DiscreteCurve(u)
            if curve.speed_variation() > _REPARAM_GUARD:
                redistributed = _project_infeasible(
                    curve.reparameterize_constant_speed().nodes, obstacle)
                if _energy_decrease(u, redistributed) >= 0.0:
                    u = u_prev = redistributed
                    t_mom = 1.0

        stat = _kkt_stat(u, obstacle, band)
        if trace is not None and iterations % cfg.record_every == 0:
            trace.append((iterations, _energy(u)))

    return u, iterations, stat, trace


def _postprocess(raw: np.ndarray, obstacle: ConvexObstacle) -> np.ndarray:
    """Equalize node spacing piecewise and restore exact feasibility.

    Resampling runs separately on each free part and each boundary-contact
    run, with the junction nodes pinned: a global resampling would slide the
    free-to-contact vertex off its node and leave a spurious kink at the
    neighbor. Projection then returns any resampled contact node to the
    boundary; two rounds settle the interleaving.
    """
    diameter = obstacle.diameter
    nodes = raw
    for _ in range(_POSTPROCESS_ROUNDS):
        projected = obstacle.project_many(nodes)
        close = np.linalg.norm(nodes - projected, axis=1) <= 1e-6 * diameter
        edges = {0, len(nodes) - 1}
        for a, b in index_runs(close):
            edges.update((a, b))
        cuts = sorted(edges)
        pieces = [nodes[cuts[k]:cuts[k + 1] + 1] for k in range(len(cuts) - 1)]
        resampled = []
        for piece in pieces:
            chords = np.linalg.norm(np.diff(piece, axis=0), axis=1)
            if len(piece) > 2 and chords.sum() > 1e-14:
                piece = DiscreteCurve(piece).reparameterize_constant_speed().nodes
            resampled.append(piece)
        nodes = np.vstack([resampled[0]] + [part[1:] for part in resampled[1:]])
        nodes = _project_infeasible(nodes, obstacle)
    return nodes


def solve(p, q, obstacle: ConvexObstacle, config: SolveConfig | None = None) -> list[SolveResult]:
    """Minimize from every start; results sorted by energy, ties by start index.

    Each returned curve is postprocessed to constant speed and feasibility
    (piecewise resampling between contact junctions, then projection); the
    converged flag reflects the KKT statistic of the raw iterate against
    grad_tol.
    """
    cfg = config or SolveConfig()
    starts = initial_curves(p, q, obstacle, cfg.n_starts, cfg.n_segments, cfg.seed)
    results = []
    for index, start in enumerate(starts):
        raw, iterations, stat, trace = _minimize_one(start.nodes, obstacle, cfg)
        energy_raw = _energy(raw)
        curve = DiscreteCurve(_postprocess(raw, obstacle))
        results.append(SolveResult(
            curve=curve,
            energy=curve.energy(),
            length=curve.length(),
            iterations=iterations,
            converged=bool(stat <= cfg.grad_tol),
            start_index=index,
            energy_raw=energy_raw,
            grad_stat=stat,
            trace=trace,
        ))
        log.info("start %d: E=%.9g stat=%.3g iters=%d converged=%s",
                 index, results[-1].energy, stat, iterations, results[-1].converged)
    results.sort(key=lambda r: (r.energy, r.start_index))
    return results
