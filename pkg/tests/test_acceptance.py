"""End-to-end acceptance checks for the whole pipeline.

Each test prints one scoreboard line through the capture-disabled stream, so
a full run shows ten PASS/FAIL lines regardless of pytest's capture mode.
The workloads are shared through module-scoped fixtures: the canonical
wrap-around instance, a 50-pair random family with known closed forms, a
20-pair family whose chords miss the obstacle, an 8-start three-dimensional
instance, and a full planar grid scan.

Known red: the junction tangency gate in check 04. The tangency error of a
polygonal minimizer scales with the node spacing times the surface curvature
and sits near 3.7e-3 at 512 segments on the canonical instance, up to 6e-3
over the random family. The closed-form curve sampled at the same mesh shows
the same residual, so the gap is a property of the mesh, not of the
optimizer. The assert is kept at the stated gate and fails honestly.
"""

import math
import time

import numpy as np
import pytest

from tautpath import (DiscreteCurve, Ellipsoid, Label, Multiplicity,
                      SolveConfig, Sphere, cluster_minimizers,
                      el_residual_profile, estimate_dimension, initial_curves,
                      scan, solve, solve_sphere, sphere_solution_to_curve,
                      verify_structure)
from tautpath.geometry import point_segment_distance

CANONICAL_P = np.array([-2.0, 0.0])
CANONICAL_Q = np.array([2.0, 0.0])
CANONICAL_ENERGY = (2.0 * math.sqrt(3.0) + math.pi / 3.0) ** 2

ELLIPSOID_PAIRS = [
    ([-3.5, 0.2, 0.1], [3.2, -0.3, 0.2]),
    ([0.3, -2.5, 0.4], [-0.2, 2.6, -0.3]),
    ([-2.8, 0.8, -0.5], [3.0, 0.5, 0.6]),
]


def _emit(capsys, text):
    with capsys.disabled():
        print(text, flush=True)


def _status(ok):
    return "PASS" if ok else "FAIL"


def _best_energy(results):
    converged = [r.energy for r in results if r.converged]
    assert converged, "no start converged"
    return min(converged)


def _unit_vector(rng, dim):
    vec = rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def _sample_wrap_pairs(rng, count):
    """Endpoint pairs whose chord crosses the unit disk away from the center.

    Radii stay in [1.3, 3.5], the chord passes the center at distance 0.05
    to 0.92, and the closed form must wrap an arc of at least 0.2 radians so
    the contact run holds several nodes at the meshes used here.
    """
    pairs = []
    while len(pairs) < count:
        angles = rng.uniform(0.0, 2.0 * np.pi, size=2)
        radii = rng.uniform(1.3, 3.5, size=2)
        p = radii[0] * np.array([np.cos(angles[0]), np.sin(angles[0])])
        q = radii[1] * np.array([np.cos(angles[1]), np.sin(angles[1])])
        gap = point_segment_distance(np.zeros(2), p, q)
        if not 0.05 <= gap <= 0.92:
            continue
        solution = solve_sphere(np.zeros(2), 1.0, p, q)
        if solution.arc_angle < 0.2:
            continue
        pairs.append((p, q, solution))
    return pairs


def _sample_segment_pairs(rng, count):
    """Endpoint pairs whose straight chord clears the unit disk by a margin."""
    pairs = []
    while len(pairs) < count:
        angles = rng.uniform(0.0, 2.0 * np.pi, size=2)
        radii = rng.uniform(1.3, 3.5, size=2)
        p = radii[0] * np.array([np.cos(angles[0]), np.sin(angles[0])])
        q = radii[1] * np.array([np.cos(angles[1]), np.sin(angles[1])])
        if point_segment_distance(np.zeros(2), p, q) < 1.05:
            continue
        pairs.append((p, q))
    return pairs


@pytest.fixture(scope="module")
def circle():
    return Sphere(np.zeros(2), 1.0)


@pytest.fixture(scope="module")
def canonical(circle):
    cfg = SolveConfig(n_segments=512, n_starts=3, seed=0)
    start = time.perf_counter()
    results = solve(CANONICAL_P, CANONICAL_Q, circle, cfg)
    seconds = time.perf_counter() - start
    return {"results": results, "seconds": seconds}


@pytest.fixture(scope="module")
def wrap_solves(circle):
    rng = np.random.default_rng(20260818)
    pairs = _sample_wrap_pairs(rng, 50)
    cfg = SolveConfig(n_segments=512, n_starts=3, seed=0)
    start = time.perf_counter()
    solved = [(p, q, sol, solve(p, q, circle, cfg)) for p, q, sol in pairs]
    seconds = time.perf_counter() - start
    return {"solved": solved, "seconds": seconds}


@pytest.fixture(scope="module")
def wrap_reports(circle, canonical, wrap_solves):
    """Structure report for every converged start of the wrap workloads."""
    items = [(CANONICAL_P, CANONICAL_Q, canonical["results"])]
    items += [(p, q, results) for p, q, _, results in wrap_solves["solved"]]
    reports = []
    for p, q, results in items:
        for r in results:
            if r.converged:
                reports.append((r.curve.n_segments,
                                verify_structure(r.curve, circle, p, q)))
    return reports


@pytest.fixture(scope="module")
def segment_solves(circle):
    # The looser stopping tolerance keeps coarse meshes clear of the float
    # floor of the line search; the straight minimizer itself reaches an
    # exactly zero statistic.
    rng = np.random.default_rng(20260819)
    pairs = _sample_segment_pairs(rng, 20)
    cfg = SolveConfig(n_segments=256, n_starts=2, grad_tol=1e-9, seed=0)
    return [(p, q, solve(p, q, circle, cfg)) for p, q in pairs]


@pytest.fixture(scope="module")
def ellipsoid_solves():
    obs = Ellipsoid(np.zeros(3), [2.0, 1.0, 1.0])
    cfg = SolveConfig(n_segments=256, n_starts=3, grad_tol=1e-9, seed=0)
    return [(obs, np.asarray(p), np.asarray(q), solve(p, q, obs, cfg))
            for p, q in ELLIPSOID_PAIRS]


@pytest.fixture(scope="module")
def multiplicity_3d():
    obs = Sphere(np.zeros(3), 1.0)
    cfg = SolveConfig(n_segments=256, n_starts=8, grad_tol=1e-9, seed=0)
    results = solve([-2.0, 0.0, 0.0], [3.0, 0.0, 0.0], obs, cfg)
    return {"obstacle": obs, "results": results}


@pytest.fixture(scope="module")
def axis_scan(circle):
    cfg = SolveConfig(n_segments=128, n_starts=3, grad_tol=1e-8, seed=0)
    start = time.perf_counter()
    scan_map = scan([-2.0, 0.0], circle, [[-4.0, 4.0], [-4.0, 4.0]], 0.1,
                    cfg, jobs=8)
    seconds = time.perf_counter() - start
    return {"map": scan_map, "seconds": seconds}


def test_criterion_01_canonical_energy(canonical, capsys):
    best = _best_energy(canonical["results"])
    rel = abs(best - CANONICAL_ENERGY) / CANONICAL_ENERGY
    seconds = canonical["seconds"]
    ok = rel <= 1e-4 and seconds < 30.0
    _emit(capsys, "[criterion 01] %s canonical energy %.7f vs %.7f "
          "(rel %.2e) in %.1f s (limit 30 s)"
          % (_status(ok), best, CANONICAL_ENERGY, rel, seconds))
    assert rel <= 1e-4
    assert seconds < 30.0


def test_criterion_02_closed_form_agreement(wrap_solves, capsys):
    worst = 0.0
    for p, q, solution, results in wrap_solves["solved"]:
        best = _best_energy(results)
        worst = max(worst, abs(best - solution.energy) / solution.energy)
    seconds = wrap_solves["seconds"]
    ok = worst <= 5e-4 and seconds < 600.0
    _emit(capsys, "[criterion 02] %s 50 wrap pairs vs closed form, worst "
          "rel %.2e (gate 5e-4), %.0f s total (limit 600 s)"
          % (_status(ok), worst, seconds))
    assert worst <= 5e-4
    assert seconds < 600.0


def test_criterion_03_segment_chords(circle, segment_solves, capsys):
    worst = 0.0
    total_runs = 0
    for p, q, results in segment_solves:
        target = float(np.sum((q - p) ** 2))
        best = _best_energy(results)
        worst = max(worst, abs(best - target) / target)
        top = min((r for r in results if r.converged), key=lambda r: r.energy)
        report = verify_structure(top.curve, circle, p, q)
        total_runs += len(report.coincidence_runs)
    ok = worst <= 1e-8 and total_runs == 0
    _emit(capsys, "[criterion 03] %s 20 clear chords, worst energy rel %.2e "
          "(gate 1e-8), %d contact runs (want 0)"
          % (_status(ok), worst, total_runs))
    assert worst <= 1e-8
    assert total_runs == 0


def test_criterion_04_contact_structure(wrap_reports, capsys):
    run_counts = {len(rep.coincidence_runs) for _, rep in wrap_reports}
    shortest_run = min(b - a + 1 for _, rep in wrap_reports
                       for a, b in rep.coincidence_runs)
    straightness = max(rep.straightness_residual for _, rep in wrap_reports)
    geodesic = max(rep.geodesic_residual for _, rep in wrap_reports)
    tangency = max(max(rep.tangency_residual_p, rep.tangency_residual_q)
                   for _, rep in wrap_reports)
    junction_ok = all(rep.junction_angle <= 4.0 * np.pi / n * (1.0 + 1e-9)
                      for n, rep in wrap_reports)
    ok = (run_counts == {1} and shortest_run >= 2 and straightness <= 1e-6
          and geodesic <= 5e-3 and junction_ok and tangency <= 1e-4)
    _emit(capsys, "[criterion 04] %s %d converged wraps: runs %s, shortest "
          "run %d nodes, straightness %.1e (gate 1e-6), geodesic %.1e "
          "(gate 5e-3), junction within 4pi/N %s, tangency %.1e (gate 1e-4, "
          "mesh-limited at 512 segments)"
          % (_status(ok), len(wrap_reports), sorted(run_counts), shortest_run,
             straightness, geodesic, junction_ok, tangency))
    assert run_counts == {1}
    assert shortest_run >= 2
    assert straightness <= 1e-6
    assert geodesic <= 5e-3
    assert junction_ok
    # Known red: node spacing times curvature keeps this near 3.7e-3 at 512
    # segments, and the sampled closed form shows the same value, so the
    # residual is a mesh property. The gate is asserted unchanged.
    assert tangency <= 1e-4


def test_criterion_05_curvature_bound(wrap_reports, ellipsoid_solves, capsys):
    worst = max(rep.curvature_ratio for _, rep in wrap_reports)
    admitted = 0
    # For the three-dimensional instances the ratio is read off the cluster
    # representatives: the energy filter drops stalled or trapped starts
    # that never became minimizers.
    for obs, p, q, results in ellipsoid_solves:
        clusters = cluster_minimizers(results, 0.02 * obs.diameter)
        admitted += len(clusters)
        for cluster in clusters:
            report = verify_structure(cluster.representative, obs, p, q)
            worst = max(worst, report.curvature_ratio)
    ok = worst <= 1.05
    _emit(capsys, "[criterion 05] %s curvature ratio at most %.4f (gate "
          "1.05) over %d disk wraps and %d ellipsoid minimizers"
          % (_status(ok), worst, len(wrap_reports), admitted))
    assert worst <= 1.05


def _admitted(results):
    """Converged results whose energy ties the best, as clustering admits.

    A converged start can also end on a non-minimizing stationary curve, for
    instance pinned to the chord axis with one segment jumping straight
    across the ball. No feasible constant-speed resampling exists for that
    shape, so the energy-length identity only binds the candidates the
    pipeline actually reports.
    """
    best = min(r.energy for r in results if r.converged)
    return [r for r in results
            if r.converged and r.energy <= best * (1.0 + 1e-5)]


def test_criterion_06_energy_length_identity(circle, canonical, wrap_solves,
                                             segment_solves, multiplicity_3d,
                                             capsys):
    results = _admitted(canonical["results"])
    for _, _, _, batch in wrap_solves["solved"]:
        results.extend(_admitted(batch))
    for _, _, batch in segment_solves:
        results.extend(_admitted(batch))
    results.extend(_admitted(multiplicity_3d["results"]))
    gaps = [(r.energy - r.length ** 2) / r.energy for r in results]
    worst_after = max(gaps)
    lower = min(gaps)
    starts = initial_curves(CANONICAL_P, CANONICAL_Q, circle, 3, 512, seed=0)
    worst_before = max((c.length() ** 2 - c.energy()) / c.energy()
                       for c in starts)
    ok = worst_after <= 1e-8 and lower >= -1e-12 and worst_before <= 1e-12
    _emit(capsys, "[criterion 06] %s energy minus squared length over %d "
          "admitted solves: at most %.1e of E after resampling (gate 1e-8, "
          "floor %.1e), start curves keep L^2 <= E within %.1e"
          % (_status(ok), len(results), worst_after, lower, worst_before))
    assert worst_after <= 1e-8
    assert lower >= -1e-12
    assert worst_before <= 1e-12


def test_criterion_07_multiplicity_3d(multiplicity_3d, capsys):
    obs = multiplicity_3d["obstacle"]
    clusters = cluster_minimizers(multiplicity_3d["results"],
                                  0.02 * obs.diameter)
    energies = [c.energy for c in clusters]
    spread = (max(energies) - min(energies)) / min(energies)
    solution = solve_sphere(np.zeros(3), 1.0, [-2.0, 0.0, 0.0],
                            [3.0, 0.0, 0.0])
    rel = abs(min(energies) - solution.energy) / solution.energy
    ok = len(clusters) >= 2 and spread <= 1e-5 and rel <= 1e-3
    _emit(capsys, "[criterion 07] %s 8 starts around the ball: %d tied "
          "clusters (want >= 2), energy spread %.1e (gate 1e-5), best "
          "%.4f vs %.4f closed form (rel %.1e, gate 1e-3)"
          % (_status(ok), len(clusters), spread, min(energies),
             solution.energy, rel))
    assert len(clusters) >= 2
    assert spread <= 1e-5
    assert rel <= 1e-3


def test_criterion_08_nonuniqueness_scan(axis_scan, capsys):
    scan_map = axis_scan["map"]
    seconds = axis_scan["seconds"]
    delta = scan_map.delta
    labels = scan_map.labels
    xs, ys = scan_map.axes
    shape = labels.shape

    non_unique = np.argwhere(labels == Label.NON_UNIQUE.value)
    on_ray = all(abs(ys[j]) <= delta + 1e-9 and xs[i] >= 1.0 - delta - 1e-9
                 for i, j in non_unique)

    has_unique_neighbor = True
    has_no_interior = True
    for i, j in non_unique:
        neighbors = [labels[a, b]
                     for a in range(max(i - 1, 0), min(i + 2, shape[0]))
                     for b in range(max(j - 1, 0), min(j + 2, shape[1]))
                     if (a, b) != (i, j)]
        if Label.UNIQUE.value not in neighbors:
            has_unique_neighbor = False
        if all(lab == Label.NON_UNIQUE.value for lab in neighbors):
            has_no_interior = False

    dimension = estimate_dimension(scan_map)

    agree = 0
    total = 0
    for i in range(shape[0]):
        for j in range(shape[1]):
            if labels[i, j] == Label.INFEASIBLE.value:
                continue
            solution = solve_sphere(np.zeros(2), 1.0, [-2.0, 0.0],
                                    [xs[i], ys[j]])
            family = solution.multiplicity is Multiplicity.ROTATIONAL_FAMILY
            expected = Label.NON_UNIQUE.value if family else Label.UNIQUE.value
            total += 1
            agree += int(labels[i, j] == expected)
    agreement = agree / total

    ok = (len(non_unique) >= 10 and on_ray and has_unique_neighbor
          and has_no_interior and 0.8 <= dimension <= 1.2
          and agreement >= 0.98 and seconds < 1800.0)
    _emit(capsys, "[criterion 08] %s scan of %d points in %.0f s (limit "
          "1800 s): %d NonUnique, all on the shadow ray %s, Unique "
          "8-neighbor %s, no interior %s, box dimension %.2f (want 0.8 to "
          "1.2), classifier agreement %.4f (gate 0.98)"
          % (_status(ok), total, seconds, len(non_unique), on_ray,
             has_unique_neighbor, has_no_interior, dimension, agreement))
    assert len(non_unique) >= 10
    assert on_ray
    assert has_unique_neighbor
    assert has_no_interior
    assert 0.8 <= dimension <= 1.2
    assert agreement >= 0.98
    assert seconds < 1800.0


def test_criterion_09_projection_decreases_energy(capsys):
    rng = np.random.default_rng(20260820)
    bodies = [Sphere(np.zeros(2), 1.0), Sphere(np.zeros(3), 1.0),
              Ellipsoid(np.zeros(3), [2.0, 1.0, 1.0])]
    decreased = 0
    for trial in range(100):
        obs = bodies[trial % len(bodies)]
        dim = obs.center.size
        a_dir = _unit_vector(rng, dim)
        while True:
            b_dir = _unit_vector(rng, dim)
            angle = float(np.arccos(np.clip(a_dir @ b_dir, -1.0, 1.0)))
            if 0.4 <= angle <= 2.7:
                break
        a = obs.project_to_boundary(2.0 * obs.circumradius() * a_dir)
        b = obs.project_to_boundary(2.0 * obs.circumradius() * b_dir)
        t = np.linspace(0.0, 1.0, 33)[1:-1]
        base = obs.project_many((1.0 - t)[:, None] * a + t[:, None] * b)
        bumps = (0.05 + 0.45 * rng.random(t.size)) * np.sin(np.pi * t)
        middle = base + bumps[:, None] * obs.normal_many(base)
        excursion = DiscreteCurve(np.vstack([a, middle, b]))

        nodes = excursion.nodes.copy()
        outside = obs.phi_many(nodes) > 0.0
        nodes[outside] = obs.project_many(nodes[outside])
        projected = DiscreteCurve(nodes)
        if projected.energy() < excursion.energy():
            decreased += 1
    ok = decreased == 100
    _emit(capsys, "[criterion 09] %s projecting boundary-anchored outward "
          "excursions onto the body cut the energy in %d of 100 trials"
          % (_status(ok), decreased))
    assert decreased == 100


def test_criterion_10_residual_order(circle, capsys):
    solution = solve_sphere(np.zeros(2), 1.0, CANONICAL_P, CANONICAL_Q)
    sizes = np.array([128, 256, 512], dtype=float)
    peaks = []
    for n in sizes:
        curve = sphere_solution_to_curve(solution, int(n))
        profile = el_residual_profile(curve, circle)
        keep = ~np.isin(profile.node_indices, profile.junction_indices)
        peaks.append(float(profile.residuals[keep].max()))
    order = -float(np.polyfit(np.log(sizes), np.log(peaks), 1)[0])
    ok = order >= 1.8
    _emit(capsys, "[criterion 10] %s stationarity residual drops at order "
          "%.2f across 128, 256, 512 segments (want >= 1.8)"
          % (_status(ok), order))
    assert order >= 1.8
