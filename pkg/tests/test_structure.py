"""Tests for the structural checks applied to candidate minimizers.

The clean inputs come from the closed-form sphere solutions, so every
residual has a known expected size. The corrupted inputs are hand-damaged
copies of those curves, built so that exactly the targeted check fires.
"""

import json
import math

import numpy as np
import pytest

from tautpath import (
    DiscreteCurve,
    NotConstantSpeed,
    Sphere,
    StructureTolerances,
    chord_clears_obstacle,
    el_residual_profile,
    extract_coincidence,
    solve_sphere,
    sphere_solution_to_curve,
    verify_structure,
)


def _canonical_curve(n_segments=512, dim=2):
    p = np.zeros(dim)
    q = np.zeros(dim)
    p[0], q[0] = -2.0, 2.0
    solution = solve_sphere(np.zeros(dim), 1.0, p, q)
    return sphere_solution_to_curve(solution, n_segments), p, q


def _straight_curve(p, q, n_segments):
    t = np.linspace(0.0, 1.0, n_segments + 1)[:, None]
    return DiscreteCurve((1.0 - t) * np.asarray(p, float) + t * np.asarray(q, float))


class TestExtractCoincidence:
    def test_clear_chord_has_zero_runs(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve = _straight_curve([1.5, 1.5], [3.0, 1.5], 64)
        assert extract_coincidence(curve, obs) == []

    def test_canonical_wrap_has_single_run_between_tangent_points(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        solution = solve_sphere(np.zeros(2), 1.0, p, q)
        runs = extract_coincidence(curve, obs)
        assert len(runs) == 1
        a, b = runs[0]
        assert b - a + 1 >= 2
        step = curve.length() / curve.n_segments
        assert np.linalg.norm(curve.nodes[a] - solution.tangent_point_p) <= step
        assert np.linalg.norm(curve.nodes[b] - solution.tangent_point_q) <= step
        dist_outside = np.abs(np.linalg.norm(curve.nodes[[a - 1, b + 1]], axis=1) - 1.0)
        assert np.all(dist_outside > 1e-5)

    def test_two_patch_curve_yields_two_runs(self):
        obs = Sphere(np.zeros(2), 1.0)
        angles = np.linspace(0.0, math.pi, 11)
        radii = np.array([1.5, 1.5, 1.0, 1.0, 1.5, 1.5, 1.5, 1.0, 1.0, 1.0, 1.5])
        nodes = radii[:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        curve = DiscreteCurve(nodes)
        assert extract_coincidence(curve, obs) == [(2, 3), (7, 9)]

    def test_contact_band_is_configurable(self):
        obs = Sphere(np.zeros(2), 1.0)
        nodes = np.array([[1.5, -0.5], [1.0001, 0.0], [1.5, 0.5]])
        curve = DiscreteCurve(nodes)
        assert extract_coincidence(curve, obs) == []
        wide = extract_coincidence(curve, obs, contact_tol=1e-3)
        assert wide == [(1, 1)]


class TestChordClearsObstacle:
    def test_offset_chord_clears(self):
        obs = Sphere(np.zeros(2), 1.0)
        assert chord_clears_obstacle(obs, [-2.0, 2.0], [2.0, 2.0])

    def test_diametral_chord_does_not_clear(self):
        obs = Sphere(np.zeros(2), 1.0)
        assert not chord_clears_obstacle(obs, [-2.0, 0.0], [2.0, 0.0])

    def test_grazing_chord_counts_as_clear(self):
        obs = Sphere(np.zeros(2), 1.0)
        assert chord_clears_obstacle(obs, [-2.0, 1.0], [2.0, 1.0])

    def test_three_dimensional_cases(self):
        obs = Sphere(np.zeros(3), 1.0)
        assert not chord_clears_obstacle(obs, [-2.0, 0.0, 0.5], [2.0, 0.0, 0.5])
        assert chord_clears_obstacle(obs, [-2.0, 0.0, 1.5], [2.0, 0.0, 1.5])

    def test_endpoint_inside_does_not_clear(self):
        obs = Sphere(np.zeros(2), 1.0)
        assert not chord_clears_obstacle(obs, [0.5, 0.0], [2.0, 0.0])


class TestVerifyStructureOnCleanCurves:
    def test_canonical_wrap_residuals(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        report = verify_structure(curve, obs, p, q)
        assert report.expects_contact
        assert len(report.coincidence_runs) == 1
        assert report.straightness_residual <= 1e-12
        assert report.geodesic_residual <= 1e-6
        assert report.el_residual <= 1e-3
        assert report.curvature_ratio <= 1.01
        assert report.junction_angle <= 2.0 * math.pi / 512

    def test_canonical_tangency_is_mesh_limited(self):
        # The tangent point falls between nodes, so the chord into the first
        # contact node misses exact tangency by an angle of order step *
        # kappa. The default 1e-4 gate is therefore out of reach at this
        # resolution for any constant-speed discretization, the sampled
        # closed form included; everything else is clean.
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        report = verify_structure(curve, obs, p, q)
        step = curve.length() / curve.n_segments
        assert 1e-4 < report.tangency_residual_p <= step * obs.kappa_max
        assert 1e-4 < report.tangency_residual_q <= step * obs.kappa_max
        assert not report.passed
        assert all("tangency" in msg for msg in report.failures)
        relaxed = verify_structure(curve, obs, p, q,
                                   StructureTolerances(tangency_tol=1e-2))
        assert relaxed.passed
        assert relaxed.failures == []

    def test_clear_chord_passes_with_zero_runs(self):
        obs = Sphere(np.zeros(2), 1.0)
        p, q = [1.5, 1.5], [3.0, 1.5]
        report = verify_structure(_straight_curve(p, q, 64), obs, p, q)
        assert report.passed
        assert not report.expects_contact
        assert report.coincidence_runs == []
        assert report.tangency_residual_p == 0.0
        assert report.tangency_residual_q == 0.0

    def test_three_dimensional_wrap(self):
        obs = Sphere(np.zeros(3), 1.0)
        p, q = np.array([-2.0, 0.0, 0.0]), np.array([3.0, 0.0, 0.0])
        curve = sphere_solution_to_curve(solve_sphere(np.zeros(3), 1.0, p, q), 512)
        report = verify_structure(curve, obs, p, q,
                                  StructureTolerances(tangency_tol=1e-2))
        assert report.passed
        assert len(report.coincidence_runs) == 1
        assert report.geodesic_residual <= 1e-6

    def test_junction_tolerance_scales_with_resolution(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve(n_segments=64)
        report = verify_structure(curve, obs, p, q,
                                  StructureTolerances(tangency_tol=1e-1))
        assert report.passed
        assert report.junction_angle <= 4.0 * math.pi / 64


class TestVerifyStructureOnCorruptedCurves:
    def test_sideways_kink_on_contact_run_fails_geodesic_check(self):
        obs = Sphere(np.zeros(3), 1.0)
        curve, p, q = _canonical_curve(dim=3)
        (a, b), = extract_coincidence(curve, obs)
        i = (a + b) // 2
        nodes = curve.nodes.copy()
        normal = nodes[i] / np.linalg.norm(nodes[i])
        velocity = nodes[i + 1] - nodes[i - 1]
        sideways = np.cross(normal, velocity)
        sideways /= np.linalg.norm(sideways)
        nodes[i] = obs.project_to_boundary(nodes[i] + 1e-3 * sideways)
        report = verify_structure(DiscreteCurve(nodes), obs, p, q)
        assert not report.passed
        assert report.geodesic_residual > 0.05
        assert any("geodesic" in msg for msg in report.failures)
        assert len(report.coincidence_runs) == 1

    def test_extra_contact_patch_fails_run_count(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        (a, _), = extract_coincidence(curve, obs)
        nodes = curve.nodes.copy()
        nodes[a - 3] = obs.project_to_boundary(nodes[a - 3])
        report = verify_structure(DiscreteCurve(nodes), obs, p, q)
        assert not report.passed
        assert len(report.coincidence_runs) == 2
        assert any("contact run" in msg for msg in report.failures)

    def test_blunt_junction_fails_angle_check(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        report = verify_structure(curve, obs, p, q,
                                  StructureTolerances(junction_angle_tol=1e-9))
        assert not report.passed
        assert any("junction" in msg for msg in report.failures)

    def test_bent_approach_fails_straightness_check(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        (a, _), = extract_coincidence(curve, obs)
        nodes = curve.nodes.copy()
        direction = nodes[a // 2 + 1] - nodes[a // 2 - 1]
        perp = np.array([-direction[1], direction[0]])
        nodes[a // 2] += 1e-3 * perp / np.linalg.norm(perp)
        report = verify_structure(DiscreteCurve(nodes), obs, p, q)
        assert not report.passed
        assert report.straightness_residual > 1e-6
        assert any("straightness" in msg for msg in report.failures)

    def test_endpoint_mismatch_is_rejected(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        with pytest.raises(ValueError, match="endpoint"):
            verify_structure(curve, obs, p + np.array([0.1, 0.0]), q)

    def test_nonuniform_speed_is_rejected(self):
        obs = Sphere(np.array([10.0, 10.0]), 1.0)
        t = np.linspace(0.0, 1.0, 65)[:, None] ** 2
        nodes = (1.0 - t) * np.array([0.0, 0.0]) + t * np.array([4.0, 0.0])
        with pytest.raises(NotConstantSpeed):
            verify_structure(DiscreteCurve(nodes), obs, [0.0, 0.0], [4.0, 0.0])


class TestElResidualProfile:
    def test_straight_line_residuals_vanish(self):
        obs = Sphere(np.array([10.0, 10.0]), 1.0)
        profile = el_residual_profile(_straight_curve([0.0, 0.0], [4.0, 1.0], 128), obs)
        assert profile.residuals.max() < 1e-8
        assert profile.junction_indices == []
        assert not profile.contact_mask.any()
        assert np.array_equal(profile.node_indices, np.arange(1, 128))

    def test_contact_interior_residual_shrinks_quadratically(self):
        obs = Sphere(np.zeros(2), 1.0)
        maxima = {}
        for n in (128, 512):
            curve, _, _ = _canonical_curve(n_segments=n)
            profile = el_residual_profile(curve, obs)
            keep = ~np.isin(profile.node_indices, profile.junction_indices)
            maxima[n] = profile.residuals[keep].max()
        assert maxima[512] < maxima[128] / 8.0
        assert maxima[512] <= 5e-4

    def test_junction_residual_bounded_by_curvature_jump(self):
        obs = Sphere(np.zeros(2), 1.0)
        for n in (128, 512):
            curve, _, _ = _canonical_curve(n_segments=n)
            profile = el_residual_profile(curve, obs)
            bound = 2.0 * obs.kappa_max * curve.length() ** 2
            for j in profile.junction_indices:
                k = int(np.searchsorted(profile.node_indices, j))
                assert profile.residuals[k] <= bound

    def test_junction_region_brackets_each_run_boundary(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, _, _ = _canonical_curve()
        (a, b), = extract_coincidence(curve, obs)
        profile = el_residual_profile(curve, obs)
        assert profile.junction_indices == [a - 1, a, b, b + 1]
        assert profile.contact_mask[a - 1] and profile.contact_mask[b - 1]
        assert not profile.contact_mask[a - 2] and not profile.contact_mask[b]

    def test_nonuniform_speed_is_rejected(self):
        obs = Sphere(np.array([10.0, 10.0]), 1.0)
        t = np.linspace(0.0, 1.0, 65)[:, None] ** 2
        nodes = t * np.array([4.0, 0.0])
        with pytest.raises(NotConstantSpeed):
            el_residual_profile(DiscreteCurve(nodes), obs)


class TestReportSerialization:
    def test_json_dict_round_trips(self):
        obs = Sphere(np.zeros(2), 1.0)
        curve, p, q = _canonical_curve()
        report = verify_structure(curve, obs, p, q,
                                  StructureTolerances(tangency_tol=1e-2))
        payload = report.to_json_dict()
        assert payload["schema_version"] == "1"
        assert payload["passed"] is True
        assert payload["failures"] == []
        assert payload["coincidence_runs"] == [list(r) for r in report.coincidence_runs]
        text = json.dumps(payload)
        assert json.loads(text)["el_residual"] == report.el_residual
