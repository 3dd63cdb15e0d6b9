"""Discrete curves: N+1 nodes on the uniform parameter grid of [0, 1].

The discrete energy of a curve with nodes u_0 .. u_N is
N * sum_i |u_{i+1} - u_i|^2, the Riemann sum of the squared-speed integral;
length is the polyline length. For any curve length^2 <= energy, with
equality exactly at constant speed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateCurve, NotConstantSpeed

_LENGTH_EPS = 1e-14
_SPEED_VARIATION_LIMIT = 0.01


@dataclass(eq=False)
class DiscreteCurve:
    """Polyline with nodes of shape (N+1, n), N >= 1 segments in R^n."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[0] < 2 or nodes.shape[1] < 2:
            raise ValueError("nodes must be (N+1, n) with N >= 1, n >= 2")
        self.nodes = nodes

    @property
    def n_segments(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]

    @property
    def p(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def q(self) -> np.ndarray:
        return self.nodes[-1]

    # --- basic functionals ---------------------------------------------

    def chord_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.nodes, axis=0), axis=1)

    def energy(self) -> float:
        d = np.diff(self.nodes, axis=0)
        return self.n_segments * float(np.einsum("ij,ij->", d, d))

    def length(self) -> float:
        return float(self.chord_lengths().sum())

    def speed_variation(self) -> float:
        """Relative spread (max - min) / mean of the chord lengths."""
        d = self.chord_lengths()
        mean = float(d.mean())
        if mean < _LENGTH_EPS:
            return 0.0
        return float((d.max() - d.min()) / mean)

    # --- reshaping -------------------------------------------------------

    def reparameterize_constant_speed(self) -> "DiscreteCurve":
        """Resample the same polyline at equal-arclength node spacing.

        Linear interpolation along the polyline keeps every new node on the
        old image; the node count is unchanged. Never increases energy; the
        result satisfies energy ~= length^2.
        """
        d = self.chord_lengths()
        total = float(d.sum())
        if total < _LENGTH_EPS:
            raise DegenerateCurve("zero-length curve cannot be reparameterized")
        cum = np.concatenate([[0.0], np.cumsum(d)])
        keep = np.concatenate([[True], d > 0.0])
        xp = cum[keep]
        fp = self.nodes[keep]
        n = self.n_segments
        targets = (np.arange(n + 1) / n) * total
        out = np.empty_like(self.nodes)
        for j in range(self.dimension):
            out[:, j] = np.interp(targets, xp, fp[:, j])
        out[0] = self.nodes[0]
        out[-1] = self.nodes[-1]
        return DiscreteCurve(out)

    def refine(self, factor: int) -> "DiscreteCurve":
        """Split every segment into `factor` equal pieces (energy-preserving)."""
        if factor < 1 or int(factor) != factor:
            raise ValueError("factor must be a positive integer")
        factor = int(factor)
        if factor == 1:
            return DiscreteCurve(self.nodes.copy())
        n, dim = self.n_segments, self.dimension
        out = np.empty((n * factor + 1, dim))
        w = np.arange(factor) / factor
        seg = self.nodes[:-1, None, :] * (1.0 - w)[None, :, None] \
            + self.nodes[1:, None, :] * w[None, :, None]
        out[:-1] = seg.reshape(n * factor, dim)
        out[-1] = self.nodes[-1]
        return DiscreteCurve(out)

    def max_discrete_curvature(self) -> float:
        """Max norm of the second difference over h^2, h = length / N.

        Requires near-constant speed (within 1%); a circle sampled uniformly
        gives back exactly its curvature 1/r.
        """
        if self.speed_variation() > _SPEED_VARIATION_LIMIT:
            raise NotConstantSpeed(
                f"speed variation {self.speed_variation():.3g} exceeds 1%"
            )
        if self.n_segments < 2:
            return 0.0
        h = self.length() / self.n_segments
        if h < _LENGTH_EPS:
            return 0.0
        d2 = self.nodes[2:] - 2.0 * self.nodes[1:-1] + self.nodes[:-2]
        return float(np.linalg.norm(d2, axis=1).max() / h**2)

    # --- feasibility -----------------------------------------------------

    def min_phi(self, obstacle) -> float:
        return float(obstacle.phi_many(self.nodes).min())

    def is_feasible(self, obstacle) -> bool:
        """Every node satisfies phi(node) >= -boundary_tol."""
        return self.min_phi(obstacle) >= -obstacle.boundary_tol

    # --- serialization ---------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            handle.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        n = self.n_segments
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t"] + [f"x{j}" for j in range(self.dimension)])
        for i, row in enumerate(self.nodes):
            writer.writerow([f"{i / n:.17g}"] + [f"{v:.17g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path) -> "DiscreteCurve":
        with open(path, "r", newline="") as handle:
            return cls.from_csv_text(handle.read())

    @classmethod
    def from_csv_text(cls, text: str) -> "DiscreteCurve":
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r]
        if len(rows) < 3:
            raise ConfigError("curve CSV needs a header and at least two nodes")
        header = rows[0]
        if header[0] != "t" or len(header) < 3:
            raise ConfigError("curve CSV header must be t,x0,...,x{n-1}")
        width = len(header)
        nodes = []
        for r in rows[1:]:
            if len(r) != width:
                raise ConfigError(f"curve CSV row has {len(r)} fields, expected {width}")
            try:
                nodes.append([float(v) for v in r[1:]])
            except ValueError as exc:
                raise ConfigError(f"curve CSV has a non-numeric field: {exc}") from exc
        return cls(np.array(nodes))

    def to_json_dict(self) -> dict:
        return {
            "schema_version": "1",
            "n_segments": self.n_segments,
            "dimension": self.dimension,
            "nodes": self.nodes.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DiscreteCurve":
        if "nodes" not in data:
            raise ConfigError("curve JSON needs a nodes field")
        return cls(np.asarray(data["nodes"], dtype=float))


def straight_line(p, q, n_segments: int) -> DiscreteCurve:
    """Uniformly sampled segment from p to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    t = np.linspace(0.0, 1.0, n_segments + 1)[:, None]
    return DiscreteCurve((1.0 - t) * p + t * q)
