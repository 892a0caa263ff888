"""Closed-loop dynamics x' = -M x: integration, limits and consensus verdicts."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .matalg import as_closed_loop, as_matrix

RK4_STABILITY = 2.5
DEFAULT_DT = 1e-3
DEFAULT_T = 10.0
DEFAULT_TOL = 1e-6


class StepTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # one row per sample
    dt: float
    x0: np.ndarray

    def control(self, M) -> np.ndarray:
        """u(t) = -M x(t) at every sample."""
        return -self.states @ as_matrix(M).T

    def write_csv(self, path, stride: int = 1) -> None:
        n = self.states.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"x{k + 1}" for k in range(n)])
            for t, x in zip(self.times[::stride], self.states[::stride]):
                w.writerow([f"{t:.12g}"] + [f"{v:.12g}" for v in x])


def rk4_propagator(M, dt: float) -> np.ndarray:
    """One classical RK4 step for x' = -M x, written as a matrix.

    For a linear time-invariant field the four stages collapse to the degree-4
    Taylor polynomial of exp(-dt M).
    """
    L = -dt * as_matrix(M)
    n = L.shape[0]
    P = np.eye(n)
    term = np.eye(n)
    for k in range(1, 5):
        term = term @ L / k
        P = P + term
    return P


def _largest_eigenvalue(M: np.ndarray) -> float:
    if np.allclose(M, M.T, rtol=0, atol=1e-9 * max(1.0, np.abs(M).max())):
        return float(np.abs(np.linalg.eigvalsh((M + M.T) / 2)).max())
    return float(np.abs(np.linalg.eigvals(M)).max())


def integrate(M, x0, dt: float = DEFAULT_DT, T: float = DEFAULT_T, stride: int = 1) -> Trajectory:
    """Fixed-step RK4 integration on [0, T], keeping every ``stride``-th sample.

    ``x0`` may also be a (batch, N) array, in which case ``states`` has shape
    (samples, batch, N).
    """
    A = as_matrix(M)
    x0 = np.asarray(x0, dtype=float)
    if dt <= 0 or T < dt:
        raise ValueError(f"need dt > 0 and T >= dt, got dt={dt}, T={T}")
    lam = _largest_eigenvalue(A)
    if dt * lam >= RK4_STABILITY:
        raise StepTooLarge(f"step {dt} too large: need dt < {RK4_STABILITY / lam:.6g} "
                           f"(largest eigenvalue magnitude {lam:.6g})")
    steps = int(round(T / dt))
    P = rk4_propagator(A, dt)
    x = x0.copy()
    keep, idx = [x.copy()], [0]
    for k in range(1, steps + 1):
        x = x @ P.T
        if k % stride == 0 or k == steps:
            keep.append(x)
            idx.append(k)
    return Trajectory(dt * np.array(idx, dtype=float), np.array(keep), dt, x0)


def analytic_limit(M, x0) -> np.ndarray:
    """Projection of x0 onto the kernel of the symmetric PSD matrix M."""
    cl = as_closed_loop(M)
    spec = cl.spectrum
    if not spec.is_psd():
        raise ValueError(f"M is not PSD (min eigenvalue {spec.min_eigenvalue:.3g})")
    K = spec.kernel_basis
    return np.asarray(x0, dtype=float) @ K @ K.T


@dataclass
class ConsensusVerdict:
    kind: str  # "tripartite" | "sign" | "none"
    limit: np.ndarray
    cluster_values: list[float]
    cluster_signs: list[int]  # +1 / -1 / 0, or 2 for mixed signs
    degenerate: bool
    zero_cluster: int | None = None
    details: dict = field(default_factory=dict)

    def ratios(self) -> np.ndarray:
        """Cluster values divided by the first nonzero one."""
        c = np.asarray(self.cluster_values)
        nz = np.flatnonzero(np.abs(c) > 0)
        return c / c[nz[0]] if nz.size else c

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "degenerate": self.degenerate,
                "zero_cluster": self.zero_cluster,
                "cluster_values": [float(v) for v in self.cluster_values],
                "cluster_signs": list(self.cluster_signs),
                "limit": [float(v) for v in self.limit]}


def _clusters_of(partition) -> list[np.ndarray]:
    clusters = getattr(partition, "clusters", partition)
    return [np.asarray(c, dtype=int) for c in clusters]


def classify(M, partition, x0, tol: float = DEFAULT_TOL) -> ConsensusVerdict:
    """Classify lim x(t) from x0 as tripartite consensus, sign consensus or neither."""
    cl = as_closed_loop(M)
    if cl.spectrum.zero_multiplicity > 1:
        raise ValueError("kernel dimension > 1: classification undefined")
    lim = analytic_limit(cl, x0)
    groups = [lim[c] for c in _clusters_of(partition)]
    values = [float(g.mean()) for g in groups]
    signs = []
    for g in groups:
        if np.all(np.abs(g) < tol):
            signs.append(0)
        elif np.all(g > tol):
            signs.append(1)
        elif np.all(g < -tol):
            signs.append(-1)
        else:
            signs.append(2)
    scale = np.abs(lim).max()
    if scale < tol:
        return ConsensusVerdict("none", lim, values, signs, True)
    spread = max(float(g.max() - g.min()) for g in groups)
    if spread < tol * (1 + scale) and any(abs(v) > tol for v in values):
        return ConsensusVerdict("tripartite", lim, values, signs, False, details={"spread": spread})
    zeros = [k for k, s in enumerate(signs) if s == 0]
    if len(zeros) == 1:
        others = [s for k, s in enumerate(signs) if k != zeros[0]]
        if sorted(others) == [-1, 1]:
            return ConsensusVerdict("sign", lim, values, signs, False, zero_cluster=zeros[0] + 1)
    return ConsensusVerdict("none", lim, values, signs, False)


def convergence_time(M, x0, rel_eps: float, dt: float = DEFAULT_DT) -> float:
    """First sample time at which ||x(t) - x_inf|| <= rel_eps ||x0 - x_inf||."""
    cl = as_closed_loop(M)
    x0 = np.asarray(x0, dtype=float)
    lim = analytic_limit(cl, x0)
    e0 = np.linalg.norm(x0 - lim)
    # x0 already on the kernel, up to the round-off of the projection
    if e0 <= 1e-12 * max(1.0, np.linalg.norm(x0)):
        return 0.0
    lam = cl.spectrum.min_nonzero
    if lam is None:
        raise ValueError("M has no nonzero eigenvalue")
    horizon = -np.log(rel_eps) / lam + 10 * dt
    traj = integrate(cl.matrix, x0, dt, max(horizon, dt))
    err = np.linalg.norm(traj.states - lim, axis=1)
    hit = np.flatnonzero(err <= rel_eps * e0)
    if hit.size == 0:
        raise RuntimeError("tolerance not reached within the analytic bound")
    return float(traj.times[hit[0]])


def random_initial_conditions(rng: np.random.Generator, n: int, count: int,
                              variance: float = 4.0) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(variance), size=(count, n))
