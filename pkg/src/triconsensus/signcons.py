"""Stubbornness gains for sign consensus.

In the relabeled order (i1, i3, i2) the target kernel vector is [v1, 0, v3]
with v1 >> 0 and v3 << 0.  The middle rows of M w = 0 only involve A, so the
pair (v1, v3) must be a sign-constrained null vector of [A_{i3,i1} | A_{i3,i2}];
the outer rows then fix D for clusters i1 and i2, and D for the middle cluster
is raised until the Schur chain certifies M.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.optimize import lsq_linear

from .matalg import (ClosedLoop, MetzlerSummary, NotPositiveDefinite, SpectralSummary, eig_sym,
                     metzler_summary, nonneg_inverse, schur_complement)
from .network import (CLUSTERS, Labeling, SignedNetwork, as_labeling,
                      enumerate_admissible_labelings, validate_assumption1)

EQ_TOL = 1e-10
OFFDIAG_TOL = 1e-10
FROBENIUS_TOL = 1e-8


@dataclass(frozen=True)
class SignConfig:
    eps: float = 1e-3
    margin0: float = 1.0
    max_doublings: int = 40
    labeling: tuple[int, int, int] | None = None
    null_vectors: tuple | None = None  # pin (v1, v3) instead of solving for them
    kernel_tol: float = 1e-6


def least_distance(G: np.ndarray, h: np.ndarray) -> np.ndarray | None:
    """min ||x||_2 subject to G x >= h, or None when infeasible.

    Lawson and Hanson's reduction to a nonnegative least-squares problem,
    solved with bounded-variable least squares (``scipy.optimize.nnls`` in
    scipy 1.12-1.15 can stop at non-optimal points).
    """
    m, n = G.shape
    E = np.vstack([G.T, h[None, :]])
    f = np.zeros(n + 1)
    f[-1] = 1.0
    u = lsq_linear(E, f, bounds=(0, np.inf), method="bvls", tol=1e-14).x
    r = E @ u - f
    if -r[-1] < 1e-12:
        return None
    return -r[:-1] / r[-1]


def find_signed_nullspace(net: SignedNetwork, labeling, eps: float = 1e-3):
    """Canonical (v1 >> 0, v3 << 0) with A_{i3,i1} v1 + A_{i3,i2} v3 = 0.

    Among all solutions with every entry at least 1 in magnitude, the one of
    least Euclidean norm is taken and rescaled to unit max-norm.  Returns None
    when no such pair exists or when the rescaled pair has an entry smaller
    than ``eps`` in magnitude.
    """
    lab = as_labeling(labeling)
    R = net.relabeled(lab)
    n1, _, n3 = R.sizes
    B = np.hstack([R.block(2, 1), R.block(2, 3)])
    Z = linalg.null_space(B)
    if Z.shape[1] == 0:
        return None
    signs = np.concatenate([np.ones(n1), -np.ones(n3)])
    c = least_distance(signs[:, None] * Z, np.ones(n1 + n3))
    if c is None:
        return None
    v = Z @ c
    v /= np.abs(v).max()
    if not np.all(signs * v >= eps):
        return None
    scale = max(1.0, np.abs(B).max())
    if np.abs(B @ v).max() > EQ_TOL * scale:
        return None
    return v[:n1], v[n1:]


def middle_constraint_residual(net: SignedNetwork, labeling, v1, v3) -> float:
    R = net.relabeled(as_labeling(labeling))
    return float(np.abs(R.block(2, 1) @ v1 + R.block(2, 3) @ v3).max())


def boundary_gains(net: SignedNetwork, labeling, v1, v3):
    """Diagonal gains of clusters i1 and i2 forced by M [v1, 0, v3] = 0.

    Returns ``(d_i1, d_i2)``, each entry the row of A against the kernel
    vector divided by the agent's own kernel component.
    """
    lab = as_labeling(labeling)
    R = net.relabeled(lab)
    v1 = np.asarray(v1, dtype=float)
    v3 = np.asarray(v3, dtype=float)
    if v1.shape != (R.sizes[0],) or v3.shape != (R.sizes[2],):
        raise ValueError(f"expected vectors of lengths {R.sizes[0]} and {R.sizes[2]}")
    if np.any(v1 == 0) or np.any(v3 == 0):
        raise ValueError("zero component in v1 or v3")
    scale = max(1.0, np.abs(R.A).max() * max(np.abs(v1).max(), np.abs(v3).max()))
    if middle_constraint_residual(net, lab, v1, v3) > 1e-9 * scale:
        raise ValueError("(v1, v3) do not satisfy A_{i3,i1} v1 + A_{i3,i2} v3 = 0")

    rhs1 = R.block(1, 1) @ v1 + R.block(1, 3) @ v3
    rhs3 = R.block(3, 3) @ v3 + R.block(3, 1) @ v1
    d1 = rhs1 / v1
    d3 = rhs3 / v3
    for d, v, rhs in ((d1, v1, rhs1), (d3, v3, rhs3)):
        assert np.abs(d * v - rhs).max() < EQ_TOL * max(1.0, np.abs(rhs).max())
    return d1, d3


def middle_gain_floor(net: SignedNetwork, labeling, d1) -> np.ndarray:
    """a22 + A21 (D1 - A11)^{-1} a12 in relabeled order: d2 must exceed it entrywise."""
    R = net.relabeled(as_labeling(labeling))
    X = nonneg_inverse(np.diag(np.asarray(d1, dtype=float)), R.block(1, 1))
    return R.rowsum(2, 2) + R.block(2, 1) @ X @ R.rowsum(1, 2)


@dataclass(frozen=True, eq=False)
class SignGains:
    labeling: Labeling
    v1: np.ndarray
    v3: np.ndarray
    d: np.ndarray  # agent order
    d_relabeled: tuple[np.ndarray, np.ndarray, np.ndarray]
    margin: float
    perm: np.ndarray
    sizes: tuple[int, int, int]
    closed_loop: ClosedLoop

    @property
    def M(self) -> np.ndarray:
        return self.closed_loop.matrix

    @property
    def zero_cluster(self) -> int:
        return self.labeling.i3

    def kernel_vector(self) -> np.ndarray:
        w_rel = np.concatenate([self.v1, np.zeros(self.sizes[1]), self.v3])
        w = np.empty_like(w_rel)
        w[self.perm] = w_rel
        return w

    def cluster_gains(self, net: SignedNetwork) -> dict[int, np.ndarray]:
        return {p: self.d[net.members(p)] for p in CLUSTERS}

    def to_dict(self, net: SignedNetwork) -> dict:
        return {"kind": "sign",
                "labeling": list(self.labeling),
                "v1": [float(x) for x in self.v1],
                "v3": [float(x) for x in self.v3],
                "zero_cluster": self.zero_cluster,
                "margin": float(self.margin),
                "d": {str(p): [float(x) for x in g] for p, g in self.cluster_gains(net).items()}}


def assemble(net: SignedNetwork, labeling, v1, v3, d1, d2, d3, margin) -> SignGains:
    lab = as_labeling(labeling)
    R = net.relabeled(lab)
    d = R.to_original(np.concatenate([d1, d2, d3]))
    return SignGains(lab, np.asarray(v1, float), np.asarray(v3, float), d, (d1, d2, d3),
                     float(margin), R.perm, R.sizes, ClosedLoop.from_gains(d, net.weights))


@dataclass
class SignSynthesisResult:
    status: str
    gains: SignGains | None = None
    certificate: SpectralSummary | None = None
    phi3: np.ndarray | None = None
    phi3_metzler: MetzlerSummary | None = None
    reasons: list[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status == "success"


def certify(net: SignedNetwork, gains: SignGains, kernel_tol: float = 1e-6) -> SignSynthesisResult:
    """Check the Schur chain and the full spectrum of M for a candidate gain set."""
    out = SignSynthesisResult("infeasible", gains)
    R = net.relabeled(gains.labeling)
    n1, n2, _ = R.sizes
    M_rel = gains.M[np.ix_(R.perm, R.perm)]
    try:
        phi3 = schur_complement(schur_complement(M_rel, n1), n2)
    except NotPositiveDefinite as exc:
        out.reasons.append(f"Schur chain broke: {exc}")
        return out
    out.phi3 = phi3
    neg = -phi3
    off = ~np.eye(neg.shape[0], dtype=bool)
    ms = metzler_summary(neg)
    out.phi3_metzler = ms
    if np.any(neg[off] <= OFFDIAG_TOL):
        out.reasons.append("-Phi3 has a non-positive off-diagonal entry")
    elif not (ms.is_metzler and ms.is_irreducible):
        out.reasons.append("-Phi3 is not an irreducible Metzler matrix")
    elif abs(ms.frobenius_eig) > FROBENIUS_TOL * max(1.0, np.abs(phi3).max()):
        out.reasons.append(f"Frobenius eigenvalue of -Phi3 is {ms.frobenius_eig:.3g}, not 0")
    if out.reasons:
        return out
    ps = eig_sym(phi3)
    if not ps.is_psd() or ps.zero_multiplicity != 1:
        out.reasons.append("Phi3 is not PSD with a simple zero eigenvalue")
        return out

    spec = gains.closed_loop.spectrum
    out.certificate = spec
    if not spec.is_psd():
        out.reasons.append(f"M not PSD (min eigenvalue {spec.min_eigenvalue:.3g})")
    elif spec.zero_multiplicity != 1:
        out.reasons.append(f"zero eigenvalue multiplicity {spec.zero_multiplicity}, expected 1")
    else:
        k = spec.kernel_basis[:, 0]
        w = gains.kernel_vector()
        c = (w @ k) / (w @ w)
        if c == 0 or np.abs(k / c - w).max() > kernel_tol * np.abs(w).max():
            out.reasons.append("kernel of M is not spanned by [v1, 0, v3]")
    if not out.reasons:
        out.status = "success"
    return out


def _pinned_vectors(cfg: SignConfig, lab: Labeling, net: SignedNetwork):
    v1, v3 = (np.asarray(x, dtype=float) for x in cfg.null_vectors)
    R = net.relabeled(lab)
    if v1.shape != (R.sizes[0],) or v3.shape != (R.sizes[2],):
        return None, f"pinned vectors have lengths {v1.size}, {v3.size}; need {R.sizes[0]}, {R.sizes[2]}"
    if not (np.all(v1 > 0) and np.all(v3 < 0)):
        return None, "pinned vectors must be v1 >> 0, v3 << 0"
    scale = max(1.0, np.abs(R.A).max() * max(np.abs(v1).max(), np.abs(v3).max()))
    if middle_constraint_residual(net, lab, v1, v3) > 1e-9 * scale:
        return None, "pinned vectors violate the middle-cluster null constraint"
    return (v1, v3), ""


def synthesize_sign(net: SignedNetwork, cfg: SignConfig = SignConfig()) -> SignSynthesisResult:
    """First certified sign-consensus gain set over the admissible labelings."""
    report = validate_assumption1(net)
    if not report.ok:
        failed = [f"{c.name}: {c.detail}" for c in report.checks if not c.passed]
        return SignSynthesisResult("infeasible", reasons=["structural checks fail: " + "; ".join(failed)])
    _, labs = enumerate_admissible_labelings(net)
    if cfg.labeling is not None:
        pinned = as_labeling(cfg.labeling)
        labs = [lab for lab in labs if lab == pinned]
    if not labs:
        return SignSynthesisResult("infeasible", reasons=[
            "no admissible labeling: close friendship or condition a) fails"])

    reasons = []
    for lab in labs:
        if cfg.null_vectors is not None:
            pair, why = _pinned_vectors(cfg, lab, net)
        else:
            pair = find_signed_nullspace(net, lab, cfg.eps)
            why = "null-space infeasible"
        if pair is None:
            reasons.append(f"{tuple(lab)}: {why}")
            continue
        v1, v3 = pair
        d1, d3 = boundary_gains(net, lab, v1, v3)
        try:
            floor = middle_gain_floor(net, lab, d1)
        except NotPositiveDefinite:
            reasons.append(f"{tuple(lab)}: D1 - A11 not positive definite")
            continue
        last = ""
        for k in range(cfg.max_doublings + 1):
            margin = cfg.margin0 * 2.0 ** k
            gains = assemble(net, lab, v1, v3, d1, floor + margin, d3, margin)
            res = certify(net, gains, cfg.kernel_tol)
            if res.success:
                return res
            last = res.reasons[0]
        reasons.append(f"{tuple(lab)}: escalation exhausted ({last})")
    return SignSynthesisResult("infeasible", reasons=reasons)


def proof_identities(net: SignedNetwork, gains: SignGains) -> dict[str, float]:
    """Residuals of the two cancellations that make Phi3 v3 vanish."""
    R = net.relabeled(gains.labeling)
    d1, _, d3 = gains.d_relabeled
    X = nonneg_inverse(np.diag(d1), R.block(1, 1))
    v3 = gains.v3
    outer = -d3 * v3 + R.block(3, 3) @ v3 + R.block(3, 1) @ X @ R.block(1, 3) @ v3
    middle = R.block(2, 1) @ X @ R.block(1, 3) @ v3 + R.block(2, 3) @ v3
    return {"outer": float(np.abs(outer).max()), "middle": float(np.abs(middle).max())}
