"""Stubbornness gains for tripartite consensus.

Gains are parametrised by the kernel ratios (v2, v3): with the kernel vector
w = [1, v2 1, v3 1] in the relabeled cluster order (i1, i3, i2), requiring
M w = 0 fixes every diagonal gain.  A ratio pair is accepted only after the
closed loop is certified PSD with a simple zero eigenvalue whose eigenvector
has that block pattern.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .matalg import (ClosedLoop, NotPositiveDefinite, SpectralSummary, nonneg_inverse,
                     schur_complement)
from .network import (ALL_LABELINGS, CLUSTERS, STRICT_TOL, Labeling, SignedNetwork, as_labeling,
                      check_close_friendship, block_row_sums, enumerate_admissible_labelings,
                      strictly_negative, validate_assumption1)

GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0)
PHI3_TOL = 1e-8
RANK_RTOL = 1e-9


class InadmissibleLabeling(ValueError):
    pass


@dataclass(frozen=True)
class TripartiteConfig:
    grid: tuple[float, ...] = GRID
    ratios: tuple[float, float] | None = None  # pin (v2, v3) instead of searching
    labeling: tuple[int, int, int] | None = None  # pin the labeling
    kernel_tol: float = 1e-6


@dataclass(frozen=True, eq=False)
class TripartiteGains:
    labeling: Labeling
    v: tuple[float, float, float]
    d: np.ndarray  # agent order
    d_relabeled: tuple[np.ndarray, np.ndarray, np.ndarray]
    perm: np.ndarray
    sizes: tuple[int, int, int]
    closed_loop: ClosedLoop

    @property
    def M(self) -> np.ndarray:
        return self.closed_loop.matrix

    def kernel_vector(self) -> np.ndarray:
        """The structured vector [1, v2, v3] blown up to agents, in agent order."""
        w_rel = np.repeat(self.v, self.sizes)
        w = np.empty_like(w_rel)
        w[self.perm] = w_rel
        return w

    def cluster_gains(self, net: SignedNetwork) -> dict[int, np.ndarray]:
        return {p: self.d[net.members(p)] for p in CLUSTERS}

    def to_dict(self, net: SignedNetwork) -> dict:
        return {"kind": "tripartite",
                "labeling": list(self.labeling),
                "v": [float(x) for x in self.v],
                "d": {str(p): [float(x) for x in g] for p, g in self.cluster_gains(net).items()}}


def gains_from_ratios(net: SignedNetwork, labeling, v2: float, v3: float) -> TripartiteGains:
    lab = as_labeling(labeling)
    if v2 == 0 or v3 == 0:
        raise ValueError("zero kernel ratio: v2 and v3 must be nonzero")
    R = net.relabeled(lab)
    a = R.rowsum
    d1 = a(1, 1) + v2 * a(1, 2) + v3 * a(1, 3)
    d2 = a(2, 2) + a(2, 1) / v2 + (v3 / v2) * a(2, 3)
    d3 = a(3, 3) + a(3, 1) / v3 + (v2 / v3) * a(3, 2)
    d = R.to_original(np.concatenate([d1, d2, d3]))
    if not np.all(np.isfinite(d)):
        raise ValueError("non-finite gains")
    return TripartiteGains(lab, (1.0, float(v2), float(v3)), d, (d1, d2, d3), R.perm, R.sizes,
                           ClosedLoop.from_gains(d, net.weights))


def gains_from_arrays(net: SignedNetwork, labeling, v, d) -> TripartiteGains:
    """Rebuild a gain object from stored values (agent-order ``d``) without recomputing d."""
    lab = as_labeling(labeling)
    R = net.relabeled(lab)
    d = np.asarray(d, dtype=float)
    d_rel = R.to_relabeled(d)
    parts = tuple(d_rel[R.slice(p)] for p in (1, 2, 3))
    v = tuple(float(x) for x in v)
    return TripartiteGains(lab, v, d, parts, R.perm, R.sizes, ClosedLoop.from_gains(d, net.weights))


@dataclass
class ConstraintReport:
    d1_dominates: bool
    d2_dominates: bool | None = None  # None: skipped
    phi3_residual: float | None = None
    phi3: np.ndarray | None = None
    detail: str = ""

    @property
    def phi3_ok(self) -> bool | None:
        return None if self.phi3_residual is None else self.phi3_residual < PHI3_TOL

    @property
    def ok(self) -> bool:
        return bool(self.d1_dominates and self.d2_dominates and self.phi3_ok)


def check_inequality_constraints(net: SignedNetwork, gains: TripartiteGains) -> ConstraintReport:
    """Sufficient conditions of the constructive argument, in relabeled order.

    d1 >> a11 makes D1 - A11 positive definite; d2 >> a22 + A21 (D1 - A11)^{-1} a12
    does the same for the second Schur block; the last Schur complement must
    then annihilate the ones vector.
    """
    R = net.relabeled(gains.labeling)
    d1, d2, _ = gains.d_relabeled
    if not np.all(d1 - R.rowsum(1, 1) > STRICT_TOL):
        return ConstraintReport(False, detail="d1 >> a11 fails; later checks skipped")
    X = nonneg_inverse(np.diag(d1), R.block(1, 1))
    floor = R.rowsum(2, 2) + R.block(2, 1) @ X @ R.rowsum(1, 2)
    if not np.all(d2 - floor > STRICT_TOL):
        return ConstraintReport(True, False, detail="d2 lower bound fails; last check skipped")
    M_rel = gains.M[np.ix_(R.perm, R.perm)]
    n1, n2, _ = R.sizes
    try:
        phi3 = schur_complement(schur_complement(M_rel, n1), n2)
    except NotPositiveDefinite as exc:
        return ConstraintReport(True, True, detail=f"Schur chain broke: {exc}")
    res = float(np.abs(phi3 @ np.ones(phi3.shape[0])).max())
    return ConstraintReport(True, True, res, phi3, detail=f"|Phi3 1|_inf = {res:.3g}")


def reduced_matrix(net: SignedNetwork, gains: TripartiteGains) -> np.ndarray:
    """The N x 3 block row-sum matrix whose rank decides block-constant kernels."""
    R = net.relabeled(gains.labeling)
    rows = []
    for p in (1, 2, 3):
        cols = [-R.rowsum(p, q) for q in (1, 2, 3)]
        cols[p - 1] = cols[p - 1] + gains.d_relabeled[p - 1]
        rows.append(np.column_stack(cols))
    return np.vstack(rows)


@dataclass
class SynthesisResult:
    status: str  # "success" | "infeasible"
    gains: TripartiteGains | None = None
    certificate: SpectralSummary | None = None
    reduced_rank: int | None = None
    constraints: ConstraintReport | None = None
    reasons: list[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status == "success"


def verify_structured_kernel(net: SignedNetwork, gains: TripartiteGains,
                             kernel_tol: float = 1e-6) -> SynthesisResult:
    spec = gains.closed_loop.spectrum
    red = reduced_matrix(net, gains)
    sv = np.linalg.svd(red, compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * max(1.0, sv[0])))
    out = SynthesisResult("infeasible", gains, spec, rank)

    if not spec.is_psd():
        out.reasons.append(f"M not PSD (min eigenvalue {spec.min_eigenvalue:.3g})")
    elif spec.zero_multiplicity == 0:
        out.reasons.append("M nonsingular")
    elif spec.zero_multiplicity > 1:
        out.reasons.append(f"zero eigenvalue not simple (multiplicity {spec.zero_multiplicity})")
    if rank >= 3:
        out.reasons.append("reduced matrix has full rank 3")
    if not out.reasons:
        k = spec.kernel_basis[:, 0]
        w = gains.kernel_vector()
        c = (w @ k) / (w @ w)
        mismatch = np.abs(k / c - w).max() if c != 0 else np.inf
        if mismatch > kernel_tol * np.abs(w).max():
            out.reasons.append(f"kernel vector does not match block pattern (gap {mismatch:.3g})")
    if not out.reasons:
        out.status = "success"
    return out


def _quadrants(guided: tuple[int, int]):
    order = [guided] + [q for q in [(-1, 1), (1, -1), (1, 1), (-1, -1)] if q != guided]
    return order


def ratio_candidates(net: SignedNetwork, labeling, h: int, grid=GRID):
    """Deterministic (v2, v3) trial order: the proof's sign pattern first.

    h == i3 means the i1 agents all have enemies in the second relabeled block,
    so v2 < 0 and v3 > 0 come first; h == i2 mirrors that.  Within a sign
    quadrant, smaller magnitudes are tried first.
    """
    lab = as_labeling(labeling)
    guided = (-1, 1) if h == lab.i3 else (1, -1)
    mags = sorted(itertools.product(grid, grid), key=lambda m: (max(m), min(m), m[0]))
    for s2, s3 in _quadrants(guided):
        for m2, m3 in mags:
            yield s2 * m2, s3 * m3


def try_ratios(net: SignedNetwork, labeling, v2: float, v3: float, kernel_tol: float = 1e-6,
               require_constraints: bool = True):
    """Build, constraint-check and verify one ratio pair; returns (result, why-not).

    With ``require_constraints=False`` the inequality chain is only reported:
    it is sufficient, not necessary, and user-pinned ratios (the first worked
    example among them) may certify without satisfying it.
    """
    gains = gains_from_ratios(net, labeling, v2, v3)
    cons = check_inequality_constraints(net, gains)
    if require_constraints and not cons.ok:
        return None, cons.detail
    res = verify_structured_kernel(net, gains, kernel_tol)
    res.constraints = cons
    if not res.success:
        return None, "; ".join(res.reasons)
    return res, ""


def search_ratios(net: SignedNetwork, labeling, h: int, cfg: TripartiteConfig = TripartiteConfig()):
    """First verified (v2, v3) on the grid, or None."""
    lab = as_labeling(labeling)
    tri, _ = enumerate_admissible_labelings(net)
    if (lab, h) not in tri:
        raise InadmissibleLabeling(f"inadmissible labeling {tuple(lab)} with h={h}")
    pinned = cfg.ratios is not None
    cands = [cfg.ratios] if pinned else ratio_candidates(net, lab, h, cfg.grid)
    for v2, v3 in cands:
        res, _ = try_ratios(net, lab, v2, v3, cfg.kernel_tol, require_constraints=not pinned)
        if res is not None:
            return (float(v2), float(v3))
    return None


def labeling_diagnosis(net: SignedNetwork, lab: Labeling) -> str:
    """Why ``lab`` fails the structural hypotheses ('' if it does not)."""
    a = block_row_sums(net)
    fr = check_close_friendship(net, lab.i1, lab.i2)
    if not fr:
        return f"close friendship fails for (i1,i2)=({lab.i1},{lab.i2}) at pair {fr.witness}"
    if not strictly_negative(a[lab.i3, lab.i2]):
        return f"enemy condition fails: some agent of cluster {lab.i3} has no enemy in {lab.i2}"
    if not any(strictly_negative(a[lab.i1, h]) for h in (lab.i2, lab.i3)):
        return f"enemy condition fails: cluster {lab.i1} lacks enemies in {lab.i2} and {lab.i3}"
    return ""


def synthesize_tripartite(net: SignedNetwork, cfg: TripartiteConfig = TripartiteConfig()) -> SynthesisResult:
    """Try admissible labelings in lexicographic order; first verified gain set wins.

    An infeasible result only says that this construction failed; it does not
    mean tripartite consensus is impossible for the network.
    """
    report = validate_assumption1(net)
    if not report.ok:
        failed = [f"{c.name}: {c.detail}" for c in report.checks if not c.passed]
        return SynthesisResult("infeasible", reasons=["structural checks fail: " + "; ".join(failed)])
    tri, _ = enumerate_admissible_labelings(net)
    pinned = as_labeling(cfg.labeling) if cfg.labeling is not None else None
    reasons = []
    if pinned is not None:
        tri = [(lab, h) for lab, h in tri if lab == pinned]
        if not tri:
            why = labeling_diagnosis(net, pinned) or "not admissible"
            return SynthesisResult("infeasible", reasons=[f"{tuple(pinned)}: {why}"])
    if not tri:
        reasons = [f"{tuple(lab)}: {labeling_diagnosis(net, lab)}" for lab in ALL_LABELINGS]
        return SynthesisResult("infeasible", reasons=reasons)

    tried = set()
    for lab, h in tri:
        if lab in tried:
            # the grid spans all four sign quadrants, so another h adds nothing
            continue
        tried.add(lab)
        cands = [cfg.ratios] if cfg.ratios is not None else ratio_candidates(net, lab, h, cfg.grid)
        last = ""
        for v2, v3 in cands:
            res, last = try_ratios(net, lab, v2, v3, cfg.kernel_tol,
                                   require_constraints=cfg.ratios is None)
            if res is not None:
                return res
        if cfg.ratios is not None:
            reasons.append(f"{tuple(lab)}: pinned ratios {tuple(cfg.ratios)} rejected ({last})")
        else:
            reasons.append(f"{tuple(lab)}: grid exhausted without a verified ratio pair")
    return SynthesisResult("infeasible", reasons=reasons)
