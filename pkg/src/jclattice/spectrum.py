"""Eigenpairs, translation-symmetry classification and gap scans.

The eigensolver is iterative Lanczos (scipy ARPACK) above a dense-fallback
cutoff and full `eigh` below it; the dense path doubles as the oracle in
tests. The Lanczos start vector comes from a fixed seed: a naively chosen
deterministic vector such as all-ones can be *exactly* orthogonal to the
ground state (it is, for the Mott product state), which stalls Krylov
convergence in exact arithmetic.

Symmetric states are defined by the translation projector
P0 = (1/L) sum_m T^m; the minimal gap along a ramping trajectory is the
separation between the ground state and the lowest excitation inside the
P0 sector, found by deflating the asymmetric sector to a large constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .operators import HamiltonianTemplates, LatticeParams
from .ramp import RampPlan, trajectory_point

DENSE_CUTOFF = 2000
DEGENERACY_TOL = 1e-9  # units of g; far below physical gaps, above solver noise
SYMMETRIC_WEIGHT_THRESHOLD = 0.5
_LANCZOS_SEED = 20260811


class DegeneracyError(RuntimeError):
    """Lowest eigenvalues too close to separate reliably."""


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed; carries iteration diagnostics."""


@dataclass
class EigenPair:
    energy: float
    vector: np.ndarray
    symmetric_weight: float | None = None


@dataclass
class GapReport:
    """Minimal symmetric-sector gap along a trajectory."""

    s: float
    params: LatticeParams
    gap: float
    curve: list = field(default_factory=list)  # (s, params, gap_sym[, gap_any]) rows


def start_vector(dim: int) -> np.ndarray:
    return np.random.default_rng(_LANCZOS_SEED).standard_normal(dim)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(v))
    if np.iscomplexobj(v):
        phase = v[lead] / abs(v[lead])
        return v / phase
    return v if v[lead] > 0 else -v


def _lowest_eigh(h, k: int):
    dim = h.shape[0]
    k = min(k, dim)
    if dim <= DENSE_CUTOFF or k >= dim - 1:
        w, v = np.linalg.eigh(h.toarray() if sp.issparse(h) else np.asarray(h))
        return w[:k], v[:, :k]
    try:
        w, v = spla.eigsh(h, k=k, which="SA", v0=start_vector(dim), tol=1e-12)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"ARPACK converged {len(exc.eigenvalues)}/{k} eigenvalues "
            f"(dim={dim})"
        ) from exc
    order = np.argsort(w)
    return w[order], v[:, order]


def ground_state(h, translation=None, degeneracy_tol: float = DEGENERACY_TOL) -> EigenPair:
    """Lowest eigenpair with deterministic sign (largest amplitude positive).

    Raises DegeneracyError when the two lowest eigenvalues are closer than
    `degeneracy_tol`.
    """
    w, v = _lowest_eigh(h, 2)
    if len(w) > 1 and w[1] - w[0] < degeneracy_tol:
        raise DegeneracyError(
            f"ground state degenerate within {degeneracy_tol}: "
            f"E0={w[0]!r}, E1={w[1]!r}"
        )
    vec = _fix_sign(v[:, 0])
    weight = None
    if translation is not None:
        weight = symmetric_projector_weight(vec, translation)
    return EigenPair(float(w[0]), vec, weight)


def low_spectrum(h, count: int, translation=None) -> list[EigenPair]:
    """Lowest `count` eigenpairs, ascending, with symmetry weights filled.

    Degenerate multiplets are rotated to diagonalize the translation
    projector before weights are computed: asymmetric states come in
    degenerate momentum pairs that a plain eigensolve mixes arbitrarily.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    w, v = _lowest_eigh(h, count)
    pairs = [EigenPair(float(w[i]), v[:, i]) for i in range(count)]
    if translation is None:
        return pairs

    groups = []
    current = [0]
    for i in range(1, count):
        if w[i] - w[current[-1]] < DEGENERACY_TOL * max(1.0, abs(w[i])):
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)

    for group in groups:
        if len(group) > 1:
            block = np.column_stack([pairs[i].vector for i in group])
            projected = np.column_stack(
                [apply_symmetric_projector(block[:, j], translation)
                 for j in range(block.shape[1])]
            )
            gram = block.T @ projected
            _, rot = np.linalg.eigh((gram + gram.T) / 2)
            rotated = block @ rot
            for j, i in enumerate(group):
                pairs[i].vector = rotated[:, j]
        for i in group:
            pairs[i].vector = _fix_sign(pairs[i].vector)
            pairs[i].symmetric_weight = symmetric_projector_weight(
                pairs[i].vector, translation
            )
    return pairs


def apply_symmetric_projector(v: np.ndarray, translation) -> np.ndarray:
    """P0 v with P0 = (1/L) sum_{m=0}^{L-1} T^m."""
    sites = _orbit_length(translation)
    acc = v.copy()
    w = v
    for _ in range(sites - 1):
        w = translation @ w
        acc = acc + w
    return acc / sites


def symmetric_projector_weight(v: np.ndarray, translation) -> float:
    """Squared norm of the projection of `v` onto the k = 0 sector."""
    pv = apply_symmetric_projector(v, translation)
    return float(np.real(np.vdot(pv, pv)))


def _orbit_length(translation) -> int:
    """Order of the translation permutation (= L), via its cycle structure."""
    cached = getattr(translation, "_jcl_order", None)
    if cached is not None:
        return cached
    if not sp.issparse(translation):
        raise TypeError("translation operator must be a sparse permutation matrix")
    t = translation.tocsr()
    dim = t.shape[0]
    if t.nnz != dim:
        raise ValueError("translation matrix is not a permutation")
    perm = np.full(dim, -1, dtype=np.int64)
    perm[np.repeat(np.arange(dim), np.diff(t.indptr))] = t.indices
    order = 1
    seen = np.zeros(dim, dtype=bool)
    for start in range(dim):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        order = int(np.lcm(order, length))
    translation._jcl_order = order
    return order


def symmetric_pair(h, translation, v0=None, deflation_shift=None):
    """(E0, E1) of the two lowest translation-symmetric states.

    Asymmetric states are pushed to `deflation_shift` (default: above the
    Gershgorin bound of H), so plain Lanczos on the deflated operator
    returns the symmetric ground state and the lowest symmetric excitation
    without any classification step.
    """
    dim = h.shape[0]
    sites = _orbit_length(translation)
    if deflation_shift is None:
        deflation_shift = float(np.abs(h).sum(axis=1).max()) + 1.0
    shift = deflation_shift

    def matvec(v):
        acc = v.copy()
        w = v
        for _ in range(sites - 1):
            w = translation @ w
            acc = acc + w
        pv = acc / sites
        return h @ pv + shift * (v - pv)

    if dim <= 16:
        dense = np.column_stack([matvec(col) for col in np.eye(dim)])
        w = np.linalg.eigvalsh(dense)
        return float(w[0]), float(w[1]), None
    op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=float)
    try:
        w, v = spla.eigsh(
            op, k=2, which="SA",
            v0=v0 if v0 is not None else start_vector(dim), tol=1e-11,
        )
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"symmetric-pair solve failed after ARPACK iterations "
            f"({len(exc.eigenvalues)}/2 converged, dim={dim})"
        ) from exc
    order = np.argsort(w)
    return float(w[order[0]]), float(w[order[1]]), v[:, order[0]]


def gap_scan(
    templates: HamiltonianTemplates,
    plan: RampPlan,
    resolution: int = 33,
    refine_tol: float = 1e-4,
    degeneracy_tol: float = DEGENERACY_TOL,
    with_any_gap: bool = False,
) -> GapReport:
    """Locate the minimal symmetric gap along the plan's trajectory.

    Coarse scan over `resolution` equispaced s points, then golden-section
    refinement of s to `refine_tol`. Flat scans report the leftmost
    minimum. Raises DegeneracyError when any sampled gap drops below
    10x the degeneracy threshold (suspected level crossing).
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    translation = templates.translation

    warm = {"v0": None}

    def gap_at(s: float):
        p = trajectory_point(plan, s)
        h = templates.assemble(p.g, p.J, p.delta)
        e0, e1, vec = symmetric_pair(h, translation, v0=warm["v0"])
        if vec is not None:
            warm["v0"] = vec
        gap = e1 - e0
        if gap < 10 * degeneracy_tol:
            raise DegeneracyError(
                f"symmetric gap {gap!r} at s={s} suggests a level crossing"
            )
        return gap, p

    svals = np.linspace(0.0, 1.0, resolution)
    curve = []
    gaps = np.empty(resolution)
    for i, s in enumerate(svals):
        gap, p = gap_at(s)
        gaps[i] = gap
        row = [float(s), p, gap]
        if with_any_gap:
            h = templates.assemble(p.g, p.J, p.delta)
            w, _ = _lowest_eigh(h, 2)
            row.append(float(w[1] - w[0]))
        curve.append(tuple(row))

    i_min = int(np.argmin(gaps))  # argmin is leftmost on ties
    # flat within solver noise (eigsh tol 1e-11): leftmost-minimum tie-break
    flat = np.ptp(gaps) <= 1e-9 * max(1.0, float(np.abs(gaps).max()))
    if flat:
        i_min = 0
    if flat or i_min == 0 or i_min == resolution - 1:
        s_gp, gap_gp = float(svals[i_min]), float(gaps[i_min])
    else:
        s_gp, gap_gp = _golden_section(
            lambda s: gap_at(s)[0],
            float(svals[i_min - 1]), float(svals[i_min + 1]), refine_tol,
        )
    report = GapReport(s_gp, trajectory_point(plan, s_gp), gap_gp, curve)
    return report


def _golden_section(f, a: float, b: float, tol: float):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    s = (a + b) / 2.0
    return s, f(s)
