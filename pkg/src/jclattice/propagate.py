"""Time-dependent Schrodinger propagation along a ramp plan.

Classical fourth-order Runge-Kutta with the Hamiltonian sampled at step
midpoints; H(t) is assembled per step by scaling pre-built structural
blocks (see HamiltonianTemplates), so a step costs four sparse matvecs.
The default step is T/20000, halved until the norm-drift criterion (for
Hermitian runs) or the step-doubling state-difference criterion (for
dissipative runs) meets the requested tolerance.

Dissipative runs add the diagonal -i*D and never renormalize mid-flight;
the returned final state carries the decayed (or, for the literal
sigma-z convention, partly inflated) norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import HamiltonianTemplates, dissipative_rates
from .ramp import RampPlan
from .spectrum import ground_state, symmetric_projector_weight

DEFAULT_STEPS = 20000
MAX_REFINEMENTS = 6
NORM_BLOWUP_FACTOR = 1e6


class PropagationError(RuntimeError):
    pass


class StepSizeUnderflow(PropagationError):
    """Refinement exhausted without meeting the tolerance."""


class NormBlowUp(PropagationError):
    """State norm exploded (non-Hermitian misuse)."""


@dataclass
class Checkpoint:
    t: float
    g: float
    J: float
    delta: float
    norm: float
    overlap_instantaneous_ground: float
    symmetric_weight: float


@dataclass
class EvolutionResult:
    final_state: np.ndarray
    norm_drift: float
    symmetric_leakage: float
    step_count: int
    checkpoints: list = field(default_factory=list)


def fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """F = |<psi|phi>|^2 against a normalized target.

    psi may carry a non-unit norm (dissipative runs use the raw final
    amplitudes), in which case F scales with |c|^2 under psi -> c psi.
    """
    psi = np.asarray(psi)
    phi = np.asarray(phi)
    if psi.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {phi.shape}")
    return float(abs(np.vdot(psi, phi)) ** 2)


def evolve(
    templates: HamiltonianTemplates,
    plan: RampPlan,
    psi0: np.ndarray,
    tol: float = 1e-8,
    initial_steps: int = DEFAULT_STEPS,
    max_refinements: int = MAX_REFINEMENTS,
    checkpoints: int = 0,
) -> EvolutionResult:
    """Integrate i dpsi/dt = H(t) psi from t = 0 to plan.total_time.

    Hermitian evolution; the step count doubles until the final norm drift
    is within `tol`. `checkpoints` > 0 adds that many evenly spaced rows
    with the instantaneous-ground overlap (one eigensolve per row).
    """
    return _evolve_impl(templates, plan, psi0, None, tol, initial_steps,
                        max_refinements, checkpoints)


def evolve_dissipative(
    templates: HamiltonianTemplates,
    plan: RampPlan,
    psi0: np.ndarray,
    kappa: float,
    gamma: float,
    convention: str = "literal-sigma-z",
    tol: float = 1e-6,
    initial_steps: int = DEFAULT_STEPS,
    max_refinements: int = MAX_REFINEMENTS,
    checkpoints: int = 0,
) -> EvolutionResult:
    """Integrate under H(t) - i D without mid-flight renormalization.

    Norm drift is physical here, so accuracy is judged by step doubling:
    the run is accepted when doubling the step count moves the final state
    by less than `tol` (relative to its norm). The default tolerance is
    looser than the Hermitian norm-drift criterion because it bounds the
    full state error, not just its norm component.
    """
    decay = dissipative_rates(templates.table, kappa, gamma, convention)
    if not decay.any():
        decay = None  # kappa = gamma = 0 follows the Hermitian path exactly
    return _evolve_impl(templates, plan, psi0, decay, tol, initial_steps,
                        max_refinements, checkpoints)


def _evolve_impl(templates, plan, psi0, decay, tol, initial_steps,
                 max_refinements, checkpoints):
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (templates.dim,):
        raise ValueError(
            f"state has shape {psi0.shape}, basis dimension is {templates.dim}"
        )
    norm0 = np.linalg.norm(psi0)

    steps = int(initial_steps)
    if steps < 1:
        raise ValueError(f"step count must be positive, got {initial_steps}")
    previous = None
    for _ in range(max_refinements + 1):
        psi, cps = _rk4_run(templates, plan, psi0, decay, steps,
                            checkpoints, norm0)
        if decay is None:
            drift = abs(np.linalg.norm(psi) / norm0 - 1.0)
            if drift <= tol:
                return _result(templates, psi, drift, steps, cps, norm0)
        else:
            if previous is not None:
                diff = np.linalg.norm(psi - previous)
                if diff <= tol * max(1.0, np.linalg.norm(psi)):
                    drift = abs(np.linalg.norm(psi) / norm0 - 1.0)
                    return _result(templates, psi, drift, steps, cps, norm0)
            previous = psi
        steps *= 2
    raise StepSizeUnderflow(
        f"tolerance {tol} not met after {max_refinements} refinements "
        f"(final step count {steps // 2})"
    )


def _result(templates, psi, drift, steps, cps, norm0):
    nrm = np.linalg.norm(psi)
    weight = symmetric_projector_weight(psi / nrm, templates.translation)
    return EvolutionResult(
        final_state=psi,
        norm_drift=float(drift),
        symmetric_leakage=float(1.0 - weight),
        step_count=steps,
        checkpoints=cps,
    )


def _rk4_run(templates, plan, psi0, decay, steps, n_checkpoints, norm0):
    shared = templates._shared
    dt = plan.total_time / steps
    psi = psi0.copy()

    checkpoint_steps = set()
    if n_checkpoints > 0:
        marks = np.linspace(0, steps, n_checkpoints, dtype=int)
        checkpoint_steps = set(int(m) for m in marks)
    cps = []
    if 0 in checkpoint_steps:
        cps.append(_checkpoint(templates, plan, 0.0, psi))

    blowup2 = (NORM_BLOWUP_FACTOR * norm0) ** 2

    def rhs(u_fraction, vec):
        p = plan.params_at_fraction(u_fraction)
        shared.data = templates.data_for(p.g, p.J, p.delta)
        out = shared @ vec
        out *= -1j
        if decay is not None:
            out -= decay * vec
        return out

    for k in range(steps):
        u0 = k / steps
        um = (k + 0.5) / steps
        u1 = (k + 1) / steps
        k1 = rhs(u0, psi)
        k2 = rhs(um, psi + (0.5 * dt) * k1)
        # reuse H(t + dt/2) already loaded in `shared`
        w = psi + (0.5 * dt) * k2
        k3 = shared @ w
        k3 *= -1j
        if decay is not None:
            k3 -= decay * w
        k4 = rhs(u1, psi + dt * k3)
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % 256 == 0 and np.vdot(psi, psi).real > blowup2:
            raise NormBlowUp(
                f"norm exceeded {NORM_BLOWUP_FACTOR} x initial at step {k}"
            )
        if (k + 1) in checkpoint_steps:
            cps.append(_checkpoint(templates, plan, u1, psi))
    return psi, cps


def _checkpoint(templates, plan, u, psi):
    p = plan.params_at_fraction(u)
    h = templates.assemble_copy(p.g, p.J, p.delta)
    gs = ground_state(h)
    nrm = np.linalg.norm(psi)
    unit = psi / nrm
    return Checkpoint(
        t=u * plan.total_time,
        g=p.g,
        J=p.J,
        delta=p.delta,
        norm=float(nrm),
        overlap_instantaneous_ground=fidelity(unit, gs.vector),
        symmetric_weight=symmetric_projector_weight(unit, templates.translation),
    )
