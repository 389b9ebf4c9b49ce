import math

import numpy as np
import pytest

from jclattice.basis import LatticeShape, enumerate_basis
from jclattice.operators import HamiltonianTemplates
from jclattice.propagate import (
    NormBlowUp,
    StepSizeUnderflow,
    evolve,
    evolve_dissipative,
    fidelity,
)
from jclattice.ramp import RampPlan, RampSchedule
from jclattice.spectrum import ground_state
from jclattice.states import mi_ground_state, sf_ground_state


def plan_mi_sf(T, rj=1.0, jt=0.5):
    return RampPlan(RampSchedule(1.0, 1.0), RampSchedule(0.0, jt, rj),
                    RampSchedule(0.0, 0.0), T)


def constant_plan(T, g=1.0, J=0.2, d=0.0):
    return RampPlan(RampSchedule(g, g), RampSchedule(J, J),
                    RampSchedule(d, d), T)


def test_fidelity_basics():
    a = np.array([1.0, 0.0], complex)
    b = np.array([0.0, 1.0], complex)
    assert fidelity(a, a) == pytest.approx(1.0)
    assert fidelity(a, b) == 0.0
    c = 0.5 - 0.3j
    assert fidelity(c * a, a) == pytest.approx(abs(c) ** 2)
    with pytest.raises(ValueError):
        fidelity(a, np.ones(3, complex))


def test_stationary_eigenstate(table33, templates33):
    plan = constant_plan(6.0)
    gs = ground_state(templates33.assemble_copy(1.0, 0.2, 0.0))
    res = evolve(templates33, plan, gs.vector, initial_steps=4000)
    assert abs(abs(np.vdot(gs.vector, res.final_state)) - 1) < 1e-8


def test_norm_conservation_and_leakage(table33, templates33):
    plan = plan_mi_sf(15 * math.pi)
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    res = evolve(templates33, plan, psi0)
    assert res.norm_drift <= 1e-8
    assert res.symmetric_leakage <= 1e-8


def test_step_halving_converges_fidelity(table33, templates33):
    plan = plan_mi_sf(4 * math.pi)
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    tgt = ground_state(templates33.assemble_copy(1.0, 0.5, 0.0)).vector
    f1 = fidelity(evolve(templates33, plan, psi0, initial_steps=4000).final_state, tgt)
    f2 = fidelity(evolve(templates33, plan, psi0, initial_steps=8000).final_state, tgt)
    assert abs(f1 - f2) < 1e-6


def test_adiabatic_monotonicity_small_lattice(table33, templates33):
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    tgt = ground_state(templates33.assemble_copy(1.0, 0.5, 0.0)).vector
    fids = []
    for T in (5 * math.pi, 10 * math.pi, 15 * math.pi):
        res = evolve(templates33, plan_mi_sf(T), psi0)
        fids.append(fidelity(res.final_state, tgt))
    assert fids[0] < fids[1] < fids[2]


def test_time_reversal_consistency(table33, templates33):
    # H(t) is real symmetric, so the reversed-plan propagator is the
    # complex conjugate of the inverse: conj(evolve_rev(conj(psi_T))) = psi_0
    plan = plan_mi_sf(3 * math.pi, rj=1.0)
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    fwd = evolve(templates33, plan, psi0, initial_steps=6000)
    back = evolve(templates33, plan.reversed(),
                  np.conj(fwd.final_state), initial_steps=6000)
    psi_back = np.conj(back.final_state)
    assert fidelity(psi_back, psi0) > 1 - 1e-6


def test_landau_zener_against_closed_form():
    # linear sweep of the detuning through the (1,down)/(0,up) crossing;
    # transition probability exp(-2 pi g^2 / rate) in the wide-window limit
    table = enumerate_basis(LatticeShape(1, 1))
    tpl = HamiltonianTemplates(table)
    g, width, T = 0.1, 32.0, 320.0
    plan = RampPlan(RampSchedule(g, g), RampSchedule(0.0, 0.0),
                    RampSchedule(-width, width, 1.0), T)
    psi0 = np.array([1.0, 0.0], complex)  # photon = diabatic ground at -width
    res = evolve(tpl, plan, psi0, initial_steps=80000)
    stay = abs(res.final_state[0]) ** 2
    rate = 2 * width / T
    lz = math.exp(-2 * math.pi * g**2 / rate)
    assert stay == pytest.approx(lz, rel=0.01)


def test_dissipative_zero_rates_matches_hermitian(table33, templates33):
    plan = plan_mi_sf(2 * math.pi)
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    a = evolve(templates33, plan, psi0, initial_steps=2000)
    b = evolve_dissipative(templates33, plan, psi0, kappa=0.0, gamma=0.0,
                           initial_steps=2000)
    assert np.array_equal(a.final_state, b.final_state)


def test_dissipative_norm_decays(table33, templates33):
    plan = plan_mi_sf(4 * math.pi)
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    res = evolve_dissipative(templates33, plan, psi0, kappa=0.05, gamma=0.0,
                             convention="number-conserving",
                             initial_steps=4000, checkpoints=6)
    norms = [c.norm for c in res.checkpoints]
    assert all(np.diff(norms) < 0)
    assert np.linalg.norm(res.final_state) < 1.0


def test_dissipative_literal_constant_inflates_norm(table33, templates33):
    # all-down-heavy states gain amplitude under the literal sigma-z form
    plan = constant_plan(2.0, g=0.0, J=0.3, d=-1.0)
    psi0 = sf_ground_state(table33)  # photons only, sum sigma_z = -L
    res = evolve_dissipative(templates33, plan, psi0, kappa=0.0, gamma=0.1,
                             convention="literal-sigma-z", initial_steps=500)
    # norm^2 grows as e^{+gamma L t} when every populated state is all-down
    assert np.linalg.norm(res.final_state) ** 2 == pytest.approx(
        math.exp(0.1 * 3 * 2.0), rel=1e-6)


def test_norm_blowup_guard(table33, templates33):
    plan = constant_plan(40.0, g=0.0, J=0.3)
    psi0 = sf_ground_state(table33)
    with pytest.raises(NormBlowUp):
        evolve_dissipative(templates33, plan, psi0, kappa=0.0, gamma=2.0,
                           convention="literal-sigma-z", initial_steps=4000,
                           tol=1e-3)


def test_step_underflow(table33, templates33):
    plan = plan_mi_sf(2 * math.pi)
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    with pytest.raises(StepSizeUnderflow):
        evolve(templates33, plan, psi0, tol=1e-16, initial_steps=64,
               max_refinements=1)


def test_checkpoints_schema(table33, templates33):
    plan = plan_mi_sf(2 * math.pi)
    psi0 = mi_ground_state(table33, 0.0, 1.0)
    res = evolve(templates33, plan, psi0, initial_steps=1000, checkpoints=4)
    assert len(res.checkpoints) == 4
    assert res.checkpoints[0].t == 0.0
    assert res.checkpoints[-1].t == pytest.approx(2 * math.pi)
    assert res.checkpoints[0].overlap_instantaneous_ground == pytest.approx(1.0, abs=1e-9)
    for c in res.checkpoints:
        assert 0.0 <= c.symmetric_weight <= 1.0 + 1e-10


def test_dimension_mismatch(table33, templates33):
    with pytest.raises(ValueError):
        evolve(templates33, plan_mi_sf(1.0), np.ones(5, complex))
