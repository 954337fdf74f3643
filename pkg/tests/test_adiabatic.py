"""Cavity passage dynamics: dark manifolds, guards, fluxes, pulse shapes.

Evolution tests here run short schedules with modest drive so each case
finishes in well under a second; the long-passage behavior is covered by the
acceptance suite.
"""

import math

import numpy as np
import pytest

from clonesim.adiabatic import (
    DynamicsReport,
    MixingAngle,
    PulseSchedule,
    Side,
    SystemParams,
    alice_initial,
    alice_space,
    bob_initial,
    coupling_modulation,
    dark_states,
    emission_channels,
    emission_identity_check,
    evolve,
    hamiltonian,
    mixing_angle,
    pulse_overlap,
    pulse_overlap_complex,
    pulse_shape_analytic,
)
from clonesim.qstate import apply, basis_state, inner, normalize

FAST = PulseSchedule(omega_max=2.0, t_total=25.0)


# --- parameters and schedules ----------------------------------------------


def test_side_strings_coerce():
    p = SystemParams(side="bob")
    assert p.side is Side.BOB


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(side=Side.ALICE, g=0.0)
    with pytest.raises(ValueError):
        SystemParams(side=Side.ALICE, kappa=-1.0)
    with pytest.raises(ValueError):
        SystemParams(side=Side.ALICE, epsilon=1.0)


def test_pulse_schedule_ramps_then_holds():
    om = PulseSchedule(omega_max=4.0, t_total=40.0, hold_fraction=0.25)
    assert om.value(0.0) == 0.0
    assert om.t_ramp == pytest.approx(30.0)
    hold = np.linspace(om.t_ramp, 40.0, 7)
    assert np.allclose(om.value(hold), 4.0)     # drive stays on while the photon leaks
    ramp = om.value(np.linspace(0.0, om.t_ramp, 50))
    assert np.all(np.diff(ramp) >= 0)


@pytest.mark.parametrize("shape", ["sin2", "tanh", "linear"])
def test_pulse_shapes_stay_in_range(shape):
    om = PulseSchedule(omega_max=3.0, t_total=30.0, shape=shape)
    vals = om.value(np.linspace(0.0, 30.0, 301))
    assert vals.min() >= -1e-15
    assert vals.max() == pytest.approx(3.0, rel=1e-6)


def test_unknown_pulse_shape_rejected():
    with pytest.raises(ValueError):
        PulseSchedule(shape="square")


def test_mixing_angle_conventions():
    g = 1.3
    om = 2.0
    src = MixingAngle.for_source(g, om)
    rem = MixingAngle.for_remote(g, om)
    assert src.cos == pytest.approx(g / math.hypot(g, om))
    assert rem.cos == pytest.approx(math.sqrt(2) * g / math.sqrt(2 * g * g + om * om))
    assert src.cos ** 2 + src.sin ** 2 == pytest.approx(1.0)
    # driving the remote node sqrt(2) harder matches the source angle
    matched = MixingAngle.for_remote(g, om * math.sqrt(2))
    assert matched.cos == pytest.approx(src.cos, abs=1e-15)


def test_coupling_modulation_changes_g():
    p = SystemParams(side=Side.ALICE)
    assert p.g_at(5.0) == p.g
    pm = coupling_modulation(p, epsilon=0.1, nu=0.5)
    assert pm.g_at(0.0) == pytest.approx(p.g)           # sin modulation starts at zero
    assert pm.g_at(math.pi) == pytest.approx(p.g * 1.1)  # quarter period of nu = 0.5


# --- dark manifold -----------------------------------------------------------


@pytest.mark.parametrize("delta", [0.0, 0.7, -2.0])
@pytest.mark.parametrize("t", [5.0, 12.0, 20.0])
def test_source_dark_states_are_null(delta, t):
    p = SystemParams(side=Side.ALICE, gamma=0.0, delta=delta)
    d1, d2 = dark_states(p, FAST, t)
    h = hamiltonian(p, FAST, t)
    assert apply(h, d1).norm_sq() < 1e-24
    assert apply(h, d2).norm_sq() < 1e-24
    assert d1.norm_sq() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("delta", [0.0, 1.5])
def test_remote_dark_state_is_null(delta):
    p = SystemParams(side=Side.BOB, gamma=0.0, delta=delta)
    d = dark_states(p, FAST, 10.0)
    assert apply(hamiltonian(p, FAST, 10.0), d).norm_sq() < 1e-24


def test_dark_state_at_zero_drive_is_bare_atom():
    p = SystemParams(side=Side.ALICE)
    d1, d2 = dark_states(p, FAST, 0.0)
    assert abs(inner(d1 * 0.6 + d2 * 0.8, alice_initial(0.6, 0.8))) == pytest.approx(1.0)


# --- evolution guards ---------------------------------------------------------


def test_evolve_rejects_coarse_step():
    p = SystemParams(side=Side.ALICE)
    with pytest.raises(ValueError):
        evolve(alice_initial(1.0, 0.0), p, FAST, dt=FAST.t_total / 999)


def test_evolve_rejects_unnormalized_initial():
    p = SystemParams(side=Side.ALICE)
    bad = alice_initial(1.0, 0.0) * 0.9
    with pytest.raises(ValueError):
        evolve(bad, p, FAST, dt=0.025)


def test_evolve_rejects_wrong_space():
    p = SystemParams(side=Side.BOB)
    with pytest.raises(ValueError):
        evolve(alice_initial(1.0, 0.0), p, FAST, dt=0.025)


def test_fast_ramp_warns_about_excited_population():
    p = SystemParams(side=Side.ALICE, kappa=0.0, gamma=0.0)
    rush = PulseSchedule(omega_max=20.0, t_total=10.0)
    with pytest.warns(RuntimeWarning):
        evolve(alice_initial(0.6, 0.8), p, rush, dt=0.01)


# --- fluxes and channels -------------------------------------------------------


@pytest.fixture(scope="module")
def emitted():
    import warnings
    p = SystemParams(side=Side.ALICE)
    # the short schedule is deliberately brisk; silence the adiabaticity monitor
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return evolve(alice_initial(0.6, 0.8), p, FAST, dt=0.025)


def test_emission_accounting_closes(emitted):
    assert isinstance(emitted, DynamicsReport)
    assert emitted.closure_error < 1e-8
    assert emitted.emission_prob > 0.9          # Omega=2 leaves a little behind
    assert emitted.spont_loss < 0.1


def test_channel_split_follows_input_weights(emitted):
    w = emitted.channel_weights
    assert w["L"] / (w["L"] + w["R"]) == pytest.approx(0.36, abs=1e-9)


def test_envelope_carries_all_channel_weight(emitted):
    total = np.trapezoid(np.abs(emitted.pulse_shape) ** 2, emitted.t_grid)
    assert total == pytest.approx(emitted.emission_prob, rel=1e-6)


def test_remote_channels_pin_atom_state():
    p = SystemParams(side=Side.BOB)
    ch = emission_channels(p)
    assert ch["L"].level("atomB") == "gR"
    assert ch["R"].level("atomB") == "gL"


def test_remote_passage_splits_evenly():
    import warnings
    p = SystemParams(side=Side.BOB)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = evolve(bob_initial(), p,
                     PulseSchedule(omega_max=2.0 * math.sqrt(2), t_total=25.0), dt=0.025)
    w = rep.channel_weights
    assert w["L"] == pytest.approx(w["R"], rel=1e-9)
    assert rep.closure_error < 1e-8


# --- analytic pulse -------------------------------------------------------------


def test_emission_identity():
    p = SystemParams(side=Side.ALICE)
    grid = np.linspace(0.0, FAST.t_total, 4001)
    lhs, rhs = emission_identity_check(p, FAST, grid)
    assert abs(lhs - rhs) < 1e-6


def test_numeric_envelope_matches_analytic(emitted):
    # brisk passage: agreement is looser here than on the long default schedule
    analytic = pulse_shape_analytic(emitted.params, emitted.omega, emitted.t_grid)
    ov = pulse_overlap(emitted.t_grid, emitted.pulse_shape, emitted.t_grid, analytic)
    assert ov > 0.97


def test_pulse_overlap_normalization():
    t = np.linspace(0.0, 10.0, 501)
    f = np.exp(-((t - 5.0) ** 2)) * (1.0 + 0.0j)
    assert pulse_overlap(t, f, t, f) == pytest.approx(1.0, abs=1e-12)
    assert pulse_overlap_complex(t, f, t, 1j * f) == pytest.approx(1j, abs=1e-12)


def test_pulse_shape_analytic_rejects_bad_grid():
    p = SystemParams(side=Side.ALICE)
    with pytest.raises(ValueError):
        pulse_shape_analytic(p, FAST, np.array([1.0, 2.0, 3.0]))   # must start at 0
    with pytest.raises(ValueError):
        pulse_shape_analytic(p, FAST, np.array([0.0, 1.0]))        # too short
