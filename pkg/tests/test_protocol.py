import numpy as np
import pytest

from squidqed.dynamics import IntegratorConfig
from squidqed.hamiltonians import SystemParams
from squidqed.linalg import pair_basis_state, pair_index
from squidqed.metrics import pure_fidelity, trace_distance
from squidqed.protocol import (
    CavityWindow,
    ClassicalDrive,
    MODE_AS_PUBLISHED,
    MODE_PHYSICAL_PULSE,
    MODEL_EFFECTIVE,
    MODEL_FULL,
    PhaseCorrection,
    canonical_sequence,
    phase_correction,
    prepare_initial,
    retarget_pulse,
    run_protocol,
    spectator_frame_phase,
    target_state,
)

rng = np.random.default_rng(31)


def state_after_window1():
    psi = np.zeros(9, dtype=complex)
    psi[pair_index(1, 0)] = np.sqrt(1.0 / 3.0)
    psi[pair_index(2, 2)] = 1j * np.sqrt(2.0 / 3.0)
    return psi


def state_after_retarget():
    psi = np.zeros(9, dtype=complex)
    psi[pair_index(1, 1)] = np.sqrt(1.0 / 3.0)
    psi[pair_index(2, 2)] = 1j * np.sqrt(2.0 / 3.0)
    return psi


def state_after_window2():
    amp = np.sqrt(1.0 / 3.0)
    psi = np.zeros(9, dtype=complex)
    psi[pair_index(1, 1)] = amp
    psi[pair_index(2, 2)] = 1j * np.exp(-1j * np.pi / 4) * amp
    psi[pair_index(0, 0)] = np.exp(-1j * np.pi / 4) * amp
    return psi


# --- initial state -----------------------------------------------------------

def test_prepare_initial_as_published_amplitudes():
    psi = prepare_initial(MODE_AS_PUBLISHED)
    assert psi[pair_index(0, 0)] == pytest.approx(-1j * np.sqrt(2.0 / 3.0))
    assert psi[pair_index(1, 0)] == pytest.approx(np.sqrt(1.0 / 3.0))
    assert np.abs(psi).sum() == pytest.approx(
        np.sqrt(2.0 / 3.0) + np.sqrt(1.0 / 3.0))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-15)


def test_prepare_initial_physical_pulse_populations():
    psi = prepare_initial(MODE_PHYSICAL_PULSE)
    assert abs(psi[pair_index(1, 0)]) ** 2 == pytest.approx(1.0 / 3.0)
    assert abs(psi[pair_index(0, 0)]) ** 2 == pytest.approx(2.0 / 3.0)
    assert psi[pair_index(0, 0)].imag == 0.0  # quadrature sits on |1>


def test_prepare_initial_rejects_unknown_mode():
    with pytest.raises(ValueError):
        prepare_initial("other")


def test_modes_agree_after_phase_reoptimization():
    p = SystemParams()
    fids = []
    for mode in (MODE_AS_PUBLISHED, MODE_PHYSICAL_PULSE):
        res = run_protocol(p, MODEL_EFFECTIVE, mode, phase_optimized=True)
        fids.append(res.fidelity_phase_optimized)
    assert fids[0] == pytest.approx(1.0, abs=1e-9)
    assert fids[1] == pytest.approx(1.0, abs=1e-9)


def test_physical_pulse_plain_fidelity_is_one_ninth():
    # the canonical correction phases are written for the as-published
    # quadrature; the physical-pulse variant needs re-optimized phases
    res = run_protocol(SystemParams(), MODEL_EFFECTIVE, MODE_PHYSICAL_PULSE)
    assert res.fidelity_to_target == pytest.approx(1.0 / 9.0, abs=1e-9)


# --- canonical sequence ------------------------------------------------------

def test_canonical_sequence_timing_certificate():
    p = SystemParams(g=1.0, delta=12.0, k=7, k_prime=3)
    seq = canonical_sequence(p)
    cert = seq.certificate
    assert cert.lam_t1 == np.pi / 2
    assert cert.lam_t2 == np.pi / 4
    assert cert.omega_t1_over_pi == 7
    assert cert.omega_prime_t2_over_two_pi == 3
    w1, w2 = seq.steps[1], seq.steps[3]
    assert p.lam * w1.duration == pytest.approx(np.pi / 2, abs=1e-12)
    assert w1.drive_rabi * w1.duration == pytest.approx(7 * np.pi, abs=1e-10)
    assert p.lam * w2.duration == pytest.approx(np.pi / 4, abs=1e-12)
    assert w2.drive_rabi * w2.duration == pytest.approx(6 * np.pi, abs=1e-10)


def test_canonical_sequence_shape():
    seq = canonical_sequence(SystemParams())
    kinds = [type(s) for s in seq.steps]
    assert kinds == [ClassicalDrive, CavityWindow, ClassicalDrive,
                     CavityWindow, PhaseCorrection]
    assert seq.steps[0].transition == "01" and seq.steps[0].target == 0
    assert seq.steps[2].transition == "01" and seq.steps[2].target == 1
    assert seq.steps[4].phases == (np.pi / 4, 0.0, -np.pi / 4)


def test_window2_drive_flag_propagates():
    seq = canonical_sequence(SystemParams(), drive_on_window2=False)
    assert seq.steps[3].drive_on is False


# --- individual steps -------------------------------------------------------

def test_retarget_pulse_moves_population_exactly():
    out = retarget_pulse(state_after_window1())
    assert np.abs(out - state_after_retarget()).max() < 1e-15


def test_retarget_pulse_leaves_level_two_alone():
    psi = pair_basis_state(2, 2)
    assert np.abs(retarget_pulse(psi) - psi).max() == 0.0


def test_retarget_pulse_twice_restores_population():
    psi = state_after_window1()
    twice = retarget_pulse(retarget_pulse(psi))
    assert np.abs(np.abs(twice) - np.abs(psi)).max() < 1e-12


def test_retarget_pulse_on_density_matrix():
    rho = np.outer(state_after_window1(), state_after_window1().conj())
    out = retarget_pulse(rho)
    expected = np.outer(state_after_retarget(), state_after_retarget().conj())
    assert np.abs(out - expected).max() < 1e-12


def test_phase_correction_reaches_target():
    out = phase_correction(state_after_window2())
    tgt = target_state()
    assert np.abs(out - tgt).max() < 1e-12
    # all three relative phases vanish
    angles = np.angle(out[[0, 4, 8]])
    assert np.abs(angles - angles[0]).max() < 1e-12


def test_phase_correction_preserves_populations():
    for _ in range(5):
        v = rng.normal(size=9) + 1j * rng.normal(size=9)
        v /= np.linalg.norm(v)
        out = phase_correction(v, phases=tuple(rng.uniform(-np.pi / 2, np.pi / 2, 3)))
        assert np.abs(np.abs(out) ** 2 - np.abs(v) ** 2).max() < 1e-12
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


def test_phase_correction_leaves_middle_level():
    psi = pair_basis_state(1, 1)
    assert np.abs(phase_correction(psi) - psi).max() == 0.0


def test_spectator_frame_phase_support():
    ph = spectator_frame_phase(duration=2.0, rabi=3.0, lam=0.1)
    # doubly-coupled and |1,1> entries are untouched
    for idx in (pair_index(0, 0), pair_index(0, 2), pair_index(2, 0),
                pair_index(2, 2), pair_index(1, 1)):
        assert ph[idx] == 1.0
    expected = np.exp(1j * (3.0 * 2.0 + 0.1 * 2.0 / 2.0))
    for idx in (pair_index(1, 0), pair_index(1, 2), pair_index(0, 1),
                pair_index(2, 1)):
        assert ph[idx] == pytest.approx(expected, abs=1e-15)


# --- target state -----------------------------------------------------------

def test_target_state_properties():
    tgt = target_state()
    assert np.linalg.norm(tgt) == pytest.approx(1.0, abs=1e-15)
    from squidqed.metrics import entanglement_entropy, partial_trace

    reduced = partial_trace(np.outer(tgt, tgt.conj()), (0,), (3, 3))
    assert np.abs(reduced - np.eye(3) / 3.0).max() < 1e-15
    assert entanglement_entropy(np.outer(tgt, tgt.conj())) == pytest.approx(
        np.log2(3.0), abs=1e-12)


# --- end-to-end: effective model ------------------------------------------

@pytest.mark.parametrize("k", [1, 3])
@pytest.mark.parametrize("k_prime", [1, 2])
def test_effective_run_hits_target_exactly(k, k_prime):
    p = SystemParams(delta=15.0, k=k, k_prime=k_prime)
    res = run_protocol(p, MODEL_EFFECTIVE, MODE_AS_PUBLISHED)
    assert res.fidelity_to_target == pytest.approx(1.0, abs=1e-9)
    assert res.entropy == pytest.approx(np.log2(3.0), abs=1e-9)
    assert res.negativity == pytest.approx(1.0, abs=1e-9)


def test_effective_final_state_independent_of_multipliers():
    finals = []
    for k, kp in [(1, 1), (4, 2), (99, 5)]:
        res = run_protocol(SystemParams(delta=9.0, k=k, k_prime=kp))
        finals.append(res.final_state)
    for other in finals[1:]:
        assert trace_distance(finals[0], other) < 1e-12


def test_effective_snapshots_match_closed_forms():
    res = run_protocol(SystemParams(), MODEL_EFFECTIVE, MODE_AS_PUBLISHED)
    labels = [s.label for s in res.snapshots]
    assert labels == ["initial-superposition", "cavity-window-1",
                      "retarget-pulse", "cavity-window-2", "phase-correction"]
    expected = [prepare_initial(), state_after_window1(), state_after_retarget(),
                state_after_window2(), target_state()]
    for snap, ref in zip(res.snapshots, expected):
        assert pure_fidelity(snap.pure, ref) == pytest.approx(1.0, abs=1e-9)
        assert np.abs(snap.pure - ref).max() < 1e-9  # amplitude-exact, no phase gap


def test_effective_window2_drive_flag_is_immaterial():
    on = run_protocol(SystemParams(), drive_on_window2=True)
    off = run_protocol(SystemParams(), drive_on_window2=False)
    assert trace_distance(on.final_state, off.final_state) < 1e-12


def test_effective_thermal_density_route_matches_pure_route():
    pure = run_protocol(SystemParams(nbar=0.0))
    thermal = run_protocol(SystemParams(nbar=0.5, n_max=16))
    assert trace_distance(pure.final_state, thermal.final_state) < 1e-12
    assert thermal.fidelity_to_target == pytest.approx(1.0, abs=1e-10)


def test_result_fidelity_bounds():
    res = run_protocol(SystemParams())
    assert 0.0 <= res.fidelity_to_target <= 1.0
    assert res.norm_deviation < 1e-12
    assert res.regime.regime_ok
    assert res.warnings == ()


def test_run_protocol_validates_labels():
    with pytest.raises(ValueError):
        run_protocol(SystemParams(), model="nope")
    with pytest.raises(ValueError):
        run_protocol(SystemParams(), mode="nope")


# --- end-to-end: full model (cheap shallow point) ---------------------------

def test_full_run_shallow_point_diagnostics():
    p = SystemParams(delta=2.0, n_max=6)  # k pinned to 20, ratios (10, 4)
    cfg = IntegratorConfig(dt_initial=0.01, tolerance=1e-6)
    res = run_protocol(p, MODEL_FULL, cfg=cfg)
    assert 0.0 <= res.fidelity_to_target <= 1.0
    assert res.entropy is None  # reduced pair state is mixed
    assert res.negativity >= 0.0
    assert not res.regime.regime_ok
    assert any("regime" in w for w in res.warnings)
    assert set(res.integrator) == {"window1", "window2"}
    assert res.integrator["window1"].dt < 0.01
    assert res.norm_deviation < 1e-9


def test_full_run_thermal_mixture_route():
    p = SystemParams(delta=2.0, n_max=12, nbar=0.2, k_prime=2)
    cfg = IntegratorConfig(dt_initial=0.01, tolerance=1e-5)
    res = run_protocol(p, MODEL_FULL, cfg=cfg)
    assert 0.0 <= res.fidelity_to_target <= 1.0
    assert abs(np.trace(res.final_state).real - 1.0) < 1e-9
    assert res.norm_deviation < 1e-9
