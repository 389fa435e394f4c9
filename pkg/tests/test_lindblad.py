"""Chord damping under hermitian couplings: rates, the decoherence
distance functional, continuous and Trotter-split evolution."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from chordwigner import make_system, polynomial_system
from chordwigner.lindblad import (
    NonHermitianError,
    decoherence_distance,
    energy_channel,
    evolution_trace,
    evolve_contribution,
    hermitian_decay_rate,
    lindblad_rate,
    make_channel,
    momentum_channel,
    polynomial_channel,
    position_channel,
    trotter_evolve,
    write_trace,
)
from chordwigner.shells import Chord, build_shell, find_chords

harmonic = make_system("harmonic")
quartic = make_system("quartic")
frozen = polynomial_system({}, name="zero")  # H = 0: tips never move


def bare_chord(x_plus, x_minus, action=0.0):
    return Chord(x_plus=np.asarray(x_plus, float),
                 x_minus=np.asarray(x_minus, float),
                 theta_plus=0.0, theta_minus=0.0, action=action,
                 wedge=1.0, tau=0.0, caustic=False)


REF = bare_chord((0.8660254, 0.5), (-0.8660254, 0.5), action=0.6142)


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

def test_rate_reduces_to_hermitian_form():
    rng = np.random.default_rng(5)
    shell = build_shell(harmonic, 0.5)
    for _ in range(12):
        x = rng.uniform(-0.5, 0.5, 2)
        chords = [c for c in find_chords(shell, x) if not c.caustic]
        if not chords:
            continue
        ch = chords[0]
        coeffs = {(1, 0): rng.normal(), (0, 1): rng.normal(),
                  (0, 2): rng.normal()}
        chan = polynomial_channel(coeffs)
        got = lindblad_rate(ch, [chan], hbar=0.05, amplitude=1.0)
        want = -np.cos(ch.action / 0.05) * hermitian_decay_rate(
            ch, [chan], 0.05)
        assert_allclose(got, want, atol=1e-12 * max(1.0, abs(want)))


def test_rate_constant_channel_zero():
    const_real = polynomial_channel({(0, 0): 2.5})
    const_complex = polynomial_channel({(0, 0): 1.0 + 2.0j})
    assert lindblad_rate(REF, [const_real], 0.05, amplitude=1.0) == 0.0
    assert abs(lindblad_rate(REF, [const_complex], 0.05, amplitude=1.0)) < 1e-12


def test_rate_complex_ladder_channel():
    # L = (q + ip)/sqrt(2) evaluated by independent complex arithmetic
    chan = polynomial_channel({(0, 1): 1 / np.sqrt(2),
                               (1, 0): 1j / np.sqrt(2)})
    assert not chan.hermitian
    hbar = 0.05
    lp = (REF.x_plus[1] + 1j * REF.x_plus[0]) / np.sqrt(2)
    lm = (REF.x_minus[1] + 1j * REF.x_minus[0]) / np.sqrt(2)
    want = (1 / hbar) * (
        (lp * np.conj(lm) * np.exp(1j * REF.action / hbar)).real
        - 0.5 * (abs(lp) ** 2 + abs(lm) ** 2) * np.cos(REF.action / hbar))
    got = lindblad_rate(REF, [chan], hbar, amplitude=1.0)
    assert_allclose(got, want, atol=1e-12)


def test_hermitian_decay_rate_examples():
    qchan = position_channel()
    vertical = bare_chord((0.8660254, 0.5), (-0.8660254, 0.5))
    assert hermitian_decay_rate(vertical, [qchan], 0.1) == 0.0
    spread = bare_chord((0.0, 1.0), (0.0, -1.0))
    assert_allclose(hermitian_decay_rate(spread, [qchan], 0.1), 20.0,
                    atol=1e-12)
    both = [position_channel(), momentum_channel()]
    assert_allclose(
        hermitian_decay_rate(spread, both, 0.1),
        hermitian_decay_rate(spread, [both[0]], 0.1)
        + hermitian_decay_rate(spread, [both[1]], 0.1), atol=1e-14)
    with pytest.raises(NonHermitianError):
        hermitian_decay_rate(spread, [polynomial_channel({(1, 0): 1j})], 0.1)


# ---------------------------------------------------------------------------
# decoherence distance
# ---------------------------------------------------------------------------

def test_distance_trivial_cases():
    qchan = position_channel()
    const = polynomial_channel({(0, 0): 3.0})
    rec = decoherence_distance((0.2, 0.1), (0.2, 0.1), harmonic, [qchan], 1.0)
    assert rec.distance < 1e-12
    rec = decoherence_distance((0.5, 0.3), (-0.2, 0.1), harmonic, [const], 1.0)
    assert rec.distance == 0.0
    rec = decoherence_distance((0.5, 0.3), (-0.2, 0.1), harmonic, [qchan], 0.0)
    assert rec.t == 0.0 and rec.d2 == 0.0


def test_distance_harmonic_closed_form():
    # rigid rotation: q+ - q- = |xi| sin t', so D^2(t) = |xi|^2 (t/2 - sin 2t / 4)
    qchan = position_channel()
    rec = decoherence_distance((0.8660254, 0.5), (-0.8660254, 0.5),
                               harmonic, [qchan], np.pi)
    assert_allclose(rec.d2, 3.0 * np.pi / 2.0, atol=1e-8)
    partial = rec.partial_d2()
    assert partial[0] == 0.0
    assert np.all(np.diff(partial) >= -1e-14)


def test_distance_additivity():
    qchan = position_channel()
    t1, t2 = 0.7, 0.9
    whole = decoherence_distance((0.8660254, 0.5), (-0.8660254, 0.5),
                                 quartic, [qchan], t1 + t2)
    first = decoherence_distance((0.8660254, 0.5), (-0.8660254, 0.5),
                                 quartic, [qchan], t1)
    second = decoherence_distance(first.traj_plus[-1], first.traj_minus[-1],
                                  quartic, [qchan], t2)
    assert_allclose(first.d2 + second.d2, whole.d2, atol=1e-8)


def test_energy_channel_never_damps_shell_chords():
    shell = build_shell(harmonic, 0.5)
    chord = [c for c in find_chords(shell, (0.0, 0.5)) if not c.caustic][0]
    chan = energy_channel(lambda e: np.cos(3 * e), harmonic)
    rec = decoherence_distance(chord.x_plus, chord.x_minus, harmonic,
                               [chan], 2.0)
    assert rec.d2 < 1e-20
    ev = evolve_contribution(chord, harmonic, [chan], 2.0, 0.05)
    assert ev.damping == 1.0


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

def test_unitary_transport_keeps_action_on_shell():
    shell = build_shell(harmonic, 0.5)
    chord = [c for c in find_chords(shell, (0.0, 0.5)) if not c.caustic][0]
    ev = evolve_contribution(chord, harmonic, [], 1.3, 0.05)
    assert ev.damping == 1.0
    assert_allclose(ev.s_t, chord.action, atol=1e-12)
    # tips stay on the shell
    assert abs(float(harmonic.energy(ev.base.x_plus)) - 0.5) < 1e-6


def test_evolved_damping_matches_closed_form():
    chord = bare_chord((0.8660254, 0.5), (-0.8660254, 0.5), action=0.6142)
    ev = evolve_contribution(chord, harmonic, [position_channel()], np.pi,
                             0.05)
    assert_allclose(np.log(ev.damping), -3.0 * np.pi / 2.0 / 0.1, rtol=1e-7)


def test_short_time_damping_expansion():
    chord = bare_chord((0.5, 0.8660254), (0.5, -0.8660254))
    rate = hermitian_decay_rate(chord, [position_channel()], 0.05)
    assert rate > 0
    t = 1e-4
    ev = evolve_contribution(chord, harmonic, [position_channel()], t, 0.05)
    assert abs(ev.damping - (1.0 - t * rate)) < (t * rate) ** 2 + 1e-10


def test_hamilton_jacobi_action_update():
    # tips on different shells: dS/dt = -(H+ - H-), constant along flow
    xp, xm = np.array([0.0, 1.2]), np.array([0.0, 0.8])
    dh = float(quartic.energy(xp) - quartic.energy(xm))
    chord = bare_chord(xp, xm, action=0.3)
    for t in (0.2, 0.5):
        ev = evolve_contribution(chord, quartic, [], t, 0.05)
        assert_allclose(ev.s_t, 0.3 - dh * t, atol=1e-12)
    d = 1e-5
    s1 = evolve_contribution(chord, quartic, [], 0.5, 0.05).s_t
    s2 = evolve_contribution(chord, quartic, [], 0.5 + d, 0.05).s_t
    assert_allclose((s2 - s1) / d, -dh, atol=1e-9)


def test_frozen_hamiltonian_exponential_decay():
    chord = bare_chord((0.3, 0.9), (-0.1, 0.2), action=0.77)
    chans = [position_channel(), momentum_channel(0.5)]
    rate = hermitian_decay_rate(chord, chans, 0.05)
    for t in (0.1, 0.6):
        ev = evolve_contribution(chord, frozen, chans, t, 0.05)
        assert_allclose(ev.s_t, 0.77, atol=1e-15)
        assert_allclose(ev.damping, np.exp(-t * rate), rtol=1e-10)


def test_trotter_unitary_equals_transport():
    shell = build_shell(harmonic, 0.5)
    chord = [c for c in find_chords(shell, (0.0, 0.5)) if not c.caustic][0]
    ev_split = trotter_evolve(chord, harmonic, [], 0.9, 4, 0.05)
    ev_cont = evolve_contribution(chord, harmonic, [], 0.9, 0.05)
    assert ev_split.damping == 1.0
    assert np.max(np.abs(ev_split.base.x_plus - ev_cont.base.x_plus)) < 1e-8


def test_trotter_first_order_convergence():
    chord = bare_chord((0.8660254, 0.5), (-0.8660254, 0.5), action=0.6142)
    chans = [position_channel()]
    ref = evolve_contribution(chord, harmonic, chans, 1.0, 0.05,
                              n_steps=4000)
    errs = {}
    for n in (8, 16, 32):
        ev = trotter_evolve(chord, harmonic, chans, 1.0, n, 0.05)
        errs[n] = abs(np.log(ev.damping) - np.log(ref.damping))
    # halving the step should halve the error: observed order near 1
    r1 = errs[8] / errs[16]
    r2 = errs[16] / errs[32]
    assert 1.6 < r1 < 2.4 and 1.6 < r2 < 2.4


def test_trace_emission(tmp_path):
    chord = bare_chord((0.5, 0.8660254), (0.5, -0.8660254), action=0.41)
    rows = evolution_trace(chord, harmonic, [position_channel()],
                           [0.0, 0.25, 0.5], 0.05)
    assert [t for t, _ in rows] == [0.0, 0.25, 0.5]
    damp = [ev.damping for _, ev in rows]
    assert damp[0] == 1.0 and damp[1] > damp[2]
    path_a, path_b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace(path_a, rows)
    write_trace(path_b, rows)
    assert path_a.read_bytes() == path_b.read_bytes()
    head = path_a.read_text().splitlines()[0]
    assert head == "t,p_plus,q_plus,p_minus,q_minus,S_t,D_t,damping"


def test_make_channel_dispatch():
    assert make_channel("q").name == "q"
    assert make_channel("p", 2.0)(np.array([1.5, 0.0])) == 3.0
    poly = make_channel({(0, 2): 1.0})
    assert poly(np.array([0.0, 3.0])) == 9.0
    with pytest.raises(ValueError):
        make_channel("xyz")
