"""Open-system evolution of chord contributions.

Hermitian Lindblad couplings never touch the chord phase; they damp the
amplitude through the decoherence distance functional
D_t^2 = sum_j int |L_j(x_+) - L_j(x_-)|^2 dt' accumulated along the two
tip trajectories, giving the factor exp(-D_t^2 / 2 hbar).
"""
import csv
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from .flow import HamiltonianSystem, hamiltonian_flow
from .shells import Chord


class NonHermitianError(ValueError):
    """Raised when a time-integration op receives a non-hermitian channel."""


@dataclass(frozen=True)
class LindbladChannel:
    """Phase-space coupling function; coupling constants live inside L."""

    name: str
    func: Callable
    hermitian: bool = True

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


def position_channel(coupling: float = 1.0) -> LindbladChannel:
    return LindbladChannel(name=f"{coupling:g}*q" if coupling != 1.0 else "q",
                           func=lambda x: coupling * x[..., 1])


def momentum_channel(coupling: float = 1.0) -> LindbladChannel:
    return LindbladChannel(name=f"{coupling:g}*p" if coupling != 1.0 else "p",
                           func=lambda x: coupling * x[..., 0])


def polynomial_channel(coeffs: dict, coupling: float = 1.0,
                       name: Optional[str] = None) -> LindbladChannel:
    """L = coupling * sum c_ab p^a q^b; complex coefficients allowed
    (the channel is then marked non-hermitian)."""
    herm = all(abs(complex(c).imag) == 0 for c in coeffs.values())

    def f(x):
        out = np.zeros(x.shape[:-1], dtype=float if herm else complex)
        for (a, b), c in coeffs.items():
            out = out + (coupling * c) * x[..., 0] ** a * x[..., 1] ** b
        return out

    return LindbladChannel(name=name or f"poly{sorted(coeffs)}", func=f,
                           hermitian=herm)


def energy_channel(func: Callable, system: HamiltonianSystem,
                   name: str = "f(H)") -> LindbladChannel:
    """L = f(H(x)): commutes with the flow, so shell chords never damp."""
    return LindbladChannel(
        name=name, func=lambda x: func(system.energy(x)))


def make_channel(symbol, coupling: float = 1.0) -> LindbladChannel:
    if symbol == "q":
        return position_channel(coupling)
    if symbol == "p":
        return momentum_channel(coupling)
    if isinstance(symbol, dict):
        return polynomial_channel(symbol, coupling)
    raise ValueError(f"unknown channel symbol {symbol!r}")


def _require_hermitian(channels: Sequence[LindbladChannel]) -> None:
    bad = [c.name for c in channels if not c.hermitian]
    if bad:
        raise NonHermitianError(
            f"non-hermitian channels {bad}: only rate evaluation is defined, "
            "no amplitude/phase separation exists for time integration")


@dataclass
class DecoherenceRecord:
    """D_t and the integrand samples behind it."""

    t: float
    d2: float
    times: np.ndarray          # quadrature grid
    integrand: np.ndarray      # sum_j |L_j(x+) - L_j(x-)|^2 at each time
    traj_plus: np.ndarray      # (n, 2) tip trajectories
    traj_minus: np.ndarray

    @property
    def distance(self) -> float:
        return float(np.sqrt(max(self.d2, 0.0)))

    def partial_d2(self) -> np.ndarray:
        """Cumulative D^2 on the sample grid (nondecreasing)."""
        out = np.empty_like(self.times)
        out[0] = 0.0
        for i in range(1, len(self.times)):
            out[i] = simpson(self.integrand[: i + 1], x=self.times[: i + 1])
        return out


@dataclass
class EvolvedChord:
    base: Chord                # tips/action at time t; wedge, tau, thetas
    damping: float             # exp(-D_t^2 / 2 hbar), in (0, 1]
    s_t: float
    record: DecoherenceRecord


def lindblad_rate(chord: Chord, channels: Sequence[LindbladChannel],
                  hbar: float, amplitude: Optional[float] = None) -> float:
    """Instantaneous dW~/dt of one chord term, complex channels allowed.

    (A/hbar) sum_j { Re[L_j(x+) L_j(x-)* e^{iS/hbar}]
                     - (|L_j(x+)|^2 + |L_j(x-)|^2)/2 * cos(S/hbar) }
    """
    a = amplitude if amplitude is not None else (
        chord.amplitude if chord.amplitude is not None else 1.0)
    phase = chord.action / hbar
    total = 0.0
    for ch in channels:
        lp = complex(ch(chord.x_plus))
        lm = complex(ch(chord.x_minus))
        total += (lp * np.conj(lm) * np.exp(1j * phase)).real \
            - 0.5 * (abs(lp) ** 2 + abs(lm) ** 2) * np.cos(phase)
    return float(a / hbar * total)


def hermitian_decay_rate(chord: Chord, channels: Sequence[LindbladChannel],
                         hbar: float) -> float:
    """Frozen-chord amplitude decay rate (1/2 hbar) sum |L(x+) - L(x-)|^2."""
    _require_hermitian(channels)
    total = 0.0
    for ch in channels:
        total += abs(ch(chord.x_plus) - ch(chord.x_minus)) ** 2
    return float(total / (2.0 * hbar))


def _tip_flow(system: HamiltonianSystem, x0, t: float,
              n_steps: int) -> np.ndarray:
    traj = hamiltonian_flow(system, x0, t, dt=t / n_steps, dense=True)
    return traj.points


def decoherence_distance(x_plus0, x_minus0, system: HamiltonianSystem,
                         channels: Sequence[LindbladChannel], t: float,
                         n_steps: Optional[int] = None) -> DecoherenceRecord:
    """D_t from the two tip trajectories, composite Simpson in time."""
    _require_hermitian(channels)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        x0p = np.asarray(x_plus0, dtype=float)[None, :]
        x0m = np.asarray(x_minus0, dtype=float)[None, :]
        return DecoherenceRecord(t=0.0, d2=0.0, times=np.zeros(1),
                                 integrand=np.zeros(1), traj_plus=x0p,
                                 traj_minus=x0m)
    if n_steps is None:
        n_steps = max(64, int(np.ceil(t / 1e-3)))
    if n_steps % 2:
        n_steps += 1
    tp = _tip_flow(system, x_plus0, t, n_steps)
    tm = _tip_flow(system, x_minus0, t, n_steps)
    times = np.linspace(0.0, t, n_steps + 1)
    g = np.zeros(n_steps + 1)
    for ch in channels:
        g += np.abs(ch(tp) - ch(tm)) ** 2
    d2 = float(simpson(g, x=times))
    return DecoherenceRecord(t=t, d2=d2, times=times, integrand=g,
                             traj_plus=tp, traj_minus=tm)


def evolve_contribution(chord0: Chord, system: HamiltonianSystem,
                        channels: Sequence[LindbladChannel], t: float,
                        hbar: float,
                        n_steps: Optional[int] = None) -> EvolvedChord:
    """Continuous evolution of one chord contribution.

    Tips follow the classical flow; the action obeys
    dS/dt = -[H(x+) - H(x-)] (constant along autonomous flow, so the
    integral is exact); channels multiply the amplitude by
    exp(-D_t^2 / 2 hbar) and never touch the phase.  The wedge, tau and
    theta labels of the returned chord stay frozen at their t=0 values
    (amplitude transport is held constant).
    """
    rec = decoherence_distance(chord0.x_plus, chord0.x_minus, system,
                               channels, t, n_steps=n_steps)
    dh = float(system.energy(chord0.x_plus) - system.energy(chord0.x_minus))
    s_t = chord0.action - dh * t
    damping = float(np.exp(-rec.d2 / (2.0 * hbar)))
    base = replace(chord0, x_plus=rec.traj_plus[-1].copy(),
                   x_minus=rec.traj_minus[-1].copy(), action=s_t)
    return EvolvedChord(base=base, damping=damping, s_t=s_t, record=rec)


def trotter_evolve(chord0: Chord, system: HamiltonianSystem,
                   channels: Sequence[LindbladChannel], t: float, n_steps: int,
                   hbar: float) -> EvolvedChord:
    """Split evolution: N substeps of (doubled-Hamiltonian transport over
    t/2N) then (frozen-chord damping with sqrt(2)-scaled couplings over
    t/2N) — algebraically a first-order Lie split of step t/N with the
    damping integrand sampled at the post-flow tips.  Channels passed in
    are the physical ones; the rescaling is internal bookkeeping.
    """
    _require_hermitian(channels)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    h = t / n_steps
    xp = np.asarray(chord0.x_plus, dtype=float).copy()
    xm = np.asarray(chord0.x_minus, dtype=float).copy()
    dh = float(system.energy(xp) - system.energy(xm))
    times = [0.0]
    integrand = [sum(abs(ch(xp) - ch(xm)) ** 2 for ch in channels)]
    tps, tms = [xp.copy()], [xm.copy()]
    d2 = 0.0
    s_t = chord0.action
    flow_steps = max(8, int(np.ceil(h / 1e-3)))
    for _ in range(n_steps):
        if h > 0:
            xp = hamiltonian_flow(system, xp, h, dt=h / flow_steps).final
            xm = hamiltonian_flow(system, xm, h, dt=h / flow_steps).final
        g = sum(abs(ch(xp) - ch(xm)) ** 2 for ch in channels)
        d2 += g * h
        s_t -= dh * h
        times.append(times[-1] + h)
        integrand.append(g)
        tps.append(xp.copy())
        tms.append(xm.copy())
    rec = DecoherenceRecord(t=t, d2=float(d2), times=np.array(times),
                            integrand=np.array(integrand, dtype=float),
                            traj_plus=np.array(tps), traj_minus=np.array(tms))
    damping = float(np.exp(-d2 / (2.0 * hbar)))
    base = replace(chord0, x_plus=xp, x_minus=xm, action=s_t)
    return EvolvedChord(base=base, damping=damping, s_t=s_t, record=rec)


def evolution_trace(chord0: Chord, system: HamiltonianSystem,
                    channels: Sequence[LindbladChannel],
                    times: Sequence[float], hbar: float) -> List[Tuple[float,
                                                                       EvolvedChord]]:
    return [(float(t), evolve_contribution(chord0, system, channels, float(t),
                                           hbar)) for t in times]


def write_trace(path, rows: Sequence[Tuple[float, EvolvedChord]]) -> None:
    """CSV: t, tips, action, decoherence distance, damping."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "p_plus", "q_plus", "p_minus", "q_minus",
                    "S_t", "D_t", "damping"])
        for t, ev in rows:
            w.writerow([f"{t:.12g}",
                        f"{ev.base.x_plus[0]:.12g}",
                        f"{ev.base.x_plus[1]:.12g}",
                        f"{ev.base.x_minus[0]:.12g}",
                        f"{ev.base.x_minus[1]:.12g}",
                        f"{ev.s_t:.12g}", f"{ev.record.distance:.12g}",
                        f"{ev.damping:.12g}"])
