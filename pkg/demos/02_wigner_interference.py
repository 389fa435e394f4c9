"""
The chord-sum Wigner function and its interference fringes
==========================================================

Each chord through a phase point contributes one oscillatory term
A cos(S/hbar - pi/4) to the Wigner function; the fringes inside the
shell are the interference pattern of the two tips of the dominant
chord.  The local wavelength is set by the chord vector itself:
grad S = J xi, so zero crossings along q are spaced by
pi * hbar / |(J xi)_q|.

The script evaluates W along the q axis, measures the fringe spacing,
compares it with the phase-gradient prediction, and writes a (p, q)
grid to demo_out/wigner_grid.csv.
"""
from pathlib import Path

import numpy as np

from chordwigner import (
    eval_grid,
    eval_state,
    find_chords,
    make_system,
    phase_gradient,
    pure_state,
)

out = Path(__file__).parent / "demo_out"
out.mkdir(exist_ok=True)

hbar = 0.02
state = pure_state(make_system("harmonic"), hbar=hbar, energy=0.5)

# --- fringes along the q axis ----------------------------------------------

qs = np.arange(0.0, 0.85, 2e-3)
w = np.array([eval_state((0.0, q), state).value for q in qs])

flips = np.where(np.diff(np.sign(w)) != 0)[0]
zeros = qs[flips] + 2e-3 * w[flips] / (w[flips] - w[flips + 1])
spacing = np.diff(zeros)
q_mid = 0.5 * (zeros[1:] + zeros[:-1])

print(f"{len(zeros)} zero crossings of W(0, q) on [0, 0.85]")
print("  q      measured   predicted pi*hbar/|grad S . qhat|")
for k in range(3, len(q_mid) - 3, 8):
    chord = max(find_chords(state.shell, (0.0, q_mid[k])),
                key=lambda c: abs(c.wedge))
    lam = np.pi * hbar / abs(phase_gradient(chord)[1])
    print(f"  {q_mid[k]:.3f}  {spacing[k]:.6f}   {lam:.6f}")

# --- a full grid, with caustic bookkeeping ---------------------------------

ps = np.linspace(-1.15, 1.15, 35)
qgrid = np.linspace(-1.15, 1.15, 35)
grid = eval_grid(state, ps, qgrid)
grid.write_csv(out / "wigner_grid.csv")
n_caustic = int(np.sum(grid.caustic))
print(f"\n35x35 grid written to {out / 'wigner_grid.csv'}; "
      f"{n_caustic} points flagged caustic (amplitude not trustworthy "
      "within a fresnel width of the shell)")
