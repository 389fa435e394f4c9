"""
Closed orbits, energy shells, and chord geometry
================================================

Everything downstream is built from one object: the closed orbit of a
1-DOF Hamiltonian at fixed energy, wrapped in spline accessors (the
"shell").  This script builds shells for the three built-in systems,
reads off their basic geometry, and then asks the central question of
the chord construction: which pairs of shell points have a given phase
point as their midpoint?
"""
import numpy as np

from chordwigner import build_shell, find_chords, make_system

# --- shells for the three built-in wells -----------------------------------

for name, energy in [("harmonic", 0.5), ("quartic", 0.5),
                     ("pendulum", -0.2)]:
    shell = build_shell(make_system(name), energy)
    print(f"{name:9s} E={energy:+.2f}  period={shell.period:.6f}  "
          f"loop area={shell.area:.6f}")

# the area rule puts the E = 0.5 harmonic shell between quantum levels:
# area / (2 pi hbar) - 1/2 is the (fractional) level index
hbar = 0.05
shell = build_shell(make_system("harmonic"), 0.5)
n_frac = shell.area / (2 * np.pi * hbar) - 0.5
print(f"\nharmonic E=0.5 at hbar={hbar}: fractional level {n_frac:.3f} "
      "(quantized shells sit on integers)")

# --- chords through an interior point --------------------------------------

# every interior point is the midpoint of finitely many shell chords;
# each carries the symplectic area S between chord and arc, and the
# tip-velocity wedge that controls the stationary-phase amplitude
x = np.array([0.15, 0.35])
print(f"\nchords with midpoint (p, q) = ({x[0]:g}, {x[1]:g}):")
for c in find_chords(shell, x):
    print(f"  tips at theta = ({c.theta_minus:.4f}, {c.theta_plus:.4f})  "
          f"S = {c.action:.6f}  wedge = {c.wedge:+.6f}  "
          f"caustic = {c.caustic}")

# near the shell itself the two tips coalesce: a single degenerate chord
# flagged as caustic, where the amplitude formula blows up
on_shell = shell.point(1.2)
print(f"\npoint on the shell ({on_shell[0]:.4f}, {on_shell[1]:.4f}):")
for c in find_chords(shell, on_shell):
    print(f"  degenerate chord, S = {c.action:.2e}, caustic = {c.caustic}")

# outside there are no real chords at all (the classically forbidden zone)
print(f"\nchords through (0, 2.0): {find_chords(shell, (0.0, 2.0))}")
