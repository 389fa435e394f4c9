"""
Global checks: purity at t = 0, purity decay, and the trace integral
====================================================================

Three integrals over the angle ring of a shell state tie the chord
construction together:

* tr rho^2 at t = 0.  The squared chord amplitude carries 1/|wedge| and
  the centre -> angle-pair Jacobian carries |wedge|/8; they cancel
  algebraically, so the purity is exactly 1 for every shell.
* tr rho^2(t) under a hermitian coupling: the angle-pair mean of
  exp(-D_t^2 / hbar), monotone from 1 toward the diagonal plateau.
* tr rho as an oscillatory angle-pair integral.  As hbar -> 0 the
  short-chord region dominates; the prefactor it converges to is a
  system-independent constant.
"""
import numpy as np

from chordwigner import (
    build_shell,
    direct_trace,
    make_system,
    position_channel,
    purity_decay,
    purity_t0,
)

hbar = 0.05

# --- purity at t = 0 is exactly 1, shell by shell --------------------------

print("tr rho^2 at t = 0 (exact cancellation of wedge factors):")
for name, energy in (("harmonic", 0.5), ("quartic", 0.5),
                     ("pendulum", -0.2)):
    shell = build_shell(make_system(name), energy)
    print(f"  {name:9s} E = {energy:+.1f}:  {purity_t0(shell, hbar):.15f}")

# --- purity decay under L = q ----------------------------------------------

system = make_system("harmonic")
shell = build_shell(system, 0.5)
chan = [position_channel()]
print("\ntr rho^2(t) under L = q (angle-pair mean of exp(-D_t^2/hbar)):")
print("   t      purity    est err")
for t in (0.05, 0.1, 0.2, 0.4):
    rep = purity_decay(shell, system, chan, t, hbar, n_angle=128)
    print(f"  {t:4.2f}   {rep.value:.6f}   {rep.est_error:.1e}")
print("  (the 'hbar' exponent convention: damping is squared because "
      "the density enters twice)")

# --- the trace prefactor as hbar -> 0 --------------------------------------

print("\ntr rho prefactor, bare-cosine convention, harmonic shell:")
vals = []
for hb in (0.05, 0.02, 0.01, 0.005):
    rep = direct_trace(shell, hb)
    vals.append(rep.value)
    print(f"  hbar = {hb:5.3f}:  {rep.value:.4f}  (+- {rep.est_error:.0e})")
q_rep = direct_trace(build_shell(make_system("quartic"), 0.5), 0.05)
print(f"  quartic at hbar = 0.05: {q_rep.value:.4f} "
      f"(same constant: shape-independent)")
print(f"\n  trend -> {vals[-1]:.4f}.  Reference values: 1/sqrt(3) = "
      f"{1 / np.sqrt(3):.4f} (plain cosine), sqrt(2/3) = "
      f"{np.sqrt(2 / 3):.4f} (with the quarter-wave offset).  The "
      f"measured limit sits on the first: the coincidence line of the "
      f"angle pair is a fold, not a quadratic saddle.")
