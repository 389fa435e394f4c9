"""Short-chord asymptotics and diffusive growth of the spectral
energy window under hermitian couplings."""
import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .flow import HamiltonianSystem, J, poisson_bracket, shell_average
from .lindblad import LindbladChannel, _require_hermitian


@dataclass(frozen=True)
class EnergyWindow:
    energy: float
    epsilon: float
    t: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("window width must be nonnegative")


def short_chord(x, tau: float, system: HamiltonianSystem) -> np.ndarray:
    """First-order chord of a tip pair separated by time tau: tau * J dH/dx."""
    x = np.asarray(x, dtype=float)
    return tau * (J @ system.gradient(x))


def bracket_rate(energy: float, channels: Sequence[LindbladChannel],
                 system: HamiltonianSystem) -> float:
    """sum_j <|{H, L_j}|^2> averaged over the closed shell at the energy.

    The coefficient of tau^2 in the short-chord damping exponent
    (t / 2 hbar) * rate * tau^2.
    """
    _require_hermitian(channels)
    total = 0.0
    for ch in channels:
        total += shell_average(
            system, energy,
            lambda pts: poisson_bracket(system.energy, ch.func, pts) ** 2)
    return float(total)


def window_width(epsilon0: float, t: float, energy: float,
                 channels: Sequence[LindbladChannel],
                 system: HamiltonianSystem, hbar: float,
                 rate: Optional[float] = None) -> EnergyWindow:
    """Diffusive window growth eps(t)^2 = eps0^2 + (hbar t / 2) * rate.

    Pass a precomputed rate when sweeping t; the shell average behind
    bracket_rate is the expensive part.
    """
    if epsilon0 < 0 or t < 0:
        raise ValueError("epsilon0 and t must be nonnegative")
    if rate is None:
        rate = bracket_rate(energy, channels, system)
    eps2 = epsilon0**2 + 0.5 * hbar * t * rate
    return EnergyWindow(energy=energy, epsilon=float(np.sqrt(eps2)), t=t)


def write_diffusion_report(path, rows: Sequence[dict]) -> None:
    """CSV rows: t, epsilon_predicted, epsilon_oracle, slope_ratio.

    The oracle column is filled by the comparison harness; stand-alone
    prediction runs leave it empty.  Reports adopt the identification
    Var(E) = eps^2 for the oracle's measured energy variance.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "epsilon_predicted", "epsilon_oracle", "slope_ratio"])
        for row in rows:
            w.writerow([f"{row['t']:.12g}",
                        f"{row['epsilon_predicted']:.12g}",
                        "" if row.get("epsilon_oracle") is None
                        else f"{row['epsilon_oracle']:.12g}",
                        "" if row.get("slope_ratio") is None
                        else f"{row['slope_ratio']:.12g}"])
