"""Classical phase-space primitives for 1-DOF hamiltonian systems.

Phase points are numpy arrays ``[p, q]`` -- momentum first.  The symplectic
algebra (skew product, triangle areas, Poisson brackets) and the
implicit-midpoint flow defined here are the substrate for everything
downstream: shell construction, chord geometry, decoherence integrals.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "J",
    "skew",
    "triangle_area",
    "poisson_bracket",
    "HamiltonianSystem",
    "make_system",
    "polynomial_system",
    "Trajectory",
    "midpoint_step",
    "hamiltonian_flow",
    "find_period",
    "periodic_orbit",
    "shell_start",
    "shell_average",
    "ShellError",
]

# Symplectic unit: J @ grad(H) is the hamiltonian vector field in [p, q]
# ordering, i.e. (pdot, qdot) = (-dH/dq, +dH/dp).
J = np.array([[0.0, -1.0], [1.0, 0.0]])


class ShellError(ValueError):
    """Raised when an energy shell is empty or not a closed orbit."""


def skew(a, b):
    """Skew (symplectic) product a ^ b = (J a) . b.

    Accepts stacked arrays of shape (..., 2*l) with the l momenta first;
    for l = 1, skew((a_p, a_q), (b_p, b_q)) = a_p b_q - a_q b_p.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    l = a.shape[-1] // 2
    return np.sum(a[..., :l] * b[..., l:] - a[..., l:] * b[..., :l], axis=-1)


def triangle_area(x, x1, x2):
    """Symplectic area of the (x, x1, x2) triangle, doubled orientation:

        Delta = 2 * (x ^ x1 + x1 ^ x2 + x2 ^ x)

    Antisymmetric under swapping any two vertices.
    """
    return 2.0 * (skew(x, x1) + skew(x1, x2) + skew(x2, x))


def poisson_bracket(f: Callable, g: Callable, x, step: float = 1e-6):
    """{f, g} = df/dq dg/dp - df/dp dg/dq by central differences at x."""
    x = np.asarray(x, dtype=float)
    ep = np.zeros_like(x)
    ep[..., 0] = step
    eq = np.zeros_like(x)
    eq[..., 1] = step
    dfp = (f(x + ep) - f(x - ep)) / (2 * step)
    dfq = (f(x + eq) - f(x - eq)) / (2 * step)
    dgp = (g(x + ep) - g(x - ep)) / (2 * step)
    dgq = (g(x + eq) - g(x - eq)) / (2 * step)
    return dfq * dgp - dfp * dgq


@dataclass(frozen=True)
class HamiltonianSystem:
    """A 1-DOF hamiltonian H(p, q) with (optionally analytic) gradient."""

    name: str
    value: Callable
    grad: Optional[Callable] = None
    fd_step: float = 1e-7

    def energy(self, x):
        x = np.asarray(x, dtype=float)
        return self.value(x)

    def gradient(self, x):
        """(dH/dp, dH/dq), stacked along the last axis."""
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        h = self.fd_step
        ep = np.zeros_like(x)
        ep[..., 0] = h
        eq = np.zeros_like(x)
        eq[..., 1] = h
        gp = (self.value(x + ep) - self.value(x - ep)) / (2 * h)
        gq = (self.value(x + eq) - self.value(x - eq)) / (2 * h)
        return np.stack([gp, gq], axis=-1)

    def velocity(self, x):
        """Hamiltonian vector field J grad H = (-dH/dq, +dH/dp)."""
        g = self.gradient(x)
        return np.stack([-g[..., 1], g[..., 0]], axis=-1)


def make_system(name: str) -> HamiltonianSystem:
    """Built-in systems: 'harmonic', 'quartic', 'pendulum'."""
    if name == "harmonic":
        return HamiltonianSystem(
            name,
            value=lambda x: 0.5 * (x[..., 0] ** 2 + x[..., 1] ** 2),
            grad=lambda x: np.stack([x[..., 0], x[..., 1]], axis=-1),
        )
    if name == "quartic":
        return HamiltonianSystem(
            name,
            value=lambda x: 0.5 * x[..., 0] ** 2 + 0.5 * x[..., 1] ** 4,
            grad=lambda x: np.stack([x[..., 0], 2.0 * x[..., 1] ** 3], axis=-1),
        )
    if name == "pendulum":
        return HamiltonianSystem(
            name,
            value=lambda x: 0.5 * x[..., 0] ** 2 - np.cos(x[..., 1]),
            grad=lambda x: np.stack([x[..., 0], np.sin(x[..., 1])], axis=-1),
        )
    raise ValueError(f"unknown system {name!r}")


def polynomial_system(coeffs: dict, name: str = "poly") -> HamiltonianSystem:
    """H = sum c[(a, b)] p^a q^b from a coefficient table."""
    terms = [(int(a), int(b), float(c)) for (a, b), c in coeffs.items()]

    def value(x):
        p, q = x[..., 0], x[..., 1]
        return sum(c * p**a * q**b for a, b, c in terms)

    def grad(x):
        p, q = x[..., 0], x[..., 1]
        gp = sum(c * a * p ** (a - 1) * q**b for a, b, c in terms if a > 0)
        gq = sum(c * b * p**a * q ** (b - 1) for a, b, c in terms if b > 0)
        return np.stack([gp + 0.0 * p, gq + 0.0 * p], axis=-1)

    return HamiltonianSystem(name, value=value, grad=grad)


@dataclass
class Trajectory:
    """Flow samples: times (m,), points (m, ..., 2)."""

    times: np.ndarray
    points: np.ndarray

    @property
    def final(self):
        return self.points[-1]

    def energy_drift(self, system: HamiltonianSystem):
        e = system.energy(self.points)
        return np.max(np.abs(e - e[0]))


def midpoint_step(system, x, dt, tol: float = 1e-14, max_iter: int = 80):
    """One implicit-midpoint step; fixed-point iteration on the midpoint.

    Symplectic, time-reversible, second order; preserves quadratic
    hamiltonians exactly.  x may be a batch (..., 2).
    """
    x = np.asarray(x, dtype=float)
    y = x + dt * system.velocity(x)  # Euler predictor
    scale = np.max(np.abs(x)) + 1.0
    for _ in range(max_iter):
        y_new = x + dt * system.velocity(0.5 * (x + y))
        if np.max(np.abs(y_new - y)) < tol * scale:
            return y_new
        y = y_new
    return y  # non-stiff flows converge long before max_iter


def hamiltonian_flow(system, x0, t: float, dt: float = 1e-3,
                     dense: bool = False) -> Trajectory:
    """Integrate x0 (possibly a batch) for time t >= 0.

    With dense=True every accepted step is recorded; otherwise only the
    endpoints.  The step count is ceil(t/dt) so the final time is exact.
    """
    x0 = np.asarray(x0, dtype=float)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        pts = np.stack([x0, x0])
        return Trajectory(times=np.array([0.0, 0.0]), points=pts)
    n = max(1, int(np.ceil(t / dt - 1e-12)))
    h = t / n
    x = x0
    times = [0.0]
    pts = [x0]
    for m in range(n):
        x = midpoint_step(system, x, h)
        if dense or m == n - 1:
            times.append((m + 1) * h)
            pts.append(x)
    return Trajectory(times=np.asarray(times), points=np.stack(pts))


def _detect_period(system, x0, dt, t_max):
    """First return of the section (x - x0) . v0 through zero from below."""
    v0 = system.velocity(x0)
    speed = float(np.hypot(v0[0], v0[1]))
    if speed == 0.0:
        raise ShellError("fixed point: no closed orbit through this point")
    v0 = v0 / speed
    x = np.asarray(x0, dtype=float)
    g_prev = 0.0
    t = 0.0
    armed = False  # require g < 0 once before accepting a + crossing
    while t < t_max:
        x_new = midpoint_step(system, x, dt)
        g_new = float(np.dot(x_new - x0, v0))
        if g_new < 0:
            armed = True
        if armed and g_prev < 0 <= g_new:
            # bisect the crossing inside [t, t + dt]
            lo, hi = 0.0, dt
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                g_mid = float(np.dot(midpoint_step(system, x, mid) - x0, v0))
                if g_mid < 0:
                    lo = mid
                else:
                    hi = mid
            return t + 0.5 * (lo + hi)
        x, g_prev, t = x_new, g_new, t + dt
    raise ShellError(f"no closed orbit found within t_max={t_max}")


def find_period(system, x0, dt: float = 1e-3, t_max: float = 400.0) -> float:
    """Period of the closed orbit through x0.

    The section-crossing time of the discrete flow carries an O(dt^2)
    phase error, so the detection is run at dt and dt/2 and Richardson
    extrapolated; the residual is O(dt^4).
    """
    x0 = np.asarray(x0, dtype=float)
    t1 = _detect_period(system, x0, dt, t_max)
    t2 = _detect_period(system, x0, 0.5 * dt, t_max)
    return (4.0 * t2 - t1) / 3.0


def periodic_orbit(system, x0, n: int = 2048, dt_cap: float = 5e-4):
    """(period, samples): n points uniformly spaced in time along the orbit.

    Substeps are capped at dt_cap so the sample placement error stays well
    below chord-action tolerances.
    """
    x0 = np.asarray(x0, dtype=float)
    period = find_period(system, x0)
    dt_s = period / n
    k = max(1, int(np.ceil(dt_s / dt_cap)))
    h = dt_s / k
    pts = np.empty((n, 2))
    pts[0] = x0
    x = x0
    for m in range(1, n):
        for _ in range(k):
            x = midpoint_step(system, x, h)
        pts[m] = x
    return period, pts


def shell_start(system, energy: float, p_max: float = 1e3):
    """A point on the H = energy shell, searched on the q = 0 then p = 0 axes."""
    from scipy.optimize import brentq

    for axis in (0, 1):
        def f(s):
            x = np.zeros(2)
            x[axis] = s
            return float(system.energy(x)) - energy

        grid = np.concatenate([[0.0], np.geomspace(1e-6, p_max, 200)])
        vals = np.array([f(s) for s in grid])
        sign_change = np.nonzero(vals[:-1] * vals[1:] <= 0)[0]
        for i in sign_change:
            if vals[i] == 0.0 and vals[i + 1] == 0.0:
                continue
            s = brentq(f, grid[i], grid[i + 1], xtol=1e-14)
            x = np.zeros(2)
            x[axis] = s
            return x
    raise ShellError(f"energy shell H = {energy} is empty on both axes")


def shell_average(system, energy: float, func: Callable, n: int = 2048,
                  x0=None) -> float:
    """Time average of func over the closed orbit at the given energy."""
    if x0 is None:
        x0 = shell_start(system, energy)
    _, pts = periodic_orbit(system, x0, n=n)
    return float(np.mean(func(pts)))
