"""Energy shells and chord geometry.

A shell is the closed orbit H = E, sampled uniformly in time and wrapped
in periodic splines; theta in [0, 2pi) is the angle (uniformized time)
variable.  A chord is a pair of shell points whose midpoint is a given
phase-space point x; its symplectic area S, tip-velocity wedge and
traversal time are the raw material of the semiclassical construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .flow import (
    HamiltonianSystem,
    ShellError,
    periodic_orbit,
    shell_start,
    skew,
)

__all__ = [
    "ShellSpec",
    "Chord",
    "build_shell",
    "find_chords",
    "chord_amplitude",
    "angle_jacobian",
    "caustic_indicator",
    "quantize_energy",
]

TWO_PI = 2.0 * np.pi


@dataclass
class ShellSpec:
    """Sampled energy shell with periodic-spline accessors."""

    system: HamiltonianSystem
    energy: float
    period: float
    n_samples: int
    theta: np.ndarray          # (n,) uniform grid in [0, 2pi)
    points: np.ndarray         # (n, 2) on-shell samples
    area: float                # oint p dq
    closure_error: float
    _psp: CubicSpline = field(repr=False, default=None)
    _qsp: CubicSpline = field(repr=False, default=None)
    _fsp: CubicSpline = field(repr=False, default=None)  # periodic part of F
    _fmean: float = 0.0        # F(theta) = _fmean*theta + periodic part
    speed_scale: float = 1.0   # max |dx/dtheta|^2, for caustic thresholds

    # -- geometry accessors ------------------------------------------------

    def point(self, theta):
        """Shell point(s) at angle theta (any real, wrapped mod 2pi)."""
        th = np.asarray(theta, dtype=float) % TWO_PI
        return np.stack([self._psp(th), self._qsp(th)], axis=-1)

    def velocity_theta(self, theta):
        """dx/dtheta, the angle-flow tip velocity (T/2pi times J grad H)."""
        th = np.asarray(theta, dtype=float) % TWO_PI
        return np.stack([self._psp(th, 1), self._qsp(th, 1)], axis=-1)

    def action_integral(self, theta):
        """F(theta) = cumulative oint p dq from theta = 0 (not wrapped)."""
        th = np.asarray(theta, dtype=float)
        return self._fmean * th + self._fsp(th % TWO_PI)

    def chord_action(self, theta_minus, theta_plus):
        """Area S between the chord and the *shorter* shell arc (>= 0).

        The two traversals of a chord tile the shell, so the complementary
        arc gives exactly area - S.
        """
        tm = np.asarray(theta_minus, dtype=float)
        dth = (np.asarray(theta_plus, dtype=float) - tm) % TWO_PI
        xm = self.point(tm)
        xp = self.point(tm + dth)
        s_fwd = (self.action_integral(tm + dth) - self.action_integral(tm)
                 - 0.5 * (xp[..., 0] + xm[..., 0]) * (xp[..., 1] - xm[..., 1]))
        return np.where(dth <= np.pi, s_fwd, self.area - s_fwd)

    def wedge(self, theta_minus, theta_plus):
        """Signed tip-velocity wedge (dx/dtheta)_+ ^ (dx/dtheta)_-."""
        return skew(self.velocity_theta(theta_plus),
                    self.velocity_theta(theta_minus))

    def traversal_time(self, theta_minus, theta_plus):
        """Flow time from the minus tip forward to the plus tip."""
        dth = (np.asarray(theta_plus, dtype=float)
               - np.asarray(theta_minus, dtype=float)) % TWO_PI
        return dth * self.period / TWO_PI

    def theta_of_point(self, x, theta0: Optional[float] = None) -> float:
        """Angle of an (approximately) on-shell point."""
        x = np.asarray(x, dtype=float)
        if theta0 is None:
            i = int(np.argmin(np.sum((self.points - x) ** 2, axis=-1)))
            th = self.theta[i]
        else:
            th = float(theta0)
        for _ in range(8):
            r = self.point(th) - x
            v = self.velocity_theta(th)
            th -= float(np.dot(r, v) / np.dot(v, v))
        return th % TWO_PI

    def contains(self, x) -> bool:
        """Even-odd ray test of x against the sampled shell polygon."""
        x = np.asarray(x, dtype=float)
        p0, p1 = self.points, np.roll(self.points, -1, axis=0)
        y0, y1 = p0[:, 0] - x[0], p1[:, 0] - x[0]
        crosses = (y0 > 0) != (y1 > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            q_at = p0[:, 1] + y0 / (y0 - y1) * (p1[:, 1] - p0[:, 1])
        return bool(np.sum(crosses & (q_at > x[1])) % 2)


@dataclass
class Chord:
    """A shell chord centred on x: tips x_±, symplectic data, flags."""

    x_plus: np.ndarray
    x_minus: np.ndarray
    theta_plus: float
    theta_minus: float
    action: float
    wedge: float               # signed tip-velocity wedge
    tau: float                 # traversal time along the short arc
    caustic: bool              # |wedge| below threshold: amplitude invalid
    degenerate: bool = False   # zero-length chord (x on the shell)
    amplitude: Optional[float] = None

    @property
    def centre(self):
        return 0.5 * (self.x_plus + self.x_minus)

    @property
    def xi(self):
        return self.x_plus - self.x_minus


_SHELL_CACHE: dict = {}


def build_shell(system: HamiltonianSystem, energy: float,
                n_samples: int = 2048, x0=None) -> ShellSpec:
    """Sample the closed orbit H = energy and wrap it in spline accessors.

    Samples are Newton-projected back onto the shell after integration;
    the cumulative action F is computed spectrally from p dq/dtheta, so
    chord actions are accurate to the spline interpolation error.
    """
    key = (system.name, round(float(energy), 12), n_samples)
    custom_start = x0 is not None
    hit = _SHELL_CACHE.get(key)
    if hit is not None and hit.system is system and not custom_start:
        return hit

    if x0 is None:
        x0 = shell_start(system, energy)
    period, pts = periodic_orbit(system, x0, n=n_samples)
    closure = float(np.linalg.norm(
        pts[0] - pts[-1]))  # coarse: one sample interval apart by design

    # project the symplectic-integrator wobble off the shell
    for _ in range(3):
        g = system.gradient(pts)
        resid = system.energy(pts) - energy
        pts = pts - g * (resid / np.sum(g * g, axis=-1))[:, None]

    theta = TWO_PI * np.arange(n_samples) / n_samples
    p, q = pts[:, 0], pts[:, 1]

    # F(theta) = int p dq/dtheta: spectral antiderivative of a smooth
    # periodic integrand -> linear-in-theta part + periodic part
    k = np.fft.rfftfreq(n_samples, d=1.0 / n_samples)
    qhat = np.fft.rfft(q)
    dq_dth = np.fft.irfft(1j * k * qhat, n=n_samples)
    fhat = np.fft.rfft(p * dq_dth)
    fmean = float(fhat[0].real) / n_samples
    with np.errstate(divide="ignore", invalid="ignore"):
        anti = np.where(k > 0, fhat / (1j * k), 0.0)
    fper = np.fft.irfft(anti, n=n_samples)
    fper -= fper[0]

    theta_ext = np.append(theta, TWO_PI)
    wrap = lambda v: np.append(v, v[0])
    psp = CubicSpline(theta_ext, wrap(p), bc_type="periodic")
    qsp = CubicSpline(theta_ext, wrap(q), bc_type="periodic")
    fsp = CubicSpline(theta_ext, wrap(fper), bc_type="periodic")

    speed2 = psp(theta, 1) ** 2 + qsp(theta, 1) ** 2
    shell = ShellSpec(
        system=system, energy=float(energy), period=period,
        n_samples=n_samples, theta=theta, points=pts,
        area=fmean * TWO_PI, closure_error=closure,
        _psp=psp, _qsp=qsp, _fsp=fsp, _fmean=fmean,
        speed_scale=float(np.max(speed2)),
    )
    if not custom_start:
        _SHELL_CACHE[key] = shell
    return shell


def _make_chord(shell: ShellSpec, tm: float, tp: float,
                caustic_tol: float, degenerate: bool = False) -> Chord:
    tm, tp = tm % TWO_PI, tp % TWO_PI
    w = float(shell.wedge(tm, tp))
    return Chord(
        x_plus=shell.point(tp), x_minus=shell.point(tm),
        theta_plus=tp, theta_minus=tm,
        action=float(shell.chord_action(tm, tp)),
        wedge=w,
        tau=float(shell.traversal_time(tm, tp)),
        caustic=bool(abs(w) < caustic_tol * shell.speed_scale),
        degenerate=degenerate,
    )


def find_chords(shell: ShellSpec, x, n_scan: int = 64,
                caustic_tol: float = 1e-3,
                hbar: Optional[float] = None) -> List[Chord]:
    """All shell chords whose midpoint is x.

    A coarse midpoint scan seeds damped Newton iterations on the tip
    angles; solutions are canonicalised to theta_+ - theta_- in [0, pi]
    (short arc) and deduplicated.  Points outside the shell have no
    chords; a point on the shell owns a single zero-length chord, flagged
    as caustic.
    """
    x = np.asarray(x, dtype=float)
    scale = np.sqrt(shell.speed_scale)

    if abs(float(shell.system.energy(x)) - shell.energy) < 1e-10 * (
            1.0 + abs(shell.energy)):
        th = shell.theta_of_point(x)
        ch = _make_chord(shell, th, th, caustic_tol, degenerate=True)
        ch.caustic = True
        if hbar is not None and not ch.caustic:
            ch.amplitude = chord_amplitude(ch, hbar)
        return [ch]

    if not shell.contains(x):
        return []

    stride = max(1, shell.n_samples // n_scan)
    sub = shell.points[::stride]
    thg = shell.theta[::stride]
    m = len(thg)
    mid = 0.5 * (sub[:, None, :] + sub[None, :, :])
    d2 = np.sum((mid - x) ** 2, axis=-1)

    # periodic local minima of the midpoint-distance landscape
    mins = np.ones_like(d2, dtype=bool)
    for shift, axis in ((1, 0), (-1, 0), (1, 1), (-1, 1)):
        mins &= d2 <= np.roll(d2, shift, axis=axis)
    seeds = np.argwhere(mins)

    hcell = TWO_PI / m
    found: List[Chord] = []
    for i, j in seeds:
        # jitter splits degenerate diagonal seeds into tip pairs
        tm, tp = thg[i] - 0.25 * hcell, thg[j] + 0.25 * hcell
        ok = False
        for _ in range(40):
            r = 0.5 * (shell.point(tm) + shell.point(tp)) - x
            if np.linalg.norm(r) < 1e-10 * scale:
                ok = True
                break
            jac = 0.5 * np.stack(
                [shell.velocity_theta(tm), shell.velocity_theta(tp)], axis=1)
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
            step = np.clip(step, -2 * hcell, 2 * hcell)
            tm, tp = tm + step[0], tp + step[1]
        if not ok:
            continue
        if (tp - tm) % TWO_PI > np.pi:  # canonical: forward arc is short
            tm, tp = tp, tm
        tm, tp = tm % TWO_PI, tp % TWO_PI
        dup = False
        for c in found:
            dm = abs((tm - c.theta_minus + np.pi) % TWO_PI - np.pi)
            dp = abs((tp - c.theta_plus + np.pi) % TWO_PI - np.pi)
            if dm < 1e-6 and dp < 1e-6:
                dup = True
                break
        if not dup:
            found.append(_make_chord(shell, tm, tp, caustic_tol))

    found.sort(key=lambda c: (c.theta_plus - c.theta_minus) % TWO_PI)
    if hbar is not None:
        for c in found:
            if not c.caustic:
                c.amplitude = chord_amplitude(c, hbar)
    return found


def chord_amplitude(chord: Chord, hbar: float, dof: int = 1,
                    amplitude_scale: float = 1.0) -> float:
    """Stationary-phase amplitude  [2 / (pi sqrt(2 pi hbar))]^dof / sqrt|wedge|.

    Undefined on caustic (vanishing-wedge) chords: callers must branch on
    the caustic flag instead of consuming a garbage number.
    """
    if chord.caustic:
        raise ValueError("amplitude undefined on a caustic chord")
    pref = (2.0 / (np.pi * np.sqrt(2.0 * np.pi * hbar))) ** dof
    a = pref / np.sqrt(abs(chord.wedge))
    chord.amplitude = amplitude_scale * a
    return chord.amplitude


def angle_jacobian(shell: ShellSpec, theta_minus, theta_plus):
    """|d(midpoint)/d(theta_-, theta_+)| = |wedge| / 4."""
    return 0.25 * np.abs(shell.wedge(theta_minus, theta_plus))


def caustic_indicator(shell: ShellSpec, x) -> float:
    """min |wedge| over the chords of x; ~0 flags a caustic point.

    Returns nan for points outside the shell (no chords).
    """
    chords = find_chords(shell, x)
    if not chords:
        return float("nan")
    return min(abs(c.wedge) for c in chords)


_QUANT_CACHE: dict = {}


def _coarse_area(system: HamiltonianSystem, energy: float) -> float:
    """oint p dq by periodic trapezoid on a coarse orbit (root-finder use)."""
    x0 = shell_start(system, energy)
    period, pts = periodic_orbit(system, x0, n=256, dt_cap=2e-3)
    qdot = system.velocity(pts)[:, 1]
    return float(np.mean(pts[:, 0] * qdot) * period)


def quantize_energy(system: HamiltonianSystem, n_level: int, hbar: float,
                    e_bounds=None) -> float:
    """Energy of quantum level n from the area rule oint p dq = 2 pi hbar (n + 1/2)."""
    key = (system.name, n_level, float(hbar))
    if key in _QUANT_CACHE and _QUANT_CACHE[key][0] is system:
        return _QUANT_CACHE[key][1]
    target = TWO_PI * hbar * (n_level + 0.5)
    if e_bounds is None:
        e0 = float(system.energy(np.zeros(2)))
        # walk the lower bracket down toward the well bottom (up if the
        # orbit there is too slow to close within the period search window)
        lo, e_try = None, e0 + max(hbar, 1e-3)
        for _ in range(60):
            try:
                below = _coarse_area(system, e_try) < target
            except ShellError:
                e_try = e0 + 2.0 * (e_try - e0)
                continue
            if below:
                lo = e_try
                break
            e_try = e0 + 0.25 * (e_try - e0)
        if lo is None:
            raise ShellError("could not bracket the quantization area target")
        hi = e0 + 2.0 * (lo - e0)
        for _ in range(60):
            try:
                if _coarse_area(system, hi) > target:
                    break
            except ShellError as err:
                raise ShellError(
                    f"no closed orbit at E={hi}: quantized level {n_level} "
                    "does not fit in the well") from err
            hi = e0 + 2.0 * (hi - e0)
        e_bounds = (lo, hi)
    e = brentq(lambda en: _coarse_area(system, en) - target,
               *e_bounds, xtol=1e-10)
    _QUANT_CACHE[key] = (system, float(e))
    return float(e)
