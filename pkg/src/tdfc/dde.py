"""Fixed-step integrator for ``x' = f(x) + K(t) (x(t-2tau) - x(t-tau))``.

Classical RK4 on a grid with ``tau = m h``.  The delayed arguments at the
half-step stage times fall between stored samples and are taken from the
cubic Hermite interpolant of the stored solution, using the one-sided
derivatives so that kinks at grid points (gain switches, the start of the
history) are respected.  All gain switches fall on grid points, so no step
straddles one.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

__all__ = ['GainSchedule', 'History', 'Trajectory', 'OrderCheck', 'integrate',
           'order_check', 'steps_per_delay', 'grid_horizon', 'DIVERGENCE_CAP']

log = logging.getLogger(__name__)

DIVERGENCE_CAP = 1e6


@dataclass(frozen=True)
class GainSchedule:
    """Periodic gain switched on at ``activation`` (``inf``: never).

    With ``s = t - activation`` the gain is ``0`` for ``s mod 3tau`` in
    ``[0, 2tau)`` and ``K`` on ``[2tau, 3tau)``; it is ``0`` before
    activation.
    """

    K: np.ndarray
    tau: float
    activation: float = math.inf

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError("K must be square")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, 'K', K)

    @classmethod
    def never(cls, n, tau):
        return cls(np.zeros((n, n)), tau)

    def is_active(self, t):
        """Whether the gain equals ``K`` at time ``t`` (right-continuous)."""
        if t < self.activation - 1e-9 * self.tau:
            return False
        r = (t - self.activation) / self.tau
        k = round(r)
        if abs(r - k) <= 1e-9 * max(1.0, abs(r)):
            r = k       # on a switch time up to rounding
        if r < 0:
            return False
        return math.floor(r) % 3 == 2

    def gain(self, t):
        return self.K.copy() if self.is_active(t) else np.zeros_like(self.K)

    def activation_index(self, t0, h):
        """Grid index of the activation time; ``None`` if never active."""
        if math.isinf(self.activation):
            return None
        k = (self.activation - t0) / h
        i = round(k)
        if abs(k - i) > 1e-9 * max(1.0, abs(k)):
            raise ValueError(f"activation time {self.activation} is not on the grid")
        # activation before t0 is equivalent to an earlier phase
        return i


def _active(i, istar, m):
    return istar is not None and i >= istar and (i - istar) % (3 * m) >= 2 * m


@dataclass(frozen=True)
class History:
    """Constant initial history ``x(t) = x0`` for ``t <= t0``."""

    x0: np.ndarray

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float).ravel()
        if not np.all(np.isfinite(x0)):
            raise ValueError("history must be finite")
        object.__setattr__(self, 'x0', x0)


@dataclass
class Trajectory:
    """Uniformly sampled solution; sample ``i`` is at ``t0 + i h``.

    ``controls[i]`` is the control applied on ``[t_i, t_{i+1})`` and
    ``active[i]`` tells whether the gain was on there.
    """

    t0: float
    h: float
    states: np.ndarray
    controls: np.ndarray
    active: np.ndarray
    diverged: bool = False

    def __len__(self):
        return len(self.states)

    @property
    def times(self):
        return self.t0 + self.h * np.arange(len(self.states))

    def to_csv(self, path_or_file):
        """Write ``t,x1..xn,u1..un,active`` rows with 15 significant digits."""
        n = self.states.shape[1]
        header = ','.join(['t'] + [f'x{k + 1}' for k in range(n)]
                          + [f'u{k + 1}' for k in range(n)] + ['active'])
        lines = [header]
        for t, x, u, a in zip(self.times, self.states, self.controls, self.active):
            vals = [t, *x, *u]
            lines.append(','.join(f'{v:.15g}' for v in vals) + f',{int(a)}')
        text = '\n'.join(lines) + '\n'
        if hasattr(path_or_file, 'write'):
            path_or_file.write(text)
        else:
            with open(path_or_file, 'w', newline='') as fh:
                fh.write(text)


def steps_per_delay(tau, h):
    """Integer ``m = tau / h``; raises if the grid is not delay-aligned."""
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"step must be positive, got {h}")
    r = tau / h
    m = round(r)
    if m < 10 or abs(r - m) > 1e-9 * r:
        raise ValueError(f"h = {h} must equal tau/m for an integer m >= 10 (tau/h = {r})")
    return int(m)


def grid_horizon(T, h):
    """Largest multiple of ``h`` not exceeding ``T`` (up to rounding)."""
    return math.floor(T / h * (1 + 1e-12)) * h


def _n_steps(h, T):
    if T < 0:
        raise ValueError("horizon must be non-negative")
    r = T / h
    N = round(r)
    if abs(r - N) > 1e-9 * max(1.0, r):
        raise ValueError(f"horizon {T} is not a multiple of h = {h}")
    return int(N)


class _Marcher:
    """State of one fixed-step integration; can be resumed from a copy.

    Besides the states it keeps ``F[i] = f(x_i)`` and the right/left
    derivatives ``FR``/``FL`` needed by the Hermite interpolant.
    """

    def __init__(self, rhs, K, x0, m, h, N, cap=DIVERGENCE_CAP):
        n = len(x0)
        self.rhs, self.K, self.m, self.h, self.N, self.cap = rhs, K, m, h, N, cap
        self.X = np.empty((N + 1, n))
        self.F = np.empty((N + 1, n))
        self.FR = np.empty((N + 1, n))
        self.FL = np.empty((N + 1, n))
        self.U = np.zeros((N + 1, n))
        self.act = np.zeros(N + 1, dtype=bool)
        self.X[0] = x0
        self.F[0] = rhs(self.X[0])
        self.FL[0] = 0.0     # constant history
        self.i = 0           # index of the last computed sample
        self.istar = None
        self.diverged = False

    def copy_until(self, i):
        """New marcher sharing the first ``i + 1`` samples (free prefix)."""
        new = object.__new__(_Marcher)
        new.__dict__.update(self.__dict__)
        for name in ('X', 'F', 'FR', 'FL', 'U', 'act'):
            arr = getattr(self, name)
            c = np.empty_like(arr)
            c[:i + 1] = arr[:i + 1]
            if name in ('U', 'act'):
                c[i + 1:] = 0
            setattr(new, name, c)
        new.i = i
        new.diverged = False
        return new

    def _past(self, j):
        return self.X[j] if j >= 0 else self.X[0]

    def _past_mid(self, j):
        if j < 0:
            return self.X[0]
        return 0.5 * (self.X[j] + self.X[j + 1]) + (self.h / 8) * (self.FR[j] - self.FL[j + 1])

    def run(self, stop=None, trigger=None):
        """Advance to ``stop`` (default ``N``).

        ``trigger(i, x_i)`` is consulted at every sample while inactive; a
        true return activates the schedule at that index.
        """
        stop = self.N if stop is None else stop
        rhs, K, m, h = self.rhs, self.K, self.m, self.h
        X, F, FR, FL, U, act = self.X, self.F, self.FR, self.FL, self.U, self.act
        m2, per, half = 2 * m, 3 * m, 0.5 * h
        i = self.i
        while i < stop:
            if trigger is not None and self.istar is None and trigger(i, X[i]):
                self.istar = i
            x = X[i]
            istar = self.istar
            on = istar is not None and i >= istar and (i - istar) % per >= m2
            if on:
                u0 = K @ (self._past(i - m2) - self._past(i - m))
                u1 = K @ (self._past_mid(i - m2) - self._past_mid(i - m))
                u2 = K @ (self._past(i + 1 - m2) - self._past(i + 1 - m))
                U[i] = u0
                act[i] = True
                k1 = F[i] + u0
                k2 = rhs(x + half * k1) + u1
                k3 = rhs(x + half * k2) + u1
                k4 = rhs(x + h * k3) + u2
            else:
                u2 = 0.0
                k1 = F[i]
                k2 = rhs(x + half * k1)
                k3 = rhs(x + half * k2)
                k4 = rhs(x + h * k3)
            FR[i] = k1
            xn = x + (h / 6) * (k1 + 2 * (k2 + k3) + k4)
            i += 1
            X[i] = xn
            self.i = i
            if not (np.all(np.isfinite(xn)) and np.linalg.norm(xn) <= self.cap):
                self.diverged = True
                break
            F[i] = rhs(xn)
            FL[i] = F[i] + u2
        if not self.diverged and self.i == self.N:
            self._final_control()
        return self

    def _final_control(self):
        # Control at the last sample, for output only.
        i, m = self.i, self.m
        if _active(i, self.istar, m):
            self.act[i] = True
            self.U[i] = self.K @ (self._past(i - 2 * m) - self._past(i - m))

    def trajectory(self, t0=0.0):
        n = self.i + 1
        return Trajectory(t0, self.h, self.X[:n].copy(), self.U[:n].copy(),
                          self.act[:n].copy(), self.diverged)


def _setup(system, schedule, history, h, T):
    m = steps_per_delay(schedule.tau, h)
    N = _n_steps(h, T)
    x0 = history.x0
    if x0.shape != (system.dim,):
        raise ValueError(f"history has {x0.size} entries, system dimension is {system.dim}")
    if schedule.K.shape != (system.dim, system.dim):
        raise ValueError("gain shape does not match the system dimension")
    return m, N, x0


def integrate(system, schedule, history, h, T, t0=0.0, cap=DIVERGENCE_CAP):
    """Integrate the controlled delay equation on ``[t0, t0 + T]``.

    Parameters
    ----------
    system : SystemModel
    schedule : GainSchedule
    history : History
        Constant history on ``[t0 - 2 tau, t0]``.
    h : float
        Step, ``tau / m`` with integer ``m >= 10``.
    T : float
        Horizon, a multiple of ``h``.  ``T = 0`` gives a single sample.
    cap : float, optional
        Integration stops with ``diverged=True`` once ``||x|| > cap``.

    Returns
    -------
    Trajectory
    """
    m, N, x0 = _setup(system, schedule, history, h, T)
    istar = schedule.activation_index(t0, h)
    if istar is not None and istar < 0:
        # move the activation forward by whole periods: same schedule on t >= t0
        istar %= 3 * m
    mar = _Marcher(system.rhs, schedule.K, x0, m, h, N, cap)
    mar.istar = istar
    return mar.run().trajectory(t0)


@dataclass(frozen=True)
class OrderCheck:
    exponent: float
    errors: tuple
    steps: tuple
    window: int
    skipped: bool = False
    reason: str = ''

    def within(self, lo=3.5, hi=4.5):
        return self.skipped or lo <= self.exponent <= hi


def order_check(system, schedule, history, T, h=None, floor=1e-12):
    """Observed convergence order from runs at ``h``, ``h/2`` and ``h/4``.

    Errors are sup-norm differences on the common coarse grid, restricted
    to the samples before the first change of smooth region (for systems
    that define ``region``).  If the finer difference is at the roundoff
    floor the check is skipped.

    Returns
    -------
    OrderCheck
    """
    tau = schedule.tau
    if h is None:
        h = tau / 10
    steps_per_delay(tau, h)
    runs = [integrate(system, schedule, history, h / 2 ** k, T) for k in range(3)]
    if any(r.diverged for r in runs):
        raise FloatingPointError("order check run diverged")
    coarse = [r.states[::2 ** k] for k, r in enumerate(runs)]
    n = len(coarse[0])
    window = n
    if system.region is not None:
        for k, r in enumerate(runs):
            regs = [system.region(x) for x in r.states]
            changes = [j for j in range(1, len(regs)) if regs[j] != regs[0]]
            if changes:
                window = min(window, (changes[0] - 1) // 2 ** k)
    e1 = float(np.max(np.abs(coarse[0][:window] - coarse[1][:window]), initial=0.0))
    e2 = float(np.max(np.abs(coarse[1][:window] - coarse[2][:window]), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(coarse[2][:window]), initial=0.0)))
    steps = (h, h / 2, h / 4)
    if window < 2:
        log.info("order check skipped: no smooth window")
        return OrderCheck(math.nan, (e1, e2), steps, window, True, 'no smooth window')
    if e2 <= floor * scale:
        log.info("order check skipped: differences %.3g at roundoff floor", e2)
        return OrderCheck(math.nan, (e1, e2), steps, window, True, 'roundoff floor')
    return OrderCheck(math.log2(e1 / e2), (e1, e2), steps, window)
