"""Wait-then-act chaos control.

The uncontrolled system runs until its trajectory first enters the
``delta``-ball around the target equilibrium (not before ``t = 2 tau``, so
that both delayed states are genuine past solution values); the periodic
two-delay feedback is switched on at that grid time.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dde import History, _Marcher, _n_steps, steps_per_delay, DIVERGENCE_CAP

__all__ = ['StrategyConfig', 'RunMetrics', 'run_strategy', 'delta_sweep',
           'write_sweep_csv', 'SWEEP_FIELDS']

SWEEP_FIELDS = ('delta', 'wait_time', 'settling_time', 'max_control_norm', 'converged')


@dataclass(frozen=True)
class StrategyConfig:
    """Controller, target and trigger radius for one run.

    Parameters
    ----------
    design : ControllerDesign
    target : array_like
        Equilibrium to stabilize.
    delta : float
        Euclidean radius of the trigger ball.
    max_wait : float, optional
        No activation after this time.
    tol_settle : float, optional
        Distance under which the state counts as settled.
    """

    design: object
    target: np.ndarray
    delta: float
    max_wait: float = 500.0
    tol_settle: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, 'target', np.array(self.target, dtype=float).ravel())
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.max_wait >= 0:
            raise ValueError("max_wait must be non-negative")
        if not self.tol_settle > 0:
            raise ValueError("tol_settle must be positive")

    @property
    def tau(self):
        return self.design.tau

    @property
    def K(self):
        return self.design.K


@dataclass(frozen=True)
class RunMetrics:
    delta: float
    wait_time: float            # None if never activated
    converged: bool
    settling_time: float        # None if not settled by the horizon
    max_control_norm: float
    exited_ball_after_activation: bool
    diverged: bool
    final_distance: float
    horizon: float

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_target(system, target):
    if target.shape != (system.dim,):
        raise ValueError(f"target has {target.size} entries, system dimension is {system.dim}")
    r = np.linalg.norm(system.rhs(target))
    if r > 1e-8 * max(1.0, np.linalg.norm(target)):
        raise ValueError(f"target {target.tolist()} is not an equilibrium (|f| = {r:.3g})")


def _metrics(traj, cfg, istar, T):
    dist = np.linalg.norm(traj.states - cfg.target, axis=1)
    h = traj.h
    unorm = np.linalg.norm(traj.controls, axis=1)
    wait = None if istar is None else traj.t0 + istar * h
    exited = bool(istar is not None and np.any(dist[istar + 1:] > cfg.delta))
    settle = None
    if not traj.diverged and len(dist) and dist[-1] < cfg.tol_settle:
        outside = np.nonzero(dist >= cfg.tol_settle)[0]
        j = 0 if len(outside) == 0 else outside[-1] + 1
        settle = float(traj.t0 + j * h)
    # settled with at least one full period of evidence before the horizon
    converged = (settle is not None and istar is not None
                 and settle <= traj.t0 + T - 3 * cfg.tau + 1e-9 * max(1.0, T))
    return RunMetrics(
        delta=float(cfg.delta),
        wait_time=wait,
        converged=bool(converged),
        settling_time=settle,
        max_control_norm=float(np.max(unorm)) if len(unorm) else 0.0,
        exited_ball_after_activation=exited,
        diverged=bool(traj.diverged),
        final_distance=float(dist[-1]) if len(dist) else math.nan,
        horizon=float(T),
    )


def _trigger(cfg, m, h, t0=0.0):
    target, delta, max_wait = cfg.target, cfg.delta, cfg.max_wait
    first = 2 * m

    def fire(i, x):
        return (i >= first and i * h + t0 <= max_wait * (1 + 1e-12)
                and np.linalg.norm(x - target) <= delta)
    return fire


def run_strategy(system, cfg, initial, h, T, cap=DIVERGENCE_CAP):
    """Free run until the trigger ball is reached, then periodic control.

    Returns
    -------
    traj : Trajectory
    metrics : RunMetrics
    """
    _check_target(system, cfg.target)
    m = steps_per_delay(cfg.tau, h)
    N = _n_steps(h, T)
    x0 = History(initial).x0
    mar = _Marcher(system.rhs, cfg.K, x0, m, h, N, cap)
    mar.run(trigger=_trigger(cfg, m, h))
    traj = mar.trajectory()
    return traj, _metrics(traj, cfg, mar.istar, T)


def delta_sweep(system, design, target, deltas, initial, h, T, max_wait=500.0,
                tol_settle=1e-3, cap=DIVERGENCE_CAP, keep_trajectories=False):
    """One strategy run per trigger radius, sharing the free-run prefix.

    The trajectory of each run coincides with the free trajectory up to its
    activation sample, so the free solution is computed once and every
    controlled run resumes from a copy of it.  Results are bitwise equal
    to separate :func:`run_strategy` calls.

    Parameters
    ----------
    deltas : sequence of float
        Monotone (non-decreasing or non-increasing) radii.

    Returns
    -------
    list of RunMetrics
        In the order of ``deltas``; with ``keep_trajectories`` a list of
        ``(RunMetrics, Trajectory)`` pairs.
    """
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ValueError("empty delta grid")
    inc = all(a <= b for a, b in zip(deltas, deltas[1:]))
    dec = all(a >= b for a, b in zip(deltas, deltas[1:]))
    if not (inc or dec):
        raise ValueError("delta grid must be monotone")
    cfgs = [StrategyConfig(design, target, d, max_wait, tol_settle) for d in deltas]
    target = cfgs[0].target
    _check_target(system, target)
    m = steps_per_delay(design.tau, h)
    N = _n_steps(h, T)
    x0 = History(initial).x0

    free = _Marcher(system.rhs, design.K, x0, m, h, N, cap).run()
    dist = np.linalg.norm(free.X[:free.i + 1] - target, axis=1)
    last_ok = min(free.i, int(math.floor(max_wait / h * (1 + 1e-12))))
    out = []
    for cfg in cfgs:
        hits = np.nonzero(dist[2 * m:last_ok + 1] <= cfg.delta)[0]
        if len(hits) == 0:
            mar = free
        else:
            istar = 2 * m + int(hits[0])
            mar = free.copy_until(istar)
            mar.istar = istar
            mar.run()
        traj = mar.trajectory()
        met = _metrics(traj, cfg, mar.istar, T)
        out.append((met, traj) if keep_trajectories else met)
    return out


def write_sweep_csv(rows, path_or_file):
    """Sweep table with columns ``delta,wait_time,settling_time,max_control_norm,converged``."""
    def fmt(v):
        if v is None:
            return ''
        if isinstance(v, bool):
            return str(int(v))
        return f'{v:.15g}'

    def emit(fh):
        w = csv.writer(fh, lineterminator='\n')
        w.writerow(SWEEP_FIELDS)
        for r in rows:
            r = r[0] if isinstance(r, tuple) else r
            w.writerow([fmt(getattr(r, k)) for k in SWEEP_FIELDS])

    if hasattr(path_or_file, 'write'):
        emit(path_or_file)
    else:
        with open(path_or_file, 'w', newline='') as fh:
            emit(fh)
