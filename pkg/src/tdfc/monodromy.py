"""Exact period map of the linearized closed loop.

With the gain off on ``[0, 2tau)`` the solution is ``e^{At} x0`` there, and
during the active window ``[2tau, 3tau)`` both delayed arguments fall back
inside that free stretch.  Hence ``x(3tau) = M x(0)`` with

    M = e^{3A tau} + int_0^tau e^{A(tau-u)} K (e^{Au} - e^{A(u+tau)}) du

and no dependence on the history before ``t = 0``.  ``M`` is taken at phase
zero of the schedule (start of the off window); its spectrum does not depend
on that choice, the matrix itself does.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .matlin import Spectrum, _as_square, eig, expm, integrate_matrix

__all__ = ['MonodromyReport', 'monodromy_matrix', 'expected_multipliers',
           'certify', 'CERTIFY_BOUND']

CERTIFY_BOUND = 1e-7


@dataclass(frozen=True)
class MonodromyReport:
    M: np.ndarray
    multipliers: Spectrum
    spectral_radius: float
    stable: bool
    expected: np.ndarray = None
    deviations: np.ndarray = None
    certified: bool = None

    @property
    def max_deviation(self):
        if self.deviations is None or not len(self.deviations):
            return 0.0
        return float(np.max(self.deviations))

    def to_dict(self):
        out = {
            'multipliers': [[z.real, z.imag] for z in self.multipliers.eigenvalues],
            'spectral_radius': self.spectral_radius,
            'stable': self.stable,
        }
        if self.deviations is not None:
            out['expected'] = [[z.real, z.imag] for z in self.expected]
            out['max_deviation'] = self.max_deviation
            out['certified'] = self.certified
        return out

    def summary(self):
        lines = ['multipliers:']
        for z in self.multipliers.eigenvalues:
            lines.append(f'  {_fmt(z)}   |.| = {abs(z):.10f}')
        lines.append(f'spectral radius: {self.spectral_radius:.10f}')
        lines.append(f'stable: {"yes" if self.stable else "no"}')
        if self.deviations is not None:
            lines.append('expected:')
            for z, d in zip(self.expected, self.deviations):
                lines.append(f'  {_fmt(z)}   deviation {d:.3e}')
            lines.append(f'certified: {"yes" if self.certified else "no"}'
                         f' (max deviation {self.max_deviation:.3e})')
        return '\n'.join(lines)


def _fmt(z):
    if z.imag == 0:
        return f'{z.real:+.10f}'
    return f'{z.real:+.10f} {z.imag:+.10f}i'


def monodromy_matrix(A, K, tau, tol=1e-10):
    """Period-``3 tau`` map of ``x' = A x + K(t) (x(t-2tau) - x(t-tau))``.

    Returns
    -------
    MonodromyReport
        Without target comparison; see :func:`certify`.
    """
    A = _as_square(A)
    K = _as_square(K, 'K')
    if K.shape != A.shape:
        raise ValueError(f"K has shape {K.shape}, expected {A.shape}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    n = A.shape[0]
    E1 = expm(A, tau)
    E3 = expm(A, 3 * tau)
    # e^{A(tau-u)} K (e^{Au} - e^{A(u+tau)}) = E1 [e^{-Au} K e^{Au}] (I - E1)
    inner = integrate_matrix(lambda u: expm(A, -u) @ K @ expm(A, u), 0.0, tau, tol=tol)
    M = E3 + E1 @ inner @ (np.eye(n) - E1)
    spec = eig(M)
    rho = spec.spectral_radius
    return MonodromyReport(M, spec, rho, rho < 1)


def expected_multipliers(design):
    """Designed multipliers in layout order, one per eigenvalue of ``A``.

    Unstable modes get their targets, stable ones ``e^{3 lam tau}``.
    """
    targets = {t.index: t for t in design.targets}
    out = []
    for i, blk in enumerate(design.layout):
        lam = blk.eigenvalue
        t = targets.get(i)
        if t is None:
            z = np.exp(3 * lam * design.tau)
        else:
            z = t.multiplier(lam)
        if blk.kind == 'complex':
            out.extend([z, np.conj(z)])
        else:
            out.extend([z] * blk.size)
    return np.array(out, dtype=complex)


def certify(design, bound=CERTIFY_BOUND, tol=1e-10):
    """Compare the period-map multipliers of a design with its targets."""
    rep = monodromy_matrix(design.A, design.K, design.tau, tol=tol)
    expected = expected_multipliers(design)
    got = rep.multipliers.eigenvalues
    cost = np.abs(got[:, None] - expected[None, :])
    rows, cols = linear_sum_assignment(cost)
    dev = np.empty(len(expected))
    dev[cols] = cost[rows, cols]
    certified = bool(np.all(dev <= bound)) and rep.stable
    return MonodromyReport(rep.M, rep.multipliers, rep.spectral_radius, rep.stable,
                           expected, dev, certified)
