"""Closed-form gains for the two-delay periodic feedback law.

For a scalar mode ``dz/dt = lam z`` under ``u = eps(t) (z(t-2tau) - z(t-tau))``
with ``eps(t)`` off on ``[0, 2tau)`` and on during ``[2tau, 3tau)``, one period
maps ``z -> (e^{3 lam tau} + eps tau e^{lam tau} (1 - e^{lam tau})) z``.
Solving for the multiplier ``zeta`` gives

    eps = e^{-lam tau} (e^{3 lam tau} - zeta) / (tau (e^{lam tau} - 1)),

valid for real ``lam`` and, with ``lam = mu + i omega`` and
``zeta = rho e^{i theta}``, for a complex-conjugate pair acting on the
rotation-scaling block of the real block form.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .matlin import Block, RealBlockForm, _as_square, _scale, real_block_form

__all__ = ['ModeTarget', 'ControllerDesign', 'NonHyperbolicError',
           'scalar_gain', 'complex_gain', 'jordan_gain', 'jordan_return_matrix',
           'synthesize', 'uniform_targets', 'TOL_HYP']

#: Relative distance from the imaginary axis below which A is non-hyperbolic.
TOL_HYP = 1e-7


class NonHyperbolicError(ValueError):
    """Raised when an eigenvalue lies (numerically) on the imaginary axis."""


@dataclass(frozen=True)
class ModeTarget:
    """Desired period-map multiplier for one unstable mode.

    ``index`` refers to the position of the mode (a real eigenvalue or a
    conjugate pair) in the block layout.  Real and Jordan modes take
    ``zeta``; complex modes take ``rho`` and ``theta``, where ``theta=None``
    means ``arctan(omega / mu)``.
    """

    index: int
    kind: str = 'real'
    zeta: float = None
    rho: float = None
    theta: float = None

    def __post_init__(self):
        if self.kind in ('real', 'jordan'):
            if self.zeta is None or not abs(self.zeta) < 1:
                raise ValueError(f"mode {self.index}: need |zeta| < 1, got {self.zeta}")
        elif self.kind == 'complex':
            if self.rho is None or not 0 <= self.rho < 1:
                raise ValueError(f"mode {self.index}: need 0 <= rho < 1, got {self.rho}")
            if self.theta is not None and not 0 <= self.theta < 2 * math.pi:
                raise ValueError(f"mode {self.index}: need 0 <= theta < 2 pi, got {self.theta}")
        else:
            raise ValueError(f"unknown mode kind {self.kind!r}")

    def multiplier(self, lam=None):
        """Target multiplier as a complex number (``lam`` resolves auto theta)."""
        if self.kind != 'complex':
            return complex(self.zeta)
        theta = self.theta
        if theta is None:
            theta = math.atan(lam.imag / lam.real)
        return cmath.rect(self.rho, theta)


def _check_tau(tau):
    if not (tau > 0 and math.isfinite(tau)):
        raise ValueError(f"tau must be positive and finite, got {tau}")


def scalar_gain(lam, tau, zeta):
    """Gain placing the period-map multiplier of an unstable real mode at ``zeta``.

    Parameters
    ----------
    lam : float
        Unstable eigenvalue, ``lam > 0``.
    tau : float
        Delay, ``tau > 0``.
    zeta : float
        Target multiplier.  ``|zeta| < 1`` is required for stabilization but
        not enforced here.

    Returns
    -------
    float
    """
    _check_tau(tau)
    if not lam > 0:
        raise ValueError(f"scalar_gain needs an unstable mode (lam > 0), got {lam}")
    return math.exp(-lam * tau) * (math.exp(3 * lam * tau) - zeta) / (tau * math.expm1(lam * tau))


def complex_gain(mu, omega, tau, rho, theta=None):
    """Real and imaginary parts of the gain for an unstable complex pair.

    The pair ``mu +- i omega`` (``mu > 0``, ``omega > 0``) is driven to the
    multipliers ``rho e^{+- i theta}``; ``theta`` defaults to
    ``arctan(omega / mu)``.

    Returns
    -------
    eps1, eps2 : float
        Entries of the block ``[[eps1, -eps2], [eps2, eps1]]``.
    """
    _check_tau(tau)
    if not mu > 0:
        raise ValueError(f"complex_gain needs mu > 0, got {mu}")
    if not omega > 0:
        raise ValueError(f"complex_gain needs omega > 0, got {omega}")
    if not 0 <= rho < 1:
        raise ValueError(f"need 0 <= rho < 1, got {rho}")
    if theta is None:
        theta = math.atan(omega / mu)
    lam = complex(mu, omega)
    zeta = cmath.rect(rho, theta)
    eps = cmath.exp(-lam * tau) * (cmath.exp(3 * lam * tau) - zeta) / (tau * (cmath.exp(lam * tau) - 1))
    return eps.real, eps.imag


def jordan_gain(lam, tau, zeta):
    """Gain for a Jordan chain of ``lam``; applied as ``eps * I`` on the chain."""
    return scalar_gain(lam, tau, zeta)


def jordan_return_matrix(lam, tau, eps):
    """Period map of a 2x2 Jordan block ``[[lam, 1], [0, lam]]`` under ``eps * I``.

    Both diagonal entries equal the scalar multiplier, so choosing ``eps``
    from :func:`jordan_gain` makes ``zeta`` a double eigenvalue.
    """
    e1, e2, e3 = math.exp(lam * tau), math.exp(2 * lam * tau), math.exp(3 * lam * tau)
    diag = e3 + eps * tau * e1 * (1 - e1)
    off = 3 * tau * e3 + eps * tau ** 2 * e1 - 2 * eps * tau ** 2 * e2
    return np.array([[diag, off], [0.0, diag]])


@dataclass(frozen=True)
class ControllerDesign:
    """Synthesized controller; immutable.

    ``K`` is the gain in the original coordinates, ``Ktilde`` the gain in
    the block coordinates, ``K = V^-1 Ktilde V``.  ``K`` may be replaced by
    hand (see :meth:`with_gain`); ``Ktilde`` then is the transformed matrix
    and need not be block diagonal.
    """

    A: np.ndarray
    tau: float
    targets: tuple
    block_form: RealBlockForm
    Ktilde: np.ndarray
    K: np.ndarray
    overridden: bool = field(default=False)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def layout(self):
        return self.block_form.layout

    def with_gain(self, K):
        """Copy of this design using an externally supplied gain matrix."""
        K = _as_square(K, 'K')
        if K.shape != self.A.shape:
            raise ValueError(f"K has shape {K.shape}, expected {self.A.shape}")
        bf = self.block_form
        return ControllerDesign(self.A, self.tau, self.targets, bf,
                                bf.V @ K @ bf.Vinv, K, overridden=True)

    def to_dict(self):
        bf = self.block_form
        return {
            'tau': self.tau,
            'A': self.A.tolist(),
            'K': self.K.tolist(),
            'Ktilde': self.Ktilde.tolist(),
            'V': bf.V.tolist(),
            'D': bf.D.tolist(),
            'N': bf.N.tolist(),
            'jordan': bf.jordan,
            'layout': [{'kind': b.kind, 'start': b.start, 'size': b.size,
                        'eigenvalue': [b.eigenvalue.real, b.eigenvalue.imag]}
                       for b in bf.layout],
            'targets': [{'index': t.index, 'kind': t.kind, 'zeta': t.zeta,
                         'rho': t.rho, 'theta': t.theta} for t in self.targets],
            'overridden': self.overridden,
        }

    @classmethod
    def from_dict(cls, data):
        """Rebuild a design; the block form is recomputed from ``A``."""
        A = np.array(data['A'], dtype=float)
        targets = [ModeTarget(**t) for t in data['targets']]
        design = synthesize(A, float(data['tau']), targets, jordan=bool(data.get('jordan', False)))
        K = np.array(data['K'], dtype=float)
        if data.get('overridden') or not np.array_equal(K, design.K):
            design = design.with_gain(K)
        return design


def uniform_targets(A, zeta=None, rho=None, theta=None, jordan=False):
    """One target per unstable mode of ``A``: ``zeta`` for real, ``(rho, theta)`` for pairs."""
    bf = real_block_form(A, jordan=jordan)
    targets = []
    for i, blk in enumerate(bf.layout):
        if blk.eigenvalue.real <= 0:
            continue
        if blk.kind == 'real':
            if zeta is None:
                raise ValueError(f"mode {i} is real and unstable; zeta is required")
            targets.append(ModeTarget(i, 'jordan' if bf.jordan else 'real', zeta=zeta))
        else:
            if rho is None:
                raise ValueError(f"mode {i} is a complex unstable pair; rho is required")
            targets.append(ModeTarget(i, 'complex', rho=rho, theta=theta))
    return targets


def synthesize(A, tau, targets, jordan=False, tol_hyp=TOL_HYP):
    """Stabilizing gain for the equilibrium with Jacobian ``A``.

    Parameters
    ----------
    A : (n, n) array_like
        Jacobian at the target equilibrium; must be hyperbolic.
    tau : float
        Delay.
    targets : sequence of ModeTarget
        Exactly one target per unstable mode, in layout order.
    jordan : bool, optional
        ``A`` is supplied in exact real Jordan form.

    Returns
    -------
    ControllerDesign

    Raises
    ------
    NonHyperbolicError
        If some eigenvalue has ``|Re| < tol_hyp * ||A||``.
    ValueError
        On missing, extra or mismatched targets.
    matlin.DefectiveMatrixError
        If ``A`` is defective and ``jordan`` is not set.
    """
    A = _as_square(A)
    _check_tau(tau)
    bf = real_block_form(A, jordan=jordan)
    scale = _scale(A) if A.size else 1.0
    for blk in bf.layout:
        if abs(blk.eigenvalue.real) < tol_hyp * scale:
            raise NonHyperbolicError(f"eigenvalue {blk.eigenvalue:.6g} is on the imaginary axis")

    targets = tuple(targets)
    by_index = {}
    for t in targets:
        if t.index in by_index:
            raise ValueError(f"duplicate target for mode {t.index}")
        if not 0 <= t.index < len(bf.layout):
            raise ValueError(f"target for nonexistent mode {t.index}")
        by_index[t.index] = t

    Kt = np.zeros_like(A)
    for i, blk in enumerate(bf.layout):
        lam = blk.eigenvalue
        t = by_index.pop(i, None)
        if lam.real < 0:
            if t is not None:
                raise ValueError(f"target supplied for stable mode {i} (lambda = {lam:.6g})")
            continue
        if t is None:
            raise ValueError(f"no target for unstable mode {i} (lambda = {lam:.6g})")
        s = blk.slice
        if blk.kind == 'real':
            if t.kind not in ('real', 'jordan'):
                raise ValueError(f"mode {i} is real; got a {t.kind} target")
            gain = jordan_gain if bf.jordan else scalar_gain
            Kt[s, s] = gain(lam.real, tau, t.zeta)
        else:
            if t.kind != 'complex':
                raise ValueError(f"mode {i} is a complex pair; got a {t.kind} target")
            e1, e2 = complex_gain(lam.real, lam.imag, tau, t.rho, t.theta)
            Kt[s, s] = [[e1, -e2], [e2, e1]]
    K = bf.Vinv @ Kt @ bf.V
    return ControllerDesign(A, float(tau), targets, bf, Kt, K)
