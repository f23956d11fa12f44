"""Benchmark vector fields: Chua's piecewise-linear family, Rossler, linear."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = ['SystemModel', 'ChuaParams', 'chua', 'rossler', 'linear',
           'DOUBLE_SCROLL', 'DOUBLE_HOOK', 'KONISHI_DOUBLE_SCROLL',
           'CHUA_PRESETS', 'get_system']

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemModel:
    """Autonomous vector field ``x' = f(x)`` with Jacobian and equilibria.

    ``region`` optionally labels the smooth piece a state lies in; the
    integrator's order check uses it to avoid windows containing kinks.
    """

    name: str
    dim: int
    rhs: Callable
    jacobian: Callable
    equilibria: tuple
    params: dict = field(default_factory=dict)
    region: Optional[Callable] = None

    def equilibrium(self, which):
        """Equilibrium by index into :attr:`equilibria` or as an explicit vector.

        Explicit vectors are checked against the vector field.
        """
        if isinstance(which, (int, np.integer)):
            if not 0 <= which < len(self.equilibria):
                raise IndexError(f"{self.name} lists {len(self.equilibria)} equilibria, "
                                 f"no index {which}")
            return self.equilibria[which].copy()
        x = np.asarray(which, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"equilibrium must have {self.dim} entries")
        r = np.linalg.norm(self.rhs(x))
        if r > 1e-8 * max(1.0, np.linalg.norm(x)):
            raise ValueError(f"{x.tolist()} is not an equilibrium of {self.name} (|f| = {r:.3g})")
        return x


@dataclass(frozen=True)
class ChuaParams:
    alpha: float
    beta: float
    gamma: float
    m0: float
    m1: float

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not math.isfinite(v):
                raise ValueError(f"Chua parameter {k} is not finite")

    @property
    def A1(self):
        """Jacobian on the outer regions ``|x1| >= 1``."""
        return self._A(self.m1)

    @property
    def A2(self):
        """Jacobian on the inner region ``|x1| <= 1``."""
        return self._A(self.m0)

    @property
    def d(self):
        return np.array([self.alpha * (self.m0 - self.m1), 0.0, 0.0])

    def _A(self, m):
        a, b, g = self.alpha, self.beta, self.gamma
        return np.array([[-a * (1 + m), a, 0.0], [1.0, -1.0, 1.0], [0.0, -b, -g]])

    def nonlinearity(self, x1):
        """Piecewise-linear characteristic ``f(x1)``."""
        return self.m1 * x1 + 0.5 * (self.m0 - self.m1) * (abs(x1 + 1) - abs(x1 - 1))

    def rhs_direct(self, x):
        """Vector field written with the characteristic ``f`` (reference form)."""
        x1, x2, x3 = x
        return np.array([self.alpha * (x2 - x1 - self.nonlinearity(x1)),
                         x1 - x2 + x3,
                         -self.beta * x2 - self.gamma * x3])


DOUBLE_SCROLL = ChuaParams(alpha=9.3515, beta=14.79, gamma=0.0, m0=-1.138, m1=-0.722)
DOUBLE_HOOK = ChuaParams(alpha=-6.0, beta=-4.442, gamma=0.0, m0=-2.265, m1=-0.93)
KONISHI_DOUBLE_SCROLL = ChuaParams(alpha=9.0, beta=100 / 7, gamma=0.0, m0=-8 / 7, m1=-5 / 7)

CHUA_PRESETS = {
    'double_scroll': DOUBLE_SCROLL,
    'double_hook': DOUBLE_HOOK,
    'konishi_double_scroll': KONISHI_DOUBLE_SCROLL,
}


def chua(params=DOUBLE_SCROLL):
    """Chua's oscillator in regional piecewise-linear form.

    ``x' = A2 x`` on ``|x1| <= 1``, ``A1 x - d`` on ``x1 > 1`` and
    ``A1 x + d`` on ``x1 < -1``; continuous across ``|x1| = 1``, where the
    inner branch is used.  Equilibria: the origin, then the solutions of
    ``A1 x = d`` (right region) and ``A1 x = -d`` (left region) when they
    lie in their regions.
    """
    p = params
    A1, A2, d = p.A1, p.A2, p.d
    a, b, g = p.alpha, p.beta, p.gamma
    k2 = -a * (1 + p.m0)
    k1 = -a * (1 + p.m1)
    off = a * (p.m0 - p.m1)

    def rhs(x):
        x1, x2, x3 = x
        if x1 > 1.0:
            dx1 = k1 * x1 + a * x2 - off
        elif x1 < -1.0:
            dx1 = k1 * x1 + a * x2 + off
        else:
            dx1 = k2 * x1 + a * x2
        return np.array([dx1, x1 - x2 + x3, -b * x2 - g * x3])

    def jacobian(x):
        return (A2 if abs(x[0]) <= 1.0 else A1).copy()

    def region(x):
        return 0 if abs(x[0]) <= 1.0 else (1 if x[0] > 0 else -1)

    eqs = [np.zeros(3)]
    try:
        right = np.linalg.solve(A1, d)
    except np.linalg.LinAlgError:
        log.warning("Chua A1 is singular; only the origin is listed as an equilibrium")
    else:
        for x, sign in ((right, 1), (-right, -1)):
            if sign * x[0] >= 1.0:
                eqs.append(x)
            else:
                log.warning("outer equilibrium %s lies outside its region; excluded", x)
    return SystemModel('chua', 3, rhs, jacobian, tuple(eqs), params=dict(p.__dict__),
                       region=region)


def rossler(a=0.2, b=0.2, c=5.7):
    """Rossler system; the inner equilibrium is listed first."""

    def rhs(x):
        x1, x2, x3 = x
        return np.array([-x2 - x3, x1 + a * x2, b + x3 * (x1 - c)])

    def jacobian(x):
        return np.array([[0.0, -1.0, -1.0], [1.0, a, 0.0], [x[2], 0.0, x[0] - c]])

    eqs = []
    disc = c * c - 4 * a * b
    if disc >= 0:
        r = math.sqrt(disc)
        # (c - r)/2 written to avoid cancellation
        for x1 in (2 * a * b / (c + r), (c + r) / 2):
            eqs.append(np.array([x1, -x1 / a, x1 / a]))
    else:
        log.warning("Rossler parameters admit no real equilibria")
    return SystemModel('rossler', 3, rhs, jacobian, tuple(eqs),
                       params={'a': a, 'b': b, 'c': c})


def linear(A):
    """``x' = A x`` with the origin as its equilibrium."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    n = A.shape[0]

    def rhs(x):
        return A @ x

    def jacobian(x):
        return A.copy()

    return SystemModel('linear', n, rhs, jacobian, (np.zeros(n),), params={'A': A.tolist()})


def get_system(name, preset=None, **overrides):
    """Build a system by name, as used in experiment configs."""
    if name == 'chua':
        base = CHUA_PRESETS[preset] if preset else DOUBLE_SCROLL
        if preset and preset not in CHUA_PRESETS:
            raise KeyError(f"unknown Chua preset {preset!r}")
        fields = dict(base.__dict__)
        for k, v in overrides.items():
            if k not in fields:
                raise KeyError(f"unknown Chua parameter {k!r}")
            fields[k] = float(v)
        return chua(ChuaParams(**fields))
    if name == 'rossler':
        if preset:
            raise KeyError("rossler has no presets")
        kw = {'a': 0.2, 'b': 0.2, 'c': 5.7}
        for k, v in overrides.items():
            if k not in kw:
                raise KeyError(f"unknown Rossler parameter {k!r}")
            kw[k] = float(v)
        return rossler(**kw)
    if name == 'linear':
        if 'A' not in overrides:
            raise KeyError("linear system needs a matrix A")
        return linear(overrides['A'])
    raise KeyError(f"unknown system {name!r}")
