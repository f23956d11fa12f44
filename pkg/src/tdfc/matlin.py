"""Dense real linear algebra used by the synthesis and certification code.

The eigen-solver and the matrix exponential are thin wrappers over LAPACK
(via numpy) and scipy's scaling-and-squaring Pade implementation; what lives
here is the bookkeeping around them: deterministic spectrum ordering,
conjugate pairing, the real block-diagonal change of basis, and a composite
Gauss-Legendre rule for matrix-valued integrands.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = ['Spectrum', 'RealBlockForm', 'Block', 'DefectiveMatrixError',
           'QuadratureError', 'eig', 'real_block_form', 'expm',
           'integrate_matrix']

#: Relative threshold under which an imaginary part is rounding noise.
TOL_IMAG = 1e-9
#: Eigenvector-matrix condition number above which A is treated as defective.
COND_CAP = 1e8


class DefectiveMatrixError(ValueError):
    """Raised when a matrix is (numerically) not diagonalizable."""


class QuadratureError(RuntimeError):
    """Raised when composite quadrature fails to reach its tolerance."""


def _as_square(A, name='A'):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def _scale(A):
    return max(np.linalg.norm(A, 2), np.finfo(float).tiny)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in canonical order.

    Ordering is by descending real part; within a conjugate pair the member
    with positive imaginary part comes first.  ``pairing[i]`` is the index of
    the conjugate of eigenvalue ``i`` (``-1`` for real eigenvalues) and
    ``multiplicities[i]`` counts the eigenvalues numerically equal to it.
    """

    eigenvalues: np.ndarray
    multiplicities: tuple
    pairing: tuple

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def is_real(self):
        return np.asarray(self.pairing) < 0

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(self.eigenvalues))) if len(self) else 0.0


@dataclass(frozen=True)
class Block:
    kind: str           # 'real' or 'complex'
    start: int
    size: int
    eigenvalue: complex  # representative, Im >= 0

    @property
    def slice(self):
        return slice(self.start, self.start + self.size)


@dataclass(frozen=True)
class RealBlockForm:
    """Real change of basis ``y = V x`` with ``V A V^-1 = D + N``.

    ``D`` is block diagonal with 1x1 real blocks and 2x2 blocks
    ``[[mu, -omega], [omega, mu]]`` (``omega > 0``).  ``N`` is the strictly
    upper-triangular nilpotent part; it is zero unless the matrix was supplied
    in exact Jordan form.
    """

    V: np.ndarray
    Vinv: np.ndarray
    D: np.ndarray
    N: np.ndarray
    layout: tuple = field(default=())
    jordan: bool = False

    @property
    def n(self):
        return self.D.shape[0]


def _sort_key(lam):
    # Round away sub-ulp noise so that conjugates compare equal on Re.
    return (-round(lam.real, 12), abs(round(lam.imag, 12)), -lam.imag)


def _canonical(w, scale, tol_imag):
    w = np.array(w, dtype=complex)
    snap = np.abs(w.imag) < tol_imag * scale
    w[snap] = w[snap].real
    order = sorted(range(len(w)), key=lambda i: _sort_key(w[i]))
    return w, order


def _pairing(w):
    n = len(w)
    pairing = [-1] * n
    used = set()
    for i in range(n):
        if w[i].imag == 0 or i in used:
            continue
        j = i + 1
        if j >= n or w[i].imag <= 0:
            raise np.linalg.LinAlgError("conjugate pairing failed")
        pairing[i], pairing[j] = j, i
        used.update((i, j))
    return tuple(pairing)


def _multiplicities(w, scale):
    tol = 1e-8 * scale
    return tuple(int(np.sum(np.abs(w - lam) <= tol)) for lam in w)


def eig(A, tol_imag=TOL_IMAG):
    """Spectrum of a real square matrix in canonical order.

    Parameters
    ----------
    A : (n, n) array_like
        Real matrix with finite entries.
    tol_imag : float, optional
        Eigenvalues with ``|Im| < tol_imag * ||A||`` are made exactly real.

    Returns
    -------
    Spectrum
    """
    A = _as_square(A)
    w = np.linalg.eigvals(A)
    w, order = _canonical(w, _scale(A), tol_imag)
    w = w[order]
    # Re-impose exact conjugacy on pairs.
    for i in range(len(w) - 1):
        if w[i].imag > 0:
            w[i + 1] = np.conj(w[i])
    return Spectrum(w, _multiplicities(w, _scale(A)), _pairing(w))


def _real_eigvec(v):
    k = np.argmax(np.abs(v))
    v = v * (abs(v[k]) / v[k])
    return v.real


def _jordan_form(A):
    """Validate ``A`` as an exact real Jordan matrix and split off ``N``."""
    n = A.shape[0]
    D = np.zeros_like(A)
    layout = []
    i = 0
    while i < n:
        if i + 1 < n and A[i + 1, i] != 0.0:
            mu, om = A[i, i], A[i + 1, i]
            if not (om > 0 and A[i + 1, i + 1] == mu and A[i, i + 1] == -om):
                raise ValueError(f"invalid 2x2 rotation block at {i}")
            D[i:i + 2, i:i + 2] = A[i:i + 2, i:i + 2]
            layout.append(Block('complex', i, 2, complex(mu, om)))
            i += 2
        else:
            D[i, i] = A[i, i]
            layout.append(Block('real', i, 1, complex(A[i, i])))
            i += 1
    N = A - D
    if np.any(np.tril(N) != 0.0):
        raise ValueError("matrix is not in real Jordan form")
    return D, N, tuple(layout)


def real_block_form(A, jordan=False, cond_cap=COND_CAP, tol_imag=TOL_IMAG):
    """Real block diagonalization ``A = V^-1 D V``.

    Parameters
    ----------
    A : (n, n) array_like
        Real square matrix.
    jordan : bool, optional
        Declare that ``A`` is already an exact real Jordan matrix.  Then
        ``V`` is the identity, ``D`` its block-diagonal part and ``N``
        collects the super-diagonal couplings.
    cond_cap : float, optional
        Largest admissible condition number of the eigenvector matrix.

    Returns
    -------
    RealBlockForm

    Raises
    ------
    DefectiveMatrixError
        If the eigenvector matrix is too ill-conditioned and ``jordan`` is
        not set.
    """
    A = _as_square(A)
    n = A.shape[0]
    if jordan:
        D, N, layout = _jordan_form(A)
        eye = np.eye(n)
        return RealBlockForm(eye, eye.copy(), D, N, layout, jordan=True)

    w, P = np.linalg.eig(A)
    cond = np.linalg.cond(P) if n else 1.0
    if not np.isfinite(cond) or cond > cond_cap:
        raise DefectiveMatrixError(
            f"eigenvector matrix condition number {cond:.3g} exceeds "
            f"{cond_cap:.3g}; A looks defective (pass jordan=True with A in "
            "exact Jordan form)")
    w, order = _canonical(w, _scale(A), tol_imag)

    cols = []
    layout = []
    D = np.zeros((n, n))
    for i in order:
        lam = w[i]
        k = len(cols)
        if lam.imag == 0:
            cols.append(_real_eigvec(P[:, i]))
            D[k, k] = lam.real
            layout.append(Block('real', k, 1, complex(lam.real)))
        elif lam.imag > 0:
            # A (a + ib) = lam (a + ib)  =>  A [a, -b] = [a, -b] [[mu, -om], [om, mu]]
            cols.append(P[:, i].real)
            cols.append(-P[:, i].imag)
            mu, om = lam.real, lam.imag
            D[k:k + 2, k:k + 2] = [[mu, -om], [om, mu]]
            layout.append(Block('complex', k, 2, complex(mu, om)))
    Vinv = np.column_stack(cols) if cols else np.zeros((0, 0))
    V = np.linalg.inv(Vinv)
    return RealBlockForm(V, Vinv, D, np.zeros((n, n)), tuple(layout))


def expm(A, t=1.0):
    """Matrix exponential ``exp(A t)``.

    Raises
    ------
    OverflowError
        If the result does not fit in double precision.
    """
    A = _as_square(A)
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    with np.errstate(over='ignore', invalid='ignore'):
        E = scipy.linalg.expm(A * t)
    if not np.all(np.isfinite(E)):
        raise OverflowError(f"exp(A t) overflows (||A t|| = {np.linalg.norm(A) * abs(t):.3g})")
    return E


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _gauss_legendre(f, a, b, panels):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    total = None
    for c, r in zip(mid, half):
        for x, wt in zip(_GL_NODES, _GL_WEIGHTS):
            term = (wt * r) * np.asarray(f(c + r * x), dtype=float)
            total = term if total is None else total + term
    return total


def integrate_matrix(f, a, b, tol=1e-10, panels=64, max_panels=2 ** 14):
    """Integrate a smooth matrix-valued function over ``[a, b]``.

    Composite 4-point Gauss-Legendre on ``panels`` equal panels, doubled
    until the entrywise change is at most ``tol * max(1, max|I|)``.

    Raises
    ------
    QuadratureError
        If ``max_panels`` is reached first.
    """
    a, b = float(a), float(b)
    if b < a:
        raise ValueError("need a <= b")
    if a == b:
        return np.zeros_like(np.asarray(f(a), dtype=float))
    prev = _gauss_legendre(f, a, b, panels)
    while panels < max_panels:
        panels *= 2
        cur = _gauss_legendre(f, a, b, panels)
        change = np.max(np.abs(cur - prev)) if cur.size else 0.0
        if change <= tol * max(1.0, np.max(np.abs(cur), initial=0.0)):
            return cur
        prev = cur
    raise QuadratureError(f"no convergence to {tol:g} within {max_panels} panels")
