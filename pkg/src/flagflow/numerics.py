"""Dense small-matrix kernels: eigendecomposition, QR flags, expm, ODE steps.

Every other module goes through these functions, so they validate their
inputs and carry the accuracy contracts the rest of the package relies on.
Eigenvalues are always returned in ascending order.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _backend
from .errors import DegeneracyError, PreconditionError, StiffnessError

MAX_DIM = 64


def as_matrix(a, name="matrix"):
    """Validate and return ``a`` as a square float64 or complex128 array."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError(f"{name} must be square, got shape {a.shape}")
    n = a.shape[0]
    if n < 1:
        raise PreconditionError(f"{name} must have n >= 1")
    if n > MAX_DIM:
        raise PreconditionError(f"{name} has n = {n} > {MAX_DIM}")
    if np.iscomplexobj(a):
        return a.astype(np.complex128, copy=False)
    if not np.issubdtype(a.dtype, np.number):
        raise PreconditionError(f"{name} must be numeric")
    return a.astype(np.float64, copy=False)


@dataclass(frozen=True, eq=False)
class SpectralFrame:
    """Ascending eigenvalues and a unitary frame of eigenvectors."""

    eigenvalues: np.ndarray
    frame: np.ndarray

    @property
    def n(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self, values=None):
        """``frame @ diag(values) @ frame^H`` (default: own eigenvalues)."""
        values = self.eigenvalues if values is None else np.asarray(values, dtype=float)
        u = self.frame
        out = (u * values) @ u.conj().T
        return 0.5 * (out + out.conj().T)

    def to_frame(self, a):
        """Express ``a`` in the eigenframe basis: ``U^H a U``."""
        return self.frame.conj().T @ a @ self.frame

    def from_frame(self, a):
        return self.frame @ a @ self.frame.conj().T


def _self_adjoint_residual(a):
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    return np.linalg.norm(a - a.conj().T) / scale


def sym_eig(a):
    """Eigendecomposition of a real symmetric matrix.

    Raises
    ------
    PreconditionError
        If ``a`` is complex or not symmetric within ``1e-12 * ||a||``.
    """
    a = as_matrix(a)
    if np.iscomplexobj(a):
        raise PreconditionError("sym_eig expects a real matrix; use herm_eig")
    if _self_adjoint_residual(a) > 1e-12:
        raise PreconditionError("sym_eig input is not symmetric")
    w, v = _backend.eigh(0.5 * (a + a.T))
    return SpectralFrame(np.asarray(w, dtype=float), np.asarray(v, dtype=float))


def herm_eig(a):
    """Eigendecomposition of a complex Hermitian matrix (unitary frame)."""
    a = as_matrix(a).astype(np.complex128)
    if _self_adjoint_residual(a) > 1e-12:
        raise PreconditionError("herm_eig input is not Hermitian")
    w, v = _backend.eigh(0.5 * (a + a.conj().T))
    return SpectralFrame(np.asarray(w, dtype=float), np.asarray(v, dtype=np.complex128))


def self_adjoint_eig(a):
    """Dispatch to :func:`sym_eig` or :func:`herm_eig` on the dtype of ``a``."""
    if np.iscomplexobj(a):
        return herm_eig(a)
    return sym_eig(a)


def qr_orthonormalize(b, rcond=1e-12):
    """Orthonormalize the columns of ``b`` preserving its nested column flag.

    The triangular factor is normalized to a positive real diagonal, which
    makes the result a deterministic function of ``b``.

    Parameters
    ----------
    b : (m, k) array
        Full column rank, ``k <= m``.
    rcond : float
        A column whose diagonal entry of ``R`` falls below ``rcond * ||b||_2``
        is treated as dependent.

    Returns
    -------
    q : (m, k) array
        ``q^H q = I`` and ``span(q[:, :j]) = span(b[:, :j])`` for every ``j``.

    Raises
    ------
    DegeneracyError
        On (numerically) rank-deficient input; ``err.column`` names the
        first offending column.
    """
    b = np.asarray(b)
    if b.ndim != 2 or b.shape[1] > b.shape[0]:
        raise PreconditionError(f"qr_orthonormalize needs a tall matrix, got {b.shape}")
    if max(b.shape) > MAX_DIM:
        raise PreconditionError(f"dimension exceeds {MAX_DIM}")
    if not np.all(np.isfinite(b)):
        raise PreconditionError("qr_orthonormalize input has non-finite entries")
    q, r = np.linalg.qr(b)
    d = np.diagonal(r)
    scale = np.linalg.norm(b, 2)
    small = np.flatnonzero(np.abs(d) <= rcond * scale)
    if scale == 0.0 or small.size:
        col = int(small[0]) if small.size else 0
        raise DegeneracyError(f"column {col} is linearly dependent on its predecessors", col)
    return q * (d / np.abs(d)).conj()


def expm(a):
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    a = as_matrix(a)
    return scipy.linalg.expm(a)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array(_A[6] + [0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States of an integrated ODE at the requested sample times."""

    times: np.ndarray
    states: np.ndarray
    n_steps: int
    n_rejected: int
    n_evals: int


def _error_norm(err, y0, y1, tol):
    scale = tol * (1.0 + np.maximum(np.abs(y0), np.abs(y1)))
    return float(np.max(np.abs(err) / scale))


def _initial_step(field, t0, y0, f0, tol):
    # Hairer, Norsett & Wanner, Solving ODEs I, II.4
    scale = tol * (1.0 + np.abs(y0))
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = field(y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def ode_integrate(field, x0, t_end, tol, times=None, post_step=None, max_steps=200_000):
    """Integrate ``x' = field(x)`` with an adaptive Dormand-Prince 5(4) pair.

    Each accepted step keeps the embedded error estimate below ``tol`` in the
    mixed norm ``|err_i| <= tol * (1 + |x_i|)``. Steps are shortened to land
    exactly on the sample times, so no interpolation is involved.

    Parameters
    ----------
    field : callable
        Autonomous right-hand side, array -> array of the same shape.
    x0 : array
        Initial state (any shape, real or complex).
    t_end : float
        Final time, ``t_end >= 0``.
    tol : float
        Local error tolerance in ``[1e-13, 1e-3]``.
    times : array, optional
        Ascending sample times in ``[0, t_end]``; default ``[0, t_end]``.
    post_step : callable, optional
        Applied to every accepted state before the next step (for example a
        projection back onto an invariant manifold).

    Raises
    ------
    StiffnessError
        If the step size underflows.
    """
    if not 1e-13 <= tol <= 1e-3:
        raise PreconditionError(f"tol must lie in [1e-13, 1e-3], got {tol}")
    t_end = float(t_end)
    if t_end < 0:
        raise PreconditionError("t_end must be non-negative")
    times = np.array([0.0, t_end] if times is None else times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0) or times[0] < 0 or times[-1] > t_end:
        raise PreconditionError("sample times must be ascending within [0, t_end]")

    y = np.array(x0, dtype=np.result_type(x0, float), copy=True)
    out = np.empty((len(times),) + y.shape, dtype=y.dtype)
    t = 0.0
    n_steps = n_rejected = 0
    k_idx = 0
    while k_idx < len(times) and times[k_idx] <= 0.0:
        out[k_idx] = y
        k_idx += 1
    if k_idx == len(times):
        return Trajectory(times, out, 0, 0, 0)

    f = field(y)
    n_evals = 1
    h = _initial_step(field, t, y, f, tol)
    n_evals += 1
    k = [None] * 7
    while k_idx < len(times):
        target = times[k_idx]
        h_try = min(h, target - t)
        landing = h_try >= target - t
        k[0] = f
        for i in range(1, 7):
            dy = sum(a * kj for a, kj in zip(_A[i], k[:i]) if a != 0.0)
            k[i] = field(y + h_try * dy)
        n_evals += 6
        y_new = y + h_try * sum(b * kj for b, kj in zip(_B, k) if b != 0.0)
        err = _error_norm(h_try * sum(e * kj for e, kj in zip(_E, k) if e != 0.0), y, y_new, tol)
        if err <= 1.0:
            t = target if landing else t + h_try
            n_steps += 1
            if post_step is not None:
                y_new = post_step(y_new)
                f = field(y_new)
                n_evals += 1
            else:
                f = k[6]
            y = y_new
            while k_idx < len(times) and times[k_idx] <= t:
                out[k_idx] = y
                k_idx += 1
            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            # a step clipped to hit a sample time says little about the
            # natural step size, so only grow from the unclipped proposal
            h = max(h, h_try * factor) if landing else h_try * factor
        else:
            n_rejected += 1
            h = h_try * max(0.2, 0.9 * err ** -0.2)
        if h < 1e-14 * max(1.0, abs(t)):
            raise StiffnessError(f"step size underflow at t = {t:.6g}", t, h, y)
        if n_steps + n_rejected > max_steps:
            raise StiffnessError(f"exceeded {max_steps} steps at t = {t:.6g}", t, h, y)
    return Trajectory(times, out, n_steps, n_rejected, n_evals)
