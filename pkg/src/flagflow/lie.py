"""Matrix Lie algebra families with a Cartan involution.

Two families are realized:

``SL_REAL``
    g = sl(n, R), K = SO(n), sigma(a) = -a^T. k is the skew-symmetric part,
    p the symmetric traceless part.
``SU_COMPLEXIFIED``
    g = sl(n, C) viewed as the complexification of su(n), K = SU(n),
    sigma(a) = -a^H. k = su(n), p = i su(n) (Hermitian traceless).

The positive definite inner product is ``b_scale * Re tr(a b^H)``, which is
the trace form on p and its negative on k.
"""
from dataclasses import dataclass
import enum

import numpy as np

from .errors import ContextMismatchError, PreconditionError
from .numerics import MAX_DIM


class Family(enum.Enum):
    SL_REAL = "sl_real"
    SU_COMPLEXIFIED = "su_complexified"


@dataclass(frozen=True)
class AlgebraContext:
    family: Family
    n: int
    b_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not 2 <= self.n <= MAX_DIM:
            raise PreconditionError(f"n must lie in [2, {MAX_DIM}], got {self.n}")
        if not (self.b_scale > 0 and np.isfinite(self.b_scale)):
            raise PreconditionError("b_scale must be positive and finite")

    @property
    def is_complex(self):
        return self.family is Family.SU_COMPLEXIFIED

    @property
    def dtype(self):
        return np.complex128 if self.is_complex else np.float64

    def with_scale(self, b_scale):
        return AlgebraContext(self.family, self.n, b_scale)

    def element(self, mat, check=True):
        """Wrap ``mat`` as an :class:`AmbientElement` of this algebra."""
        return AmbientElement(self, mat, check=check)

    def zero(self):
        return AmbientElement(self, np.zeros((self.n, self.n), dtype=self.dtype))

    def sigma_mat(self, a):
        return -a.conj().T if self.is_complex else -a.T

    def inner_mat(self, a, b):
        return self.b_scale * float(np.real(np.vdot(b, a)))

    def in_k(self, a, tol=1e-12):
        """True if ``a`` is sigma-fixed (skew-symmetric / skew-Hermitian)."""
        a = _mat(a)
        return np.linalg.norm(a - self.sigma_mat(a)) <= tol * max(1.0, np.linalg.norm(a))

    def in_p(self, a, tol=1e-12):
        """True if ``a`` is sigma-odd (symmetric / Hermitian)."""
        a = _mat(a)
        return np.linalg.norm(a + self.sigma_mat(a)) <= tol * max(1.0, np.linalg.norm(a))

    # random samples, mainly for tests and experiment generators

    def _gaussian(self, rng):
        shape = (self.n, self.n)
        if self.is_complex:
            return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return rng.standard_normal(shape)

    def random_element(self, rng):
        a = self._gaussian(rng)
        return AmbientElement(self, a - np.trace(a) / self.n * np.eye(self.n))

    def random_p(self, rng, normalize=False):
        a = self._gaussian(rng)
        a = a + a.conj().T
        a = a - np.trace(a).real / self.n * np.eye(self.n)
        if normalize:
            a = a / np.linalg.norm(a)
        return AmbientElement(self, a)

    def random_k(self, rng, normalize=False):
        a = self._gaussian(rng)
        a = a - a.conj().T
        a = a - np.trace(a) / self.n * np.eye(self.n)
        if normalize:
            a = a / np.linalg.norm(a)
        return AmbientElement(self, a)

    def random_compact(self, rng):
        """Haar-random element of K (SO(n) or SU(n))."""
        z = self._gaussian(rng)
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        q = q * (d / np.abs(d))
        det = np.linalg.det(q)
        # push the determinant phase into the first column
        q[:, 0] = q[:, 0] / det
        return q


def _mat(a):
    return a.mat if isinstance(a, AmbientElement) else np.asarray(a)


class AmbientElement:
    """Traceless matrix in one of the registered algebras."""

    __slots__ = ("ctx", "mat")

    def __init__(self, ctx, mat, check=True):
        mat = np.asarray(mat)
        if check:
            if mat.shape != (ctx.n, ctx.n):
                raise PreconditionError(f"expected a {ctx.n}x{ctx.n} matrix, got {mat.shape}")
            if not ctx.is_complex:
                if np.iscomplexobj(mat):
                    if np.any(mat.imag != 0):
                        raise PreconditionError("sl(n, R) elements must be real")
                    mat = mat.real
                mat = mat.astype(np.float64)
            else:
                mat = mat.astype(np.complex128)
            if abs(np.trace(mat)) > 1e-12 * max(1.0, np.linalg.norm(mat)):
                raise PreconditionError(f"element is not traceless (trace = {np.trace(mat)})")
        self.ctx = ctx
        self.mat = mat

    def __repr__(self):
        return f"AmbientElement({self.ctx.family.value}, n={self.ctx.n})"

    def _coerce(self, other):
        if isinstance(other, AmbientElement):
            if other.ctx != self.ctx:
                raise ContextMismatchError("operands belong to different algebra contexts")
            return other.mat
        return NotImplemented

    def __add__(self, other):
        m = self._coerce(other)
        if m is NotImplemented:
            return m
        return AmbientElement(self.ctx, self.mat + m, check=False)

    def __sub__(self, other):
        m = self._coerce(other)
        if m is NotImplemented:
            return m
        return AmbientElement(self.ctx, self.mat - m, check=False)

    def __neg__(self):
        return AmbientElement(self.ctx, -self.mat, check=False)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        if not self.ctx.is_complex and np.iscomplexobj(c):
            raise PreconditionError("sl(n, R) is a real vector space")
        return AmbientElement(self.ctx, c * self.mat, check=False)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def norm(self):
        """Norm induced by :func:`inner`."""
        return float(np.sqrt(inner(self, self)))


def _same_ctx(a, b):
    if a.ctx != b.ctx:
        raise ContextMismatchError(f"context mismatch: {a.ctx} vs {b.ctx}")
    return a.ctx


def bracket(a, b):
    """Commutator ``[a, b] = ab - ba``."""
    ctx = _same_ctx(a, b)
    return AmbientElement(ctx, a.mat @ b.mat - b.mat @ a.mat, check=False)


def sigma(a):
    """The Cartan involution; fixes k and negates p."""
    return AmbientElement(a.ctx, a.ctx.sigma_mat(a.mat), check=False)


def project_k(a):
    return AmbientElement(a.ctx, 0.5 * (a.mat + a.ctx.sigma_mat(a.mat)), check=False)


def project_p(a):
    return AmbientElement(a.ctx, 0.5 * (a.mat - a.ctx.sigma_mat(a.mat)), check=False)


def inner(a, b):
    """``b_scale * Re tr(a b^H)``: positive definite, with k orthogonal to p."""
    ctx = _same_ctx(a, b)
    return ctx.inner_mat(a.mat, b.mat)
