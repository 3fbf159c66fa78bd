"""The orbit M = Ad(K)x = G/H and the action of G on it.

A point of M is a self-adjoint matrix with a fixed spectrum. The noncompact
group G acts by flag transport: push the ascending-eigenvalue flag of x
forward by g, re-orthonormalize with QR (which keeps nested spans), and
reassemble a matrix with the same spectrum. Block-upper-triangular matrices
in the eigenframe (the group H with Lie algebra c + n_minus) fix the flag,
so the result depends only on the coset gH.
"""
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import PreconditionError
from .lie import AmbientElement, sigma
from .numerics import SpectralFrame, qr_orthonormalize, self_adjoint_eig
from .roots import RootDecomposition, blocks_from_spectrum, group_spectrum, triangular_split

ISOSPECTRAL_RTOL = 1e-10
FD_STEP = 1e-5


class OrbitPoint:
    """A point x of the isotropy orbit M in p, with its eigenframe.

    Parameters
    ----------
    ctx : AlgebraContext
    mat : array
        Symmetric (real family) or Hermitian (complexified family) traceless.
    spectrum : array, optional
        Declared orbit spectrum with exact repeats. When given, the
        eigenvalues of ``mat`` must match it within ``1e-10`` of the spectral
        diameter and the declared values become the block values.
    """

    __slots__ = ("ctx", "mat", "frame", "blocks", "decomposition")

    def __init__(self, ctx, mat, spectrum=None, _frame=None, _blocks=None):
        if _frame is None:
            elem = AmbientElement(ctx, mat)
            mat = elem.mat
            if not ctx.in_p(mat, tol=1e-10):
                raise PreconditionError("orbit points must lie in p (symmetric / Hermitian)")
            mat = 0.5 * (mat + mat.conj().T)
            _frame = self_adjoint_eig(mat)
            if spectrum is not None:
                _blocks = _checked_blocks(_frame.eigenvalues, spectrum)
            else:
                _blocks = group_spectrum(_frame.eigenvalues)
        self.ctx = ctx
        self.mat = mat
        self.frame = _frame
        self.blocks = tuple(_blocks)
        self.decomposition = RootDecomposition.from_blocks(ctx, _frame, self.blocks)

    @classmethod
    def from_frame(cls, ctx, frame, blocks):
        """Assemble ``frame @ diag(spectrum) @ frame^H`` for a known frame."""
        frame = np.asarray(frame)
        if not ctx.is_complex:
            frame = frame.real if np.iscomplexobj(frame) else frame
        values = np.repeat([b.value for b in blocks], [b.multiplicity for b in blocks])
        sf = SpectralFrame(values, frame)
        return cls(ctx, sf.reconstruct(), _frame=sf, _blocks=blocks)

    @classmethod
    def from_spectrum(cls, ctx, spectrum, frame=None):
        """Point with the given spectrum, diagonal in ``frame`` (default identity)."""
        blocks = blocks_from_spectrum(spectrum)
        if sum(b.multiplicity for b in blocks) != ctx.n:
            raise PreconditionError(f"spectrum has {len(spectrum)} entries, expected {ctx.n}")
        if abs(sum(b.value * b.multiplicity for b in blocks)) > 1e-12 * max(1.0, _diameter(blocks)):
            raise PreconditionError("spectrum must sum to zero (trace-free)")
        if frame is None:
            frame = np.eye(ctx.n, dtype=ctx.dtype)
        return cls.from_frame(ctx, frame, blocks)

    @classmethod
    def from_state(cls, ctx, mat, blocks, rtol=1e-6):
        """Orbit point for an approximate state (e.g. an ODE iterate).

        The eigenframe of ``mat`` is kept and the exact block values are
        imposed; the eigenvalue drift must stay below ``rtol`` of the
        spectral diameter.
        """
        frame = self_adjoint_eig(0.5 * (mat + mat.conj().T))
        values = np.repeat([b.value for b in blocks], [b.multiplicity for b in blocks])
        drift = np.max(np.abs(frame.eigenvalues - values))
        if drift > rtol * max(_diameter(blocks), np.finfo(float).tiny):
            raise PreconditionError(f"state drifted {drift:.3g} off the orbit")
        return cls.from_frame(ctx, frame.frame, blocks)

    @property
    def n(self):
        return self.ctx.n

    @property
    def spectrum(self):
        """Eigenvalue of every frame column, ascending, exact inside blocks."""
        return self.decomposition.values

    @property
    def diameter(self):
        return _diameter(self.blocks)

    @property
    def element(self):
        return AmbientElement(self.ctx, self.mat, check=False)

    def __repr__(self):
        spec = ", ".join(f"{b.value:.6g}^{b.multiplicity}" for b in self.blocks)
        return f"OrbitPoint({self.ctx.family.value}, spectrum=[{spec}])"


def _diameter(blocks):
    return blocks[-1].value - blocks[0].value


def _checked_blocks(eigenvalues, spectrum):
    blocks = blocks_from_spectrum(spectrum)
    values = np.repeat([b.value for b in blocks], [b.multiplicity for b in blocks])
    if values.shape != eigenvalues.shape:
        raise PreconditionError("declared spectrum has the wrong length")
    scale = max(_diameter(blocks), np.finfo(float).tiny)
    if np.max(np.abs(values - eigenvalues)) > ISOSPECTRAL_RTOL * scale:
        raise PreconditionError("matrix is not isospectral to the declared spectrum")
    return blocks


@dataclass(frozen=True, eq=False)
class FlagFrame:
    """Orthonormal frame whose leading column spans form a flag."""

    frame: np.ndarray
    block_sizes: tuple

    def subspace(self, j):
        """Orthonormal basis of ``V_j``, the span of the first ``j`` blocks."""
        return self.frame[:, : sum(self.block_sizes[:j])]

    def projectors(self):
        """Orthogonal projectors onto ``V_1 < V_2 < ... < V_k``."""
        out = []
        for j in range(1, len(self.block_sizes) + 1):
            v = self.subspace(j)
            out.append(v @ v.conj().T)
        return out


def ascending_flag(x):
    """The flag of eigenspaces of x, taken in ascending eigenvalue order."""
    return FlagFrame(x.frame.frame, tuple(b.multiplicity for b in x.blocks))


def _check_group_element(g, ctx, det_tol=1e-6):
    g = np.asarray(g)
    if g.shape != (ctx.n, ctx.n):
        raise PreconditionError(f"group element must be {ctx.n}x{ctx.n}")
    if not ctx.is_complex and np.iscomplexobj(g):
        if np.any(g.imag != 0):
            raise PreconditionError("SL(n, R) acts by real matrices")
        g = g.real
    det = np.linalg.det(g)
    if abs(det - 1) > det_tol:
        raise PreconditionError(f"group element must have det 1, got {det}")
    return g


def group_act(g, x, check=True):
    """Action ``g.x`` of G = SL(n) on the orbit by flag transport.

    Raises
    ------
    DegeneracyError
        If the transported flag is numerically rank deficient (extreme g).
    """
    if check:
        g = _check_group_element(g, x.ctx)
    q = qr_orthonormalize(g @ x.frame.frame)
    return OrbitPoint.from_frame(x.ctx, q, x.blocks)


def exp_act(a, t, x):
    """``exp(t a).x``.

    For self-adjoint ``a`` (a in p) the exponential is applied through the
    eigendecomposition of ``a`` and the transported frame is orthonormalized
    with rows sorted by decreasing scale, which keeps the QR accurate for
    the strongly graded matrices that appear at large ``t``. Other
    generators go through :func:`numerics.expm` and :func:`group_act`.
    """
    amat = a.mat if isinstance(a, AmbientElement) else np.asarray(a)
    if x.ctx.in_p(amat, tol=1e-12):
        spec = self_adjoint_eig(0.5 * (amat + amat.conj().T))
        lam, w = spec.eigenvalues, spec.frame
        expo = t * lam
        scale = np.exp(expo - expo.max())
        c = w.conj().T @ x.frame.frame
        order = np.argsort(-scale, kind="stable")
        q_sorted = qr_orthonormalize(scale[order, None] * c[order], rcond=0.0)
        q = np.empty_like(q_sorted)
        q[order] = q_sorted
        return OrbitPoint.from_frame(x.ctx, w @ q, x.blocks)
    return group_act(numerics.expm(t * amat), x, check=False)


def k_act(k, x, tol=1e-10):
    """``Ad(k)x`` for k in K."""
    k = np.asarray(k)
    if k.shape != (x.n, x.n):
        raise PreconditionError(f"k must be {x.n}x{x.n}")
    if not x.ctx.is_complex and np.iscomplexobj(k):
        raise PreconditionError("SO(n) elements are real")
    if np.linalg.norm(k.conj().T @ k - np.eye(x.n)) > tol:
        raise PreconditionError("k is not orthogonal / unitary")
    if abs(np.linalg.det(k) - 1) > tol * 100:
        raise PreconditionError("k must have determinant 1")
    return OrbitPoint.from_frame(x.ctx, k @ x.frame.frame, x.blocks)


def infinitesimal_act(a, x, method="auto", h=FD_STEP):
    """Tangent vector ``a.x = d/dt exp(t a).x`` at ``t = 0``.

    Parameters
    ----------
    method : {"auto", "bracket", "fd", "exact"}
        ``bracket`` is ``[a, x]`` and needs a in k. ``fd`` is a central
        difference of ``t -> group_act(expm(t a), x)`` with step ``h``.
        ``exact`` replaces a by the element ``a_plus + sigma(a_plus)`` of k
        that acts identically at x. ``auto`` uses ``bracket`` for a in k and
        ``fd`` otherwise.
    """
    if a.ctx != x.ctx:
        raise PreconditionError("context mismatch")
    if method == "auto":
        method = "bracket" if x.ctx.in_k(a.mat) else "fd"
    if method == "bracket":
        if not x.ctx.in_k(a.mat, tol=1e-10):
            raise PreconditionError("the bracket route needs a in k")
        return a.mat @ x.mat - x.mat @ a.mat
    if method == "exact":
        _, _, a_plus = triangular_split(a, x.decomposition)
        r = (a_plus + sigma(a_plus)).mat
        return r @ x.mat - x.mat @ r
    if method == "fd":
        fwd = group_act(numerics.expm(h * a.mat), x, check=False).mat
        bwd = group_act(numerics.expm(-h * a.mat), x, check=False).mat
        return (fwd - bwd) / (2 * h)
    raise ValueError(f"unknown method {method!r}")
