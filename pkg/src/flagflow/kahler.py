"""Adjoint orbits of SU(n): complex structure, Kaehler form and metric.

A point x of su(n) is handled through the Hermitian matrix ``-i x``, which
lies in p = i su(n) of the complexified algebra; eigenframes, blocks and
flag transport are shared with the real machinery. Brackets and inner
products are evaluated on the skew-Hermitian side.

With mu the ascending eigenvalues of ``-i x``, ``ad(x)`` multiplies frame
entry (a, b) by ``i (mu_a - mu_b)``, so ``alpha(x) = |mu_a - mu_b|`` off the
block diagonal.
"""
import numpy as np

from . import _backend
from .errors import PreconditionError
from .flow import IntegratedFlow, compare_flows, sample_grid
from .lie import AmbientElement, Family
from .numerics import ode_integrate
from .orbit import OrbitPoint, exp_act, k_act


class CompactOrbitPoint:
    """Point of an adjoint orbit ``Ad(SU(n)) x`` inside su(n)."""

    __slots__ = ("hermitian",)

    def __init__(self, ctx, mat, spectrum=None):
        if ctx.family is not Family.SU_COMPLEXIFIED:
            raise PreconditionError("adjoint orbits live in the su_complexified family")
        mat = np.asarray(mat, dtype=np.complex128)
        if np.linalg.norm(mat + mat.conj().T) > 1e-12 * max(1.0, np.linalg.norm(mat)):
            raise PreconditionError("x must be skew-Hermitian")
        self.hermitian = OrbitPoint(ctx, -1j * mat, spectrum=spectrum)

    @classmethod
    def from_hermitian(cls, h):
        out = cls.__new__(cls)
        out.hermitian = h
        return out

    @classmethod
    def from_spectrum(cls, ctx, spectrum, frame=None):
        """x = i U diag(spectrum) U^H."""
        return cls.from_hermitian(OrbitPoint.from_spectrum(ctx, spectrum, frame))

    @property
    def ctx(self):
        return self.hermitian.ctx

    @property
    def mat(self):
        return 1j * self.hermitian.mat

    @property
    def n(self):
        return self.hermitian.n

    @property
    def blocks(self):
        return self.hermitian.blocks

    @property
    def spectrum(self):
        """Ascending real spectrum of ``-i x``."""
        return self.hermitian.spectrum

    @property
    def diameter(self):
        return self.hermitian.diameter

    @property
    def decomposition(self):
        return self.hermitian.decomposition

    def __repr__(self):
        return f"Compact{self.hermitian!r}"


def _tangent_frame(x, v, name="v"):
    dec = x.decomposition
    vt = dec.to_frame(np.asarray(v))
    _, zero, _ = dec.masks()
    resid = np.linalg.norm(vt[zero])
    if resid > 1e-10 * max(1.0, np.linalg.norm(vt)):
        raise PreconditionError(f"{name} is not tangent at x (normal residual {resid:.3g})")
    if np.linalg.norm(vt + vt.conj().T) > 1e-10 * max(1.0, np.linalg.norm(vt)):
        raise PreconditionError(f"{name} is not skew-Hermitian")
    return np.where(zero, 0, vt)


def _inner(x, v, w):
    return x.ctx.b_scale * float(np.real(np.vdot(w, v)))


def tangent_space_basis(x, by_root=False):
    """Orthogonal basis of ``T_x M`` built from the real root spaces.

    For each positive root and each pair of frame columns (a in the upper
    block, b in the lower one) the two skew-Hermitian matrices
    ``U (E_ab - E_ba) U^H`` and ``U (i E_ab + i E_ba) U^H`` are returned.
    With ``by_root=True`` the result is a list of ``(root, [matrices])``.
    """
    dec = x.decomposition
    u = dec.frame.frame
    grouped = []
    for root in dec.positive_roots:
        mats = []
        for a in dec.blocks[root.upper].column_range:
            for b in dec.blocks[root.lower].column_range:
                ua, ub = u[:, [a]], u[:, [b]]
                mats.append(ua @ ub.conj().T - ub @ ua.conj().T)
                mats.append(1j * (ua @ ub.conj().T + ub @ ua.conj().T))
        grouped.append((root, mats))
    if by_root:
        return grouped
    return [m for _, mats in grouped for m in mats]


def ad(x, v):
    xm = x.mat
    return xm @ v - v @ xm


def complex_structure(x, v):
    """``J v``, defined on each real root space by ``ad(x) = alpha(x) J``."""
    _tangent_frame(x, v)
    dec = x.decomposition
    ct = dec.to_frame(ad(x, np.asarray(v)))
    alpha = dec.alpha_matrix
    jt = np.zeros_like(ct)
    np.divide(ct, alpha, out=jt, where=alpha > 0)
    return dec.from_frame(jt)


def ad_inverse(x, w):
    """``ad(x)^{-1} w`` for tangent w, applied sector by sector."""
    wt = _tangent_frame(x, w, "w")
    dec = x.decomposition
    mu = dec.values
    eig = 1j * (mu[:, None] - mu[None, :])
    out = np.zeros_like(wt)
    np.divide(wt, eig, out=out, where=dec.alpha_matrix > 0)
    return dec.from_frame(out)


def kahler_form(x, v, w):
    """``omega_x(v, w) = <v, ad(x)^{-1} w>``."""
    _tangent_frame(x, v)
    return _inner(x, np.asarray(v), ad_inverse(x, w))


def kahler_form_from_generators(x, a, b):
    """``<x, [a, b]>`` for a, b in su(n), the defining expression of omega.

    Equals ``kahler_form(x, [a, x], [b, x])``.
    """
    a, b = np.asarray(a), np.asarray(b)
    return _inner(x, x.mat, a @ b - b @ a)


def kahler_metric(x, v, w):
    """``(v, w) = omega_x(v, J w)``."""
    return kahler_form(x, v, complex_structure(x, w))


def kahler_gradient(q, x):
    """Gradient of ``f = <q, .>`` (q in su(n)) for the Kaehler metric."""
    q = q.mat if isinstance(q, AmbientElement) else np.asarray(q)
    if np.linalg.norm(q + q.conj().T) > 1e-10 * max(1.0, np.linalg.norm(q)):
        raise PreconditionError("q must lie in su(n)")
    dec = x.decomposition
    out = dec.from_frame(dec.alpha_matrix * dec.to_frame(q))
    return 0.5 * (out - out.conj().T)


class CompactHeight:
    def __init__(self, q, ctx):
        q = q.mat if isinstance(q, AmbientElement) else np.asarray(q, dtype=np.complex128)
        if np.linalg.norm(q + q.conj().T) > 1e-10 * max(1.0, np.linalg.norm(q)):
            raise PreconditionError("q must lie in su(n)")
        if abs(np.trace(q)) > 1e-12 * max(1.0, np.linalg.norm(q)):
            raise PreconditionError("q must be traceless")
        self.q = q
        self.ctx = ctx

    def __call__(self, x):
        return self.ctx.b_scale * float(np.real(np.vdot(x.mat, self.q)))


def compact_flow(q, x0, times):
    """The curve ``exp(i t q).x0`` of the complexified group."""
    f = CompactHeight(q, x0.ctx)
    herm_gen = -1j * f.q
    return [x0 if t == 0 else CompactOrbitPoint.from_hermitian(exp_act(herm_gen, -float(t), x0.hermitian))
            for t in np.asarray(times, dtype=float)]


def numeric_compact_flow(q, x0, t_end, tol, times=None, snap=True):
    """Integrate ``x' = kahler_gradient(q, x)`` on skew-Hermitian states."""
    if not 1e-13 <= tol <= 1e-4:
        raise PreconditionError(f"tol must lie in [1e-13, 1e-4], got {tol}")
    f = CompactHeight(q, x0.ctx)
    values = x0.spectrum
    qh = np.ascontiguousarray(-1j * f.q)

    def field(y):
        return 1j * _backend.gradient_field(-1j * y, qh, values)

    drift = [0.0]
    post = None
    if snap:
        def post(y):
            out, d = _backend.snap_spectrum(-1j * y, values)
            drift[0] = max(drift[0], d)
            return 1j * out

    traj = ode_integrate(field, np.ascontiguousarray(x0.mat), t_end, tol, times=times, post_step=post)
    if not snap:
        for s in traj.states:
            w = np.linalg.eigvalsh(-1j * s)
            drift[0] = max(drift[0], float(np.max(np.abs(w - values))))
    scale = max(x0.diameter, np.finfo(float).tiny)
    return IntegratedFlow(traj.times, traj.states, drift[0] / scale, snap, traj.n_steps, traj.n_rejected)


def verify_theorem_6_1(q, x0, t_end=2.0, tol=1e-10, samples=21, snap=True):
    """Closed-form ``exp(i t q).x0`` against the integrated Kaehler gradient flow."""
    f = CompactHeight(q, x0.ctx)
    times = sample_grid(t_end, samples)
    closed = compact_flow(f.q, x0, times)
    integrated = numeric_compact_flow(f.q, x0, t_end, tol, times=times, snap=snap)
    return compare_flows(f, closed, integrated, tol)


def transport(k, x, *vectors):
    """Move x and tangent vectors at x by ``Ad(k)``, k in SU(n)."""
    y = CompactOrbitPoint.from_hermitian(k_act(k, x.hermitian))
    kh = k.conj().T
    return (y,) + tuple(k @ np.asarray(v) @ kh for v in vectors)

