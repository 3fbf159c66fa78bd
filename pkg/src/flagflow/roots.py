"""Root-space decomposition of g relative to a point x of p.

For x in p with eigenframe U and ascending eigenvalues, ``ad(x)`` acts on the
matrix unit sector (i, j) of the frame basis by ``mu_i - mu_j``. Grouping equal
eigenvalues into blocks, the sector of block pair (i, j) is the root space
with value ``alpha(x) = value_i - value_j``. Under the ascending order:

* n_plus  = sectors with row block above column block (strictly block-lower),
* c       = block-diagonal sectors,
* n_minus = strictly block-upper sectors.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GroupingAmbiguityError, PreconditionError
from .lie import AmbientElement
from .numerics import SpectralFrame, self_adjoint_eig

GROUPING_RTOL = 1e-8


class Block(NamedTuple):
    value: float
    multiplicity: int
    start: int

    @property
    def column_range(self):
        return range(self.start, self.start + self.multiplicity)


class Root(NamedTuple):
    """Positive root as a block pair with ``alpha = value[upper] - value[lower] > 0``."""

    upper: int
    lower: int
    alpha: float


def group_spectrum(eigenvalues, rtol=GROUPING_RTOL):
    """Group ascending eigenvalues into blocks of (numerically) equal values.

    Two neighbours share a block when their gap is below
    ``rtol * (max - min)``. A gap within a factor of 10 of that threshold is
    refused as ambiguous.
    """
    w = np.asarray(eigenvalues, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise PreconditionError("eigenvalues must be a non-empty 1-d array")
    if np.any(np.diff(w) < 0):
        raise PreconditionError("eigenvalues must be ascending")
    diameter = w[-1] - w[0]
    tol = rtol * diameter
    gaps = np.diff(w)
    if diameter > 0:
        ambiguous = (gaps > tol / 10) & (gaps < tol * 10)
        if np.any(ambiguous):
            raise GroupingAmbiguityError(
                f"eigenvalue gap(s) {gaps[ambiguous]} within a factor 10 of the "
                f"grouping tolerance {tol:.3g}",
                gaps=gaps[ambiguous], tolerance=tol)
    blocks = []
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or gaps[i - 1] > tol:
            blocks.append(Block(float(np.mean(w[start:i])), i - start, start))
            start = i
    return tuple(blocks)


def blocks_from_spectrum(spectrum):
    """Blocks for an explicitly given spectrum with exact repeats.

    ``spectrum`` is sorted; equal entries (exact comparison) form one block.
    """
    w = np.sort(np.asarray(spectrum, dtype=float))
    blocks = []
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or w[i] != w[i - 1]:
            blocks.append(Block(float(w[start]), i - start, start))
            start = i
    return tuple(blocks)


@dataclass(frozen=True, eq=False)
class RootDecomposition:
    """Root sectors of g at a fixed x, expressed in the eigenframe of x."""

    ctx: object
    frame: SpectralFrame
    blocks: tuple
    positive_roots: tuple

    @classmethod
    def from_blocks(cls, ctx, frame, blocks):
        roots = tuple(
            Root(i, j, bi.value - bj.value)
            for i, bi in enumerate(blocks)
            for j, bj in enumerate(blocks)
            if i > j
        )
        return cls(ctx, frame, tuple(blocks), roots)

    @property
    def n(self):
        return self.frame.n

    @property
    def labels(self):
        """Block index of every frame column."""
        return np.repeat(np.arange(len(self.blocks)), [b.multiplicity for b in self.blocks])

    @property
    def values(self):
        """Block value of every frame column (exact repeats inside a block)."""
        return np.repeat([b.value for b in self.blocks], [b.multiplicity for b in self.blocks])

    @property
    def alpha_matrix(self):
        """``|value_i - value_j|`` per frame entry; zero on c."""
        v = self.values
        return np.abs(v[:, None] - v[None, :])

    def to_frame(self, a):
        return self.frame.to_frame(_as_mat(a))

    def from_frame(self, a):
        return self.frame.from_frame(a)

    def masks(self):
        """Boolean frame-basis masks ``(minus, zero, plus)``."""
        lab = self.labels
        rows, cols = lab[:, None], lab[None, :]
        return rows < cols, rows == cols, rows > cols

    def sector_mask(self, i, j):
        lab = self.labels
        return (lab[:, None] == i) & (lab[None, :] == j)

    def root_mask(self, root):
        return self.sector_mask(root.upper, root.lower) | self.sector_mask(root.lower, root.upper)

    def dimensions(self):
        """Sector dimension audit (over the scalar field of the family)."""
        m = np.array([b.multiplicity for b in self.blocks])
        off = int((m.sum() ** 2 - (m ** 2).sum()) // 2)
        c = int((m ** 2).sum()) - 1
        return {"n_plus": off, "c": c, "n_minus": off, "total": 2 * off + c}

    def root_space_dimension(self, root):
        return self.blocks[root.upper].multiplicity * self.blocks[root.lower].multiplicity


def _as_mat(a):
    return a.mat if isinstance(a, AmbientElement) else np.asarray(a)


def decompose(x):
    """Root decomposition at an orbit point or at an element of p.

    Orbit points carry their own frame and block data, which is reused;
    bare elements are diagonalized and grouped here.

    Raises
    ------
    PreconditionError
        If ``x`` does not lie in p.
    GroupingAmbiguityError
        If eigenvalue grouping is ambiguous.
    """
    if hasattr(x, "frame") and hasattr(x, "blocks"):
        return RootDecomposition.from_blocks(x.ctx, x.frame, x.blocks)
    ctx = x.ctx
    if not ctx.in_p(x.mat, tol=1e-10):
        raise PreconditionError("decompose needs x in p (symmetric / Hermitian)")
    frame = self_adjoint_eig(0.5 * (x.mat + x.mat.conj().T))
    return RootDecomposition.from_blocks(ctx, frame, group_spectrum(frame.eigenvalues))


def triangular_split(a, dec):
    """Split ``a = a_minus + a_zero + a_plus`` along n_minus, c, n_plus."""
    at = dec.to_frame(a)
    parts = []
    for mask in dec.masks():
        parts.append(AmbientElement(a.ctx, dec.from_frame(np.where(mask, at, 0)), check=False))
    return tuple(parts)


def root_component(a, root, dec):
    """Component of ``a`` in the real root space ``g_alpha + g_-alpha``."""
    at = dec.to_frame(a)
    return AmbientElement(a.ctx, dec.from_frame(np.where(dec.root_mask(root), at, 0)), check=False)
