"""Oblique lattices, their cells, induced lattices on hyperplanes, and strips.

All cell geometry lives in lattice coordinates: the cell with index j at
scale r occupies the half-open box prod_m [r(j_m - 1/2), r(j_m + 1/2)).
Projections along frame directions act on indices by deleting one
coordinate, which is what makes the discrete machinery combinatorial.
"""

import itertools

import numpy as np

from .frames import FrameError


class LatticeError(ValueError):
    """Inconsistent lattice arguments."""


class Cell:
    """Parallelepiped of size r, identified by its integer index."""

    __slots__ = ("index", "scale", "owner")

    def __init__(self, index, scale, owner):
        self.index = tuple(int(v) for v in index)
        self.scale = float(scale)
        self.owner = owner

    @property
    def center_lattice(self):
        """Center in the owner's lattice coordinates."""
        return self.scale * np.array(self.index, dtype=float)

    def region(self):
        """(lo, hi) corners of the half-open cell box in lattice coordinates."""
        c = self.center_lattice
        h = 0.5 * self.scale
        return c - h, c + h

    def __eq__(self, other):
        return (isinstance(other, Cell) and self.index == other.index
                and self.scale == other.scale and self.owner == other.owner)

    def __hash__(self):
        return hash((self.index, self.scale, self.owner))

    def __repr__(self):
        return "Cell(index=%s, scale=%g, owner=%s)" % (self.index, self.scale, self.owner)


class ObliqueLattice:
    """Lattice r * (j_1 N_1 + .. + j_{n+1} N_{n+1}) generated by the frame."""

    def __init__(self, frame, scale):
        if not scale > 0:
            raise LatticeError("scale must be positive")
        self.frame = frame
        self.scale = float(scale)
        self.owner = "ambient"

    def point(self, index):
        return self.frame.from_lattice(self.scale * np.asarray(index, dtype=float))

    def cell(self, index):
        return Cell(index, self.scale, self.owner)


class InducedLattice:
    """Projection of the ambient lattice onto H_i along N_i.

    Indexed by the n remaining coordinates; ``basis_matrix`` holds the
    projected frame vectors in H_i coordinates.
    """

    def __init__(self, frame, i, scale):
        if not 0 <= i < frame.ambient_dim:
            raise LatticeError("direction index out of range")
        if not scale > 0:
            raise LatticeError("scale must be positive")
        self.frame = frame
        self.i = int(i)
        self.scale = float(scale)
        self.owner = ("hyperplane", self.i)
        self.basis_matrix = frame.induced_basis(i)
        self.inverse_basis = np.linalg.inv(self.basis_matrix)

    @property
    def dim(self):
        return self.frame.n

    def to_lattice(self, xi):
        """H_i coordinates -> induced lattice coordinates (the map T_i, scaled)."""
        return np.asarray(xi, dtype=float) @ self.inverse_basis.T / self.scale

    def center_coords(self, index):
        """Center of a cell in H_i coordinates."""
        return self.scale * (np.asarray(index, dtype=float) @ self.basis_matrix.T)

    def cell(self, index):
        return Cell(index, self.scale, self.owner)

    def project_index(self, index):
        """Ambient index -> induced index (drop coordinate i)."""
        index = tuple(index)
        return index[: self.i] + index[self.i + 1:]


class Strip:
    """Infinite strip in H_1: a core cell extended along (H_1 cap H)^perp."""

    __slots__ = ("index", "scale")

    def __init__(self, index, scale):
        self.index = tuple(int(v) for v in index)
        self.scale = float(scale)

    @property
    def center_lattice(self):
        return self.scale * np.array(self.index, dtype=float)

    def __eq__(self, other):
        return (isinstance(other, Strip) and self.index == other.index
                and self.scale == other.scale)

    def __hash__(self):
        return hash(("strip", self.index, self.scale))

    def __repr__(self):
        return "Strip(index=%s, scale=%g)" % (self.index, self.scale)


class CoreLattice:
    """Induced lattice on H_1 cap H for the refined (slab) setting.

    Indexed by coordinates 2..k of the ambient lattice; carries the linear
    map taking the projected lattice to Z^{k-1}.
    """

    def __init__(self, frame, slab, scale):
        if not scale > 0:
            raise LatticeError("scale must be positive")
        self.frame = frame
        self.slab = slab
        self.scale = float(scale)
        self.k = slab.k
        core = slab.core_basis()
        # projections of N_2..N_k onto H_1 cap H, in core coordinates
        proj = core.T @ frame.normals[1:self.k].T
        self.basis_matrix = proj
        try:
            self.inverse_basis = np.linalg.inv(self.basis_matrix)
        except np.linalg.LinAlgError as exc:
            raise LatticeError("slab/frame inconsistency: degenerate core lattice") from exc
        self.owner = ("core",)

    @property
    def dim(self):
        return self.k - 1

    def to_lattice(self, zeta):
        """H_1 cap H coordinates -> core lattice coordinates."""
        return np.asarray(zeta, dtype=float) @ self.inverse_basis.T / self.scale

    def project_ambient(self, x):
        """pi(x) expressed in core coordinates, for ambient points x."""
        return np.asarray(x, dtype=float) @ self.slab.core_basis()

    def strip(self, index):
        return Strip(index, self.scale)


def project_along(frame, i, point):
    """Projection onto H_i along N_i (orthogonal, since N_i is the normal)."""
    if not 0 <= i < frame.ambient_dim:
        raise LatticeError("direction index out of range")
    point = np.asarray(point, dtype=float)
    if point.shape[-1] != frame.ambient_dim:
        raise LatticeError("point dimension mismatch")
    nvec = frame.normal(i)
    return point - np.outer(point @ nvec, nvec).reshape(point.shape)


def project_to_H(frame, slab, point):
    """Projection onto H_1 cap H: compose the projections along N_1, N_{k+1}..N_{n+1}.

    The directions are mutually orthogonal, so the composition removes all
    their components at once and is order independent.
    """
    k = slab.k
    dirs = [frame.normal(0)] + [frame.normal(m) for m in range(k, frame.ambient_dim)]
    block = np.stack(dirs, axis=1)
    if np.abs(block.T @ block - np.eye(block.shape[1])).max() > 1e-10:
        raise FrameError("slab/frame inconsistency: projection directions not orthonormal")
    point = np.asarray(point, dtype=float)
    comps = point @ block
    return point - comps @ block.T


def cell_of(lattice, point):
    """Cell containing a standard-coordinates point; boundary ties round half-up."""
    t = lattice.frame.to_lattice(point) / lattice.scale
    index = np.floor(t + 0.5).astype(int)
    return Cell(tuple(index), lattice.scale, lattice.owner)


def cell_distance(q, q2):
    """Comparable surrogate distance r * max(0, |j - j'|_inf - 1)."""
    if q.owner != q2.owner:
        raise LatticeError("cells belong to different lattices")
    if q.scale != q2.scale:
        raise LatticeError("cells have different scales")
    delta = np.abs(np.array(q.index) - np.array(q2.index))
    return q.scale * max(0.0, float(delta.max()) - 1.0)


def strip_distance(s, s2):
    """Same surrogate on the core indices of two strips."""
    if s.scale != s2.scale:
        raise LatticeError("strips have different scales")
    delta = np.abs(np.array(s.index) - np.array(s2.index))
    return s.scale * max(0.0, float(delta.max()) - 1.0)


def _index_range_centers(lo, hi, r):
    """Indices j with r*j in the half-open interval [lo, hi)."""
    eps = 1e-9 * max(1.0, abs(lo), abs(hi))
    jmin = int(np.ceil(lo / r - eps))
    jmax = int(np.ceil(hi / r - eps)) - 1
    return jmin, jmax

def _index_range_overlap(lo, hi, r):
    """Indices j whose half-open cell [r(j-1/2), r(j+1/2)) meets [lo, hi)."""
    eps = 1e-9 * max(1.0, abs(lo), abs(hi))
    jmin = int(np.ceil(lo / r - 0.5 - eps))
    jmax = int(np.ceil(hi / r + 0.5 - eps)) - 1
    return jmin, jmax


def enumerate_cells(lattice, region, scale=None):
    """Cells of the lattice meeting a region, in lexicographic index order.

    When the region is a coarser Cell, returns the paper's nested family:
    the cells whose centers lie in the coarse cell (these tile it exactly
    for integer scale ratios).  For a raw lattice-coordinate box (lo, hi),
    returns every cell whose region overlaps the box, which is a covering.
    """
    r = lattice.scale if scale is None else float(scale)
    if r <= 0:
        raise LatticeError("scale must be positive")
    if isinstance(region, Cell):
        lo, hi = region.region()
        rng = [_index_range_centers(lo[d], hi[d], r) for d in range(len(lo))]
    else:
        lo, hi = region
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        rng = [_index_range_overlap(lo[d], hi[d], r) for d in range(len(lo))]
    spans = [range(a, b + 1) for a, b in rng]
    return [Cell(idx, r, lattice.owner) for idx in itertools.product(*spans)]


def strip_of(core_lattice, q):
    """Strip containing the projection of an induced H_1 cell.

    Two H_1 cells map to the same strip exactly when their core indices
    (coordinates 2..k) coincide.
    """
    if q.owner != ("hyperplane", 0):
        raise LatticeError("strip_of expects a cell of the induced lattice on H_1")
    core_index = q.index[: core_lattice.k - 1]
    return core_lattice.strip(core_index)
