"""Transversal frames, graph hypersurfaces and slab conditions.

A frame is a set of n+1 unit normals spanning R^{n+1}; each normal N_i
carries the hyperplane H_i through the origin that it is orthogonal to.
Surfaces are stored as graphs over a bounded domain in H_i coordinates,
with the height measured along N_i.
"""

import numpy as np

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-10


class FrameError(ValueError):
    """Invalid frame, surface or slab data."""


class Frame:
    """Unit normals N_1..N_{n+1} with |det(N_1,..,N_{n+1})| >= nu > 0.

    ``basis_matrix`` has the normals as columns and maps lattice
    coordinates to standard coordinates; ``inverse_basis`` is its inverse.
    Instances are immutable.
    """

    def __init__(self, normals, nu):
        normals = np.array(normals, dtype=float)
        if normals.ndim != 2 or normals.shape[0] != normals.shape[1]:
            raise FrameError(
                "need n+1 normals of dimension n+1, got shape %s" % (normals.shape,))
        if normals.shape[0] < 2:
            raise FrameError("ambient dimension must be at least 2")
        lengths = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(lengths - 1.0) > UNIT_TOL):
            raise FrameError("normals must be unit vectors (tol %g)" % UNIT_TOL)
        if not (nu > 0):
            raise FrameError("nu must be positive")
        basis = normals.T.copy()
        det = abs(np.linalg.det(basis))
        if det < nu:
            raise FrameError(
                "transversality failure: |det| = %.3e < nu = %.3e" % (det, nu))
        inv = np.linalg.inv(basis)
        resid = np.abs(basis @ inv - np.eye(basis.shape[0])).max()
        if resid > ORTHO_TOL:
            raise FrameError("basis inversion residual %.3e exceeds %g" % (resid, ORTHO_TOL))
        self._normals = normals
        self._normals.setflags(write=False)
        self.nu = float(nu)
        self.basis_matrix = basis
        self.basis_matrix.setflags(write=False)
        self.inverse_basis = inv
        self.inverse_basis.setflags(write=False)
        self._hyperplane_bases = {}

    @property
    def ambient_dim(self):
        return self._normals.shape[0]

    @property
    def n(self):
        return self.ambient_dim - 1

    @property
    def normals(self):
        return self._normals

    def normal(self, i):
        return self._normals[i]

    def to_lattice(self, x):
        """Standard coordinates -> lattice coordinates (batched on the last axis)."""
        return np.asarray(x, dtype=float) @ self.inverse_basis.T

    def from_lattice(self, t):
        return np.asarray(t, dtype=float) @ self.basis_matrix.T

    def hyperplane_basis(self, i):
        """Deterministic orthonormal basis of H_i, as columns of an (n+1, n) matrix.

        Built from the Householder reflection sending the closest coordinate
        axis to N_i, so the result depends only on N_i.
        """
        if i not in self._hyperplane_bases:
            nvec = self._normals[i]
            a = int(np.argmax(np.abs(nvec)))
            sign = 1.0 if nvec[a] >= 0 else -1.0
            w = sign * nvec - np.eye(self.ambient_dim)[a]
            q = np.eye(self.ambient_dim)
            wn = np.linalg.norm(w)
            if wn > 1e-14:
                w = w / wn
                q = q - 2.0 * np.outer(w, w)
            cols = [c for c in range(self.ambient_dim) if c != a]
            basis = sign * q[:, cols]
            basis.setflags(write=False)
            self._hyperplane_bases[i] = basis
        return self._hyperplane_bases[i]

    def induced_basis(self, i):
        """Projected frame vectors pi_i(N_m), m != i, in H_i coordinates (n x n)."""
        nvec = self._normals[i]
        others = [m for m in range(self.ambient_dim) if m != i]
        proj = self._normals[others] - np.outer(self._normals[others] @ nvec, nvec)
        return self.hyperplane_basis(i).T @ proj.T

    def __repr__(self):
        return "Frame(dim=%d, nu=%g)" % (self.ambient_dim, self.nu)


def transversality_det(frame):
    """|det(N_1,..,N_{n+1})| of the frame normals, a number in [0, 1]."""
    return abs(np.linalg.det(frame.basis_matrix))


def k_volume(vectors):
    """Volume of the parallelepiped spanned by k unit vectors, via the Gram determinant."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.shape[0] == 0:
        raise FrameError("k_volume needs at least one vector")
    gram = vectors @ vectors.T
    return float(np.sqrt(max(np.linalg.det(gram), 0.0)))


class Ball:
    """Ball domain in hyperplane coordinates, given by center and radius."""

    def __init__(self, center, radius):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        if not radius > 0:
            raise FrameError("ball radius must be positive")
        self.radius = float(radius)

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.linalg.norm(xi - self.center, axis=-1) <= self.radius + 1e-12

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


class Box:
    """Axis-aligned box in hyperplane coordinates, given by center and half widths."""

    def __init__(self, center, half_widths):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.half_widths = np.broadcast_to(
            np.asarray(half_widths, dtype=float), self.center.shape).copy()
        if np.any(self.half_widths <= 0):
            raise FrameError("box half widths must be positive")

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def diameter(self):
        return float(2.0 * np.linalg.norm(self.half_widths))

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.all(np.abs(xi - self.center) <= self.half_widths + 1e-12, axis=-1)

    def bounding_box(self):
        return self.center - self.half_widths, self.center + self.half_widths


class FlatGraph:
    """The zero graph: the surface is the hyperplane patch itself."""

    def value(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.zeros(xi.shape[:-1])

    def gradient(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=float))


class QuadraticGraph:
    """Graph 0.5 * xi^T A xi for a symmetric curvature matrix A."""

    def __init__(self, curvature):
        a = np.atleast_2d(np.asarray(curvature, dtype=float))
        if np.abs(a - a.T).max() > 1e-12:
            raise FrameError("curvature matrix must be symmetric")
        self.curvature = a

    def value(self, xi):
        xi = np.asarray(xi, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", xi, self.curvature, xi)

    def gradient(self, xi):
        return np.asarray(xi, dtype=float) @ self.curvature.T


class CallableGraph:
    """User supplied graph; ``value`` and ``gradient`` must accept batched input."""

    def __init__(self, value, gradient):
        self._value = value
        self._gradient = gradient

    def value(self, xi):
        return np.asarray(self._value(np.asarray(xi, dtype=float)), dtype=float)

    def gradient(self, xi):
        return np.asarray(self._gradient(np.asarray(xi, dtype=float)), dtype=float)


class Hypersurface:
    """Graph parametrization of one sheet over a bounded patch of H_i.

    Sigma(xi) = base_point + E_i xi + phi(xi) N_i, where E_i is the frame's
    orthonormal basis of H_i and xi runs over ``domain``.
    """

    def __init__(self, frame, i, domain, graph, base_point=None, derivative_bound=2.0):
        if not 0 <= i < frame.ambient_dim:
            raise FrameError("surface index out of range")
        if domain.dim != frame.n:
            raise FrameError("domain dimension must be n = %d" % frame.n)
        self.frame = frame
        self.i = int(i)
        self.domain = domain
        self.graph = graph
        if base_point is None:
            base_point = np.zeros(frame.ambient_dim)
        self.base_point = np.asarray(base_point, dtype=float)
        self.derivative_bound = float(derivative_bound)

    @property
    def is_flat(self):
        return isinstance(self.graph, FlatGraph)

    def point(self, xi):
        """Ambient surface point for hyperplane coordinates xi (batched)."""
        xi = np.asarray(xi, dtype=float)
        basis = self.frame.hyperplane_basis(self.i)
        height = self.graph.value(xi)
        return (self.base_point + xi @ basis.T
                + height[..., None] * self.frame.normal(self.i))

    def normal_at(self, xi):
        """Unit surface normal with positive component along N_i."""
        xi = np.asarray(xi, dtype=float)
        if not np.all(self.domain.contains(xi)):
            raise FrameError("point outside the surface domain")
        grad = self.graph.gradient(xi)
        basis = self.frame.hyperplane_basis(self.i)
        raw = self.frame.normal(self.i) - grad @ basis.T
        return raw / np.linalg.norm(raw, axis=-1, keepdims=True)

    def domain_samples(self, points_per_dim=8, extra_random=0, seed=0):
        """Deterministic tensor grid inside the domain, plus optional seeded draws."""
        lo, hi = self.domain.bounding_box()
        axes = [np.linspace(lo[d], hi[d], points_per_dim) for d in range(self.domain.dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.domain.dim)
        mesh = mesh[self.domain.contains(mesh)]
        if extra_random:
            rng = np.random.default_rng(seed)
            pts = rng.uniform(lo, hi, size=(4 * extra_random, self.domain.dim))
            pts = pts[self.domain.contains(pts)][:extra_random]
            mesh = np.concatenate([mesh, pts], axis=0)
        return mesh

    def gradient_spread(self, points_per_dim=12):
        """Sampled sup |grad phi(x) - grad phi(y)| over the domain."""
        grads = self.graph.gradient(self.domain_samples(points_per_dim))
        diffs = grads[:, None, :] - grads[None, :, :]
        return float(np.linalg.norm(diffs, axis=-1).max())

    def check_smoothness(self):
        """True when the sampled gradient spread is within C * diameter."""
        return self.gradient_spread() <= self.derivative_bound * self.domain.diameter + 1e-12


class SlabCondition:
    """Confinement of a surface to a mu-neighborhood of a k-dim affine subspace.

    ``h_basis`` spans the subspace, ``normal_complement`` spans its
    orthogonal complement; both orthonormal column matrices.
    """

    def __init__(self, h_basis, normal_complement, mu, base_point=None):
        h = np.asarray(h_basis, dtype=float)
        c = np.asarray(normal_complement, dtype=float)
        if h.ndim != 2 or c.ndim != 2 or h.shape[0] != c.shape[0]:
            raise FrameError("slab bases must be column matrices in the same ambient space")
        if h.shape[1] + c.shape[1] != h.shape[0]:
            raise FrameError("slab bases must jointly span the ambient space")
        full = np.concatenate([h, c], axis=1)
        if np.abs(full.T @ full - np.eye(full.shape[1])).max() > ORTHO_TOL:
            raise FrameError("slab bases must be jointly orthonormal (tol %g)" % ORTHO_TOL)
        if not mu > 0:
            raise FrameError("mu must be positive")
        self.h_basis = h
        self.normal_complement = c
        self.mu = float(mu)
        if base_point is None:
            base_point = np.zeros(h.shape[0])
        self.base_point = np.asarray(base_point, dtype=float)

    @property
    def ambient_dim(self):
        return self.h_basis.shape[0]

    @property
    def k(self):
        return self.h_basis.shape[1]

    def distance(self, x):
        """Distance of ambient points to the affine subspace."""
        rel = np.asarray(x, dtype=float) - self.base_point
        return np.linalg.norm(rel @ self.normal_complement, axis=-1)

    @classmethod
    def from_frame(cls, frame, k, mu, base_point=None):
        """Canonical slab for the refined setting.

        The complement directions are the last n+1-k frame normals, which
        must be orthonormal and orthogonal to N_1; the subspace is then
        span(N_1) + (H_1 intersect H).
        """
        d = frame.ambient_dim
        if not 2 <= k <= d - 1:
            raise FrameError("need 2 <= k <= n")
        comp = frame.normals[k:].T
        block = np.concatenate([frame.normal(0)[:, None], comp], axis=1)
        if np.abs(block.T @ block - np.eye(block.shape[1])).max() > ORTHO_TOL:
            raise FrameError(
                "refined setting needs N_1, N_%d..N_%d jointly orthonormal" % (k + 1, d))
        # h_basis = orthocomplement of the complement block, with N_1 listed first.
        _, _, vt = np.linalg.svd(comp.T)
        cand = vt[comp.shape[1]:].T
        cand = cand - np.outer(frame.normal(0), frame.normal(0) @ cand)
        q, _ = np.linalg.qr(cand)
        core = q[:, : k - 1]
        h = np.concatenate([frame.normal(0)[:, None], core], axis=1)
        return cls(h, comp, mu, base_point)

    def core_basis(self):
        """Orthonormal basis of H_1 intersect H (the xi' directions), columns."""
        return self.h_basis[:, 1:]


def verify_transversality(surfaces, nu, sample_count=256, points_per_dim=8, seed=0):
    """Minimum transversality over a deterministic sample of surface point tuples.

    Uses |det| for n+1 surfaces and the k-volume for fewer; the caller
    compares the result against nu.
    """
    if not surfaces:
        raise FrameError("need at least one surface")
    dim = surfaces[0].frame.ambient_dim
    per_surface = []
    for s in surfaces:
        pts = s.domain_samples(points_per_dim)
        per_surface.append(s.normal_at(pts))
    rng = np.random.default_rng(seed)
    k = len(surfaces)
    best = np.inf
    # tensor product of the per-surface grids, evaluated in blocks
    counts = [p.shape[0] for p in per_surface]
    mesh = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
    sel = np.stack([m.ravel() for m in mesh], axis=-1)
    extra = np.stack(
        [rng.integers(0, c, size=sample_count) for c in counts], axis=-1)
    sel = np.concatenate([sel, extra], axis=0)
    mats = np.stack([per_surface[j][sel[:, j]] for j in range(k)], axis=1)
    if k == dim:
        vals = np.abs(np.linalg.det(np.swapaxes(mats, 1, 2)))
    else:
        gram = mats @ np.swapaxes(mats, 1, 2)
        vals = np.sqrt(np.clip(np.linalg.det(gram), 0.0, None))
    best = float(vals.min())
    return best


def verify_slab_condition(surface, slab, points_per_dim=16, sample_count=256, seed=0):
    """(all sampled surface points within mu of the subspace, max observed distance)."""
    pts = surface.domain_samples(points_per_dim, extra_random=sample_count, seed=seed)
    dist = slab.distance(surface.point(pts))
    worst = float(dist.max()) if dist.size else 0.0
    return worst <= slab.mu + 1e-12, worst
