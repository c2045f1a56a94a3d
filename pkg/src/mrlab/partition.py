"""Fourier-compact bump, lattice windows, grid Fourier transforms.

The bump chi_0^m is c * |psi-check|^2 for the radial mollifier
psi(xi) = exp(-1/(1 - |2 xi|^2)) supported in the ball of radius 1/2, so
it is nonnegative, has unit mass and Fourier support in the closed unit
ball.  Window sums over a lattice then telescope to 1 by Poisson
summation, up to a truncation tail controlled by the decay model.
"""

import functools

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .lattice import Strip

DECAY_ORDER = 12
N_MAX = 4
_TABLE_MAX = 300.0
_TABLE_STEP = 0.01
_QUAD_NODES = 160


class PartitionError(ValueError):
    """Partition / transform contract violation."""


def _mollifier_radial(rho):
    t = 1.0 - (2.0 * rho) ** 2
    out = np.zeros_like(rho)
    mask = t > 0
    out[mask] = np.exp(-1.0 / t[mask])
    return out


class BumpProfile:
    """Radial profile of chi_0^m with a cached spline table and decay model.

    ``value`` evaluates chi_0^m at points of R^m; beyond the table the
    fitted polynomial envelope A (1+s)^{-12} is used, which upper-bounds
    the true profile past its anchor point.
    """

    def __init__(self, m):
        if m < 1:
            raise PartitionError("bump dimension must be >= 1")
        self.m = int(m)
        nodes, weights = np.polynomial.legendre.leggauss(_QUAD_NODES)
        r = 0.25 * (nodes + 1.0)
        w = 0.25 * weights
        gv = _mollifier_radial(r)
        s = np.arange(0.0, _TABLE_MAX + _TABLE_STEP, _TABLE_STEP)
        nu = (self.m - 2) / 2.0
        sc = np.where(s < 1e-9, 1e-9, s)
        bess = special.jv(nu, np.outer(sc, r))
        radial = (2 * np.pi) ** (-self.m / 2.0) * sc ** ((2 - self.m) / 2.0) * (
            bess @ (w * gv * r ** (self.m / 2.0)))
        # normalization via Parseval: int |psi-check|^2 = (2pi)^-m int psi^2
        sigma = 2.0 * np.pi ** (self.m / 2.0) / special.gamma(self.m / 2.0)
        rq = 0.5 * (nodes + 1.0) * 0.25 + 0.125  # unused midpoint guard
        rr = 0.25 * (nodes + 1.0)
        ipsi2 = sigma * np.sum(w * _mollifier_radial(rr) ** 2 * rr ** (self.m - 1))
        self.normalization = (2 * np.pi) ** self.m / ipsi2
        self._spline = CubicSpline(s, radial, bc_type="natural")
        self._table_s = s
        self._table_chi = self.normalization * radial ** 2
        # monotone envelope from the right, for truncation tails
        self._envelope = np.maximum.accumulate(self._table_chi[::-1])[::-1]
        self.far_field_coefficient = float(
            self._envelope[-1] * (1.0 + _TABLE_MAX) ** DECAY_ORDER)

    def radial_value(self, s):
        """chi_0^m on the radial coordinate s = |x| (batched)."""
        s = np.abs(np.asarray(s, dtype=float))
        out = np.empty_like(s)
        inside = s <= _TABLE_MAX
        out[inside] = self.normalization * self._spline(s[inside]) ** 2
        out[~inside] = self.far_field_coefficient * (1.0 + s[~inside]) ** (-DECAY_ORDER)
        return out

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.radial_value(np.linalg.norm(x, axis=-1))

    @property
    def peak(self):
        return float(self._table_chi[0])

    def envelope(self, s):
        """Monotone upper bound for chi_0^m at radial distance >= s."""
        s = np.asarray(s, dtype=float)
        idx = np.minimum((np.maximum(s, 0.0) / _TABLE_STEP).astype(int),
                         len(self._envelope) - 1)
        far = self.far_field_coefficient * (1.0 + np.maximum(s, _TABLE_MAX)) ** (-DECAY_ORDER)
        return np.where(s <= _TABLE_MAX, self._envelope[idx], far)

    def _ring_count(self, ell):
        """Number of indices with sup-norm exactly ell in Z^m."""
        if ell == 0:
            return 1
        return (2 * ell + 1) ** self.m - (2 * ell - 1) ** self.m

    def tail_bound(self, J, weight_order=0):
        """Upper bound for sum_{|j|_inf > J} <|y-j|>^weight chi(y-j), y in the center cell."""
        total = 0.0
        ell = int(J) + 1
        while True:
            dist = max(0.0, ell - 0.5)
            env = float(self.envelope(np.array(dist)))
            term = self._ring_count(ell) * env * (1.0 + dist ** 2) ** (weight_order / 2.0)
            total += term
            ell += 1
            if ell - 1 > 2 * _TABLE_MAX and term < 1e-300:
                break
            if env == 0.0 or (ell > J + 5 and term < 1e-18 * max(total, 1e-30)):
                break
        return total

    def truncation_for(self, tol, weight_order=0):
        """Smallest window half-width J whose modeled tail is below tol."""
        for J in range(2, 4000):
            if self.tail_bound(J, weight_order) <= tol:
                return J
        raise PartitionError("decay model cannot reach tolerance %g" % tol)

    def mass(self):
        """Independent radial quadrature of the table; equals 1 by normalization."""
        sigma = 2.0 * np.pi ** (self.m / 2.0) / special.gamma(self.m / 2.0)
        nodes, weights = np.polynomial.legendre.leggauss(4000)
        s = 0.5 * (nodes + 1.0) * _TABLE_MAX
        w = 0.5 * _TABLE_MAX * weights
        vals = self.normalization * self._spline(s) ** 2
        main = sigma * np.sum(w * vals * s ** (self.m - 1))
        # far-field remainder under the polynomial model
        tail_s = np.linspace(_TABLE_MAX, 20 * _TABLE_MAX, 4001)
        tail_v = self.far_field_coefficient * (1.0 + tail_s) ** (-DECAY_ORDER)
        tail = sigma * np.trapezoid(tail_v * tail_s ** (self.m - 1), tail_s)
        return main + tail


@functools.lru_cache(maxsize=8)
def make_bump(m):
    """Cached bump profile for dimension m."""
    return BumpProfile(m)


class GridFunction:
    """Complex samples on a uniform tensor grid of an m-dimensional chart.

    ``basis`` (optional) embeds grid coordinates into ambient space as
    columns; quadrature uses the parallelepiped volume element, so L^2
    norms are chart independent.
    """

    def __init__(self, origin, spacing, values, basis=None):
        self.origin = np.atleast_1d(np.asarray(origin, dtype=float))
        self.spacing = np.broadcast_to(
            np.asarray(spacing, dtype=float), self.origin.shape).copy()
        self.values = np.asarray(values, dtype=complex)
        if self.values.ndim != self.origin.shape[0]:
            raise PartitionError("value array rank must match grid dimension")
        if np.any(self.spacing <= 0):
            raise PartitionError("grid spacing must be positive")
        self.basis = None if basis is None else np.asarray(basis, dtype=float)

    @property
    def dim(self):
        return self.origin.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        return [self.origin[d] + self.spacing[d] * np.arange(self.values.shape[d])
                for d in range(self.dim)]

    def coords(self):
        """Grid coordinates, shape grid_shape + (m,)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    @property
    def volume_element(self):
        cell = float(np.prod(self.spacing))
        if self.basis is not None:
            gram = self.basis.T @ self.basis
            cell *= float(np.sqrt(max(np.linalg.det(gram), 0.0)))
        return cell

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.volume_element))

    def with_values(self, values):
        return GridFunction(self.origin, self.spacing, values, self.basis)

    def translated(self, shift):
        """Same samples with the origin moved by ``shift`` (chart coordinates)."""
        return GridFunction(self.origin + np.asarray(shift, dtype=float),
                            self.spacing, self.values, self.basis)


def _dual_axes(g):
    freqs = []
    for d in range(g.dim):
        n = g.shape[d]
        step = 2.0 * np.pi / (n * g.spacing[d])
        freqs.append((np.arange(n) - n // 2) * step)
    return freqs


def fourier_forward(g):
    """F g(xi) = int g(x) e^{-i x xi} dx on the canonical dual grid."""
    if g.basis is not None:
        gram = g.basis.T @ g.basis
        if np.abs(gram - np.eye(g.dim)).max() > 1e-10:
            raise PartitionError("fourier transforms need an orthonormal chart")
    vals = g.values
    freqs = _dual_axes(g)
    for d in range(g.dim):
        n = vals.shape[d]
        j = np.arange(n)
        xi0 = freqs[d][0]
        pre = np.exp(-1j * j * g.spacing[d] * xi0)
        shape = [1] * g.dim
        shape[d] = n
        vals = np.fft.fft(vals * pre.reshape(shape), axis=d)
        post = g.spacing[d] * np.exp(-1j * g.origin[d] * freqs[d])
        vals = vals * post.reshape(shape)
    origin = np.array([f[0] for f in freqs])
    spacing = np.array([f[1] - f[0] for f in freqs])
    return GridFunction(origin, spacing, vals, g.basis)


def fourier_inverse(g):
    """F^{-1} g(x) = (2pi)^{-m} int g(xi) e^{+i x xi} dxi on the canonical dual grid."""
    if g.basis is not None:
        gram = g.basis.T @ g.basis
        if np.abs(gram - np.eye(g.dim)).max() > 1e-10:
            raise PartitionError("fourier transforms need an orthonormal chart")
    vals = g.values
    freqs = _dual_axes(g)
    for d in range(g.dim):
        n = vals.shape[d]
        j = np.arange(n)
        x0 = freqs[d][0]
        pre = np.exp(1j * j * g.spacing[d] * x0)
        shape = [1] * g.dim
        shape[d] = n
        vals = np.fft.ifft(vals * pre.reshape(shape), axis=d) * n
        post = g.spacing[d] / (2.0 * np.pi) * np.exp(1j * g.origin[d] * freqs[d])
        vals = vals * post.reshape(shape)
    origin = np.array([f[0] for f in freqs])
    spacing = np.array([f[1] - f[0] for f in freqs])
    return GridFunction(origin, spacing, vals, g.basis)


def window_argument(target, x, induced=None, core=None):
    """T((x - c(q)) / r) for a cell or strip window, batched over x.

    ``x`` is given in the coordinates of the owning chart (H_i coordinates
    for cells, H_1 cap H coordinates for strips).
    """
    if isinstance(target, Strip):
        if core is None:
            raise PartitionError("strip windows need the core lattice")
        y = core.to_lattice(x)
    else:
        if induced is None:
            raise PartitionError("cell windows need the induced lattice")
        if target.owner != induced.owner or target.scale != induced.scale:
            raise PartitionError("cell does not belong to the given induced lattice")
        y = induced.to_lattice(x)
    return y - np.array(target.index, dtype=float)


def eval_window(bump, target, x, induced=None, core=None):
    """Window value chi_q(x) (or chi_s(x)); x in the owning chart's coordinates."""
    y = window_argument(target, x, induced=induced, core=core)
    if y.shape[-1] != bump.m:
        raise PartitionError("bump dimension does not match the window")
    return bump.value(y)


def partition_sum(bump, induced, x, truncation=None, tol=1e-6):
    """Truncated window sum sum_{|j - round(y)|_inf <= J} chi(y - j); contract: 1 +- tol.

    The truncation is chosen from the decay model so the modeled tail is
    below tol / 10; an explicit J that cannot meet tol raises.
    """
    y = np.atleast_2d(induced.to_lattice(x))
    if truncation is None:
        truncation = bump.truncation_for(tol / 10.0)
    else:
        if bump.tail_bound(truncation) > tol:
            raise PartitionError(
                "truncation J=%d has modeled tail %.2e > tol %.2e"
                % (truncation, bump.tail_bound(truncation), tol))
    m = bump.m
    offsets = np.stack(np.meshgrid(
        *[np.arange(-truncation, truncation + 1)] * m, indexing="ij"),
        axis=-1).reshape(-1, m)
    base = np.round(y).astype(int)
    args = y[:, None, :] - (base[:, None, :] + offsets[None, :, :])
    vals = bump.radial_value(np.linalg.norm(args, axis=-1)).sum(axis=1)
    return vals if np.asarray(x).ndim > 1 else float(vals[0])


def verify_SN(g, induced, N, truncation=None):
    """sum_q || <(x - c(q))/r>^N chi_q g ||_L2^2 / ||g||_L2^2 over a truncated window.

    ``g`` must live on an orthonormal chart of H_i.  N is limited by the
    order-12 decay model.
    """
    if N > N_MAX:
        raise PartitionError(
            "weight order %d beyond decay model (order %d supports N <= %d)"
            % (N, DECAY_ORDER, N_MAX))
    bump = make_bump(induced.dim)
    if truncation is None:
        truncation = bump.truncation_for(1e-9, weight_order=2 * N)
    coords = g.coords().reshape(-1, g.dim)
    dens = np.abs(g.values.reshape(-1)) ** 2
    norm2 = float(dens.sum() * g.volume_element)
    if norm2 <= 0:
        raise PartitionError("zero-norm grid function")
    y = induced.to_lattice(coords)
    jlo = np.floor(y.min(axis=0)).astype(int) - truncation
    jhi = np.ceil(y.max(axis=0)).astype(int) + truncation
    total = 0.0
    r = induced.scale
    for index in np.ndindex(*(jhi - jlo + 1)):
        j = jlo + np.array(index)
        center = induced.center_coords(j)
        dist = np.linalg.norm(coords - center, axis=1) / r
        chi = bump.radial_value(np.linalg.norm(y - j, axis=1))
        w = (1.0 + dist ** 2) ** N * chi
        total += float(np.sum(w ** 2 * dens)) * g.volume_element
    return total / norm2
