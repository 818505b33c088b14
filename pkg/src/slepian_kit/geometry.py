"""Grids, shrink laws and epsilon-parameterized mask families.

Space is discretized on the midpoint grid of [-1, 1]^d with N points per
dimension, frequency on the midpoint grid of [-pi, pi]^d with M = 2N-1
points per dimension.  Mask families describe how a shape shrinks as the
deformation parameter eps grows: binary shapes scale their boundary by
mu(eps) about a fixed anchor, Gaussian envelopes rescale their coefficient
so the e^(-1/2) level set shrinks the same way.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

SPACE = "space"
FOURIER = "fourier"

# Effective support of a Gaussian mask: radius where the value drops to
# 1e-12 of the peak.  Fourier masks must keep this radius inside [-pi, pi].
GAUSSIAN_TAIL = 1e-12


class MaskDomainError(ValueError):
    """A grid, shrink-law or mask parameter is outside its domain."""


def default_mu(eps: float) -> float:
    return (1.0 + eps ** 4) ** -0.25


@dataclass(frozen=True)
class ShrinkLaw:
    """Scalar map eps -> mu(eps), with mu(0) = 1 and mu decreasing to 0."""

    fn: Callable[[float], float] = default_mu

    def __call__(self, eps: float) -> float:
        if eps < 0:
            raise MaskDomainError(f"shrink parameter must be >= 0, got {eps}")
        return float(self.fn(eps))


DEFAULT_LAW = ShrinkLaw()


def mu(law: ShrinkLaw, eps: float) -> float:
    """Evaluate the shrink factor mu(eps) of a law (default (1+eps^4)^(-1/4))."""
    return law(eps)


@dataclass(frozen=True)
class Grid:
    """Midpoint grids on [-1,1]^d (space, N points/dim) and [-pi,pi]^d (Fourier, 2N-1 points/dim).

    Space nodes are x_k = (2k+1-N)/N, Fourier nodes xi_l = pi*(2l+1-M)/M.
    Both formulas are bit-exact mirror symmetric (node k maps to minus node
    N-1-k), which downstream symmetry checks rely on.  Multi-indices are
    flattened in C order, so the last index varies fastest.

    The assembled concentration matrix is the unit-spacing discretization of
    the continuous problem written in "lattice" coordinates x/dx; use
    ``lattice_axis`` when comparing against closed-form references.
    """

    d: int
    N: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise MaskDomainError(f"dimension must be >= 1, got {self.d}")
        if self.N < 1:
            raise MaskDomainError(f"grid size must be >= 1, got {self.N}")

    @property
    def M(self) -> int:
        return 2 * self.N - 1

    @property
    def dx(self) -> float:
        return 2.0 / self.N

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.M

    @property
    def size(self) -> int:
        """Number of space degrees of freedom N^d."""
        return self.N ** self.d

    @property
    def fourier_size(self) -> int:
        return self.M ** self.d

    def space_axis(self) -> np.ndarray:
        k = np.arange(self.N, dtype=float)
        return (2.0 * k + 1.0 - self.N) / self.N

    def fourier_axis(self) -> np.ndarray:
        l = np.arange(self.M, dtype=float)
        return ((2.0 * l + 1.0 - self.M) / self.M) * math.pi

    def lattice_axis(self) -> np.ndarray:
        """Space nodes in units of dx: integers shifted by (N-1)/2."""
        return np.arange(self.N, dtype=float) - 0.5 * (self.N - 1)

    def _points(self, axis: np.ndarray) -> np.ndarray:
        mesh = np.meshgrid(*([axis] * self.d), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def space_points(self) -> np.ndarray:
        """All N^d space nodes as an (N^d, d) array, C order."""
        return self._points(self.space_axis())

    def fourier_points(self) -> np.ndarray:
        """All (2N-1)^d Fourier nodes as an (M^d, d) array, C order."""
        return self._points(self.fourier_axis())

    def lattice_points(self) -> np.ndarray:
        return self._points(self.lattice_axis())


def space_grid(N: int, d: int = 1) -> np.ndarray:
    """Space nodes of Grid(d, N); 1-d returns the axis, else (N^d, d) points."""
    g = Grid(d, N)
    return g.space_axis() if d == 1 else g.space_points()


def fourier_grid(N: int, d: int = 1) -> np.ndarray:
    """Fourier nodes of Grid(d, N); 1-d returns the axis, else (M^d, d) points."""
    g = Grid(d, N)
    return g.fourier_axis() if d == 1 else g.fourier_points()


# ---------------------------------------------------------------------------
# Mask shapes


class MaskSpec:
    """A mask shape evaluated at points; subclasses implement ``evaluate``.

    ``evaluate(points, scale)`` takes an (..., d) array and the boundary
    scale factor mu(eps); binary shapes return exactly 0/1 (boundary points
    count as inside), the Gaussian returns values in (0, 1].
    """

    binary = True

    def evaluate(self, points: np.ndarray, scale: float = 1.0) -> np.ndarray:
        raise NotImplementedError

    def support_bound(self) -> float | None:
        """Max-norm radius of the (effective) support at scale 1, if known."""
        return None


@dataclass(frozen=True)
class Interval(MaskSpec):
    """1-d interval [center - half_width, center + half_width]."""

    center: float = 0.0
    half_width: float = 1.0

    def evaluate(self, points, scale=1.0):
        x = np.asarray(points)[..., 0]
        return (np.abs(x - self.center) <= self.half_width * scale).astype(float)

    def support_bound(self):
        return abs(self.center) + self.half_width


@dataclass(frozen=True)
class Ball(MaskSpec):
    """Euclidean ball of given center and radius."""

    center: tuple
    radius: float

    def evaluate(self, points, scale=1.0):
        x = np.asarray(points, dtype=float)
        c = np.asarray(self.center, dtype=float)
        r2 = np.sum((x - c) ** 2, axis=-1)
        return (r2 <= (self.radius * scale) ** 2).astype(float)

    def support_bound(self):
        return float(np.max(np.abs(self.center))) + self.radius


@dataclass(frozen=True)
class Quadric(MaskSpec):
    """Axis-aligned quadric {x : sum a_m (x_m - c_m)^2 <= b}."""

    center: tuple
    a: tuple
    b: float

    def evaluate(self, points, scale=1.0):
        x = np.asarray(points, dtype=float)
        c = np.asarray(self.center, dtype=float)
        a = np.asarray(self.a, dtype=float)
        q = np.sum(a * (x - c) ** 2, axis=-1)
        return (q <= self.b * scale ** 2).astype(float)

    def support_bound(self):
        a = np.asarray(self.a, dtype=float)
        if self.b <= 0 or np.any(a <= 0):
            return None
        return float(np.max(np.abs(self.center))) + math.sqrt(self.b / float(np.min(a)))


@dataclass(frozen=True)
class GeneralQuadric(MaskSpec):
    """General quadric {x : x^T M x + v^T x + c <= 0}, M symmetric invertible.

    The shrink anchor is the quadric's own center -M^{-1} v / 2.
    """

    matrix: tuple  # row tuples, d x d
    v: tuple
    c: float

    def _arrays(self):
        M = np.asarray(self.matrix, dtype=float)
        v = np.asarray(self.v, dtype=float)
        return M, v

    def evaluate(self, points, scale=1.0):
        M, v = self._arrays()
        x = np.asarray(points, dtype=float)
        anchor = -0.5 * np.linalg.solve(M, v)
        y = (x - anchor) / scale + anchor
        q = np.einsum("...i,ij,...j->...", y, M, y) + y @ v + self.c
        return (q <= 0.0).astype(float)


@dataclass(frozen=True)
class Gaussian(MaskSpec):
    """Gaussian envelope exp(-gamma |x|^2 / 2); shrinks via gamma -> gamma/scale^2."""

    gamma: float
    binary = False

    def evaluate(self, points, scale=1.0):
        x = np.asarray(points, dtype=float)
        g = self.gamma / scale ** 2
        return np.exp(-0.5 * g * np.sum(x ** 2, axis=-1))

    def support_bound(self):
        # Radius where the value decays to GAUSSIAN_TAIL of the peak.
        return math.sqrt(2.0 * math.log(1.0 / GAUSSIAN_TAIL) / self.gamma)


def _inside_triangle(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Boundary-inclusive point-in-triangle test via cross-product signs."""
    x, y = points[..., 0], points[..., 1]
    inside = np.ones(x.shape, dtype=bool)
    pos = np.zeros(x.shape, dtype=bool)
    neg = np.zeros(x.shape, dtype=bool)
    for i in range(3):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % 3]
        cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0)
        pos |= cross > 0
        neg |= cross < 0
    inside &= ~(pos & neg)
    return inside


@dataclass(frozen=True)
class RasterShape(MaskSpec):
    """2-d outline (disc plus triangle ears) with circular holes.

    The outline scales by mu(eps) about the centroid; the holes never move
    and keep a fixed radius, so the family is monotone under set inclusion
    and every hole center stays excluded for all eps.
    """

    disc_radius: float
    ear_triangles: tuple  # tuple of 3x2 vertex tuples
    holes: tuple  # tuple of ((cx, cy), radius)
    centroid: tuple = (0.0, 0.0)

    def _outline(self, points: np.ndarray) -> np.ndarray:
        r2 = np.sum((points - np.asarray(self.centroid)) ** 2, axis=-1)
        inside = r2 <= self.disc_radius ** 2
        for tri in self.ear_triangles:
            inside |= _inside_triangle(points, np.asarray(tri, dtype=float))
        return inside

    def evaluate(self, points, scale=1.0):
        x = np.asarray(points, dtype=float)
        c = np.asarray(self.centroid, dtype=float)
        pulled = (x - c) / scale + c
        inside = self._outline(pulled)
        for (hc, hr) in self.holes:
            inside &= np.sum((x - np.asarray(hc)) ** 2, axis=-1) > hr ** 2
        return inside.astype(float)

    def support_bound(self):
        b = self.disc_radius + float(np.max(np.abs(self.centroid)))
        for tri in self.ear_triangles:
            b = max(b, float(np.max(np.abs(np.asarray(tri)))))
        return b


def cat_head() -> RasterShape:
    """The reference 2-d test shape: disc with two ear triangles, two eye
    holes and a nose hole, mirror symmetric about the vertical axis."""
    right_ear = ((0.45, 0.85), (0.12, 0.62), (0.66, 0.18))
    left_ear = tuple((-vx, vy) for (vx, vy) in right_ear)
    return RasterShape(
        disc_radius=0.7,
        ear_triangles=(right_ear, left_ear),
        holes=(((0.25, 0.15), 0.12), ((-0.25, 0.15), 0.12), ((0.0, -0.2), 0.10)),
        centroid=(0.0, 0.0),
    )


# ---------------------------------------------------------------------------
# Mask families


@dataclass(frozen=True)
class MaskFamily:
    """An eps-parameterized mask: a shape, its role and a shrink law."""

    spec: MaskSpec
    role: str
    law: ShrinkLaw = DEFAULT_LAW

    def __post_init__(self) -> None:
        if self.role not in (SPACE, FOURIER):
            raise MaskDomainError(f"role must be 'space' or 'fourier', got {self.role!r}")
        bound = self.spec.support_bound()
        if bound is None:
            return
        box = math.pi if self.role == FOURIER else 1.0
        if bound > box * (1.0 + 1e-12):
            if isinstance(self.spec, Gaussian) and self.role == SPACE:
                # The space mask multiplies pointwise, nothing is truncated;
                # a fat tail only loosens oracle comparisons.
                warnings.warn(
                    f"space Gaussian tail exceeds {GAUSSIAN_TAIL} at the box boundary",
                    stacklevel=2,
                )
            else:
                raise MaskDomainError(
                    f"{self.role} mask support radius {bound:.6g} exceeds the box bound {box:.6g}"
                )

    def scale(self, eps: float) -> float:
        return self.law(eps)

    def sample(self, grid: Grid, eps: float = 0.0) -> np.ndarray:
        """Mask values on the role's grid nodes, flat C-order vector."""
        pts = grid.space_points() if self.role == SPACE else grid.fourier_points()
        return np.asarray(self.spec.evaluate(pts, scale=self.law(eps)), dtype=float)


def sample_mask(family: MaskFamily, eps: float, grid: Grid) -> np.ndarray:
    """Sample a mask family at deformation eps on its grid (flat, C order)."""
    return family.sample(grid, eps)


def cat_head_indicator(family: MaskFamily, eps: float, point) -> float:
    """Indicator of the eps-deformed raster shape at a single 2-d point."""
    if not isinstance(family.spec, RasterShape):
        raise MaskDomainError("cat_head_indicator expects a RasterShape family")
    p = np.asarray(point, dtype=float).reshape(1, 2)
    return float(family.spec.evaluate(p, scale=family.law(eps))[0])
