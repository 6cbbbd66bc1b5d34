"""Disk packings, defining similarities and derived construction parameters.

The source Cantor set is the attractor of ``m`` similarities
``z -> z_i + (sigma*r) * z`` over a packing of ``m`` equal disks
``D(z_i, r)`` inside the unit disk; the image set uses the milder
contraction ratio ``sigma**(1/K) * r`` over the same centers.  Everything
downstream (map evaluation, mass formulas, dimension predictions) is a
function of the numbers bundled in :class:`ConstructionParams`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

#: Largest number of same-generation disks that may be materialized at once.
ENUMERATION_CAP = 10**7

#: Safety factor applied to the maximal feasible common radius of a layout.
RADIUS_SAFETY = 0.999


class CantorQCError(Exception):
    """Base class for errors raised by this package."""


class PackingError(CantorQCError):
    """A disk layout could not be constructed or failed validation."""


class ParameterError(CantorQCError):
    """Rejected input parameters; the message names the violated condition."""


class EnumerationCapError(CantorQCError):
    """A generation enumeration would exceed the configured cap."""


# ---------------------------------------------------------------------------
# elementary geometry


@dataclass(frozen=True)
class Disk:
    """Open disk ``D(center, radius)``."""

    center: complex
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ParameterError(f"disk radius must be positive and finite, got {self.radius}")

    def contains(self, z: complex, closed: bool = False) -> bool:
        d = abs(z - self.center)
        return d <= self.radius if closed else d < self.radius


@dataclass(frozen=True)
class Similarity:
    """Complex affine map ``z -> a + b*z`` (a pure scale-rotation plus shift)."""

    a: complex = 0j
    b: complex = 1 + 0j

    def __post_init__(self) -> None:
        if self.b == 0:
            raise ParameterError("similarity scale factor b must be nonzero")
        for part in (self.a.real, self.a.imag, self.b.real, self.b.imag):
            if not math.isfinite(part):
                raise ParameterError("similarity coefficients must be finite")

    def __call__(self, z: complex) -> complex:
        return self.a + self.b * z

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self.a + self.b * np.asarray(z)

    def compose(self, other: "Similarity") -> "Similarity":
        """Return ``self o other`` (apply ``other`` first)."""
        return Similarity(self.a + self.b * other.a, self.b * other.b)

    def inverse(self) -> "Similarity":
        return Similarity(-self.a / self.b, 1 / self.b)

    @property
    def scale(self) -> float:
        return abs(self.b)

    def map_disk(self, disk: Disk) -> Disk:
        return Disk(self(disk.center), self.scale * disk.radius)

    @property
    def unit_disk_image(self) -> Disk:
        return Disk(self.a, self.scale)


# ---------------------------------------------------------------------------
# first-generation layout


@dataclass(frozen=True, eq=False)
class DiskPacking:
    """``m`` equal, pairwise disjoint closed disks inside the unit disk.

    ``centers`` is a complex array of length ``m``; ``r`` is the common
    radius.  ``c_m = m * r**2`` measures the area fraction claimed by the
    packing and controls how close the image dimension gets to its target.
    """

    centers: np.ndarray
    r: float

    def __post_init__(self) -> None:
        centers = np.ascontiguousarray(self.centers, dtype=np.complex128)
        centers.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        if not (0 < self.r < 1):
            raise PackingError(f"common radius must lie in (0, 1), got {self.r}")
        if not np.isfinite(centers).all():
            raise PackingError("packing centers must be finite")

    @property
    def m(self) -> int:
        return len(self.centers)

    @property
    def c_m(self) -> float:
        return self.m * self.r**2

    @cached_property
    def _tree(self) -> cKDTree:
        pts = np.column_stack([self.centers.real, self.centers.imag])
        return cKDTree(pts)

    def nearest_center(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Index of the closest packing center per point, and that distance.

        Closed disks are disjoint, so the only disk that can contain a point
        is the one with the nearest center.
        """
        pts = np.asarray(pts, dtype=np.complex128)
        if self.m <= 24:
            d2 = np.abs(pts[..., None] - self.centers[None, :])
            idx = np.argmin(d2, axis=-1)
        else:
            _, idx = self._tree.query(np.column_stack([pts.real, pts.imag]))
        dist = np.abs(pts - self.centers[idx])
        return idx, dist

    def validate(self) -> None:
        """Raise :class:`PackingError` unless disks are disjoint and inside the unit disk."""
        if self.m == 0:
            raise PackingError("packing is empty")
        if np.max(np.abs(self.centers)) + self.r >= 1.0:
            raise PackingError("a disk escapes the open unit disk")
        if self.m > 1:
            d, _ = self._tree.query(
                np.column_stack([self.centers.real, self.centers.imag]), k=2
            )
            min_gap = float(d[:, 1].min())
            if min_gap <= 2 * self.r:
                raise PackingError(
                    f"closed disks overlap: min center distance {min_gap:.6g} "
                    f"<= 2r = {2 * self.r:.6g}"
                )

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "r": self.r,
            "c_m": self.c_m,
            "centers": [[float(z.real), float(z.imag)] for z in self.centers],
        }


def _hex_lattice(count: int) -> np.ndarray:
    """First ``count`` points of the unit-spacing triangular lattice, spiraling
    out from the origin (sorted by exact squared norm, then angle)."""
    # ring k holds 6k points, so rings through k cover 1 + 3k(k+1) points
    rings = 1
    while 1 + 3 * rings * (rings + 1) < count:
        rings += 1
    span = rings + 1
    pts = []
    for i in range(-span, span + 1):
        for j in range(-span, span + 1):
            n2 = i * i + i * j + j * j
            if n2 > span * span:
                continue
            x = i + 0.5 * j
            y = 0.5 * math.sqrt(3.0) * j
            pts.append((n2, math.atan2(y, x), x, y))
    pts.sort()
    if len(pts) < count:
        raise PackingError(f"lattice generation produced {len(pts)} < {count} points")
    sel = pts[:count]
    return np.array([complex(x, y) for _, _, x, y in sel])


def build_packing(m: int) -> DiskPacking:
    """Deterministic hexagonal-lattice packing of ``m`` equal disks in the unit disk.

    The lattice is clipped to the ``m`` sites closest to the origin and then
    rescaled so that half the lattice spacing equals the clearance to the
    unit circle; the common radius is that value shrunk by
    :data:`RADIUS_SAFETY`.  For ``m >= 100`` the layout is required to reach
    ``c_m >= 1/2``.
    """
    if m < 1:
        raise ParameterError(f"need m >= 1 disks, got {m}")
    if m == 1:
        # degenerate layout: a single disk at the origin
        return DiskPacking(centers=np.array([0j]), r=RADIUS_SAFETY)
    lattice = _hex_lattice(m)
    reach = float(np.max(np.abs(lattice)))
    scale = 1.0 / (reach + 0.5)
    centers = lattice * scale
    r = RADIUS_SAFETY * scale / 2.0
    packing = DiskPacking(centers=centers, r=r)
    packing.validate()
    if m >= 100 and packing.c_m < 0.5:
        raise PackingError(
            f"hexagonal layout reached only c_m = {packing.c_m:.4f} < 1/2 for m = {m}"
        )
    return packing


# ---------------------------------------------------------------------------
# construction parameters


@dataclass(frozen=True, eq=False)
class ConstructionParams:
    """All numbers defining one source/image Cantor pair and its map.

    ``sigma`` is never chosen freely: it is pinned by ``m * (sigma*r)**t = 1``
    so that the source set has dimension exactly ``t``.  ``t_prime`` is the
    distortion target ``2Kt / (2 + (K-1)t)``; the achieved image dimension
    ``dim_image`` approaches it from below as ``m`` grows.
    """

    t: float
    K: float
    packing: DiskPacking
    sigma: float
    t_prime: float
    dim_image: float
    holder_exp: float

    @property
    def m(self) -> int:
        return self.packing.m

    @property
    def r(self) -> float:
        return self.packing.r

    @property
    def c_m(self) -> float:
        return self.packing.c_m

    @property
    def source_ratio(self) -> float:
        """Contraction ratio of the source similarities, ``sigma * r``."""
        return self.sigma * self.r

    @property
    def image_ratio(self) -> float:
        """Contraction ratio of the image similarities, ``sigma**(1/K) * r``."""
        return self.sigma ** (1.0 / self.K) * self.r

    @property
    def critical_p(self) -> float:
        """Integrability threshold ``K/(K-1)`` of the Jacobian (inf when K=1)."""
        return math.inf if self.K == 1.0 else self.K / (self.K - 1.0)

    def source_similarity(self, i: int) -> Similarity:
        return Similarity(self.packing.centers[i], complex(self.source_ratio))

    def image_similarity(self, i: int) -> Similarity:
        return Similarity(self.packing.centers[i], complex(self.image_ratio))

    def source_radius(self, n: int) -> float:
        return self.source_ratio**n

    def image_radius(self, n: int) -> float:
        return self.image_ratio**n

    def to_json_dict(self) -> dict:
        out = self.packing.to_json_dict()
        out.update(
            {
                "t": self.t,
                "K": self.K,
                "sigma": self.sigma,
                "t_prime": self.t_prime,
                "dim_image": self.dim_image,
                "holder_exp": self.holder_exp,
            }
        )
        return out


def derive_params(t: float, K: float, packing: DiskPacking) -> ConstructionParams:
    """Derive ``sigma``, ``t_prime``, the image dimension and the Hölder exponent.

    Raises :class:`ParameterError` when ``t`` or ``K`` is out of range, or when
    the packing is too sparse for ``sigma = m**(-1/t) / r`` to land in (0, 1).
    """
    if not (0.0 < t < 2.0):
        raise ParameterError(f"source dimension t must lie in (0, 2), got {t}")
    if not (K >= 1.0 and math.isfinite(K)):
        raise ParameterError(f"distortion K must satisfy K >= 1, got {K}")
    m, r = packing.m, packing.r
    sigma = m ** (-1.0 / t) / r
    if not (0.0 < sigma < 1.0):
        raise ParameterError(
            f"sigma = m**(-1/t)/r = {sigma:.6g} is not in (0, 1): "
            f"need m * r**t > 1 (increase m for this t)"
        )
    t_prime = 2.0 * K * t / (2.0 + (K - 1.0) * t)
    holder_exp = t / t_prime
    holder_alt = 1.0 / K + (K - 1.0) * t / (2.0 * K)
    if abs(holder_exp - holder_alt) > 1e-12 * max(1.0, holder_exp):
        raise ParameterError(
            f"Hölder exponent closed forms disagree: {holder_exp!r} vs {holder_alt!r}"
        )
    image_ratio = sigma ** (1.0 / K) * r
    dim_image = math.log(m) / math.log(1.0 / image_ratio)
    inv_dim_alt = 1.0 / t_prime + (K - 1.0) / (2.0 * K) * math.log(1.0 / (m * r * r)) / math.log(m)
    dim_alt = 1.0 / inv_dim_alt
    if abs(dim_image - dim_alt) > 1e-12 * max(1.0, dim_image):
        raise ParameterError(
            f"image dimension closed forms disagree: {dim_image!r} vs {dim_alt!r}"
        )
    check = m * (sigma * r) ** t
    if abs(check - 1.0) > 1e-12:
        raise ParameterError(f"m*(sigma*r)**t = {check!r} drifted from 1")
    return ConstructionParams(
        t=float(t),
        K=float(K),
        packing=packing,
        sigma=sigma,
        t_prime=t_prime,
        dim_image=dim_image,
        holder_exp=holder_exp,
    )


# ---------------------------------------------------------------------------
# multi-index addressing

#: A chain of child choices, root first; () addresses the unit disk itself.
MultiIndex = tuple[int, ...]


def _check_index(J: Sequence[int], m: int) -> MultiIndex:
    J = tuple(int(j) for j in J)
    for j in J:
        if not (0 <= j < m):
            raise ParameterError(f"multi-index digit {j} out of range [0, {m})")
    return J


def _compose_chain(J: MultiIndex, centers: np.ndarray, ratio: float) -> Similarity:
    a, b = 0j, 1 + 0j
    for j in J:
        a = a + b * centers[j]
        b = b * ratio
    return Similarity(a, b)


def source_map(J: Sequence[int], params: ConstructionParams) -> Similarity:
    """Composite source similarity addressed by ``J`` (first digit outermost)."""
    J = _check_index(J, params.m)
    return _compose_chain(J, params.packing.centers, params.source_ratio)


def image_map(J: Sequence[int], params: ConstructionParams) -> Similarity:
    """Composite image similarity addressed by ``J`` (first digit outermost)."""
    J = _check_index(J, params.m)
    return _compose_chain(J, params.packing.centers, params.image_ratio)


def _check_cap(m: int, N: int, cap: int) -> None:
    if N < 0:
        raise ParameterError(f"generation N must be >= 0, got {N}")
    if m**N > cap:
        raise EnumerationCapError(f"m**N = {m}**{N} exceeds the enumeration cap {cap}")


def generation_centers(
    N: int, side: str, params: ConstructionParams, cap: int = ENUMERATION_CAP
) -> np.ndarray:
    """Centers of all generation-``N`` disks in lexicographic multi-index order."""
    if side not in ("source", "image"):
        raise ParameterError(f"side must be 'source' or 'image', got {side!r}")
    _check_cap(params.m, N, cap)
    ratio = params.source_ratio if side == "source" else params.image_ratio
    out = np.array([0j])
    for _ in range(N):
        out = (params.packing.centers[:, None] + ratio * out[None, :]).ravel()
    return out


def generation_disks(
    N: int, side: str, params: ConstructionParams, cap: int = ENUMERATION_CAP
) -> list[tuple[MultiIndex, Disk]]:
    """All generation-``N`` disks with their multi-indices."""
    centers = generation_centers(N, side, params, cap=cap)
    ratio = params.source_ratio if side == "source" else params.image_ratio
    radius = ratio**N if N > 0 else 1.0
    indices = product(range(params.m), repeat=N)
    return [(J, Disk(complex(c), radius)) for J, c in zip(indices, centers)]


# ---------------------------------------------------------------------------
# point classification


class Region(Enum):
    OUTSIDE = "outside"
    ANNULUS = "annulus"
    INSIDE = "inside"


@dataclass(frozen=True)
class Location:
    """Where a point sits relative to the first-generation structure.

    For ``ANNULUS`` the payload is ``(z - z_i)/r`` (modulus in ``[sigma, 1)``);
    for ``INSIDE`` it is ``(z - z_i)/(sigma*r)``, a point of the unit disk.
    """

    region: Region
    index: int | None = None
    point: complex | None = None


def locate(z: complex, params: ConstructionParams) -> Location:
    """Classify ``z`` against the protecting disks ``D(z_i, r)``.

    The inner boundary ``|z - z_i| = sigma*r`` is assigned to the annulus;
    both formulas agree there, the tie-break only fixes determinism.
    """
    idx, dist = params.packing.nearest_center(np.array([z]))
    i, d = int(idx[0]), float(dist[0])
    r = params.r
    if d >= r:
        return Location(Region.OUTSIDE)
    c = complex(params.packing.centers[i])
    if d < params.sigma * r:
        return Location(Region.INSIDE, i, (z - c) / (params.sigma * r))
    return Location(Region.ANNULUS, i, (z - c) / r)
