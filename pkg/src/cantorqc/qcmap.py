"""Evaluation of the limit quasiconformal map, its inverse and its Jacobian.

One construction step replaces the identity inside each protecting disk
``D(z_i, r)`` by a radial interpolation: a pure scaling ``sigma**(1/K - 1)``
on the generating disk ``D(z_i, sigma*r)``, the radial stretch
``w -> |w/r|**(1/K - 1) * w`` (centered at ``z_i``) on the ring between them,
and the identity outside.  Inside a generating disk the whole construction
repeats, rescaled, which yields the conjugacy

    phi(z_i + sigma*r*u) = z_i + sigma**(1/K)*r * phi(u)

used here to evaluate the limit map with one case split per generation
instead of composing explicit stage maps.  Points that never exit the nested
generating disks within ``depth_max`` generations receive the center of the
deepest localizing image disk together with a rigorous error bound (its
diameter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import ConstructionParams, Disk, ParameterError

#: Relative half-width of the band around each seam circle where the
#: Jacobian is reported as undefined rather than picked from one side.
SEAM_RTOL = 1e-12

#: Detection tolerance for the critical integrability exponent p = K/(K-1).
CRITICAL_P_TOL = 1e-12


@dataclass(frozen=True)
class MapResult:
    """A map value with a truncation certificate.

    ``err_bound == 0`` means the recursion terminated and the value is exact
    up to floating round-off; otherwise the value is the center of the
    generation-``depth`` localizing disk and ``err_bound`` is that disk's
    diameter.
    """

    value: complex
    depth: int
    err_bound: float


@dataclass(frozen=True)
class Final:
    value: complex


@dataclass(frozen=True)
class Descend:
    index: int
    point: complex


def base_step(z: complex, params: ConstructionParams) -> Final | Descend:
    """One case split of the construction.

    Identity outside all protecting disks, the radial interpolation on an
    annulus, or a descent instruction ``(i, zhat)`` with the renormalized
    coordinate inside generating disk ``i``.
    """
    idx, dist = params.packing.nearest_center(np.array([z]))
    i, d = int(idx[0]), float(dist[0])
    r = params.r
    if d >= r:
        return Final(z)
    c = complex(params.packing.centers[i])
    if d >= params.sigma * r:
        rho = d / r
        return Final(c + rho ** (1.0 / params.K - 1.0) * (z - c))
    return Descend(i, (z - c) / (params.sigma * r))


def phi(z: complex, params: ConstructionParams, depth_max: int = 32) -> MapResult:
    """Evaluate the limit map at one point."""
    if depth_max < 1:
        raise ParameterError(f"depth_max must be >= 1, got {depth_max}")
    centers = params.packing.centers
    r, sigma = params.r, params.sigma
    sr, q = params.source_ratio, params.image_ratio
    exp_in = 1.0 / params.K - 1.0
    a, b = 0j, 1 + 0j
    x = complex(z)
    for depth in range(depth_max):
        idx, dist = params.packing.nearest_center(np.array([x]))
        i, d = int(idx[0]), float(dist[0])
        if d >= r:
            return MapResult(a + b * x, depth, 0.0)
        c = complex(centers[i])
        if d >= sigma * r:
            v = c + (d / r) ** exp_in * (x - c)
            return MapResult(a + b * v, depth, 0.0)
        a += b * c
        b *= q
        x = (x - c) / sr
    return MapResult(a, depth_max, 2.0 * q**depth_max)


def phi_inverse(w: complex, params: ConstructionParams, depth_max: int = 32) -> MapResult:
    """Evaluate the inverse map; the radial stretch inverts in closed form.

    Mirrors :func:`phi` with the roles of the two contraction ratios swapped
    and radial exponent ``K - 1`` on the image-side ring
    ``sigma**(1/K)*r <= |w - z_i| < r``.
    """
    if depth_max < 1:
        raise ParameterError(f"depth_max must be >= 1, got {depth_max}")
    centers = params.packing.centers
    r = params.r
    sr, q = params.source_ratio, params.image_ratio
    exp_out = params.K - 1.0
    a, b = 0j, 1 + 0j
    x = complex(w)
    for depth in range(depth_max):
        idx, dist = params.packing.nearest_center(np.array([x]))
        i, d = int(idx[0]), float(dist[0])
        if d >= r:
            return MapResult(a + b * x, depth, 0.0)
        c = complex(centers[i])
        if d >= q:
            v = c + (d / r) ** exp_out * (x - c)
            return MapResult(a + b * v, depth, 0.0)
        a += b * c
        b *= sr
        x = (x - c) / q
    return MapResult(a, depth_max, 2.0 * sr**depth_max)


def jacobian(
    z: complex,
    params: ConstructionParams,
    depth_max: int = 32,
    seam_rtol: float = SEAM_RTOL,
) -> float | None:
    """Jacobian determinant at ``z``, or ``None`` when unresolved.

    Each descent multiplies by ``sigma**(2(1/K - 1))``; the terminal factor is
    1 in the identity region and ``(1/K) * rho**(2(1/K - 1))`` at normalized
    annulus radius ``rho``.  Points within ``seam_rtol`` (relative) of a seam
    circle, or still descending at ``depth_max``, are reported as undefined.
    """
    centers = params.packing.centers
    r, sigma, K = params.r, params.sigma, params.K
    sr = params.source_ratio
    level_factor = sigma ** (2.0 * (1.0 / K - 1.0))
    acc = 1.0
    x = complex(z)
    for _ in range(depth_max):
        idx, dist = params.packing.nearest_center(np.array([x]))
        i, d = int(idx[0]), float(dist[0])
        if abs(d - r) <= seam_rtol * r or abs(d - sigma * r) <= seam_rtol * sigma * r:
            return None
        if d > r:
            return acc
        c = complex(centers[i])
        if d > sigma * r:
            rho = d / r
            return acc * (1.0 / K) * rho ** (2.0 * (1.0 / K - 1.0))
        acc *= level_factor
        x = (x - c) / sr
    return None


# ---------------------------------------------------------------------------
# vectorized evaluation


def phi_batch(
    zs: np.ndarray, params: ConstructionParams, depth_max: int = 32
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`phi`; returns ``(values, depths, err_bounds)``."""
    if depth_max < 1:
        raise ParameterError(f"depth_max must be >= 1, got {depth_max}")
    zs = np.asarray(zs, dtype=np.complex128)
    n = zs.size
    centers = params.packing.centers
    r, sigma = params.r, params.sigma
    sr, q = params.source_ratio, params.image_ratio
    exp_in = 1.0 / params.K - 1.0

    frame = zs.ravel().copy()
    a = np.zeros(n, dtype=np.complex128)
    b = np.ones(n, dtype=np.complex128)
    out = np.empty(n, dtype=np.complex128)
    depth = np.full(n, depth_max, dtype=np.int64)
    err = np.zeros(n, dtype=np.float64)
    active = np.arange(n)

    for level in range(depth_max):
        if active.size == 0:
            break
        x = frame[active]
        idx, d = params.packing.nearest_center(x)
        c = centers[idx]
        inside = d < sigma * r
        annulus = ~inside & (d < r)
        final = ~inside
        if final.any():
            sel = active[final]
            v = x[final].copy()
            ann_local = annulus[final]
            if ann_local.any():
                va = v[ann_local]
                ca = c[final][ann_local]
                rho = d[final][ann_local] / r
                v[ann_local] = ca + rho**exp_in * (va - ca)
            out[sel] = a[sel] + b[sel] * v
            depth[sel] = level
        if inside.any():
            sel = active[inside]
            ci = c[inside]
            a[sel] += b[sel] * ci
            b[sel] *= q
            frame[sel] = (x[inside] - ci) / sr
        active = active[inside]

    if active.size:
        out[active] = a[active]
        err[active] = 2.0 * q**depth_max
    return out.reshape(zs.shape), depth.reshape(zs.shape), err.reshape(zs.shape)


def phi_inverse_batch(
    ws: np.ndarray, params: ConstructionParams, depth_max: int = 32
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`phi_inverse`; returns ``(values, depths, err_bounds)``."""
    if depth_max < 1:
        raise ParameterError(f"depth_max must be >= 1, got {depth_max}")
    ws = np.asarray(ws, dtype=np.complex128)
    n = ws.size
    centers = params.packing.centers
    r = params.r
    sr, q = params.source_ratio, params.image_ratio
    exp_out = params.K - 1.0

    frame = ws.ravel().copy()
    a = np.zeros(n, dtype=np.complex128)
    b = np.ones(n, dtype=np.complex128)
    out = np.empty(n, dtype=np.complex128)
    depth = np.full(n, depth_max, dtype=np.int64)
    err = np.zeros(n, dtype=np.float64)
    active = np.arange(n)

    for level in range(depth_max):
        if active.size == 0:
            break
        x = frame[active]
        idx, d = params.packing.nearest_center(x)
        c = centers[idx]
        inside = d < q
        annulus = ~inside & (d < r)
        final = ~inside
        if final.any():
            sel = active[final]
            v = x[final].copy()
            ann_local = annulus[final]
            if ann_local.any():
                va = v[ann_local]
                ca = c[final][ann_local]
                rho = d[final][ann_local] / r
                v[ann_local] = ca + rho**exp_out * (va - ca)
            out[sel] = a[sel] + b[sel] * v
            depth[sel] = level
        if inside.any():
            sel = active[inside]
            ci = c[inside]
            a[sel] += b[sel] * ci
            b[sel] *= sr
            frame[sel] = (x[inside] - ci) / q
        active = active[inside]

    if active.size:
        out[active] = a[active]
        err[active] = 2.0 * sr**depth_max
    return out.reshape(ws.shape), depth.reshape(ws.shape), err.reshape(ws.shape)


def jacobian_batch(
    zs: np.ndarray,
    params: ConstructionParams,
    depth_max: int = 32,
    seam_rtol: float = SEAM_RTOL,
) -> np.ndarray:
    """Vectorized :func:`jacobian`; unresolved points come back as NaN."""
    zs = np.asarray(zs, dtype=np.complex128)
    n = zs.size
    centers = params.packing.centers
    r, sigma, K = params.r, params.sigma, params.K
    sr = params.source_ratio
    level_factor = sigma ** (2.0 * (1.0 / K - 1.0))

    frame = zs.ravel().copy()
    acc = np.ones(n, dtype=np.float64)
    out = np.full(n, np.nan, dtype=np.float64)
    active = np.arange(n)

    for _ in range(depth_max):
        if active.size == 0:
            break
        x = frame[active]
        idx, d = params.packing.nearest_center(x)
        c = centers[idx]
        seam = (np.abs(d - r) <= seam_rtol * r) | (
            np.abs(d - sigma * r) <= seam_rtol * sigma * r
        )
        outside = (d > r) & ~seam
        annulus = (d > sigma * r) & (d < r) & ~seam
        inside = (d < sigma * r) & ~seam
        if outside.any():
            sel = active[outside]
            out[sel] = acc[sel]
        if annulus.any():
            sel = active[annulus]
            rho = d[annulus] / r
            out[sel] = acc[sel] * (1.0 / K) * rho ** (2.0 * (1.0 / K - 1.0))
        if inside.any():
            sel = active[inside]
            acc[sel] *= level_factor
            frame[sel] = (x[inside] - c[inside]) / sr
        active = active[inside]

    return out.reshape(zs.shape)


def terminal_info(
    zs: np.ndarray, params: ConstructionParams, depth_max: int = 32
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Descent diagnostics per point: ``(depth, frame_distance, branch)``.

    ``frame_distance`` is the nearest-center distance in the terminal frame's
    unit-disk coordinates; ``branch`` is 0 in the identity region, 1 on an
    annulus, 2 when still descending at ``depth_max``.  The gap between
    ``frame_distance`` and the seam radii ``r`` and ``sigma*r`` measures how
    safely a finite-difference stencil fits inside one smooth piece.
    """
    zs = np.asarray(zs, dtype=np.complex128)
    n = zs.size
    r, sigma = params.r, params.sigma
    sr = params.source_ratio
    centers = params.packing.centers

    frame = zs.ravel().copy()
    depth = np.full(n, depth_max, dtype=np.int64)
    fdist = np.zeros(n, dtype=np.float64)
    branch = np.full(n, 2, dtype=np.int64)
    active = np.arange(n)
    for level in range(depth_max):
        if active.size == 0:
            break
        x = frame[active]
        idx, d = params.packing.nearest_center(x)
        inside = d < sigma * r
        final = ~inside
        if final.any():
            sel = active[final]
            depth[sel] = level
            fdist[sel] = d[final]
            branch[sel] = (d[final] < r).astype(np.int64)
        if inside.any():
            sel = active[inside]
            frame[sel] = (x[inside] - centers[idx[inside]]) / sr
        active = active[inside]
    if active.size:
        _, d = params.packing.nearest_center(frame[active])
        fdist[active] = d
    return depth.reshape(zs.shape), fdist.reshape(zs.shape), branch.reshape(zs.shape)


def phi_map_fn(
    params: ConstructionParams, depth_max: int = 40
) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Adapter for samplers that expect ``z -> (values, err_bounds)``."""

    def fn(zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        values, _, err = phi_batch(zs, params, depth_max)
        return values, err

    return fn


# ---------------------------------------------------------------------------
# Jacobian p-mass


@dataclass(frozen=True)
class LpMassReport:
    """Closed-form p-mass of the Jacobian over the unit disk.

    ``partial_sums[k]`` is the mass of the region resolved within ``k + 1``
    generations; each generation contributes ``level_constant * level_ratio**k``
    with ``level_ratio = c_m * sigma**gamma`` (``c_m`` at the critical
    exponent).  The series converges iff ``level_ratio < 1``, i.e.
    ``sigma**gamma < 1/c_m``.
    """

    p: float
    gamma: float
    converges: bool
    total: float
    partial_sums: tuple[float, ...]
    critical: bool
    level_constant: float
    level_ratio: float

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "gamma": self.gamma,
            "converges": self.converges,
            "total": self.total if math.isfinite(self.total) else "inf",
            "partial_sums": list(self.partial_sums),
            "critical": self.critical,
            "level_constant": self.level_constant,
            "level_ratio": self.level_ratio,
        }


def lp_mass_closed_form(
    p: float, params: ConstructionParams, n_max: int = 64
) -> LpMassReport:
    """Exact per-generation p-mass sums and, when convergent, the total.

    The generation constant is ``pi*(1 - c_m)`` from the flat part plus
    ``c_m * (2*pi/K**p) * |(1 - sigma**gamma)/gamma|`` from the annuli, with
    ``gamma = 2p(1/K - 1) + 2``; at ``p = K/(K-1)`` (detected within
    :data:`CRITICAL_P_TOL`) the annulus factor becomes ``log(1/sigma)``.
    """
    if p < 1.0:
        raise ParameterError(f"p must be >= 1, got {p}")
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max}")
    K, sigma, c_m = params.K, params.sigma, params.c_m
    gamma = 2.0 * p * (1.0 / K - 1.0) + 2.0
    critical = K > 1.0 and abs(p - K / (K - 1.0)) <= CRITICAL_P_TOL
    if critical:
        ann = c_m * (2.0 * math.pi / K**p) * math.log(1.0 / sigma)
        ratio = c_m
    else:
        # |(1 - sigma**gamma)/gamma| via expm1 to stay stable near gamma = 0
        ann = c_m * (2.0 * math.pi / K**p) * abs(math.expm1(gamma * math.log(sigma)) / gamma)
        ratio = c_m * sigma**gamma
    level0 = math.pi * (1.0 - c_m) + ann
    partial = []
    acc, term = 0.0, level0
    for _ in range(n_max):
        acc += term
        partial.append(acc)
        term *= ratio
    converges = ratio < 1.0
    total = level0 / (1.0 - ratio) if converges else math.inf
    return LpMassReport(
        p=float(p),
        gamma=gamma,
        converges=converges,
        total=total,
        partial_sums=tuple(partial),
        critical=critical,
        level_constant=level0,
        level_ratio=ratio,
    )


def unresolved_area(params: ConstructionParams, depth: int) -> float:
    """Exact area of the generation-``depth`` generating disks."""
    return math.pi * (params.c_m * params.sigma**2) ** depth


@dataclass(frozen=True)
class LpMassEstimate:
    """Monte Carlo p-mass over the region resolved within ``depth_max`` generations."""

    p: float
    estimate: float
    stderr: float
    samples: int
    depth_max: int
    seed: int
    method: str
    undefined_fraction: float
    excluded_area: float

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "depth_max": self.depth_max,
            "seed": self.seed,
            "method": self.method,
            "undefined_fraction": self.undefined_fraction,
            "excluded_area": self.excluded_area,
        }


def _uniform_disk(rng: np.random.Generator, n: int, radius: float = 1.0) -> np.ndarray:
    rad = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    ang = rng.uniform(0.0, 2.0 * math.pi, n)
    return rad * np.exp(1j * ang)


def _template_points(
    rng: np.random.Generator, n: int, params: ConstructionParams
) -> np.ndarray:
    """Uniform draws from the unit disk minus the generating disks."""
    out = np.empty(n, dtype=np.complex128)
    got = 0
    inner = params.sigma * params.r
    while got < n:
        cand = _uniform_disk(rng, max(256, 2 * (n - got)))
        _, d = params.packing.nearest_center(cand)
        cand = cand[d >= inner]
        take = min(n - got, cand.size)
        out[got : got + take] = cand[:take]
        got += take
    return out


def lp_mass_monte_carlo(
    p: float,
    params: ConstructionParams,
    samples: int,
    depth_max: int,
    seed: int,
    method: str = "stratified",
) -> LpMassEstimate:
    """Unbiased Monte Carlo estimate of the resolved p-mass.

    ``method="uniform"`` samples the unit disk directly and reports the
    fraction of draws landing in unresolved territory.  ``method="stratified"``
    samples each generation's congruence class separately (a uniform template
    point pushed through a random chain of source similarities), which removes
    the between-generation variance; the Jacobian itself is still evaluated
    through the production recursion.  Unresolved or seam draws are excluded
    and their exact total area is reported.
    """
    if samples < 1:
        raise ParameterError(f"samples must be >= 1, got {samples}")
    if p < 1.0:
        raise ParameterError(f"p must be >= 1, got {p}")
    if depth_max < 1:
        raise ParameterError(f"depth_max must be >= 1, got {depth_max}")
    excluded = unresolved_area(params, depth_max)

    if method == "uniform":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        z = _uniform_disk(rng, samples)
        jac = jacobian_batch(z, params, depth_max)
        defined = np.isfinite(jac)
        vals = np.where(defined, jac, 0.0) ** p * defined
        estimate = math.pi * float(vals.mean())
        stderr = math.pi * float(vals.std(ddof=1)) / math.sqrt(samples)
        return LpMassEstimate(
            p=float(p),
            estimate=estimate,
            stderr=stderr,
            samples=samples,
            depth_max=depth_max,
            seed=seed,
            method=method,
            undefined_fraction=1.0 - float(defined.mean()),
            excluded_area=excluded,
        )

    if method != "stratified":
        raise ParameterError(f"unknown method {method!r}, expected 'uniform' or 'stratified'")

    m = params.m
    sr = params.source_ratio
    centers = params.packing.centers
    template_area = math.pi * (1.0 - params.c_m * params.sigma**2)
    base = samples // depth_max
    extra = samples % depth_max
    seq = np.random.SeedSequence(seed)
    streams = seq.spawn(depth_max)

    estimate = 0.0
    variance = 0.0
    n_undefined = 0
    for k in range(depth_max):
        n_k = base + (1 if k < extra else 0)
        if n_k == 0:
            continue
        rng = np.random.default_rng(streams[k])
        u = _template_points(rng, n_k, params)
        if k > 0:
            digits = rng.integers(0, m, size=(n_k, k))
            a = np.zeros(n_k, dtype=np.complex128)
            scale = 1.0
            for j in range(k):
                a += scale * centers[digits[:, j]]
                scale *= sr
            z = a + scale * u
        else:
            z = u
        jac = jacobian_batch(z, params, depth_max)
        defined = np.isfinite(jac)
        n_undefined += int((~defined).sum())
        vals = np.where(defined, jac, 0.0) ** p * defined
        area_k = template_area * (params.c_m * params.sigma**2) ** k
        estimate += area_k * float(vals.mean())
        variance += (area_k**2) * float(vals.var(ddof=1)) / n_k if n_k > 1 else 0.0
    return LpMassEstimate(
        p=float(p),
        estimate=estimate,
        stderr=math.sqrt(variance),
        samples=samples,
        depth_max=depth_max,
        seed=seed,
        method=method,
        undefined_fraction=n_undefined / samples,
        excluded_area=excluded,
    )


# ---------------------------------------------------------------------------
# glued map


@dataclass(frozen=True)
class GluedPiece:
    """One rescaled copy of the construction living on a host disk."""

    host: Disk
    params: ConstructionParams


@dataclass(frozen=True, eq=False)
class GluedMapSpec:
    """A countable-family gluing: identity off the hosts, rescaled maps on them."""

    pieces: tuple[GluedPiece, ...]

    @property
    def t(self) -> float:
        return self.pieces[0].params.t

    @property
    def K(self) -> float:
        return self.pieces[0].params.K

    def holder_constants(self) -> tuple[float, ...]:
        """Per-piece constants ``m**(1/t - 1/t') * r**(1 - t/t')``."""
        out = []
        for piece in self.pieces:
            pr = piece.params
            out.append(
                pr.m ** (1.0 / pr.t - 1.0 / pr.t_prime)
                * piece.host.radius ** (1.0 - pr.t / pr.t_prime)
            )
        return tuple(out)

    def to_json_dict(self) -> dict:
        return {
            "t": self.t,
            "K": self.K,
            "pieces": [
                {
                    "host_center": [piece.host.center.real, piece.host.center.imag],
                    "host_radius": piece.host.radius,
                    "m": piece.params.m,
                    "dim_image": piece.params.dim_image,
                    "epsilon": piece.params.t_prime - piece.params.dim_image,
                    "holder_constant": const,
                }
                for piece, const in zip(self.pieces, self.holder_constants())
            ],
        }


def make_glued_spec(pieces: Sequence[GluedPiece]) -> GluedMapSpec:
    """Validate and freeze a glued-map specification.

    Hosts must be pairwise disjoint closed disks inside the unit disk, every
    piece must satisfy ``m_j * r_j**t < 1`` (equivalently a sub-unit Hölder
    constant when the dimensions genuinely move), and the dimension deficits
    ``eps_j = t' - dim_image_j`` must decrease along the list.
    """
    if not pieces:
        raise ParameterError("glued map needs at least one piece")
    pieces = tuple(pieces)
    t, K = pieces[0].params.t, pieces[0].params.K
    for piece in pieces:
        if abs(piece.params.t - t) > 1e-12 or abs(piece.params.K - K) > 1e-12:
            raise ParameterError("all glued pieces must share the same (t, K)")
        host = piece.host
        if abs(host.center) + host.radius >= 1.0:
            raise ParameterError(
                f"host disk D({host.center}, {host.radius}) is not inside the unit disk"
            )
        mr_t = piece.params.m * host.radius**t
        if mr_t >= 1.0:
            raise ParameterError(
                f"piece violates m_j * r_j**t < 1: got {mr_t:.6g} "
                f"(m={piece.params.m}, r={host.radius})"
            )
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            hi, hj = pieces[i].host, pieces[j].host
            if abs(hi.center - hj.center) <= hi.radius + hj.radius:
                raise ParameterError(f"host disks {i} and {j} overlap")
    spec = GluedMapSpec(pieces=pieces)
    eps = [p.params.t_prime - p.params.dim_image for p in pieces]
    for e in eps:
        if not e >= 0.0:
            raise ParameterError(f"dimension deficit must be nonnegative, got {e}")
    for e0, e1 in zip(eps, eps[1:]):
        if not e1 < e0:
            raise ParameterError(
                f"dimension deficits must decrease along the list, got {e0} -> {e1}"
            )
    t_prime = pieces[0].params.t_prime
    if t_prime > t + 1e-12:
        for const in spec.holder_constants():
            if const >= 1.0:
                raise ParameterError(
                    f"piece Hölder constant m**(1/t - 1/t') * r**(1 - t/t') = "
                    f"{const:.6g} is not < 1"
                )
    return spec


def glued_map(z: complex, spec: GluedMapSpec, depth_max: int = 32) -> MapResult:
    """Evaluate the glued map: ``z_j + r_j * phi_j((z - z_j)/r_j)`` on host ``j``."""
    for piece in spec.pieces:
        host = piece.host
        if abs(z - host.center) < host.radius:
            res = phi((z - host.center) / host.radius, piece.params, depth_max)
            return MapResult(
                host.center + host.radius * res.value,
                res.depth,
                host.radius * res.err_bound,
            )
    return MapResult(complex(z), 0, 0.0)
