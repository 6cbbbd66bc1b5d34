"""Nonremovability counterexample: a discrete growth measure on the image
Cantor set, its Cauchy transform, and the composed map evaluator.

A dimension ``t`` above the removability threshold ``2(1 + alpha*K)/(1 + K)``
leaves room for an epsilon satisfying

    t - 2(1 + alpha*K)/(1 + K) >= epsilon * 2/(K + 1) * (2 + (K - 1) t),

in which case the Cauchy transform of a measure with growth ``t' - 2 eps`` on
the image set, composed with the quasiconformal map, is Hölder continuous
with exponent ``(t' - 2 eps - 1) * t/t' >= alpha`` while failing to extend
quasiregularly across the source set.  The measure here is the uniform
self-similar measure discretized at generation ``N``; its growth is
certified only down to the generation disk radius (the scale floor carried
in every report).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    ENUMERATION_CAP,
    ConstructionParams,
    ParameterError,
    build_packing,
    derive_params,
    generation_centers,
)
from .qcmap import phi, phi_batch
from .verify import HolderConfig, HolderReport, holder_estimate

#: Hexagonal layouts with complete rings, used when auto-selecting m.
CENTERED_HEX_LADDER = tuple(1 + 3 * k * (k + 1) for k in range(1, 26))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms with a power-law growth certificate.

    ``measure(B(z, rho)) <= growth_constant * rho**growth_exponent`` was
    checked on sampled balls with ``rho >= resolution``; nothing is claimed
    below that scale floor.
    """

    positions: np.ndarray
    weights: np.ndarray
    resolution: float
    growth_exponent: float
    growth_constant: float

    def __post_init__(self) -> None:
        positions = np.ascontiguousarray(self.positions, dtype=np.complex128)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        positions.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "weights", weights)
        if positions.shape != weights.shape:
            raise ParameterError("positions and weights must have matching shapes")
        if not (weights > 0).all():
            raise ParameterError("all atom weights must be positive")

    @property
    def count(self) -> int:
        return self.positions.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(np.column_stack([self.positions.real, self.positions.imag]))

    def ball_mass(self, center: complex, radius: float) -> float:
        """Mass of the closed ball ``B(center, radius)``."""
        idx = self._tree.query_ball_point([center.real, center.imag], radius)
        return float(self.weights[idx].sum())

    def nearest_atom_distance(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=np.complex128)
        d, _ = self._tree.query(np.column_stack([zs.real, zs.imag]))
        return d

    def growth_ratio(self, centers: np.ndarray, radii: np.ndarray) -> float:
        """Max of ``mass(B)/rho**s`` over all (center, radius) combinations."""
        best = 0.0
        pts = np.column_stack([np.asarray(centers).real, np.asarray(centers).imag])
        for rho in np.asarray(radii, dtype=float):
            counts = self._tree.query_ball_point(pts, rho, return_length=True)
            # uniform weights: mass = count * w; stay general via weight lookup
            if np.unique(self.weights).size == 1:
                masses = counts * float(self.weights[0])
            else:
                masses = np.array(
                    [
                        float(self.weights[self._tree.query_ball_point(p, rho)].sum())
                        for p in pts
                    ]
                )
            best = max(best, float(masses.max()) / rho**self.growth_exponent)
        return best

    def to_json_dict(self) -> dict:
        return {
            "count": self.count,
            "resolution": self.resolution,
            "growth_exponent": self.growth_exponent,
            "growth_constant": self.growth_constant,
            "atoms": [
                [float(p.real), float(p.imag), float(w)]
                for p, w in zip(self.positions, self.weights)
            ],
        }


def frostman_measure(
    params: ConstructionParams,
    N: int,
    growth_delta: float = 0.05,
    ball_samples: int = 200,
    n_radii: int = 12,
    seed: int = 0,
    cap: int = ENUMERATION_CAP,
) -> DiscreteMeasure:
    """Uniform atoms on the generation-``N`` image centers, with growth certificate.

    Weights are ``m**-N`` each; the certificate exponent is
    ``dim_image - growth_delta`` and the constant is the observed maximum of
    ``mass(B)/rho**s`` over balls centered at sampled atoms and random points,
    with radii log-spaced between the resolution and 2.
    """
    if growth_delta <= 0:
        raise ParameterError(f"growth_delta must be positive, got {growth_delta}")
    s = params.dim_image - growth_delta
    if s <= 0:
        raise ParameterError(f"growth exponent {s} must be positive")
    centers = generation_centers(N, "image", params, cap=cap)
    weights = np.full(centers.size, float(params.m) ** (-N))
    resolution = params.image_radius(N)
    measure = DiscreteMeasure(
        positions=centers,
        weights=weights,
        resolution=resolution,
        growth_exponent=s,
        growth_constant=math.nan,
    )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n_atoms = min(ball_samples, centers.size)
    picked = centers[rng.choice(centers.size, size=n_atoms, replace=False)]
    rad = np.sqrt(rng.uniform(0.0, 1.0, ball_samples))
    ang = rng.uniform(0.0, 2.0 * math.pi, ball_samples)
    random_centers = rad * np.exp(1j * ang)
    ball_centers = np.concatenate([picked, random_centers])
    radii = np.geomspace(resolution, 2.0, n_radii)
    constant = measure.growth_ratio(ball_centers, radii)
    return DiscreteMeasure(
        positions=centers,
        weights=weights,
        resolution=resolution,
        growth_exponent=s,
        growth_constant=constant,
    )


# ---------------------------------------------------------------------------
# Cauchy transform


def cauchy_transform_batch(
    measure: DiscreteMeasure, zs: np.ndarray, chunk: int = 1 << 22
) -> tuple[np.ndarray, np.ndarray]:
    """``(1/pi) * sum_k w_k / (z - p_k)`` with a near-atom flag per point.

    Points closer than half the resolution to some atom are flagged: there the
    discrete transform no longer approximates its continuous limit.
    """
    zs = np.asarray(zs, dtype=np.complex128)
    flat = zs.ravel()
    values = np.zeros(flat.size, dtype=np.complex128)
    n_atoms = measure.count
    z_chunk = max(1, chunk // max(n_atoms, 1))
    for start in range(0, flat.size, z_chunk):
        block = flat[start : start + z_chunk]
        values[start : start + z_chunk] = (
            measure.weights[None, :] / (block[:, None] - measure.positions[None, :])
        ).sum(axis=1)
    values /= math.pi
    flagged = measure.nearest_atom_distance(flat) < measure.resolution / 2.0
    return values.reshape(zs.shape), flagged.reshape(zs.shape)


def cauchy_transform(measure: DiscreteMeasure, z: complex) -> complex:
    """Scalar Cauchy transform (see :func:`cauchy_transform_batch` for flags)."""
    values, _ = cauchy_transform_batch(measure, np.array([z]))
    return complex(values[0])


# ---------------------------------------------------------------------------
# counterexample assembly


def removability_threshold(alpha: float, K: float) -> float:
    """Dimension below which Hölder-``alpha`` quasiregular removability holds."""
    return 2.0 * (1.0 + alpha * K) / (1.0 + K)


def max_admissible_epsilon(alpha: float, K: float, t: float) -> float:
    """Largest epsilon with ``t - threshold >= eps * 2/(K+1) * (2 + (K-1)t)``."""
    return (t - removability_threshold(alpha, K)) * (K + 1.0) / (2.0 * (2.0 + (K - 1.0) * t))


@dataclass(frozen=True, eq=False)
class CounterexampleSpec:
    """A built counterexample: parameters, measure, and the composed evaluator."""

    alpha: float
    K: float
    t: float
    epsilon: float
    expected_f_exponent: float
    params: ConstructionParams
    measure: DiscreteMeasure
    depth_max: int

    def g_batch(self, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return cauchy_transform_batch(self.measure, zs)

    def f_batch(self, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``f = g o phi`` on an array; returns values and near-atom flags."""
        w, _, _ = phi_batch(np.asarray(zs, dtype=np.complex128), self.params, self.depth_max)
        return cauchy_transform_batch(self.measure, w)

    def f(self, z: complex) -> complex:
        return cauchy_transform(self.measure, phi(z, self.params, self.depth_max).value)

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "K": self.K,
            "t": self.t,
            "epsilon": self.epsilon,
            "expected_f_exponent": self.expected_f_exponent,
            "m": self.params.m,
            "dim_image": self.params.dim_image,
            "t_prime": self.params.t_prime,
            "scale_floor": self.measure.resolution,
            "atom_count": self.measure.count,
            "depth_max": self.depth_max,
        }


def build_counterexample(
    alpha: float,
    K: float,
    t: float,
    N: int = 2,
    depth_max: int = 40,
    m: int | None = None,
    sigma_max: float = 0.995,
    cap: int = ENUMERATION_CAP,
    seed: int = 0,
) -> CounterexampleSpec:
    """Assemble the counterexample for Hölder-``alpha`` nonremovability at dimension ``t``.

    Rejects ``t`` at or below the removability threshold
    ``2(1 + alpha*K)/(1 + K)``.  Epsilon is half the maximal admissible value;
    ``m`` (when not given) is the smallest complete-ring hexagonal count whose
    layout yields ``sigma <= sigma_max`` and an image-dimension deficit at most
    epsilon, so the discrete measure's growth exponent ``t' - 2 eps`` stays
    below the achieved dimension.
    """
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    threshold = removability_threshold(alpha, K)
    if not t > threshold:
        raise ParameterError(
            f"t = {t} must exceed the removability threshold "
            f"2(1 + alpha*K)/(1 + K) = {threshold:.6g}; below it every such set is removable"
        )
    epsilon = 0.5 * max_admissible_epsilon(alpha, K, t)

    def try_m(candidate: int) -> ConstructionParams | None:
        if candidate**N > cap:
            return None
        packing = build_packing(candidate)
        try:
            params = derive_params(t, K, packing)
        except ParameterError:
            return None
        if params.sigma > sigma_max:
            return None
        if params.t_prime - params.dim_image > epsilon:
            return None
        return params

    params = None
    if m is not None:
        params = try_m(m)
        if params is None:
            raise ParameterError(
                f"m = {m} does not satisfy sigma <= {sigma_max}, deficit <= {epsilon:.6g} "
                f"and m**N <= {cap} for (alpha, K, t) = ({alpha}, {K}, {t})"
            )
    else:
        for candidate in CENTERED_HEX_LADDER:
            params = try_m(candidate)
            if params is not None:
                break
        if params is None:
            raise ParameterError(
                f"no ladder layout up to m = {CENTERED_HEX_LADDER[-1]} meets "
                f"sigma <= {sigma_max} and deficit <= {epsilon:.6g} at t = {t}"
            )

    growth_target = params.t_prime - 2.0 * epsilon
    growth_delta = params.dim_image - growth_target
    measure = frostman_measure(params, N, growth_delta=growth_delta, seed=seed, cap=cap)
    expected = (params.t_prime - 2.0 * epsilon - 1.0) * t / params.t_prime
    return CounterexampleSpec(
        alpha=float(alpha),
        K=float(K),
        t=float(t),
        epsilon=epsilon,
        expected_f_exponent=expected,
        params=params,
        measure=measure,
        depth_max=depth_max,
    )


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class CounterexampleReport:
    alpha: float
    K: float
    t: float
    epsilon: float
    expected_f_exponent: float
    measured_exponent: float
    max_ratio: float
    dbar_max: float
    residue_error: float
    residue_error_near: float
    flagged_pairs: int
    scale_floor: float

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "K": self.K,
            "t": self.t,
            "epsilon": self.epsilon,
            "expected_f_exponent": self.expected_f_exponent,
            "measured_exponent": self.measured_exponent,
            "max_ratio": self.max_ratio,
            "dbar_max": self.dbar_max,
            "residue_error": self.residue_error,
            "residue_error_near": self.residue_error_near,
            "flagged_pairs": self.flagged_pairs,
            "scale_floor": self.scale_floor,
        }


def _f_map_fn(spec: CounterexampleSpec):
    def fn(zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        values, flagged = spec.f_batch(zs)
        err = np.where(flagged, math.inf, 0.0)
        return values, err

    return fn


def dbar_max(
    spec: CounterexampleSpec, grid: int = 40, margin_factor: float = 2.0
) -> float:
    """Max finite-difference d-bar of the transform away from the atoms.

    Central differences on a square grid restricted to points at least
    ``margin_factor * resolution`` from every atom, with per-point step
    ``min(distance/1000, 2e-6)`` balancing truncation against round-off;
    holomorphy off the support should drive this to zero.
    """
    axis = np.linspace(-1.1, 1.1, grid)
    zs = (axis[:, None] + 1j * axis[None, :]).ravel()
    dist = spec.measure.nearest_atom_distance(zs)
    keep = dist >= margin_factor * spec.measure.resolution
    zs, dist = zs[keep], dist[keep]
    h = np.minimum(dist / 1000.0, 2e-6)
    gxp, _ = cauchy_transform_batch(spec.measure, zs + h)
    gxm, _ = cauchy_transform_batch(spec.measure, zs - h)
    gyp, _ = cauchy_transform_batch(spec.measure, zs + 1j * h)
    gym, _ = cauchy_transform_batch(spec.measure, zs - 1j * h)
    fx = (gxp - gxm) / (2.0 * h)
    fy = (gyp - gym) / (2.0 * h)
    dbar = 0.5 * (fx + 1j * fy)
    return float(np.abs(dbar).max())


def residue_error(spec: CounterexampleSpec, radius: float, n_points: int = 64) -> float:
    """Max of ``|z*g(z) - 1/pi|`` over a circle; a nonzero residue at infinity
    is the witness that the transform has no entire extension."""
    ang = np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)
    zs = radius * np.exp(1j * ang)
    g, _ = cauchy_transform_batch(spec.measure, zs)
    return float(np.abs(zs * g - 1.0 / math.pi).max())


def verify_counterexample(
    spec: CounterexampleSpec,
    seed: int = 0,
    holder_config: HolderConfig | None = None,
) -> CounterexampleReport:
    """Measure the three claims: Hölder continuity of ``f``, holomorphy of the
    transform off the support, and the nonzero residue at infinity."""
    if holder_config is None:
        holder_config = HolderConfig(
            params=spec.params,
            n_uniform=2000,
            n_stratified=6000,
            adversarial_depth=4,
            adversarial_per_generation=300,
            adversarial_offset=0.37 + 0.21j,
            annulus_levels=1,
            annulus_disks=8,
        )
    report: HolderReport = holder_estimate(
        _f_map_fn(spec), spec.alpha, holder_config, seed=seed
    )
    return CounterexampleReport(
        alpha=spec.alpha,
        K=spec.K,
        t=spec.t,
        epsilon=spec.epsilon,
        expected_f_exponent=spec.expected_f_exponent,
        measured_exponent=report.regression_exponent,
        max_ratio=report.max_ratio,
        dbar_max=dbar_max(spec),
        residue_error=residue_error(spec, 100.0),
        residue_error_near=residue_error(spec, 10.0),
        flagged_pairs=report.excluded_pairs,
        scale_floor=spec.measure.resolution,
    )
