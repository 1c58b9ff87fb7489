"""Ring ranges, the layer-shrink schedule, and epsilon-net construction.

A subset A of a base set is an epsilon-net for the ring range family when
every "heavy" ring (one containing at least ceil(eps * |base|) base points)
contains at least one point of A. Verification against the full ring family
is intractable, so heavy rings are sampled at random and a candidate subset
is accepted when it hits all of them.

All distances here are computed in float64 so that a ring built from sorted
distance ranks contains exactly the points it was built around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Metric, PointSet, point_distances
from .errors import ConstructionFailure


@dataclass(frozen=True)
class RingRange:
    """Points x with r1 <= dist(x, center) <= r2, boundaries included."""

    center: np.ndarray
    r1: float
    r2: float

    def __post_init__(self):
        if self.r1 < 0 or self.r2 < self.r1:
            raise ValueError("ring requires 0 <= r1 <= r2")


@dataclass(frozen=True)
class EpsNetParams:
    """Knobs for net construction and verification.

    c0 scales the shrink schedule (and thereby how heavy a verification
    ring must be); m is the exponential decay, each layer ~2^m times
    smaller; phi is the per-trial failure probability the sample size
    formula targets; r_ranges is the number of sampled verification
    rings; max_trials caps the Las-Vegas retry loop. Logarithms are
    base 2 throughout, matching the 2^m layer arithmetic.
    """

    c0: float = 1.0
    m: int = 1
    phi: float = 0.5
    r_ranges: int = 64
    max_trials: int = 32

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 < self.phi < 1:
            raise ValueError("phi must be in (0, 1)")
        if self.r_ranges < 1:
            raise ValueError("r_ranges must be >= 1")
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")


@dataclass
class RangeBattery:
    """Sampled heavy rings plus their recounted base-set weights."""

    rings: list[RingRange]
    weights: list[int]
    threshold: int = field(default=1)

    def __len__(self) -> int:
        return len(self.rings)


def ring_contains(ring: RingRange, x: np.ndarray, metric: Metric) -> bool:
    """Boundary-inclusive membership test for a single point."""
    d = float(
        point_distances(
            metric,
            np.asarray(ring.center, dtype=np.float64)[None, :],
            np.asarray(x, dtype=np.float64).reshape(-1),
        )[0]
    )
    return ring.r1 <= d <= ring.r2


def epsilon_of(s: int, d: int, params: EpsNetParams) -> float:
    """Shrink-schedule epsilon for a layer of size s in dimension d.

    c0 * d * log2(s) / s * 2^m, clamped into (0, 1].
    """
    if s < 2:
        raise ValueError("layer size must be >= 2")
    raw = params.c0 * d * (math.log2(s) / s) * (2.0**params.m)
    return min(raw, 1.0)


def sample_size(eps: float, vc_dim: float, phi: float) -> int:
    """Random-sample size sufficient for an eps-net at failure probability phi.

    ceil((1/eps) * log2(1/phi) + (vc_dim/eps) * log2(vc_dim/eps)).
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    if not 0 < phi < 1:
        raise ValueError("phi must be in (0, 1)")
    if vc_dim < 1:
        raise ValueError("vc_dim must be >= 1")
    ratio = vc_dim / eps
    return math.ceil((1.0 / eps) * math.log2(1.0 / phi) + ratio * math.log2(ratio))


def heavy_weight(eps: float, base_size: int) -> int:
    """Minimum base-point count that makes a ring heavy: ceil(eps * |base|)."""
    return math.ceil(eps * base_size)


def sample_heavy_rings(
    ps: PointSet,
    base_ids: np.ndarray,
    eps: float,
    r_ranges: int,
    metric: Metric,
    rng: np.random.Generator,
) -> RangeBattery:
    """Draw r_ranges rings, each heavy by construction.

    Each ring is centered at a uniform random base point; its radii span a
    uniform random window of ceil(eps * |base|) consecutive ranks in the
    sorted distances from the center to all base points, so the ring holds
    at least that many base points (more under distance ties).
    """
    base_ids = np.asarray(base_ids)
    s = len(base_ids)
    w = heavy_weight(eps, s)
    if w < 1:
        raise ValueError("eps too small: heavy weight must be >= 1")
    if w > s:
        raise ValueError(f"eps={eps} demands {w} points from a base of {s}")
    base = ps.data[base_ids].astype(np.float64)
    rings: list[RingRange] = []
    weights: list[int] = []
    for _ in range(r_ranges):
        center = base[rng.integers(s)]
        dists = np.sort(point_distances(metric, base, center))
        j = int(rng.integers(s - w + 1))
        ring = RingRange(center=center, r1=float(dists[j]), r2=float(dists[j + w - 1]))
        rings.append(ring)
        weights.append(int(np.count_nonzero((dists >= ring.r1) & (dists <= ring.r2))))
    return RangeBattery(rings=rings, weights=weights, threshold=w)


def is_eps_net(
    candidate_ids: np.ndarray,
    battery: RangeBattery,
    ps: PointSet,
    metric: Metric,
) -> bool:
    """True iff the candidate subset hits every ring in the battery."""
    candidate_ids = np.asarray(candidate_ids)
    if len(candidate_ids) == 0:
        return len(battery) == 0
    pts = ps.data[candidate_ids].astype(np.float64)
    for ring in battery.rings:
        d = point_distances(metric, pts, np.asarray(ring.center, dtype=np.float64))
        if not np.any((d >= ring.r1) & (d <= ring.r2)):
            return False
    return True


def _sample_unique(
    base_ids: np.ndarray, target: int, rng: np.random.Generator
) -> np.ndarray:
    """target distinct ids: with-replacement draw, dedup, top up as needed."""
    chosen = np.unique(rng.choice(base_ids, size=target, replace=True))
    rounds = 0
    while len(chosen) < target and rounds < 16:
        extra = rng.choice(base_ids, size=target - len(chosen), replace=True)
        chosen = np.unique(np.concatenate([chosen, extra]))
        rounds += 1
    if len(chosen) < target:
        unused = np.setdiff1d(base_ids, chosen)
        fill = rng.permutation(unused)[: target - len(chosen)]
        chosen = np.unique(np.concatenate([chosen, fill]))
    return chosen


def build_eps_net_sampling(
    ps: PointSet,
    base_ids: np.ndarray,
    eps: float,
    params: EpsNetParams,
    metric: Metric,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    """Las-Vegas net construction: sample, verify against fresh rings, repeat.

    Target size is ceil(|base| / 2^m) (the decay schedule), capped at |base|.
    Each trial uses its own child RNG stream, so the accepted subset depends
    only on the trial index regardless of evaluation order. Returns (sorted
    id subset, trials used); raises ConstructionFailure past max_trials.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    base_ids = np.asarray(base_ids)
    s = len(base_ids)
    if s == 0:
        raise ValueError("base must be nonempty")
    if s == 1:
        return base_ids.copy(), 1
    target = min(s, math.ceil(s / 2.0**params.m))
    root = int(rng.integers(np.iinfo(np.int64).max))
    for trial in range(1, params.max_trials + 1):
        trial_rng = np.random.default_rng([root, trial])
        candidate = _sample_unique(base_ids, target, trial_rng)
        battery = sample_heavy_rings(ps, base_ids, eps, params.r_ranges, metric, trial_rng)
        if is_eps_net(candidate, battery, ps, metric):
            return candidate, trial
    raise ConstructionFailure(
        f"no eps-net found in {params.max_trials} trials (eps={eps:.4g}, base={s})",
        trials=params.max_trials,
    )


def build_eps_net_halving(
    base_ids: np.ndarray, m: int, rng: np.random.Generator
) -> np.ndarray:
    """Discrepancy-style construction: m rounds of matching and halving.

    Each round shuffles the survivors, pairs them consecutively (one odd
    survivor passes through), and keeps one uniformly random endpoint per
    pair. Output size is exactly ceil(|base| / 2^m).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    base_ids = np.asarray(base_ids)
    if len(base_ids) < 2**m:
        raise ValueError(f"base of {len(base_ids)} cannot be halved {m} times")
    current = base_ids.copy()
    for _ in range(m):
        current = rng.permutation(current)
        pairs = len(current) // 2
        picks = rng.integers(0, 2, size=pairs)
        kept = current[: 2 * pairs].reshape(pairs, 2)[np.arange(pairs), picks]
        if len(current) % 2 == 1:
            kept = np.append(kept, current[-1])
        current = kept
    return np.sort(current)
