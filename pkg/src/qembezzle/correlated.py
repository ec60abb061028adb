"""Correlated-catalyst baseline and the qutrit region map.

The baseline bound maximises the teleportation fidelity over pure targets
whose reduced entropy does not exceed the input's, which is the guarantee
an arbitrarily large correlated catalyst provides. Coordinates are squared
Schmidt coefficients on the probability simplex, one point per state up to
local unitaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .embezzle import extraction_fidelity_bound, schmidt_rank_for_fidelity
from .errors import DomainError
from .qstates import SchmidtVector

_ENTROPY_SLACK = 1e-12


class RegionLabel(str, Enum):
    ALREADY_ABOVE = "already_above"
    CORRELATED_BOOSTABLE = "correlated_boostable"
    NOT_GUARANTEED = "not_guaranteed"
    EMBEZZLING_BOOSTABLE = "embezzling_boostable"


def _as_probs(probs) -> np.ndarray:
    p = probs.probs if isinstance(probs, SchmidtVector) else np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("probability vector must be a nonempty 1-D array")
    if np.any(p < -1e-12) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise DomainError("probabilities must be nonnegative and sum to 1")
    return np.clip(p, 0.0, None)


def shannon_entropy(probs) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = _as_probs(probs)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def pure_state_fraction(probs) -> float:
    """Entanglement fraction of a pure state after optimal local alignment."""
    p = _as_probs(probs)
    s = float(np.sum(np.sqrt(p)))
    return s * s / p.size


def pure_average_fidelity(probs, d: int) -> float:
    """Average teleportation fidelity of a Schmidt-diagonal pure resource."""
    p = _as_probs(probs)
    if p.size != d:
        raise DomainError(f"expected a length-{d} vector, got {p.size}")
    s = float(np.sum(np.sqrt(p)))
    return (s * s + 1.0) / (d + 1.0)


def _objective(p: np.ndarray) -> float:
    s = float(np.sum(np.sqrt(np.clip(p, 0.0, None))))
    return s * s


def _entropy_rows(rows: np.ndarray) -> np.ndarray:
    safe = np.where(rows > 0, rows, 1.0)
    return -np.sum(rows * np.log2(safe), axis=1)


def _objective_rows(rows: np.ndarray) -> np.ndarray:
    return np.sum(np.sqrt(np.clip(rows, 0.0, None)), axis=1) ** 2


def _simplex_grid(d: int, resolution: int) -> np.ndarray:
    """All compositions of ``resolution`` into d parts, as probability rows."""
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        i = np.arange(resolution + 1)
        return np.stack([i, resolution - i], axis=1) / resolution
    if d == 3:
        i, j = np.meshgrid(np.arange(resolution + 1), np.arange(resolution + 1), indexing="ij")
        mask = i + j <= resolution
        i, j = i[mask], j[mask]
        return np.stack([i, j, resolution - i - j], axis=1) / resolution
    rows = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            rows.append(prefix + [remaining])
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v, slots - 1)

    rec([], resolution, d)
    return np.asarray(rows, dtype=float) / resolution


def _pattern_refine(
    start: np.ndarray, budget: float, step0: float, step_floor: float = 1e-7
) -> tuple[np.ndarray, float]:
    """Pairwise-transfer pattern search on the entropy-capped simplex."""
    cur = np.asarray(start, dtype=float).copy()
    best = _objective(cur)
    step = step0
    d = cur.size
    while step > step_floor:
        improved = False
        for i in range(d):
            if cur[i] <= 0:
                continue
            for j in range(d):
                if i == j:
                    continue
                t = min(step, cur[i])
                cand = cur.copy()
                cand[i] -= t
                cand[j] += t
                if shannon_entropy(cand) > budget + _ENTROPY_SLACK:
                    continue
                val = _objective(cand)
                if val > best + 1e-15:
                    cur, best = cand, val
                    improved = True
        if not improved:
            step /= 2.0
    return cur, best


def _two_level_entropy(a: float, r: int, dd: int) -> float:
    """Entropy of (a x r, b x (dd - r)) with b filling the remaining mass."""
    b = (1.0 - r * a) / (dd - r)
    total = 0.0
    if a > 0:
        total -= r * a * math.log2(a)
    if b > 0:
        total -= (dd - r) * b * math.log2(b)
    return total


def _entropy_capped_max(d: int, budget: float) -> float:
    """Exact maximum of (sum sqrt mu)^2 subject to S(mu) <= budget.

    At a maximiser the strictly positive coordinates take at most two
    distinct values, so it suffices to scan, on every face of the simplex,
    the one-dimensional two-level families and solve S = budget on each by
    bisection (entropy decreases monotonically away from the face-uniform
    point along these families).
    """
    best = 1.0  # a deterministic corner is always feasible
    for dd in range(2, d + 1):
        if math.log2(dd) <= budget + _ENTROPY_SLACK:
            best = max(best, float(dd))  # face-uniform point
            continue
        for r in range(1, dd):
            if math.log2(r) > budget + _ENTROPY_SLACK:
                continue
            lo, hi = 1.0 / dd, 1.0 / r - 1e-16
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                if _two_level_entropy(mid, r, dd) > budget:
                    lo = mid
                else:
                    hi = mid
            a = hi
            b = (1.0 - r * a) / (dd - r)
            # A vanishing second level duplicates a lower-dimensional face.
            if b < 1e-12 or _two_level_entropy(a, r, dd) > budget + _ENTROPY_SLACK:
                continue
            val = (r * math.sqrt(a) + (dd - r) * math.sqrt(b)) ** 2
            best = max(best, val)
    return best


def correlated_fidelity_bound(probs, d: int, grid: int = 200) -> float:
    """Best average fidelity certified for an unbounded correlated catalyst.

    Maximises the pure-state fidelity over same-dimension targets whose
    Shannon entropy stays within the input's: simplex grid search, then
    refinement by pairwise-transfer descent and by solving the two-level
    stationarity families on the entropy level set. The input itself is
    always feasible, so the result never falls below its unassisted
    fidelity.
    """
    if grid < 100:
        raise DomainError(f"grid must be >= 100, got {grid}")
    p = _as_probs(probs)
    if p.size != d:
        raise DomainError(f"expected a length-{d} vector, got {p.size}")
    budget = shannon_entropy(p)
    pts = _simplex_grid(d, grid)
    feasible = pts[_entropy_rows(pts) <= budget + _ENTROPY_SLACK]
    cands = np.vstack([feasible, p[None, :]])
    values = _objective_rows(cands)
    starts = cands[np.argsort(values)[-3:]]
    best = _objective(p)
    for start in starts:
        _, val = _pattern_refine(start, budget, step0=1.0 / grid)
        best = max(best, val)
    best = max(best, _entropy_capped_max(d, budget))
    return (best + 1.0) / (d + 1.0)


@dataclass(frozen=True)
class RegionPoint:
    weights: tuple[float, ...]
    fidelity: float
    correlated_bound: float
    label_correlated: RegionLabel
    label_embezzling: RegionLabel
    rank_required: int


@dataclass(frozen=True)
class RegionMap:
    resolution: int
    threshold: float
    epsilon_margin: float
    points: tuple[RegionPoint, ...]

    def labels_correlated(self) -> set[RegionLabel]:
        return {pt.label_correlated for pt in self.points}

    def labels_embezzling(self) -> set[RegionLabel]:
        return {pt.label_embezzling for pt in self.points}


def qutrit_region_map(
    resolution: int,
    threshold: float = 0.9,
    epsilon_margin: float = 0.01,
) -> RegionMap:
    """Label every qutrit Schmidt simplex point for both catalyst families.

    Correlated panel: already above the threshold, boostable per the
    entropy-constrained bound (evaluated at its refinement limit on the
    two-level stationarity families), or not guaranteed. Embezzling panel:
    already above or boostable, with the catalyst rank that certifies the
    threshold plus the margin attached to each boostable point.
    """
    d = 3
    if resolution < 50:
        raise DomainError(f"resolution must be >= 50, got {resolution}")
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}")
    eps = 1.0 - threshold - epsilon_margin
    if eps <= 0:
        raise DomainError("epsilon margin leaves no room below the threshold")
    rank = schmidt_rank_for_fidelity(d, eps)

    points = []
    for row in _simplex_grid(d, resolution):
        f_val = (np.sum(np.sqrt(row)) ** 2 + 1.0) / (d + 1.0)
        budget = shannon_entropy(row)
        bound = (_entropy_capped_max(d, budget) + 1.0) / (d + 1.0)
        bound = max(bound, f_val)
        if f_val >= threshold:
            label_c = RegionLabel.ALREADY_ABOVE
            label_e = RegionLabel.ALREADY_ABOVE
            need = 0
        else:
            label_c = (
                RegionLabel.CORRELATED_BOOSTABLE
                if bound >= threshold
                else RegionLabel.NOT_GUARANTEED
            )
            label_e = RegionLabel.EMBEZZLING_BOOSTABLE
            need = rank
        points.append(
            RegionPoint(
                weights=tuple(float(x) for x in row),
                fidelity=float(f_val),
                correlated_bound=float(bound),
                label_correlated=label_c,
                label_embezzling=label_e,
                rank_required=need,
            )
        )
    return RegionMap(
        resolution=resolution,
        threshold=threshold,
        epsilon_margin=epsilon_margin,
        points=tuple(points),
    )


def embezzling_rank_certifies(d: int, rank: int, threshold: float) -> bool:
    """Whether the extraction bound at this rank implies the fidelity threshold."""
    fraction = extraction_fidelity_bound(d, rank)
    return (fraction * d + 1.0) / (d + 1.0) >= threshold
