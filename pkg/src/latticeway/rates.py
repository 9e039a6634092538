"""Closed-form rate analysis for the two-way relay line.

The achievable region of the lattice scheme is the minimum of six
point-to-point terms [½·log(P′_i/N_j)]⁺ evaluated at truncated powers
whose alternating ratios are integer squares. The cut-set outer bound
is the same minimum with C(x) = ½·log(1 + x). Truncation never boosts
a power.

The six terms split into two independent groups: the (P1, P3) pair
only appears in P1/N2, P3/N4, P3/N2 and the (P2, P4) pair only in
P2/N3, P4/N3, P2/N1. Each pair is searched on its own.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Literal, NamedTuple, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from latticeway.exceptions import ConfigError, InfeasiblePatternError

logger = logging.getLogger(__name__)

TIE_SLACK = 1e-9
GAP_BOUND = 0.5 * math.log2(3)

# Order fixes which label is reported when several terms tie.
TERM_LABELS = ("P1/N2", "P2/N3", "P3/N4", "P4/N3", "P3/N2", "P2/N1")
_TERM_INDICES = ((0, 1), (1, 2), (2, 3), (3, 2), (2, 1), (1, 0))

Pattern = Literal["direct", "permuted"]


class BoundRate(NamedTuple):
    rate: float
    binding: str


class TruncatedPair(NamedTuple):
    p1: float
    p3: float
    multiplier: int


class RateReport(BaseModel):
    """Optimized achievable rate with the truncation that attains it."""

    model_config = ConfigDict(frozen=True)

    powers: tuple[float, float, float, float]
    noise: tuple[float, float, float, float]
    r_achievable: float
    binding: str
    truncated_powers: tuple[float, float, float, float]
    multiplier_n: int
    multiplier_m: int
    pattern_13: Pattern
    pattern_24: Pattern
    r_outer: float
    gap: float


class GapAudit(BaseModel):
    """Largest observed outer-bound gap over random configurations."""

    model_config = ConfigDict(frozen=True)

    trials: int
    seed: int
    low: float
    high: float
    bound: float
    max_gap: float
    violations: int
    argmax_powers: tuple[float, float, float, float]
    argmax_noise: tuple[float, float, float, float]


def _check_positive(name: str, values: Sequence[float], length: int | None = 4) -> None:
    if length is not None and len(values) != length:
        raise ConfigError(f"{name} must have {length} entries, got {len(values)}")
    if any(not (v > 0) or not math.isfinite(v) for v in values):
        raise ConfigError(f"{name} must be positive and finite: {list(values)}")


def _positive_half_log(x: float) -> float:
    return max(0.0, 0.5 * math.log2(x)) if x > 0 else 0.0


def capacity(x: float) -> float:
    """C(x) = ½·log₂(1 + x)."""
    return 0.5 * math.log2(1.0 + x)


# ---------------------------------------------------------------------------
# Alignment
# ---------------------------------------------------------------------------


def _integer_sqrt_ratio(ratio: float, rel_tol: float) -> int | None:
    m = round(math.sqrt(ratio))
    if m >= 1 and abs(m * m - ratio) <= rel_tol * ratio:
        return m
    return None


def alignment_ratios(powers: Sequence[float], rel_tol: float = TIE_SLACK) -> tuple[int, ...]:
    """Integer amplitude multiples θ_j per node.

    Nodes of equal parity share a unit amplitude; each consecutive pair
    within a parity class must have power ratio N² or 1/N² for an
    integer N. The θ of each class are scaled to the smallest integers.
    """
    _check_positive("powers", powers, length=None)
    if len(powers) < 3:
        raise ConfigError(f"a relay line needs at least 3 nodes, got {len(powers)}")
    thetas: list[Fraction] = [Fraction(0)] * len(powers)
    for start in (0, 1):
        members = range(start, len(powers), 2)
        thetas[start] = Fraction(1)
        for prev, cur in zip(members, members[1:]):
            ratio = powers[cur] / powers[prev]
            up = _integer_sqrt_ratio(ratio, rel_tol)
            down = _integer_sqrt_ratio(1.0 / ratio, rel_tol)
            if up is not None:
                thetas[cur] = thetas[prev] * up
            elif down is not None:
                thetas[cur] = thetas[prev] / down
            else:
                raise InfeasiblePatternError(
                    f"power ratio P{cur + 1}/P{prev + 1} = {ratio:.12g} is not an "
                    "integer square; run `latticeway rates` to find an aligned "
                    "truncation"
                )
        scale = math.lcm(*(thetas[j].denominator for j in members))
        for j in members:
            thetas[j] *= scale
    return tuple(int(t) for t in thetas)


def truncate_powers(p1: float, p3: float) -> TruncatedPair:
    """Reduce one of a pair so the ratio is a perfect square, losing at most half.

    Ordered so P3 ≥ P1: with m² ≤ P3/P1 ≤ (m+1)², either P3 drops to
    m²·P1 (ratio up to m(m+1)) or P1 drops to P3/(m+1)². Either way
    2·P⋆ ≥ P for both powers.
    """
    _check_positive("powers", (p1, p3), length=2)
    if p1 > p3:
        swapped = truncate_powers(p3, p1)
        return TruncatedPair(swapped.p3, swapped.p1, swapped.multiplier)
    # Branch decisions in exact arithmetic; the inputs are exact binary floats.
    x, y = Fraction(p1), Fraction(p3)
    ratio = y / x
    m = math.isqrt(math.floor(ratio))
    if ratio <= m * (m + 1):
        return TruncatedPair(p1, min(p3, float(m * m * x)), m)
    return TruncatedPair(float(y / (m + 1) ** 2), p3, m + 1)


def truncate_chain(powers: Sequence[float]) -> tuple[float, ...]:
    """Aligned truncation for a whole line.

    A parity class with two nodes uses truncate_powers; a longer class
    is cut down to its weakest member.
    """
    _check_positive("powers", powers, length=None)
    out = list(powers)
    for start in (0, 1):
        members = list(range(start, len(powers), 2))
        if len(members) == 2:
            i, j = members
            pair = truncate_powers(powers[i], powers[j])
            out[i], out[j] = pair.p1, pair.p3
        elif len(members) > 2:
            floor = min(powers[j] for j in members)
            for j in members:
                out[j] = floor
    return tuple(out)


# ---------------------------------------------------------------------------
# Rate expressions
# ---------------------------------------------------------------------------


def rate_terms(powers: Sequence[float], noise: Sequence[float]) -> tuple[float, ...]:
    """The six terms in TERM_LABELS order."""
    return tuple(_positive_half_log(powers[i] / noise[j]) for i, j in _TERM_INDICES)


def aligned_rate(powers: Sequence[float], noise: Sequence[float]) -> BoundRate:
    """Achievable symmetric rate at powers that already satisfy the pattern."""
    _check_positive("powers", powers)
    _check_positive("noise", noise)
    alignment_ratios(powers)
    terms = rate_terms(powers, noise)
    rate = min(terms)
    return BoundRate(rate, TERM_LABELS[terms.index(rate)])


def outer_bound(powers: Sequence[float], noise: Sequence[float]) -> float:
    """Cut-set bound: the weakest of the six point-to-point links."""
    if len(powers) != 4 or len(noise) != 4:
        raise ConfigError("outer bound needs four powers and four noise variances")
    _check_positive("noise", noise)
    return min(capacity(max(powers[i], 0.0) / noise[j]) for i, j in _TERM_INDICES)


def chain_rate(powers: Sequence[float], noise: Sequence[float]) -> float:
    """min over forward terms P_k/N_{k+1} and backward terms P_j/N_{j−1}."""
    if len(noise) != len(powers):
        raise ConfigError("powers and noise must have the same length")
    _check_positive("noise", noise, length=None)
    alignment_ratios(powers)
    forward = (_positive_half_log(powers[k] / noise[k + 1]) for k in range(len(powers) - 1))
    backward = (_positive_half_log(powers[j] / noise[j - 1]) for j in range(1, len(powers)))
    return min(*forward, *backward)


def half_duplex_rate(report: RateReport) -> float:
    return 0.5 * report.r_achievable


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------


def _half_log_plus(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(0.0, 0.5 * np.log2(x))


class _PairCandidates(NamedTuple):
    multipliers: np.ndarray
    patterns: tuple[Pattern, ...]
    first: np.ndarray
    second: np.ndarray


def _pair_candidates(low_side: float, high_side: float, extra: TruncatedPair | None) -> _PairCandidates:
    """Maximal truncations of (first, second) for every multiplier and orientation.

    "direct": second/first = N²; "permuted": first/second = N². A
    multiplier above ⌈√(max/min)⌉ + 1 only truncates harder, so the
    search stops there.
    """
    bound = math.ceil(math.sqrt(max(low_side, high_side) / min(low_side, high_side))) + 1
    ns = np.arange(1, bound + 1, dtype=np.int64)
    sq = ns.astype(np.float64) ** 2
    t_first = np.minimum(low_side, high_side / sq)
    t_second = sq * t_first
    # Multiplier 1 is the same in both orientations.
    l_ns = ns[1:]
    l_second = np.minimum(high_side, low_side / sq[1:])
    l_first = sq[1:] * l_second
    multipliers = np.concatenate([ns, l_ns])
    patterns: tuple[Pattern, ...] = ("direct",) * len(ns) + ("permuted",) * len(l_ns)
    first = np.concatenate([t_first, l_first])
    second = np.concatenate([t_second, l_second])
    if extra is not None:
        multipliers = np.append(multipliers, extra.multiplier)
        patterns += ("direct" if extra.p3 >= extra.p1 else "permuted",)
        first = np.append(first, extra.p1)
        second = np.append(second, extra.p3)
    return _PairCandidates(multipliers, patterns, first, second)


def _select(values: np.ndarray, target: float, candidates: _PairCandidates) -> int:
    """Smallest multiplier reaching target, direct before permuted."""
    ok = np.flatnonzero(values >= target - TIE_SLACK)
    order = sorted(
        ok,
        key=lambda k: (int(candidates.multipliers[k]), candidates.patterns[k] != "direct"),
    )
    return int(order[0])


def optimize_truncated(powers: Sequence[float], noise: Sequence[float]) -> RateReport:
    """Best symmetric rate over aligned truncations P′ ≤ P."""
    _check_positive("powers", powers)
    _check_positive("noise", noise)
    p1, p2, p3, p4 = (float(v) for v in powers)
    n1, n2, n3, n4 = (float(v) for v in noise)

    odd = _pair_candidates(p1, p3, truncate_powers(p1, p3))
    f13 = np.minimum.reduce([
        _half_log_plus(odd.first / n2),
        _half_log_plus(odd.second / n4),
        _half_log_plus(odd.second / n2),
    ])
    # Pair (P4, P2): direct layout has P2/P4 = M².
    even = _pair_candidates(p4, p2, truncate_powers(p4, p2))
    f24 = np.minimum.reduce([
        _half_log_plus(even.second / n3),
        _half_log_plus(even.first / n3),
        _half_log_plus(even.second / n1),
    ])
    target = min(float(f13.max()), float(f24.max()))
    i = _select(f13, target, odd)
    j = _select(f24, target, even)

    truncated = (
        float(odd.first[i]),
        float(even.second[j]),
        float(odd.second[i]),
        float(even.first[j]),
    )
    terms = rate_terms(truncated, noise)
    rate = min(terms)
    r_outer = outer_bound(powers, noise)
    return RateReport(
        powers=(p1, p2, p3, p4),
        noise=(n1, n2, n3, n4),
        r_achievable=rate,
        binding=TERM_LABELS[terms.index(rate)],
        truncated_powers=truncated,
        multiplier_n=int(odd.multipliers[i]),
        multiplier_m=int(even.multipliers[j]),
        pattern_13=odd.patterns[i],
        pattern_24=even.patterns[j],
        r_outer=r_outer,
        gap=r_outer - rate,
    )


def gap_audit(trials: int, seed: int, low: float = 1e-2, high: float = 1e2) -> GapAudit:
    """Draw P_i, N_i log-uniform in [low, high] and track the worst gap."""
    if trials < 1:
        raise ConfigError(f"trials must be at least 1, got {trials}")
    if not 0 < low < high:
        raise ConfigError(f"need 0 < low < high, got low={low}, high={high}")
    rng = np.random.default_rng(seed)
    draws = 10.0 ** rng.uniform(math.log10(low), math.log10(high), size=(trials, 8))
    worst = -math.inf
    worst_row = draws[0]
    violations = 0
    for row in draws:
        report = optimize_truncated(row[:4], row[4:])
        if report.gap > GAP_BOUND + TIE_SLACK:
            violations += 1
            logger.warning("gap %.12g exceeds bound at P=%s N=%s", report.gap, row[:4], row[4:])
        if report.gap > worst:
            worst, worst_row = report.gap, row
    logger.info("gap audit: %d configurations, max gap %.12g", trials, worst)
    return GapAudit(
        trials=trials,
        seed=seed,
        low=low,
        high=high,
        bound=GAP_BOUND,
        max_gap=worst,
        violations=violations,
        argmax_powers=tuple(float(v) for v in worst_row[:4]),
        argmax_noise=tuple(float(v) for v in worst_row[4:]),
    )
