"""Prime-field arithmetic and the message/codeword maps.

φ sends a field element w to θ·((a/P)·G·w mod Λ); φ⁻¹ inverts it by
table lookup over the P-point codebook. Integer combinations of
codewords reduced mod θΛ correspond one-to-one to the same combination
of messages over F_P, and every nonzero coefficient is invertible.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from latticeway.exceptions import (
    DegenerateCoefficientError,
    EnumerationBoundError,
    NonInvertibleCoefficientError,
    NotACodewordError,
)
from latticeway.lattice_core import (
    CodePoint,
    LatticeSpec,
    codebook,
    codebook_coords,
    is_prime,
    mod_lattice,
    to_fraction,
)

__all__ = [
    "CombinationKey",
    "FieldElement",
    "combine_messages",
    "is_prime",
    "lattice_combination_to_message",
    "mod_inverse",
    "nearest_prime",
    "phi",
    "phi_inverse",
    "phi_inverse_formula",
    "solve_coefficient",
    "uniformity_census",
]

DEFAULT_ENUMERATION_BOUND = 10**6


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------


def xgcd(x: int, y: int) -> tuple[int, int, int]:
    """Return (a, b, g) with a·x + b·y = g = gcd(x, y)."""
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_s, s = s, old_s - quotient * s
        old_t, t = t, old_t - quotient * t
    return old_s, old_t, old_r


def mod_inverse(alpha: int, prime: int) -> int:
    a, _, g = xgcd(alpha % prime, prime)
    if g != 1:
        raise NonInvertibleCoefficientError(
            f"non-invertible coefficient: {alpha} mod {prime}"
        )
    return a % prime


def nearest_prime(x: float) -> int:
    """The prime closest to x; equidistant primes resolve upward."""
    if x <= 2:
        return 2
    below = math.floor(x)
    above = math.ceil(x)
    while not is_prime(above):
        above += 1
    while below >= 2 and not is_prime(below):
        below -= 1
    if below < 2 or above - x <= x - below:
        return above
    return below


@dataclass(frozen=True, slots=True)
class FieldElement:
    """An element of F_P, stored reduced."""

    value: int
    order: int

    def __post_init__(self) -> None:
        if self.order < 2:
            raise ValueError(f"field order must be at least 2, got {self.order}")
        object.__setattr__(self, "value", int(self.value) % self.order)

    def _check(self, other: FieldElement) -> None:
        if other.order != self.order:
            raise ValueError(f"field order mismatch: {self.order} vs {other.order}")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.value + other.value, self.order)

    def __sub__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.value - other.value, self.order)

    def __mul__(self, other: FieldElement | int) -> FieldElement:
        if isinstance(other, FieldElement):
            self._check(other)
            other = other.value
        return FieldElement(self.value * other, self.order)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.value, self.order)

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return str(self.value)


# ---------------------------------------------------------------------------
# CombinationKey
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CombinationKey:
    """Integer coefficients over named message slots, e.g. 1·a3 + 2·b2.

    Coefficients are kept as plain integers; field operations reduce them
    mod P. Terms are held sorted by slot so equal keys compare equal.
    """

    terms: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        merged: dict[str, int] = {}
        for coef, slot in self.terms:
            merged[slot] = merged.get(slot, 0) + int(coef)
        object.__setattr__(
            self,
            "terms",
            tuple(sorted(((c, s) for s, c in merged.items() if c != 0), key=_slot_order)),
        )

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, int]) -> CombinationKey:
        return cls(tuple((c, s) for s, c in mapping.items()))

    @classmethod
    def single(cls, slot: str, coef: int = 1) -> CombinationKey:
        return cls(((coef, slot),))

    @classmethod
    def empty(cls) -> CombinationKey:
        return cls(())

    @property
    def slots(self) -> tuple[str, ...]:
        return tuple(s for _, s in self.terms)

    @property
    def coefficients(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.terms)

    def coefficient(self, slot: str) -> int:
        for c, s in self.terms:
            if s == slot:
                return c
        return 0

    def scaled(self, factor: int) -> CombinationKey:
        return CombinationKey(tuple((factor * c, s) for c, s in self.terms))

    def plus(self, other: CombinationKey) -> CombinationKey:
        return CombinationKey(self.terms + other.terms)

    def without(self, slots: Iterable[str]) -> CombinationKey:
        drop = set(slots)
        return CombinationKey(tuple((c, s) for c, s in self.terms if s not in drop))

    def reduced(self, prime: int) -> CombinationKey:
        """Coefficients mod P; terms that vanish over F_P are dropped."""
        return CombinationKey(tuple((c % prime, s) for c, s in self.terms))

    def as_dict(self) -> dict[str, int]:
        return {s: c for c, s in self.terms}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{s}" for c, s in self.terms)


def _slot_order(term: tuple[int, str]) -> tuple[str, int]:
    # "a12" sorts after "a3": direction letter first, then block index.
    slot = term[1]
    head = slot.rstrip("0123456789")
    tail = slot[len(head):]
    return head, int(tail) if tail else -1


# ---------------------------------------------------------------------------
# φ and φ⁻¹
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _inverse_table(spec: LatticeSpec) -> dict[tuple[int, ...], int]:
    return {k: w for w, k in enumerate(codebook_coords(spec))}


def phi(w: FieldElement | int, theta: Fraction | int, spec: LatticeSpec) -> CodePoint:
    """θ·((a/P)·G·w mod Λ), a point of the scaled codebook."""
    value = w.value if isinstance(w, FieldElement) else int(w)
    return codebook(theta, spec)[value % spec.prime]


def phi_inverse(t: CodePoint, theta: Fraction | int, spec: LatticeSpec) -> FieldElement:
    unit = spec.fine_unit(theta)
    ratios = [v / unit for v in t.values()]
    if len(ratios) != spec.dimension or any(r.denominator != 1 for r in ratios):
        raise NotACodewordError(f"not a codeword: {t!r}")
    w = _inverse_table(spec).get(tuple(r.numerator for r in ratios))
    if w is None:
        raise NotACodewordError(f"not a codeword: {t!r}")
    return FieldElement(w, spec.prime)


def phi_inverse_formula(
    t: CodePoint, theta: Fraction | int, spec: LatticeSpec
) -> FieldElement:
    """Closed-form inverse (GᵀG)⁻¹Gᵀ·(P·(B⁻¹t mod Zⁿ)) evaluated over F_P.

    Matches phi_inverse on every codeword; kept as a cross-check of the
    table inversion.
    """
    p = spec.prime
    side = spec.coarse_unit(theta)
    lifted = []
    for v in t.values():
        frac = (v / side) % 1
        k = frac * p
        if k.denominator != 1:
            raise NotACodewordError(f"not a codeword: {t!r}")
        lifted.append(k.numerator)
    gram = sum(g * g for g in spec.generator) % p
    if gram == 0:
        # GᵀG vanishes over F_P; fall back to a single nonzero pivot.
        i = next(i for i, g in enumerate(spec.generator) if g)
        w = lifted[i] * mod_inverse(spec.generator[i], p) % p
    else:
        w = sum(g * k for g, k in zip(spec.generator, lifted)) * mod_inverse(gram, p) % p
    if phi(w, theta, spec) != t:
        raise NotACodewordError(f"not a codeword: {t!r}")
    return FieldElement(w, p)


# ---------------------------------------------------------------------------
# Combinations
# ---------------------------------------------------------------------------


def _check_coefficients(key: CombinationKey, prime: int) -> None:
    for c, s in key.terms:
        if c % prime == 0:
            raise DegenerateCoefficientError(
                f"degenerate coefficient: {c} on {s} vanishes mod {prime}"
            )


def combine_messages(
    key: CombinationKey, messages: Sequence[FieldElement]
) -> FieldElement:
    """Σ c_i·w_i over F_P, messages given in key slot order."""
    if len(messages) != len(key.terms):
        raise ValueError(
            f"key has {len(key.terms)} slots, got {len(messages)} messages"
        )
    if not messages:
        raise ValueError("empty combination")
    prime = messages[0].order
    _check_coefficients(key, prime)
    total = FieldElement(0, prime)
    for (c, _), w in zip(key.terms, messages):
        total = total + w * c
    return total


def lattice_combination_to_message(
    v: CodePoint, theta: Fraction | int, spec: LatticeSpec
) -> FieldElement:
    """u with φ(u) = θ⁻¹·v, for v reduced mod θΛ."""
    return phi_inverse(v, theta, spec)


def solve_coefficient(u: FieldElement, alpha: int) -> FieldElement:
    """w = α⁻¹·u over F_P."""
    if alpha % u.order == 0:
        raise NonInvertibleCoefficientError(
            f"non-invertible coefficient: {alpha} mod {u.order}"
        )
    return u * mod_inverse(alpha, u.order)


def uniformity_census(
    key: CombinationKey,
    theta: Fraction | int,
    spec: LatticeSpec,
    bound: int = DEFAULT_ENUMERATION_BOUND,
) -> Counter[CodePoint]:
    """Count (Σ c_i·θ·t_i) mod θΛ over every message tuple.

    Every codebook point appears, each exactly P^(slots−1) times.
    """
    p = spec.prime
    _check_coefficients(key, p)
    tuples = p ** len(key.terms)
    if tuples > bound:
        raise EnumerationBoundError(
            f"enumeration bound exceeded: {tuples} tuples > {bound}"
        )
    points = codebook(theta, spec)
    census: Counter[CodePoint] = Counter({t: 0 for t in points})
    theta = to_fraction(theta)
    for ws in itertools.product(range(p), repeat=len(key.terms)):
        acc = CodePoint.zero(spec.dimension, spec.fine_unit(theta))
        for (c, _), w in zip(key.terms, ws):
            acc = acc + c * points[w]
        census[mod_lattice(acc, theta, spec)] += 1
    return census
