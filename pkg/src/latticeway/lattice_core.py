"""Exact arithmetic for scaled cubic lattices.

The coarse lattice is Λ = a·Zⁿ and the fine lattice is obtained by
Construction A: Λ_c = a·P⁻¹·(G·w + P·Zⁿ) for w in F_P. Every lattice
point on the protocol path is a CodePoint (integer coordinates times a
positive rational scale), so quantization and modulo reduction are exact.
Only channel outputs are floating point (RealVector).

The fundamental cell is half-open on the negative side: a coordinate
exactly on a cell boundary rounds toward −∞ in the quantizer, so
V(θΛ) = (−θa/2, θa/2]ⁿ and mod_lattice is a function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Annotated, Any, Sequence, overload

import numpy as np
import numpy.typing as npt
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    WithJsonSchema,
    field_validator,
    model_validator,
)

from latticeway.exceptions import InvalidVectorError, ScaleMismatchError

RealVector = npt.NDArray[np.float64]


def to_fraction(value: Any) -> Fraction:
    """Coerce ints, floats, decimal strings and "p/q" strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, (float, str)):
        # str() first so 0.1 becomes 1/10 rather than its binary expansion.
        return Fraction(str(value).strip())
    raise ValueError(f"cannot interpret {value!r} as a rational")


Rational = Annotated[
    Fraction,
    BeforeValidator(to_fraction),
    PlainSerializer(str, return_type=str),
    WithJsonSchema({"type": "string", "pattern": r"^-?\d+(/\d+)?$"}),
]


def frac_gcd(x: Fraction, y: Fraction) -> Fraction:
    """Largest rational g with x/g and y/g both integers."""
    return Fraction(
        math.gcd(x.numerator * y.denominator, y.numerator * x.denominator),
        x.denominator * y.denominator,
    )


def is_prime(n: int) -> bool:
    """Trial-division primality test."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _round_half_down(numerator: int, denominator: int) -> int:
    """ceil(numerator/denominator − ½) for a positive denominator."""
    return -((denominator - 2 * numerator) // (2 * denominator))


# ---------------------------------------------------------------------------
# LatticeSpec
# ---------------------------------------------------------------------------


class LatticeSpec(BaseModel):
    """The single nested lattice pair used by every node.

    Coarse lattice a·Zⁿ; fine lattice generated from the length-n
    vector G over F_P by Construction A. The codebook
    {Λ_c ∩ V(Λ)} has exactly P points, one per field element.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dimension: int = Field(ge=1)
    prime: int = Field(ge=2)
    coarse_scale: Rational = Fraction(1)
    generator: tuple[int, ...]

    @field_validator("prime")
    @classmethod
    def _prime(cls, v: int) -> int:
        if not is_prime(v):
            raise ValueError(f"prime order must be prime, got {v}")
        return v

    @field_validator("coarse_scale")
    @classmethod
    def _positive_scale(cls, v: Fraction) -> Fraction:
        if v <= 0:
            raise ValueError("coarse scale must be positive")
        return v

    @model_validator(mode="after")
    def _generator_shape(self) -> LatticeSpec:
        if len(self.generator) != self.dimension:
            raise ValueError(
                f"generator has {len(self.generator)} entries, "
                f"dimension is {self.dimension}"
            )
        if any(g < 0 or g >= self.prime for g in self.generator):
            raise ValueError("generator entries must lie in {0, ..., P-1}")
        if not any(self.generator):
            raise ValueError("generator must not be the zero vector")
        return self

    @classmethod
    def construction_a(
        cls,
        dimension: int,
        prime: int,
        coarse_scale: Fraction | int = 1,
        seed: int = 0,
    ) -> LatticeSpec:
        """Draw G uniformly from F_P^n, redrawing the all-zero vector."""
        rng = np.random.default_rng(seed)
        while True:
            g = tuple(int(x) for x in rng.integers(0, prime, size=dimension))
            if any(g):
                return cls(
                    dimension=dimension,
                    prime=prime,
                    coarse_scale=to_fraction(coarse_scale),
                    generator=g,
                )

    def fine_unit(self, theta: Fraction | int) -> Fraction:
        """Grid spacing θa/P of the scaled fine lattice."""
        return to_fraction(theta) * self.coarse_scale / self.prime

    def coarse_unit(self, theta: Fraction | int) -> Fraction:
        """Side length θa of the scaled coarse cell."""
        return to_fraction(theta) * self.coarse_scale


# ---------------------------------------------------------------------------
# CodePoint
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False, slots=True)
class CodePoint:
    """An exact lattice point x = scale · coords.

    Equality and hashing compare the real point, so the same point held
    at two compatible scales compares equal.
    """

    coords: tuple[int, ...]
    scale: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        object.__setattr__(self, "scale", to_fraction(self.scale))
        if self.scale <= 0:
            raise ScaleMismatchError(f"scale must be positive, got {self.scale}")

    @classmethod
    def zero(cls, dimension: int, scale: Fraction | int = 1) -> CodePoint:
        return cls((0,) * dimension, to_fraction(scale))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def values(self) -> tuple[Fraction, ...]:
        return tuple(self.scale * k for k in self.coords)

    def real(self) -> RealVector:
        return np.asarray(self.coords, dtype=np.float64) * float(self.scale)

    def at_scale(self, scale: Fraction | int) -> CodePoint:
        """Re-express this point on the grid of the given scale."""
        scale = to_fraction(scale)
        ratio = self.scale / scale
        coords = tuple(k * ratio for k in self.coords)
        if any(c.denominator != 1 for c in coords):
            raise ScaleMismatchError(
                f"scale mismatch: point at {self.scale} is not on grid {scale}"
            )
        return CodePoint(tuple(c.numerator for c in coords), scale)

    def scaled(self, factor: Fraction | int) -> CodePoint:
        """Multiply by a positive rational, keeping the integer coordinates."""
        factor = to_fraction(factor)
        if factor <= 0:
            raise ScaleMismatchError(f"scaling factor must be positive, got {factor}")
        return CodePoint(self.coords, self.scale * factor)

    def __mul__(self, alpha: int) -> CodePoint:
        if not isinstance(alpha, int):
            return NotImplemented
        return CodePoint(tuple(alpha * k for k in self.coords), self.scale)

    __rmul__ = __mul__

    def __neg__(self) -> CodePoint:
        return self * -1

    def __add__(self, other: CodePoint) -> CodePoint:
        if not isinstance(other, CodePoint):
            return NotImplemented
        if other.dimension != self.dimension:
            raise ScaleMismatchError("dimension mismatch")
        finer = compatible_scale(self.scale, other.scale)
        a, b = self.at_scale(finer), other.at_scale(finer)
        return CodePoint(tuple(x + y for x, y in zip(a.coords, b.coords)), finer)

    def __sub__(self, other: CodePoint) -> CodePoint:
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CodePoint):
            return NotImplemented
        return self.values() == other.values()

    def __hash__(self) -> int:
        return hash(self.values())

    def __repr__(self) -> str:
        return f"CodePoint({', '.join(str(v) for v in self.values())})"


def compatible_scale(s: Fraction, t: Fraction) -> Fraction:
    """Return the finer of two scales when one divides the other."""
    if (s / t).denominator == 1:
        return t
    if (t / s).denominator == 1:
        return s
    raise ScaleMismatchError(f"scale mismatch: {s} and {t} are not nested")


def as_real_vector(x: Sequence[float] | RealVector) -> RealVector:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise InvalidVectorError("invalid vector")
    return arr


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def quantize(
    x: CodePoint | Sequence[float] | RealVector,
    theta: Fraction | int,
    spec: LatticeSpec,
) -> CodePoint:
    """Nearest point of θ·a·Zⁿ, ties toward −∞."""
    side = spec.coarse_unit(theta)
    if side <= 0:
        raise ValueError("theta must be positive")
    if isinstance(x, CodePoint):
        r = tuple(v / side for v in x.values())
        k = tuple(_round_half_down(q.numerator, q.denominator) for q in r)
        return CodePoint(k, side)
    arr = as_real_vector(x)
    k = np.ceil(arr / float(side) - 0.5).astype(np.int64)
    return CodePoint(tuple(int(v) for v in k), side)


@overload
def mod_lattice(x: CodePoint, theta: Fraction | int, spec: LatticeSpec) -> CodePoint: ...
@overload
def mod_lattice(
    x: Sequence[float] | RealVector, theta: Fraction | int, spec: LatticeSpec
) -> RealVector: ...


def mod_lattice(x, theta, spec):
    """x − Q_{θΛ}(x); lands in (−θa/2, θa/2]ⁿ.

    CodePoint input stays exact: it is carried to the common grid of its
    own scale and θa before the integer reduction.
    """
    side = spec.coarse_unit(theta)
    if side <= 0:
        raise ValueError("theta must be positive")
    if isinstance(x, CodePoint):
        grid = frac_gcd(x.scale, side)
        k = x.at_scale(grid).coords
        m = (side / grid).numerator
        return CodePoint(
            tuple(c - m * _round_half_down(c, m) for c in k),
            grid,
        )
    arr = as_real_vector(x)
    s = float(side)
    return arr - s * np.ceil(arr / s - 0.5)


def scale_identity_check(
    s: CodePoint,
    alpha: int,
    beta: Fraction | int,
    spec: LatticeSpec,
) -> bool:
    """Check (α(s mod Λ)) mod Λ = (αs) mod Λ and β(s mod Λ) = (βs) mod βΛ."""
    beta = to_fraction(beta)
    reduced = mod_lattice(s, 1, spec)
    integer_rule = mod_lattice(alpha * reduced, 1, spec) == mod_lattice(
        alpha * s, 1, spec
    )
    scaling_rule = reduced.scaled(beta) == mod_lattice(s.scaled(beta), beta, spec)
    return integer_rule and scaling_rule


def second_moment(theta: Fraction | int, spec: LatticeSpec) -> Fraction:
    """σ²(θΛ) = (θa)²/12 per dimension for the cubic coarse lattice."""
    side = spec.coarse_unit(theta)
    if side <= 0:
        raise ValueError("theta must be positive")
    return side * side / 12


@lru_cache(maxsize=256)
def codebook_coords(spec: LatticeSpec) -> tuple[tuple[int, ...], ...]:
    """Integer coordinates, in units of a/P, of φ(w) for w = 0 … P−1.

    Coordinates do not depend on θ: scaling by θ only changes the unit.
    """
    p = spec.prime
    out = []
    for w in range(p):
        out.append(
            tuple(
                r - p * _round_half_down(r, p)
                for r in ((g * w) % p for g in spec.generator)
            )
        )
    return tuple(out)


def codebook(theta: Fraction | int, spec: LatticeSpec) -> tuple[CodePoint, ...]:
    """The scaled codebook {θΛ_c ∩ V(θΛ)}, indexed by message."""
    unit = spec.fine_unit(theta)
    return tuple(CodePoint(k, unit) for k in codebook_coords(spec))


def fine_lattice_index(
    point: CodePoint, theta: Fraction | int, spec: LatticeSpec
) -> int | None:
    """Return w with point ∈ θ·a/P·(G·w + P·Zⁿ), or None off the fine lattice."""
    unit = spec.fine_unit(theta)
    ratios = [v / unit for v in point.values()]
    if any(r.denominator != 1 for r in ratios):
        return None
    k = [r.numerator % spec.prime for r in ratios]
    pivot = next(i for i, g in enumerate(spec.generator) if g)
    w = k[pivot] * pow(spec.generator[pivot], -1, spec.prime) % spec.prime
    if all((g * w - ki) % spec.prime == 0 for g, ki in zip(spec.generator, k)):
        return w
    return None
