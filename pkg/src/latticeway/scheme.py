"""Encoders, the two minimum-distance lattice decoders and the
re-distribution transform used by relays.

Decoders search exhaustively over small candidate tables held as
integers in units of the fine grid a/P, so scaling by θ only changes
the unit. Distances are taken modulo the coarse cell (fold-aware).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from latticeway.field_codec import (
    CombinationKey,
    FieldElement,
    phi,
    phi_inverse,
)
from latticeway.lattice_core import (
    CodePoint,
    LatticeSpec,
    RealVector,
    as_real_vector,
    codebook,
    mod_lattice,
    second_moment,
    to_fraction,
)

IntTable = npt.NDArray[np.int64]


@dataclass(frozen=True)
class Encoder:
    """Maps messages to θ-scaled codewords; gain converts to channel amplitude."""

    spec: LatticeSpec
    theta: Fraction
    gain: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", to_fraction(self.theta))

    def encode(self, w: FieldElement | int) -> CodePoint:
        return encode(w, self.theta, self.spec)

    def amplify(self, point: CodePoint) -> RealVector:
        """Channel amplitude of a point already on the θ codebook."""
        return self.gain * point.real()

    def transmit(self, w: FieldElement | int) -> RealVector:
        return self.amplify(self.encode(w))

    def codebook_power(self) -> Fraction:
        """Exact (1/n)·mean‖t‖² over the scaled codebook."""
        points = codebook(self.theta, self.spec)
        total = sum(sum(v * v for v in t.values()) for t in points)
        return Fraction(total) / (len(points) * self.spec.dimension)

    def power(self) -> float:
        """Per-dimension transmit power under uniform messages."""
        return self.gain**2 * float(self.codebook_power())

    def power_budget(self) -> float:
        """gain²·σ²(θΛ), the continuous-cell power the codebook approximates."""
        return self.gain**2 * float(second_moment(self.theta, self.spec))


@dataclass(frozen=True)
class DecodedCombination:
    """A decoded point reduced mod θΛ, θ being the coarse scale α·θ_fine.

    key records which messages the point combines. Decoders never read it.
    """

    point: CodePoint
    theta: Fraction
    alpha: int = 1
    key: CombinationKey | None = None

    @property
    def fine_theta(self) -> Fraction:
        return self.theta / self.alpha

    def fine_point(self, spec: LatticeSpec) -> CodePoint:
        """The point reduced into the fine-scale codebook."""
        return mod_lattice(self.point, self.fine_theta, spec)

    def fine_message(self, spec: LatticeSpec) -> FieldElement:
        return phi_inverse(self.fine_point(spec), self.fine_theta, spec)


def encode(w: FieldElement | int, theta: Fraction | int, spec: LatticeSpec) -> CodePoint:
    """θ·φ(w)."""
    return phi(w, theta, spec)


# ---------------------------------------------------------------------------
# Candidate tables
# ---------------------------------------------------------------------------


def candidate_count(spec: LatticeSpec, alpha: int) -> int:
    """Rows of the decode-the-sum table for multiplier α: αⁿ·P."""
    return alpha**spec.dimension * spec.prime


@lru_cache(maxsize=128)
def _candidate_table(spec: LatticeSpec, alpha: int) -> IntTable:
    """Fine-lattice points in the α-scaled coarse cell, units a/P.

    Rows are G·w + P·s for w in F_P and s in {0..α−1}ⁿ, reduced into
    (−αP/2, αP/2]ⁿ. There are αⁿ·P of them.
    """
    p, n = spec.prime, spec.dimension
    modulus = alpha * p
    g = np.asarray(spec.generator, dtype=np.int64)
    shifts = np.asarray(list(itertools.product(range(alpha), repeat=n)), dtype=np.int64)
    rows = (np.arange(p, dtype=np.int64)[:, None, None] * g + p * shifts[None, :, :])
    rows = rows.reshape(-1, n)
    reduced = rows - modulus * np.ceil(rows / modulus - 0.5).astype(np.int64)
    reduced.setflags(write=False)
    return reduced


def sum_candidates(alpha: int, theta: Fraction | int, spec: LatticeSpec) -> tuple[CodePoint, ...]:
    """The set {(αθt_a + θt_b) mod αθΛ} over all message pairs."""
    if alpha < 1:
        raise ValueError(f"alpha must be a positive integer, got {alpha}")
    unit = spec.fine_unit(theta)
    table = _candidate_table(spec, alpha)
    return tuple(CodePoint(tuple(int(k) for k in row), unit) for row in table)


def _nearest(grid_y: RealVector, table: IntTable, modulus: int) -> IntTable:
    reduced = grid_y - modulus * np.ceil(grid_y / modulus - 0.5)
    diff = table - reduced
    diff -= modulus * np.round(diff / modulus)
    return table[int(np.argmin(np.einsum("ij,ij->i", diff, diff)))]


def _decode(y: RealVector, alpha: int, theta: Fraction, spec: LatticeSpec) -> CodePoint:
    y = as_real_vector(y)
    if y.shape[0] != spec.dimension:
        raise ValueError(f"expected a length-{spec.dimension} vector, got {y.shape[0]}")
    unit = spec.fine_unit(theta)
    grid_y = y / float(unit)
    row = _nearest(grid_y, _candidate_table(spec, alpha), alpha * spec.prime)
    return CodePoint(tuple(int(k) for k in row), unit)


def decode_point_to_point(
    y: RealVector, theta: Fraction | int, spec: LatticeSpec
) -> CodePoint:
    """Nearest point of the θ codebook to y mod θΛ."""
    return _decode(y, 1, to_fraction(theta), spec)


def decode_sum(
    y: RealVector,
    alpha: int,
    theta: Fraction | int,
    spec: LatticeSpec,
    key: CombinationKey | None = None,
) -> DecodedCombination:
    """Decode (αθt_a + θt_b) mod αθΛ from the superposition y."""
    if alpha < 1:
        raise ValueError(f"alpha must be a positive integer, got {alpha}")
    theta = to_fraction(theta)
    point = _decode(y, alpha, theta, spec)
    return DecodedCombination(point=point, theta=alpha * theta, alpha=alpha, key=key)


# ---------------------------------------------------------------------------
# Re-distribution transform
# ---------------------------------------------------------------------------


def redistribution_steps(
    c: DecodedCombination,
    multiplier: int,
    out_scale: Fraction | int,
    spec: LatticeSpec,
) -> tuple[CodePoint, CodePoint, CodePoint]:
    """The three intermediate points: multiplied, reduced, rescaled."""
    if multiplier < 1:
        raise ValueError(f"multiplier must be a positive integer, got {multiplier}")
    out_scale = to_fraction(out_scale)
    multiplied = multiplier * c.point
    reduced = mod_lattice(multiplied, c.theta, spec)
    # ScaleMismatchError unless the reduced point sits on the c.theta fine grid.
    on_grid = reduced.at_scale(spec.fine_unit(c.theta))
    rescaled = CodePoint(on_grid.coords, spec.fine_unit(out_scale))
    return multiplied, reduced, rescaled


def redistribution_transform(
    c: DecodedCombination,
    multiplier: int,
    out_scale: Fraction | int,
    spec: LatticeSpec,
) -> CodePoint:
    """Multiply by N, reduce mod c.theta·Λ, rescale to the out_scale codebook.

    The field message of the output is (N/α)·u, u being the fine message
    of c.
    """
    return redistribution_steps(c, multiplier, out_scale, spec)[2]
