"""Challenge grids, 24-bit fixed-point encoding of (ex2, dphi) states, and
assembly of the 48 PUF interpretations.

Bit layout of a 24-bit string: bits 0..11 are the ex2 fraction (bit 0 MSB),
bits 12..23 are the phase difference with a 3-bit integer part (bit 12 MSB)
and a 9-bit fraction. Bit index 0 is written first in all serialized forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jones import TWO_PI

FRACTION_BITS = 12
PHASE_INT_BITS = 3
PHASE_FRAC_BITS = 9
TOTAL_BITS = 24

MORE_SIGNIFICANT_BITS = tuple(range(0, 6)) + tuple(range(12, 18))
LESS_SIGNIFICANT_BITS = tuple(range(6, 12)) + tuple(range(18, 24))


class ConfigError(ValueError):
    """Invalid grid or run configuration."""


@dataclass(frozen=True)
class GridConfig:
    """Evenly spaced challenge sweep over (ex2, dphi).

    Generated values are ex2_step * i for i in [ex2_start_index,
    ex2_start_index + ex2_count - 1], and likewise for dphi. The default
    2999 x 71 grid gives 212,929 challenges.
    """

    ex2_step: float = 0.0003
    ex2_count: int = 2999
    dphi_step: float = 0.087
    dphi_count: int = 71
    ex2_start_index: int = 1
    dphi_start_index: int = 1

    def __post_init__(self):
        if self.ex2_step <= 0 or self.dphi_step <= 0:
            raise ConfigError("grid steps must be positive")
        if self.ex2_count < 1 or self.dphi_count < 1:
            raise ConfigError("grid counts must be positive")
        if self.ex2_start_index < 1 or self.dphi_start_index < 1:
            raise ConfigError("grid start indices must be positive")
        if self.ex2_step * (self.ex2_start_index + self.ex2_count - 1) >= 1.0:
            raise ConfigError("grid would generate ex2 >= 1")
        if self.dphi_step * (self.dphi_start_index + self.dphi_count - 1) >= TWO_PI:
            raise ConfigError("grid would generate dphi >= 2*pi")

    @property
    def size(self) -> int:
        return self.ex2_count * self.dphi_count


def generate_challenge_grid(cfg: GridConfig) -> np.ndarray:
    """Cartesian product of the ex2 and dphi sweeps in ex2-major order
    (dphi varies fastest). Returns an array of shape (size, 2)."""
    ex2 = cfg.ex2_step * np.arange(
        cfg.ex2_start_index, cfg.ex2_start_index + cfg.ex2_count, dtype=np.float64
    )
    dphi = cfg.dphi_step * np.arange(
        cfg.dphi_start_index, cfg.dphi_start_index + cfg.dphi_count, dtype=np.float64
    )
    out = np.empty((cfg.size, 2), dtype=np.float64)
    out[:, 0] = np.repeat(ex2, cfg.dphi_count)
    out[:, 1] = np.tile(dphi, cfg.ex2_count)
    return out


@dataclass(frozen=True, order=True)
class Bitstring24:
    """24-bit string stored as an unsigned integer, bit 0 = MSB."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value < (1 << TOTAL_BITS):
            raise ValueError("value out of 24-bit range")

    def bit(self, index: int) -> int:
        if not 0 <= index < TOTAL_BITS:
            raise ValueError("bit index out of range")
        return (self.value >> (TOTAL_BITS - 1 - index)) & 1

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(self.bit(i) for i in range(TOTAL_BITS))

    def to_string(self) -> str:
        return format(self.value, f"0{TOTAL_BITS}b")

    @classmethod
    def from_string(cls, s: str) -> "Bitstring24":
        if len(s) != TOTAL_BITS or set(s) - {"0", "1"}:
            raise ValueError("expected 24 characters of '0'/'1'")
        return cls(int(s, 2))

    def decode(self) -> tuple[float, float]:
        """Left bin edges of the encoded (ex2, dphi)."""
        frac = self.value >> FRACTION_BITS
        phase = self.value & ((1 << FRACTION_BITS) - 1)
        ex2 = frac / (1 << FRACTION_BITS)
        dphi = (phase >> PHASE_FRAC_BITS) + (phase & ((1 << PHASE_FRAC_BITS) - 1)) / (
            1 << PHASE_FRAC_BITS
        )
        return ex2, dphi


def quantize12_fraction(x: float) -> int:
    """12-bit truncating encoder for a value in [0, 1): floor(x * 4096)."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"fraction operand must lie in [0, 1), got {x}")
    return int(x * (1 << FRACTION_BITS))


def quantize12_phase(x: float) -> int:
    """12-bit truncating phase encoder: 3-bit integer part, 9-bit fraction."""
    if not 0.0 <= x < TWO_PI:
        raise ValueError(f"phase operand must lie in [0, 2*pi), got {x}")
    int_part = int(x)
    frac_part = int((x - int_part) * (1 << PHASE_FRAC_BITS))
    return (int_part << PHASE_FRAC_BITS) | frac_part


def encode_state(ex2: float, dphi: float) -> Bitstring24:
    """Concatenate the two 12-bit encoders into one 24-bit string."""
    return Bitstring24(
        (quantize12_fraction(ex2) << FRACTION_BITS) | quantize12_phase(dphi)
    )


def bits_to_integer(b: Bitstring24) -> int:
    """MSB-first integer value of a bitstring, in [0, 2^24)."""
    return b.value


def encode_states(ex2: np.ndarray, dphi: np.ndarray) -> np.ndarray:
    """Vectorized encode_state over arrays; returns uint32 codes."""
    ex2 = np.asarray(ex2, dtype=np.float64)
    dphi = np.asarray(dphi, dtype=np.float64)
    if np.any(ex2 < 0) or np.any(ex2 >= 1):
        raise ValueError("ex2 values must lie in [0, 1)")
    if np.any(dphi < 0) or np.any(dphi >= TWO_PI):
        raise ValueError("dphi values must lie in [0, 2*pi)")
    frac = (ex2 * (1 << FRACTION_BITS)).astype(np.uint32)
    int_part = dphi.astype(np.uint32)
    frac_part = ((dphi - int_part) * (1 << PHASE_FRAC_BITS)).astype(np.uint32)
    return (
        (frac << FRACTION_BITS) | (int_part << PHASE_FRAC_BITS) | frac_part
    ).astype(np.uint32)


@dataclass(frozen=True)
class CrpDataset:
    """One PUF's worth of challenges and per-cell interim responses.

    interim has shape (n_challenges, n_cells, 2): 24-bit codes for Output 1
    (index 0) and Output 2 (index 1), in challenge-grid order.
    """

    grid: GridConfig
    puf_seed: int
    challenges: np.ndarray = field(repr=False)
    challenge_codes: np.ndarray = field(repr=False)
    interim: np.ndarray = field(repr=False)

    @property
    def n_challenges(self) -> int:
        return self.interim.shape[0]

    @property
    def n_cells(self) -> int:
        return self.interim.shape[1]


@dataclass(frozen=True)
class Interpretation:
    """Responses built from one bit index of one output across all cells.

    Response j's bit at position c is interim bit `bit_index` of cell c's
    chosen output; responses are stored as 24-bit integers in challenge
    order, alongside the challenge codes they answer.
    """

    output_index: int
    bit_index: int
    challenge_codes: np.ndarray = field(repr=False)
    responses: np.ndarray = field(repr=False)


def build_interpretation(ds: CrpDataset, output_index: int, bit_index: int) -> Interpretation:
    if output_index not in (1, 2):
        raise ValueError("output_index must be 1 or 2")
    if not 0 <= bit_index < TOTAL_BITS:
        raise ValueError("bit_index must lie in 0..23")
    codes = ds.interim[:, :, output_index - 1]
    n_cells = codes.shape[1]
    if n_cells > TOTAL_BITS:
        raise ValueError("more cells than response bits")
    responses = np.zeros(codes.shape[0], dtype=np.uint32)
    for cell in range(n_cells):
        bit = (codes[:, cell] >> np.uint32(TOTAL_BITS - 1 - bit_index)) & np.uint32(1)
        responses |= bit << np.uint32(TOTAL_BITS - 1 - cell)
    return Interpretation(
        output_index=output_index,
        bit_index=bit_index,
        challenge_codes=ds.challenge_codes,
        responses=responses,
    )


def all_interpretations(ds: CrpDataset):
    """Yield the 48 (output, bit) interpretations in a fixed order:
    Output 1 bits 0..23, then Output 2 bits 0..23."""
    for output_index in (1, 2):
        for bit_index in range(TOTAL_BITS):
            yield build_interpretation(ds, output_index, bit_index)
