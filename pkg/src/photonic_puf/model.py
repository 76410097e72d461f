"""Seeded PUF instances: 24 cells of three trench couplers joined by
waveguides, each cell producing two output states per challenge.

Every cell is modeled as a shared prefix path (input waveguide, coupler 1,
mid waveguide, coupler 2) feeding two independent suffix arms (arm
waveguide, coupler-3 port). Each component is a Haar-random unitary, so
each composed path is unitary as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jones import (
    IDENTITY,
    JonesMatrix,
    JonesVector,
    apply,
    extract_observables,
    haar_random_unitary,
    validate_lossless,
    wrap_phase,
)

N_PREFIX_COMPONENTS = 4
N_SUFFIX_COMPONENTS = 2


@dataclass(frozen=True)
class CellModel:
    """One photonic cell: shared prefix path plus two output arms."""

    prefix: JonesMatrix
    suffix1: JonesMatrix
    suffix2: JonesMatrix

    def output_matrix(self, output_index: int) -> JonesMatrix:
        """Full transfer matrix from input to Output 1 or Output 2."""
        if output_index == 1:
            return self.suffix1 @ self.prefix
        if output_index == 2:
            return self.suffix2 @ self.prefix
        raise ValueError("output_index must be 1 or 2")


@dataclass(frozen=True)
class PufInstance:
    seed: int
    cells: tuple[CellModel, ...]

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def output_matrices(self) -> np.ndarray:
        """Array of shape (n_cells, 2, 2, 2): composed input-to-output
        matrices, [cell, output, row, col]. Feeds the bulk kernel."""
        out = np.empty((self.n_cells, 2, 2, 2), dtype=np.complex128)
        for j, cell in enumerate(self.cells):
            out[j, 0] = cell.output_matrix(1).m
            out[j, 1] = cell.output_matrix(2).m
        return out


def _cell_rng(seed: int, cell_index: int) -> np.random.Generator:
    # stream split: per-cell stream keyed by seed XOR cell index; SeedSequence
    # hashes the key so nearby PUF seeds still give unrelated streams
    key = (seed ^ cell_index) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def _build_cell(rng: np.random.Generator) -> CellModel:
    # draw order (fixed so seeds are portable): 4 prefix components in
    # propagation order, then suffix arm 1's two, then suffix arm 2's two
    prefix = IDENTITY
    for _ in range(N_PREFIX_COMPONENTS):
        prefix = haar_random_unitary(rng) @ prefix
    suffix1 = IDENTITY
    for _ in range(N_SUFFIX_COMPONENTS):
        suffix1 = haar_random_unitary(rng) @ suffix1
    suffix2 = IDENTITY
    for _ in range(N_SUFFIX_COMPONENTS):
        suffix2 = haar_random_unitary(rng) @ suffix2
    return CellModel(prefix=prefix, suffix1=suffix1, suffix2=suffix2)


def build_puf(seed: int, n_cells: int = 24) -> PufInstance:
    """Construct a reproducible PUF instance from a 64-bit seed."""
    if n_cells < 1:
        raise ValueError("n_cells must be at least 1")
    cells = []
    for j in range(n_cells):
        cell = _build_cell(_cell_rng(seed, j))
        for m in (cell.prefix, cell.suffix1, cell.suffix2):
            assert validate_lossless(m)
        cells.append(cell)
    return PufInstance(seed=seed, cells=tuple(cells))


def evaluate_cell(cell: CellModel, c: JonesVector) -> tuple[JonesVector, JonesVector]:
    """Send a challenge through one cell; returns (Output 1, Output 2)."""
    mid = apply(cell.prefix, c)
    return apply(cell.suffix1, mid), apply(cell.suffix2, mid)


def evaluate_puf(puf: PufInstance, c: JonesVector) -> list[tuple[JonesVector, JonesVector]]:
    """Send one challenge through every cell, preserving cell order."""
    return [evaluate_cell(cell, c) for cell in puf.cells]


def evaluate_puf_noisy(
    puf: PufInstance,
    c: JonesVector,
    sigma_ex2: float,
    sigma_phase: float,
    rng: np.random.Generator,
) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Evaluate a challenge and perturb the output observables with Gaussian
    noise, for synthetic repeatability studies. ex2 is clamped to [0, 1) and
    dphi wrapped into [0, 2*pi)."""
    if sigma_ex2 < 0 or sigma_phase < 0:
        raise ValueError("noise sigmas must be non-negative")
    ex2_max = np.nextafter(1.0, 0.0)
    out = []
    for out1, out2 in evaluate_puf(puf, c):
        pair = []
        for v in (out1, out2):
            ex2, dphi = extract_observables(v)
            if sigma_ex2 > 0:
                ex2 = float(np.clip(ex2 + rng.normal(0.0, sigma_ex2), 0.0, ex2_max))
            if sigma_phase > 0:
                dphi = wrap_phase(dphi + rng.normal(0.0, sigma_phase))
            pair.append((ex2, dphi))
        out.append((pair[0], pair[1]))
    return out
