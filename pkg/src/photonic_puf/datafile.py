"""Dataset file formats.

Text: UTF-8, `#`-prefixed key=value header lines, then one challenge per
line: ex2, dphi, challenge bits, and the interim bitstrings cell-major with
Output 1 before Output 2, all as 24-character '0'/'1' runs separated by
single spaces.

Binary (for full-size runs): same header after a magic line, then packed
records of 3-byte little-endian codes, challenge first.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import __version__
from .encoding import Bitstring24, ConfigError, CrpDataset, GridConfig, generate_challenge_grid

BINARY_MAGIC = b"#PPUFBIN v1\n"
HEADER_END = "# end-header"


class DataError(RuntimeError):
    """Malformed or inconsistent dataset file."""


@dataclass(frozen=True)
class RunManifest:
    """Run-level parameters every output file is traceable to."""

    version: str
    master_seed: int
    puf_count: int
    n_cells: int
    grid: GridConfig

    def entries(self) -> list[tuple[str, str]]:
        g = self.grid
        return [
            ("version", self.version),
            ("master_seed", str(self.master_seed)),
            ("puf_count", str(self.puf_count)),
            ("n_cells", str(self.n_cells)),
            ("ex2_step", repr(g.ex2_step)),
            ("ex2_count", str(g.ex2_count)),
            ("ex2_start_index", str(g.ex2_start_index)),
            ("dphi_step", repr(g.dphi_step)),
            ("dphi_count", str(g.dphi_count)),
            ("dphi_start_index", str(g.dphi_start_index)),
            ("challenge_order", "ex2-major"),
            ("interim_order", "cell-major,output1-then-output2"),
        ]

    def hash(self) -> str:
        payload = "\n".join(f"{k}={v}" for k, v in self.entries())
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def default_manifest(master_seed: int, puf_count: int, n_cells: int, grid: GridConfig) -> RunManifest:
    return RunManifest(
        version=__version__,
        master_seed=master_seed,
        puf_count=puf_count,
        n_cells=n_cells,
        grid=grid,
    )


def _header_lines(manifest: RunManifest, ds: CrpDataset) -> list[str]:
    lines = [f"# {k}={v}" for k, v in manifest.entries()]
    lines.append(f"# manifest_hash={manifest.hash()}")
    lines.append(f"# puf_seed={ds.puf_seed}")
    lines.append(f"# records={ds.n_challenges}")
    lines.append(HEADER_END)
    return lines


def _codes_to_bytes(codes: np.ndarray) -> bytes:
    """Pack uint32 24-bit codes as 3-byte little-endian runs."""
    flat = codes.astype("<u4").reshape(-1)
    raw = flat.view(np.uint8).reshape(-1, 4)[:, :3]
    return raw.tobytes()


def _bytes_to_codes(buf: bytes) -> np.ndarray:
    raw = np.frombuffer(buf, dtype=np.uint8).reshape(-1, 3).astype(np.uint32)
    return raw[:, 0] | (raw[:, 1] << np.uint32(8)) | (raw[:, 2] << np.uint32(16))


def write_dataset(path, ds: CrpDataset, manifest: RunManifest, binary: bool = False) -> None:
    if binary:
        _write_binary(path, ds, manifest)
    else:
        _write_text(path, ds, manifest)


def _write_text(path, ds: CrpDataset, manifest: RunManifest) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in _header_lines(manifest, ds):
            fh.write(line + "\n")
        for i in range(ds.n_challenges):
            fields = [
                f"{ds.challenges[i, 0]:.12g}",
                f"{ds.challenges[i, 1]:.12g}",
                Bitstring24(int(ds.challenge_codes[i])).to_string(),
            ]
            for cell in range(ds.n_cells):
                for out in range(2):
                    fields.append(Bitstring24(int(ds.interim[i, cell, out])).to_string())
            fh.write(" ".join(fields) + "\n")


def _write_binary(path, ds: CrpDataset, manifest: RunManifest) -> None:
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        for line in _header_lines(manifest, ds):
            fh.write(line.encode() + b"\n")
        record = np.concatenate(
            [
                ds.challenge_codes[:, np.newaxis],
                ds.interim.reshape(ds.n_challenges, -1),
            ],
            axis=1,
        )
        fh.write(_codes_to_bytes(record))


def _parse_header(lines: list[str]) -> dict[str, str]:
    header = {}
    for line in lines:
        body = line[1:].strip()
        if "=" in body:
            key, value = body.split("=", 1)
            header[key.strip()] = value.strip()
    return header


def _grid_from_header(header: dict[str, str]) -> GridConfig:
    try:
        return GridConfig(
            ex2_step=float(header["ex2_step"]),
            ex2_count=int(header["ex2_count"]),
            dphi_step=float(header["dphi_step"]),
            dphi_count=int(header["dphi_count"]),
            ex2_start_index=int(header["ex2_start_index"]),
            dphi_start_index=int(header["dphi_start_index"]),
        )
    except (KeyError, ValueError, ConfigError) as exc:
        raise DataError(f"bad grid header: {exc}") from exc


def read_dataset(path) -> tuple[CrpDataset, dict[str, str]]:
    """Load a dataset file (either format); returns (dataset, header)."""
    with open(path, "rb") as fh:
        head = fh.read(len(BINARY_MAGIC))
        if head == BINARY_MAGIC:
            return _read_binary(fh)
    return _read_text(path)


def _read_common(header: dict[str, str]):
    grid = _grid_from_header(header)
    try:
        puf_seed = int(header["puf_seed"])
        records = int(header["records"])
        n_cells = int(header["n_cells"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"incomplete header: {exc}") from exc
    return grid, puf_seed, records, n_cells


def _read_binary(fh) -> tuple[CrpDataset, dict[str, str]]:
    lines = []
    while True:
        line = fh.readline().decode("utf-8", errors="replace").rstrip("\n")
        if not line.startswith("#"):
            raise DataError("unterminated binary header")
        if line == HEADER_END:
            break
        lines.append(line)
    header = _parse_header(lines)
    grid, puf_seed, records, n_cells = _read_common(header)
    per_record = 1 + 2 * n_cells
    buf = fh.read()
    expected = records * per_record * 3
    if len(buf) != expected:
        raise DataError(
            f"record count mismatch: header declares {records} records "
            f"({expected} bytes), found {len(buf)} bytes"
        )
    codes = _bytes_to_codes(buf).reshape(records, per_record)
    challenges = generate_challenge_grid(grid)
    if challenges.shape[0] != records:
        raise DataError("record count does not match grid size")
    return (
        CrpDataset(
            grid=grid,
            puf_seed=puf_seed,
            challenges=challenges,
            challenge_codes=codes[:, 0].copy(),
            interim=codes[:, 1:].reshape(records, n_cells, 2).copy(),
        ),
        header,
    )


def _read_text(path) -> tuple[CrpDataset, dict[str, str]]:
    header_lines = []
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        in_header = True
        for line in fh:
            line = line.rstrip("\n")
            if in_header:
                if line == HEADER_END:
                    in_header = False
                    continue
                if not line.startswith("#"):
                    raise DataError("unterminated text header")
                header_lines.append(line)
                continue
            if line:
                rows.append(line)
    header = _parse_header(header_lines)
    grid, puf_seed, records, n_cells = _read_common(header)
    if len(rows) != records:
        raise DataError(f"record count mismatch: header declares {records}, found {len(rows)}")
    challenges = np.empty((records, 2), dtype=np.float64)
    challenge_codes = np.empty(records, dtype=np.uint32)
    interim = np.empty((records, n_cells, 2), dtype=np.uint32)
    for i, row in enumerate(rows):
        fields = row.split(" ")
        if len(fields) != 3 + 2 * n_cells:
            raise DataError(f"malformed record on line {i + 1} of data section")
        challenges[i, 0] = float(fields[0])
        challenges[i, 1] = float(fields[1])
        challenge_codes[i] = Bitstring24.from_string(fields[2]).value
        for cell in range(n_cells):
            for out in range(2):
                interim[i, cell, out] = Bitstring24.from_string(fields[3 + 2 * cell + out]).value
    return (
        CrpDataset(
            grid=grid,
            puf_seed=puf_seed,
            challenges=challenges,
            challenge_codes=challenge_codes,
            interim=interim,
        ),
        header,
    )


def check_compatible(headers: list[dict[str, str]]) -> None:
    """Reject mixed grid configurations across input files."""
    grid_keys = (
        "ex2_step",
        "ex2_count",
        "ex2_start_index",
        "dphi_step",
        "dphi_count",
        "dphi_start_index",
        "n_cells",
    )
    first = {k: headers[0].get(k) for k in grid_keys}
    for h in headers[1:]:
        if {k: h.get(k) for k in grid_keys} != first:
            raise DataError("input datasets have incompatible grid configurations")
