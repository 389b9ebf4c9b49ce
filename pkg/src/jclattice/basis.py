"""Fixed-excitation basis for finite Jaynes-Cummings lattices.

Each lattice site carries a cavity photon count n >= 0 and a qubit flag
s in {0, 1} (0 = down, 1 = up). Only configurations with exactly N total
excitations, sum_j (n_j + s_j) = N, belong to the sector; the Hamiltonian
conserves this number, so the sector is closed under all operators built
on top of it. For N = L = 6 the sector holds 5336 states instead of the
(2N+1)^L = 4826809 states of the truncated product space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Default safety cap. Dense fallback diagonalization must stay feasible.
DEFAULT_DIM_CAP = 200_000


class SectorError(ValueError):
    """Configuration does not belong to the fixed-excitation sector."""


class ResourceLimitError(RuntimeError):
    """Requested enumeration exceeds the configured size cap."""


@dataclass(frozen=True)
class LatticeShape:
    """Lattice geometry: `sites` unit cells holding `excitations` polaritons.

    The regime of interest is unit filling (excitations == sites),
    but any non-negative excitation number is accepted.
    """

    sites: int
    excitations: int

    def __post_init__(self):
        if self.sites < 1:
            raise ValueError(f"need at least one site, got {self.sites}")
        if self.excitations < 0:
            raise ValueError(f"negative excitation count: {self.excitations}")


def sector_dimension(shape: LatticeShape) -> int:
    """Closed-form sector size: sum_k C(L,k) * C(L+N-k-1, N-k).

    k counts qubits in the up state; the remaining N-k excitations are
    photons distributed over L sites with repetition.
    """
    L, N = shape.sites, shape.excitations
    return sum(
        math.comb(L, k) * math.comb(L + N - k - 1, N - k)
        for k in range(min(L, N) + 1)
    )


def dimension_oracle(shape: LatticeShape, product_cap: int = 1 << 26) -> int:
    """Count sector states by exhaustive filtering of the product space.

    Enumerates every photon configuration in {0..N}^L and every qubit
    configuration in {0,1}^L, keeping pairs whose total excitation number
    is exactly N. Independent of both `sector_dimension` and
    `enumerate_basis`; intended as a cross-check for small shapes.
    """
    L, N = shape.sites, shape.excitations
    total = (N + 1) ** L * 2**L
    if total > product_cap:
        raise ResourceLimitError(
            f"product space has {total} states, above cap {product_cap}"
        )
    photon_totals = np.indices((N + 1,) * L).reshape(L, -1).sum(axis=0)
    qubit_totals = np.indices((2,) * L).reshape(L, -1).sum(axis=0)
    qubit_hist = np.bincount(qubit_totals, minlength=N + 1)
    valid = photon_totals[photon_totals <= N]
    return int(qubit_hist[N - valid].sum())


class BasisTable:
    """Ordered enumeration of all fixed-N configurations with index maps.

    A configuration is a tuple of per-site (photons, qubit) pairs. The
    ordering is lexicographic over sites left to right with per-site key
    (qubit, photons): qubit down sorts before up, photon number ascending.
    This puts (1, down) before (0, up) in the one-excitation doublet and
    is byte-stable across runs.

    Immutable after construction; safe for concurrent reads.
    """

    def __init__(self, shape: LatticeShape, states: tuple):
        self.shape = shape
        self.states = states
        self.index = {c: i for i, c in enumerate(states)}
        arr = np.asarray(states, dtype=np.int64).reshape(len(states), shape.sites, 2)
        # Read-only array views used by the operator builders.
        self.photons = arr[:, :, 0]
        self.qubits = arr[:, :, 1]
        self.photons.flags.writeable = False
        self.qubits.flags.writeable = False

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __repr__(self):
        return (
            f"BasisTable(L={self.shape.sites}, N={self.shape.excitations}, "
            f"dim={self.dim})"
        )


def enumerate_basis(shape: LatticeShape, dim_cap: int = DEFAULT_DIM_CAP) -> BasisTable:
    """Enumerate every configuration with exactly N total excitations.

    Raises ResourceLimitError when the predicted dimension exceeds
    `dim_cap` (the dense fallback eigensolver must stay feasible).
    """
    predicted = sector_dimension(shape)
    if predicted > dim_cap:
        raise ResourceLimitError(
            f"sector dimension {predicted} exceeds cap {dim_cap}"
        )
    L = shape.sites
    out = []
    acc = []

    def recurse(site: int, remaining: int):
        if site == L:
            if remaining == 0:
                out.append(tuple(acc))
            return
        # Per-site key (qubit, photons): down states first, photons ascending.
        for s in (0, 1):
            if s > remaining:
                break
            for n in range(remaining - s + 1):
                acc.append((n, s))
                recurse(site + 1, remaining - s - n)
                acc.pop()

    recurse(0, shape.excitations)
    if len(out) != predicted:
        raise AssertionError(
            f"enumeration produced {len(out)} states, expected {predicted}"
        )
    return BasisTable(shape, tuple(out))


def index_of(table: BasisTable, config) -> int:
    """Ordinal of `config` in the table; inverse of `table.states[i]`."""
    config = tuple((int(n), int(s)) for n, s in config)
    if len(config) != table.shape.sites:
        raise SectorError(
            f"config has {len(config)} sites, table has {table.shape.sites}"
        )
    total = sum(n + s for n, s in config)
    if total != table.shape.excitations:
        raise SectorError(
            f"config holds {total} excitations, sector requires "
            f"{table.shape.excitations}"
        )
    try:
        return table.index[config]
    except KeyError:
        raise SectorError(f"malformed configuration {config}") from None


def translate_config(config, shift: int):
    """Cyclic site shift under the periodic boundary.

    Site j of the output equals site (j - shift) mod L of the input, so
    shift = L (or any multiple) is the identity.
    """
    config = tuple(config)
    L = len(config)
    shift %= L
    return tuple(config[(j - shift) % L] for j in range(L))


def write_basis_text(table: BasisTable, path) -> None:
    """Export the basis, one configuration per line: `n_1 s_1 n_2 s_2 ...`."""
    shape = table.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# L={shape.sites} N={shape.excitations} dim={table.dim}\n")
        for config in table.states:
            fh.write(" ".join(f"{n} {s}" for n, s in config) + "\n")
