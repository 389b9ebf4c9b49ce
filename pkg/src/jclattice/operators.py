"""Sparse operators over the fixed-excitation sector.

Energy convention: inside a fixed-N sector the bare frequencies only add
the constant N*omega_z, so the Hamiltonian is assembled as

    H = Delta * sum_j n_j
        + g * sum_j (a_j^dag sig_j^- + sig_j^+ a_j)
        - J * sum_j (a_j^dag a_{j+1} + a_{j+1}^dag a_j),

with Delta = omega_c - omega_z. This reproduces the single-site doublet
energies E(n, +/-) = (n - 1/2) * Delta +/- chi(n) / 2 measured from the
empty-site level. When explicit omega_c / omega_z are supplied the
constant N*omega_z is restored.

All Hermitian builders insert mirrored (row, col) / (col, row) entries
with identical values, so the assembled matrices equal their transpose
exactly, not merely to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import BasisTable, translate_config

DISSIPATION_CONVENTIONS = ("literal-sigma-z", "number-conserving")


@dataclass(frozen=True)
class LatticeParams:
    """Dimensionless couplings of the lattice, in units of the g reference.

    Only the detuning enters sector-restricted spectra; omega_c/omega_z
    are optional and, when both given, override `delta` and add the
    constant N*omega_z to the diagonal.
    """

    g: float
    J: float = 0.0
    delta: float = 0.0
    kappa: float = 0.0
    gamma: float = 0.0
    omega_c: float | None = None
    omega_z: float | None = None

    def __post_init__(self):
        if (self.omega_c is None) != (self.omega_z is None):
            raise ValueError("omega_c and omega_z must be given together")
        if self.omega_c is not None:
            object.__setattr__(self, "delta", self.omega_c - self.omega_z)


def _mirrored_csr(rows, cols, vals, dim) -> sp.csr_matrix:
    m = sp.csr_matrix(
        (np.asarray(vals, dtype=float), (rows, cols)), shape=(dim, dim)
    )
    m.sum_duplicates()
    m.sort_indices()
    return m


def number_diagonal(table: BasisTable) -> np.ndarray:
    """Diagonal of sum_j a_j^dag a_j as a dense vector."""
    return table.photons.sum(axis=1).astype(float)


def qubit_up_diagonal(table: BasisTable) -> np.ndarray:
    """Diagonal of sum_j (sigma_jz + 1)/2 (number of excited qubits)."""
    return table.qubits.sum(axis=1).astype(float)


def build_number_operator(table: BasisTable) -> sp.csr_matrix:
    """sum_j a_j^dag a_j = dH/dDelta in the sector frame."""
    return sp.diags(number_diagonal(table), format="csr")


def build_coupling(table: BasisTable) -> sp.csr_matrix:
    """sum_j (a_j^dag sig_j^- + sig_j^+ a_j) = dH/dg."""
    dim = table.dim
    rows, cols, vals = [], [], []
    for i, config in enumerate(table.states):
        for j, (n, s) in enumerate(config):
            if s != 1:
                continue
            flipped = list(config)
            flipped[j] = (n + 1, 0)
            k = table.index[tuple(flipped)]
            amp = np.sqrt(n + 1)
            rows += [k, i]
            cols += [i, k]
            vals += [amp, amp]
    return _mirrored_csr(rows, cols, vals, dim)


def build_hopping(table: BasisTable) -> sp.csr_matrix:
    """sum_j (a_j^dag a_{j+1} + a_{j+1}^dag a_j) with periodic boundary.

    The -J factor is applied at composition time. For L = 1 this is the
    zero operator (a periodic wrap onto the same site is unphysical);
    for L = 2 the sum over j = 1, 2 hits the single bond twice, giving
    matrix elements of 2 between one-photon-exchange configurations.
    """
    dim = table.dim
    L = table.shape.sites
    if L == 1:
        return sp.csr_matrix((dim, dim))
    rows, cols, vals = [], [], []
    for i, config in enumerate(table.states):
        for j in range(L):
            jp = (j + 1) % L
            n_from, s_from = config[jp]
            if n_from == 0:
                continue
            n_to, s_to = config[j]
            moved = list(config)
            moved[jp] = (n_from - 1, s_from)
            moved[j] = (n_to + 1, s_to)
            k = table.index[tuple(moved)]
            amp = np.sqrt(n_from) * np.sqrt(n_to + 1)
            rows += [k, i]
            cols += [i, k]
            vals += [amp, amp]
    return _mirrored_csr(rows, cols, vals, dim)


def build_h0(table: BasisTable, params: LatticeParams) -> sp.csr_matrix:
    """Uncoupled JC-site Hamiltonian over the sector (no hopping)."""
    h = sp.diags(params.delta * number_diagonal(table), format="csr")
    h = h + params.g * build_coupling(table)
    if params.omega_z is not None:
        shift = params.omega_z * table.shape.excitations
        h = h + shift * sp.identity(table.dim, format="csr")
    return h.tocsr()


def build_hamiltonian(table: BasisTable, params: LatticeParams) -> sp.csr_matrix:
    """Full lattice Hamiltonian H = H0 - J * hopping."""
    h = build_h0(table, params)
    if params.J != 0.0 and table.shape.sites > 1:
        h = (h - params.J * build_hopping(table)).tocsr()
    h.sort_indices()
    return h


def build_correlator(table: BasisTable, i: int, j: int) -> sp.csr_matrix:
    """a_i^dag a_j for 1-based sites i, j (sector-closed since i != j moves
    one photon and i == j is the site photon number)."""
    L = table.shape.sites
    if not (1 <= i <= L and 1 <= j <= L):
        raise ValueError(f"sites must be in 1..{L}, got ({i}, {j})")
    si, sj = i - 1, j - 1
    dim = table.dim
    if si == sj:
        return sp.diags(table.photons[:, si].astype(float), format="csr")
    rows, cols, vals = [], [], []
    for b, config in enumerate(table.states):
        n_from, s_from = config[sj]
        if n_from == 0:
            continue
        n_to, s_to = config[si]
        moved = list(config)
        moved[sj] = (n_from - 1, s_from)
        moved[si] = (n_to + 1, s_to)
        k = table.index[tuple(moved)]
        rows.append(k)
        cols.append(b)
        vals.append(np.sqrt(n_from) * np.sqrt(n_to + 1))
    m = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    m.sort_indices()
    return m


def build_translation(table: BasisTable) -> sp.csr_matrix:
    """Permutation matrix T shifting every configuration by one site."""
    dim = table.dim
    rows = np.empty(dim, dtype=np.int64)
    for i, config in enumerate(table.states):
        rows[i] = table.index[translate_config(config, 1)]
    return sp.csr_matrix(
        (np.ones(dim), (rows, np.arange(dim))), shape=(dim, dim)
    )


def dissipative_rates(
    table: BasisTable, kappa: float, gamma: float, convention: str = "literal-sigma-z"
) -> np.ndarray:
    """Real diagonal D such that the non-Hermitian Hamiltonian is H - i*D.

    literal-sigma-z:    D = (kappa/2) sum_j n_j + (gamma/2) sum_j sigma_jz
    number-conserving:  D = (kappa/2) sum_j n_j + (gamma/2) sum_j (sigma_jz+1)/2

    The literal form is the printed one; inside a fixed-N sector it differs
    from a pure decay by the constant +gamma*L/2, which uniformly inflates
    the norm. The number-conserving form is the no-jump effective decay.
    """
    if kappa < 0 or gamma < 0:
        raise ValueError("decay rates must be non-negative")
    if convention not in DISSIPATION_CONVENTIONS:
        raise ValueError(
            f"unknown convention {convention!r}, expected one of "
            f"{DISSIPATION_CONVENTIONS}"
        )
    n_up = qubit_up_diagonal(table)
    d = (kappa / 2.0) * number_diagonal(table)
    if convention == "literal-sigma-z":
        d = d + (gamma / 2.0) * (2.0 * n_up - table.shape.sites)
    else:
        d = d + (gamma / 2.0) * n_up
    return d


def build_dissipative_diagonal(
    table: BasisTable, kappa: float, gamma: float, convention: str = "literal-sigma-z"
) -> sp.csr_matrix:
    """The purely imaginary diagonal -i*D added to H for dissipative runs."""
    return sp.diags(
        -1j * dissipative_rates(table, kappa, gamma, convention), format="csr"
    )


def write_operator_text(matrix, path) -> None:
    """Dump a sparse operator as `row col value` lines for cross-checking."""
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# dim={matrix.shape[0]} nnz={coo.nnz}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {float(v)!r}\n")


class HamiltonianTemplates:
    """Structural blocks sharing one sparsity pattern for fast H(t) assembly.

    The detuning diagonal, coupling and hopping blocks are expanded onto the
    union pattern (plus the full diagonal) once; `assemble` then only scales
    and sums aligned data vectors, which makes per-step Hamiltonians and
    dH/dp expectations essentially free.

    The shared matrix returned by `assemble` is reused between calls;
    callers that need to keep a Hamiltonian must copy it.
    """

    def __init__(self, table: BasisTable):
        self.table = table
        self.dim = table.dim
        self.sites = table.shape.sites
        self.number_diag = number_diagonal(table)
        self.coupling = build_coupling(table)
        self.hopping = build_hopping(table)
        self.translation = build_translation(table)

        blocks = [
            sp.diags(self.number_diag).tocsr(),
            self.coupling,
            self.hopping,
            sp.identity(self.dim, format="csr"),  # keeps the full diagonal addressable
        ]
        keys = []
        for block in blocks:
            coo = block.tocoo()
            keys.append(coo.row.astype(np.int64) * self.dim + coo.col)
        union = np.unique(np.concatenate(keys))
        shared = sp.csr_matrix(
            (np.zeros(union.size), (union // self.dim, union % self.dim)),
            shape=(self.dim, self.dim),
        )
        shared.sort_indices()
        self._shared = shared
        self._union_keys = union

        def aligned(block):
            coo = block.tocoo()
            k = coo.row.astype(np.int64) * self.dim + coo.col
            order = np.argsort(k, kind="stable")
            vec = np.zeros(union.size)
            vec[np.searchsorted(union, k[order])] = coo.data[order]
            return vec

        self.data_number = aligned(blocks[0])
        self.data_coupling = aligned(self.coupling)
        self.data_hopping = aligned(self.hopping)
        self.diag_positions = np.searchsorted(
            union, np.arange(self.dim, dtype=np.int64) * self.dim + np.arange(self.dim)
        )

    def data_for(self, g: float, J: float, delta: float) -> np.ndarray:
        return (
            delta * self.data_number
            + g * self.data_coupling
            - J * self.data_hopping
        )

    def assemble(self, g: float, J: float, delta: float) -> sp.csr_matrix:
        """Hamiltonian at the given couplings, backed by the shared pattern."""
        self._shared.data = self.data_for(g, J, delta)
        return self._shared

    def assemble_copy(self, g: float, J: float, delta: float) -> sp.csr_matrix:
        return self.assemble(g, J, delta).copy()
