"""Cylinder lattice geometry, cluster stabilizers, and fractal symmetries.

Sites are (i, j, alpha): ring coordinate i (mod L), row j (0 at the top,
increasing downward = forward CA time for the a sublattice), alpha in
{'a', 'b'}.  Qubit index = 2*(j*L + i) + (0 for a, 1 for b), used as the
bit position in packed Pauli words and as the basis bit in dense states.

Boundary convention: the first and last rows have dangling sites; only
bulk stabilizers (full neighborhood present) are emitted.  On this open
cylinder every CA trajectory seeded on the boundary row is a symmetry;
the periodic (cycle-class) subgroup that fixes k(L) is exposed
separately for the kernel bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .f2ca import (
    CARule,
    evolve,
    evolve_pow,
    evolve_rev,
    popcount_parity,
    symmetry_rank,
)
from .pauli import PauliOp

__all__ = [
    "LatticeSpec",
    "Site",
    "neighbors",
    "stabilizers",
    "symmetry_from_seed",
    "symmetry_stabilizer_completion",
    "periodic_symmetry_basis",
    "appendix_b_check",
    "build_cluster_state_small",
    "apply_pauli_dense",
    "tn_physical_permutation",
]


@dataclass(frozen=True)
class Site:
    i: int
    j: int
    alpha: str  # 'a' or 'b'

    def __iter__(self):
        yield from (self.i, self.j, self.alpha)


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    L: int
    n_rows: int

    def __post_init__(self):
        CARule(self.kind, self.L)
        if self.n_rows < 1:
            raise ValueError("need at least one row")

    @property
    def n_qubits(self) -> int:
        return 2 * self.L * self.n_rows

    def qubit_index(self, site: Site) -> int:
        i, j, alpha = site
        if not (0 <= i < self.L and 0 <= j < self.n_rows and alpha in "ab"):
            raise ValueError(f"site {site} outside the lattice")
        return 2 * (j * self.L + i) + (0 if alpha == "a" else 1)

    def contains(self, site: Site) -> bool:
        return 0 <= site.i < self.L and 0 <= site.j < self.n_rows and site.alpha in "ab"


def neighbors(spec: LatticeSpec, site: Site) -> list:
    """Graph neighbors of a site (existing sites only, ring wraps in i)."""
    if not spec.contains(site):
        raise ValueError(f"site {site} outside the lattice")
    L = spec.L
    i, j, alpha = site
    if alpha == "a":
        cand = [(i, j - 1), (i, j), ((i + 1) % L, j)]
        if spec.kind == "fc":
            cand.insert(1, ((i - 1) % L, j))
        other = "b"
    else:
        cand = [(i, j + 1), (i, j), ((i - 1) % L, j)]
        if spec.kind == "fc":
            cand.insert(1, ((i + 1) % L, j))
        other = "a"
    return [Site(x, y, other) for (x, y) in cand if 0 <= y < spec.n_rows]


def _full_neighborhood(spec: LatticeSpec, site: Site) -> bool:
    if site.alpha == "a":
        return site.j >= 1
    return site.j <= spec.n_rows - 2


def stabilizers(spec: LatticeSpec) -> list:
    """Bulk cluster-Hamiltonian generators X_s prod_{s' in Gamma(s)} Z_s'."""
    gens = []
    for j in range(spec.n_rows):
        for i in range(spec.L):
            for alpha in "ab":
                s = Site(i, j, alpha)
                if not _full_neighborhood(spec, s):
                    continue
                x = 1 << spec.qubit_index(s)
                z = 0
                for t in neighbors(spec, s):
                    z |= 1 << spec.qubit_index(t)
                gens.append(PauliOp(spec.n_qubits, xbits=x, zbits=z))
    return gens


def _trajectory_rows(spec: LatticeSpec, sublattice: str, seed: int, j0: int) -> list:
    """Per-row CA words of the trajectory through (seed, j0)."""
    rule = CARule(spec.kind, spec.L)
    rows = [0] * spec.n_rows
    rows[j0] = seed
    if sublattice == "a":
        for j in range(j0 + 1, spec.n_rows):
            rows[j] = evolve(rule, rows[j - 1])
        for j in range(j0 - 1, -1, -1):
            rows[j] = evolve_pow(rule, rows[j + 1], -1)
    else:
        # b trajectories satisfy q(j-1) = fbar q(j): natural evolution is upward
        for j in range(j0 - 1, -1, -1):
            rows[j] = evolve_rev(rule, rows[j + 1])
        for j in range(j0 + 1, spec.n_rows):
            rows[j] = evolve_pow(rule, rows[j - 1], -1, reversed=True)
    return rows


def symmetry_from_seed(spec: LatticeSpec, sublattice: str, seed: int, j0: int) -> PauliOp:
    """Fractal symmetry: X on the CA trajectory through (seed, row j0).

    Inverse evolution is implied for rows before j0 (a) or after j0 (b);
    for the SC that restricts to even seeds.  Commutation with every bulk
    stabilizer is asserted at build time.
    """
    if sublattice not in "ab":
        raise ValueError("sublattice must be 'a' or 'b'")
    if not 0 <= j0 < spec.n_rows:
        raise ValueError("seed row outside the lattice")
    rows = _trajectory_rows(spec, sublattice, seed, j0)
    x = 0
    off = 0 if sublattice == "a" else 1
    for j, word in enumerate(rows):
        for i in range(spec.L):
            if (word >> i) & 1:
                x |= 1 << (2 * (j * spec.L + i) + off)
    op = PauliOp(spec.n_qubits, xbits=x)
    for g in stabilizers(spec):
        if not op.commutes_with(g):
            raise AssertionError(
                f"trajectory through ({seed:#x}, row {j0}) fails to commute"
            )
    return op


def symmetry_stabilizer_completion(spec: LatticeSpec, sublattice: str, seed: int,
                                   j0: int) -> PauliOp:
    """The exact stabilizer-group element behind a fractal trajectory.

    On the open cylinder the pure-X trajectory is the product of bulk
    stabilizers only up to one uncancelled Z word on the outgoing
    boundary row (the would-be next CA row); this returns
    X(trajectory) * Z(continuation), which fixes the finite cluster
    state exactly.
    """
    rule = CARule(spec.kind, spec.L)
    rows = _trajectory_rows(spec, sublattice, seed, j0)
    op = symmetry_from_seed(spec, sublattice, seed, j0)
    z = 0
    if sublattice == "a":
        cont = evolve(rule, rows[-1])
        jz, off = spec.n_rows - 1, 1
    else:
        cont = evolve_rev(rule, rows[0])
        jz, off = 0, 0
    for i in range(spec.L):
        if (cont >> i) & 1:
            z |= 1 << (2 * (jz * spec.L + i) + off)
    return op * PauliOp(spec.n_qubits, zbits=z)


def periodic_symmetry_basis(spec: LatticeSpec, sublattice: str) -> list:
    """Basis of the cycle-class symmetries: k(L) generators.

    fc: all seeds; sc: the even-seed subspace.  a seeds sit on row 0,
    b seeds on the last row, so no inverse evolution is needed.
    """
    L = spec.L
    j0 = 0 if sublattice == "a" else spec.n_rows - 1
    if spec.kind == "fc":
        seeds = [1 << i for i in range(L)]
    else:
        seeds = [(1 << i) | (1 << (i + 1)) for i in range(L - 1)]
    ops = [symmetry_from_seed(spec, sublattice, s, j0) for s in seeds]
    assert len(ops) == symmetry_rank(CARule(spec.kind, L))
    return ops


# --------------------------------------------------------------------------
# GF(2) helpers on packed words
# --------------------------------------------------------------------------

def _gf2_rank(vectors) -> int:
    basis = {}
    rank = 0
    for v in vectors:
        w = v
        while w:
            lead = w.bit_length() - 1
            if lead in basis:
                w ^= basis[lead]
            else:
                basis[lead] = w
                rank += 1
                break
    return rank


def _in_span(vectors, target) -> bool:
    basis = {}
    for v in vectors:
        w = v
        while w:
            lead = w.bit_length() - 1
            if lead in basis:
                w ^= basis[lead]
            else:
                basis[lead] = w
                break
    w = target
    while w:
        lead = w.bit_length() - 1
        if lead not in basis:
            return False
        w ^= basis[lead]
    return True


def _sub_index(spec: LatticeSpec, i: int, j: int) -> int:
    """Bit position of a-site (i,j) within a single-sublattice word."""
    return j * spec.L + i


def appendix_b_check(spec: LatticeSpec, sublattice: str = "a") -> dict:
    """Kernel equality for symmetric single-sublattice Z operators.

    K = Z patterns commuting with every periodic fractal symmetry of the
    sublattice; R = span of the neighborhood Z clusters F_ij (plus, for
    the SC, the boundary whole-row that the bulk moves cannot reach).
    Returns a report with the ranks and the equality verdict; all
    arithmetic is exact over GF(2).
    """
    if spec.n_rows < 2:
        raise ValueError("kernel check needs at least two rows")
    L, rows = spec.L, spec.n_rows
    rule = CARule(spec.kind, L)

    # trajectory words of the periodic symmetry basis, restricted to the
    # sublattice (bit j*L+i = row j, site i)
    j0 = 0 if sublattice == "a" else rows - 1
    if spec.kind == "fc":
        seeds = [1 << i for i in range(L)]
    else:
        seeds = [(1 << i) | (1 << (i + 1)) for i in range(L - 1)]
    trajs = []
    for s in seeds:
        rw = _trajectory_rows(spec, sublattice, s, j0)
        trajs.append(sum(rw[j] << (j * L) for j in range(rows)))
    t_rank = _gf2_rank(trajs)
    dim_k = L * rows - t_rank

    # F generators: Z neighborhoods living purely on this sublattice
    fs = []
    if sublattice == "a":
        for j in range(rows - 1):
            for i in range(L):
                w = 1 << _sub_index(spec, i, j + 1)
                w |= 1 << _sub_index(spec, i, j)
                w |= 1 << _sub_index(spec, (i - 1) % L, j)
                if spec.kind == "fc":
                    w |= 1 << _sub_index(spec, (i + 1) % L, j)
                fs.append(w)
    else:
        for j in range(1, rows):
            for i in range(L):
                w = 1 << _sub_index(spec, i, j - 1)
                w |= 1 << _sub_index(spec, i, j)
                w |= 1 << _sub_index(spec, (i + 1) % L, j)
                if spec.kind == "fc":
                    w |= 1 << _sub_index(spec, (i - 1) % L, j)
                fs.append(w)
    generators = list(fs)
    boundary_row = None
    if spec.kind == "sc":
        # products of F along a row eliminate whole rows except the one on
        # the open edge; it commutes with the even-seed symmetries and is
        # appended as the boundary generator.
        jb = 0 if sublattice == "a" else rows - 1
        boundary_row = sum(1 << _sub_index(spec, i, jb) for i in range(L))
        generators.append(boundary_row)

    in_kernel = all(
        all(popcount_parity(g & t) == 0 for t in trajs) for g in generators
    )
    r_rank = _gf2_rank(generators)
    equal = in_kernel and (r_rank == dim_k)
    return {
        "kind": spec.kind,
        "L": L,
        "n_rows": rows,
        "sublattice": sublattice,
        "dim_kernel": dim_k,
        "rank_generators": r_rank,
        "generators_in_kernel": in_kernel,
        "kernel_equals_span": equal,
        "boundary_row_added": boundary_row is not None,
    }


# --------------------------------------------------------------------------
# dense cluster-state oracle
# --------------------------------------------------------------------------

def _edge_list(spec: LatticeSpec) -> list:
    edges = set()
    for j in range(spec.n_rows):
        for i in range(spec.L):
            s = Site(i, j, "a")
            for t in neighbors(spec, s):
                edges.add((spec.qubit_index(s), spec.qubit_index(t)))
    return sorted(edges)


def build_cluster_state_small(spec: LatticeSpec) -> np.ndarray:
    """Dense cluster state: CZ over all edges applied to |+...+>."""
    n = spec.n_qubits
    if n > 24:
        raise ValueError("dense cluster state capped at 24 qubits")
    z = np.arange(1 << n, dtype=np.int64)
    signs = np.zeros(1 << n, dtype=np.int64)
    for (q1, q2) in _edge_list(spec):
        signs ^= ((z >> q1) & (z >> q2)) & 1
    amps = (1.0 - 2.0 * signs) / 2 ** (n / 2)
    return amps.astype(np.complex128)


def apply_pauli_dense(op: PauliOp, psi: np.ndarray) -> np.ndarray:
    """Apply a packed Pauli to a dense state (basis bit = qubit index)."""
    n = op.n
    if psi.shape != (1 << n,):
        raise ValueError("state dimension mismatch")
    idx = np.arange(1 << n)
    src = idx ^ op.xbits
    signs = 1.0 - 2.0 * (np.bitwise_count(src & op.zbits) & 1)
    return (1j ** op.phase) * signs * psi[src]


def tn_physical_permutation(spec: LatticeSpec) -> np.ndarray:
    """Map dense-state index -> tensor-network patch index.

    The patch packs each cell as p = pa*2 + pb at base-4 digit i of its
    row, rows stacked with row 0 at the highest digits.
    """
    n = spec.n_qubits
    L, rows = spec.L, spec.n_rows
    z = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(z)
    for j in range(rows):
        row_word = np.zeros_like(z)
        for i in range(L):
            pa = (z >> (2 * (j * L + i))) & 1
            pb = (z >> (2 * (j * L + i) + 1)) & 1
            row_word += (pa * 2 + pb) << (2 * i)
        out = (out << (2 * L)) + row_word
    return out
