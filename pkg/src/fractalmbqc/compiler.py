"""Compile logical circuits into adaptive measurement patterns.

Logical encodings (virtual ring of L qubits):

* fc: logical qubit k lives on even virtual qubit 2k (lZ_k = Z_2k,
  lX_k = X_2k); odd virtual qubits are frozen to Z=+1 by the Z-basis
  initialization, and outcome-driven deviations ride in the Pauli frame.
  L/2 logical qubits.
* sc: lZ_k = Z_2k Z_2k+1, lX_k = Xbar X_2k on the even-parity sector;
  (L-1)/2 logical qubits, virtual qubit L-1 is spare.

Elementary blocks carry a single nonzero gate angle:

    gate            sublattice  position (i0, j0)
    fc rot_lz(k)    a           (2k, 0)
    fc rot_lx(k)    b           (2k, L-1)
    fc entangle(k)  a           (2k+1, 1)         frozen middle qubit
    sc rot_lz(k)    a           (2k+1, 1)
    sc rot_lx(k)    b           (2k, L-1)         + parity-restoring block
    sc entangle(k)  a           (2k+3, 3)         k < (L-3)/2 only

The sc entangler position follows from the backward evolution
fbar^j e_i having support {i-j..i}; pairs of logical qubits separated by
a power of two admit a single-block entangler the same way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .f2ca import CARule, evolve_pow
from .pauli import PauliOp, pauli_x, pauli_z

__all__ = [
    "LogicalGate",
    "BlockSpec",
    "MeasurementPattern",
    "Encoding",
    "encoding",
    "n_logical",
    "elementary_gate_table",
    "compile_circuit",
    "schedule_sparse_entangler",
    "circuit_from_json",
    "circuit_to_json",
]

CIRCUIT_FORMAT_VERSION = 1
PATTERN_FORMAT_VERSION = 1

GATE_TYPES = ("init_z", "readout_z", "rot_lz", "rot_lx", "entangle_zz")


@dataclass(frozen=True)
class LogicalGate:
    kind: str                 # one of GATE_TYPES
    qubit: int | None = None  # target (entangle_zz acts on qubit, qubit+1)
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_TYPES:
            raise ValueError(f"unknown gate type {self.kind!r}")
        if self.kind in ("rot_lz", "rot_lx", "entangle_zz") and self.qubit is None:
            raise ValueError(f"{self.kind} needs a target qubit")


def n_logical(kind: str, L: int) -> int:
    CARule(kind, L)
    return L // 2 if kind == "fc" else (L - 1) // 2


@dataclass(frozen=True)
class Encoding:
    """Logical Pauli operators on the virtual ring."""

    kind: str
    L: int
    lx: tuple  # PauliOp per logical qubit
    lz: tuple

    @property
    def n_qubits(self) -> int:
        return n_logical(self.kind, self.L)

    def encode_basis_index(self, b: int) -> int:
        """Virtual basis index of the encoded computational state |b>."""
        x = 0
        for k in range(self.n_qubits):
            if (b >> k) & 1:
                x ^= self.lx[k].xbits
        return x

    def encode_state(self, logical: np.ndarray) -> np.ndarray:
        """Isometry onto the virtual space, unused degrees at their
        initialized values."""
        nl = self.n_qubits
        if logical.shape != (1 << nl,):
            raise ValueError("logical state dimension mismatch")
        out = np.zeros(1 << self.L, dtype=np.complex128)
        for b in range(1 << nl):
            out[self.encode_basis_index(b)] = logical[b]
        return out


def encoding(kind: str, L: int) -> Encoding:
    nl = n_logical(kind, L)
    full = (1 << L) - 1
    lx, lz = [], []
    for k in range(nl):
        if kind == "fc":
            lx.append(pauli_x(1 << (2 * k), L))
            lz.append(pauli_z(1 << (2 * k), L))
        else:
            # lX_k = Xbar X_2k, even-weight so it preserves the sector
            lx.append(pauli_x(full ^ (1 << (2 * k)), L))
            lz.append(pauli_z((1 << (2 * k)) | (1 << (2 * k + 1)), L))
    enc = Encoding(kind, L, tuple(lx), tuple(lz))
    # encoded operators must satisfy the qubit algebra
    for a in range(nl):
        for b in range(nl):
            same = a == b
            assert enc.lx[a].commutes_with(enc.lz[b]) != same
            assert enc.lx[a].commutes_with(enc.lx[b])
            assert enc.lz[a].commutes_with(enc.lz[b])
    return enc


@dataclass(frozen=True)
class BlockSpec:
    """One L x L block of the pattern.

    block_type 'identity' has all angles zero; 'gate' carries a single
    nonzero angle theta at (sublattice, i0, j0).
    """

    block_type: str  # 'identity' or 'gate'
    sublattice: str | None = None
    i0: int | None = None
    j0: int | None = None
    theta: float = 0.0
    gate: str | None = None
    qubit: int | None = None

    def raw_axis(self, L: int) -> PauliOp | None:
        """Rotation axis at its own row (before any wire evolution)."""
        if self.block_type != "gate":
            return None
        v = 1 << self.i0
        return pauli_z(v, L) if self.sublattice == "a" else pauli_x(v, L)

    def logical_axis(self, kind: str, L: int) -> PauliOp | None:
        """Axis after commuting the rotation to the block boundary."""
        if self.block_type != "gate":
            return None
        rule = CARule(kind, L)
        if self.sublattice == "a":
            return pauli_z(evolve_pow(rule, 1 << self.i0, self.j0, reversed=True), L)
        return pauli_x(evolve_pow(rule, 1 << self.i0, L - 1 - self.j0), L)

    def to_json(self, kind: str, L: int) -> dict:
        d = {"type": self.block_type}
        if self.block_type == "gate":
            d.update(
                sublattice=self.sublattice,
                i0=self.i0,
                j0=self.j0,
                theta=self.theta,
                gate=self.gate,
                qubit=self.qubit,
                adapt={
                    "raw_axis": self.raw_axis(L).to_json(),
                    "logical_axis": self.logical_axis(kind, L).to_json(),
                    "rule": "negate theta when the pending frame anticommutes",
                },
            )
        return d


@dataclass(frozen=True)
class MeasurementPattern:
    """Init row + ordered L x L blocks + readout row."""

    kind: str
    L: int
    blocks: tuple
    source_gates: tuple = ()

    @property
    def n_logical(self) -> int:
        return n_logical(self.kind, self.L)

    def to_json(self) -> dict:
        return {
            "version": PATTERN_FORMAT_VERSION,
            "model": self.kind,
            "L": self.L,
            "logical_qubits": self.n_logical,
            "init": {"row": 0, "a_basis": "Z", "b_basis": "X"},
            "blocks": [b.to_json(self.kind, self.L) for b in self.blocks],
            "readout": {"a_basis": "X", "b": "unmeasured",
                        "correction": "hadamard+frame+wire-completion"},
        }

    @classmethod
    def from_json(cls, d: dict) -> "MeasurementPattern":
        if d.get("version") != PATTERN_FORMAT_VERSION:
            raise ValueError("unsupported pattern format version")
        blocks = []
        for b in d["blocks"]:
            if b["type"] == "identity":
                blocks.append(BlockSpec("identity"))
            else:
                blocks.append(BlockSpec("gate", b["sublattice"], b["i0"], b["j0"],
                                        b["theta"], b.get("gate"), b.get("qubit")))
        return cls(d["model"], d["L"], tuple(blocks))


def elementary_gate_table(kind: str, L: int) -> dict:
    """(gate kind, logical qubit) -> (sublattice, i0, j0).

    Every entry is verified against the predicted single-angle block gate
    composed with the encoding (see the compiler tests).
    """
    CARule(kind, L)
    nl = n_logical(kind, L)
    table = {}
    for k in range(nl):
        if kind == "fc":
            table[("rot_lz", k)] = ("a", 2 * k, 0)
            table[("rot_lx", k)] = ("b", 2 * k, L - 1)
            if k + 1 < nl:
                table[("entangle_zz", k)] = ("a", 2 * k + 1, 1)
        else:
            table[("rot_lz", k)] = ("a", 2 * k + 1, 1)
            table[("rot_lx", k)] = ("b", 2 * k, L - 1)
            if k + 1 < nl and 2 * k + 3 < L:
                table[("entangle_zz", k)] = ("a", 2 * k + 3, 3)
    return table


def schedule_sparse_entangler(kind: str, L: int, k1: int, k2: int):
    """Single-block lZ_k1 lZ_k2 entangler, if the CA self-similarity allows.

    Searches for (i0, j0) with Z(fbar^j0 e_i0) supported exactly on the
    encoded Z pair (sc) or on the two even qubits plus frozen odd qubits
    (fc).  Returns a BlockSpec or None; for the sc this exists exactly
    when k2 - k1 is a power of two and the rows fit in one block.
    """
    nl = n_logical(kind, L)
    if not (0 <= k1 < k2 < nl):
        raise ValueError("need 0 <= k1 < k2 < n_logical")
    rule = CARule(kind, L)
    enc = encoding(kind, L)
    want = enc.lz[k1].zbits ^ enc.lz[k2].zbits
    odd_mask = sum(1 << i for i in range(1, L, 2))
    for j0 in range(L):
        for i0 in range(L):
            v = evolve_pow(rule, 1 << i0, j0, reversed=True)
            if kind == "sc":
                if v == want:
                    return BlockSpec("gate", "a", i0, j0, 0.0, "entangle_zz_sparse", k1)
            else:
                if (v & ~odd_mask) == want and (v | odd_mask) == (want | odd_mask):
                    return BlockSpec("gate", "a", i0, j0, 0.0, "entangle_zz_sparse", k1)
    return None


def compile_circuit(gates, kind: str, L: int) -> MeasurementPattern:
    """Lower a logical circuit to an adaptive measurement pattern.

    One elementary gate per block; sc x-rotations are followed by a
    parity-restoring identity block.  Initialization and readout rows are
    implicit in every pattern.
    """
    CARule(kind, L)
    nl = n_logical(kind, L)
    table = elementary_gate_table(kind, L)
    parsed = []
    for g in gates:
        if isinstance(g, dict):
            g = LogicalGate(g["type"], g.get("qubit"), g.get("theta", 0.0))
        parsed.append(g)
    body = [g for g in parsed if g.kind not in ("init_z", "readout_z")]
    for pos, g in enumerate(parsed):
        if g.kind == "init_z" and pos != 0:
            raise ValueError("init_z must be the first gate")
        if g.kind == "readout_z" and pos != len(parsed) - 1:
            raise ValueError("readout_z must be the last gate")

    blocks = []
    for g in body:
        if not 0 <= g.qubit < nl:
            raise ValueError(f"logical qubit {g.qubit} outside the register")
        if g.kind == "entangle_zz":
            if g.qubit + 1 >= nl:
                raise ValueError("entangle_zz acts on qubit, qubit+1")
            if (g.kind, g.qubit) not in table:
                raise ValueError(
                    f"entangle_zz at qubit {g.qubit} is not realizable in one "
                    f"block for {kind} L={L} (excluded boundary position)"
                )
        subl, i0, j0 = table[(g.kind, g.qubit)]
        blocks.append(BlockSpec("gate", subl, i0, j0, g.theta, g.kind, g.qubit))
        if kind == "sc" and g.kind == "rot_lx":
            blocks.append(BlockSpec("identity"))
    if not blocks:
        blocks.append(BlockSpec("identity"))
    return MeasurementPattern(kind, L, tuple(blocks), tuple(body))


# --------------------------------------------------------------------------
# circuit JSON
# --------------------------------------------------------------------------

def circuit_to_json(gates, kind: str, L: int) -> dict:
    out = []
    for g in gates:
        d = {"type": g.kind}
        if g.qubit is not None:
            d["qubit"] = g.qubit
        if g.kind in ("rot_lz", "rot_lx", "entangle_zz"):
            d["theta"] = g.theta
        out.append(d)
    return {"version": CIRCUIT_FORMAT_VERSION, "model": kind, "L": L, "gates": out}


def circuit_from_json(d: dict):
    if d.get("version") != CIRCUIT_FORMAT_VERSION:
        raise ValueError("unsupported circuit format version")
    gates = [LogicalGate(g["type"], g.get("qubit"), g.get("theta", 0.0))
             for g in d["gates"]]
    return gates, d["model"], d["L"]


def load_circuit(path: str):
    with open(path) as fh:
        return circuit_from_json(json.load(fh))
