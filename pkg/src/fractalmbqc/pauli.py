"""Symplectic Pauli algebra on n qubits, byproduct operators, and Pauli frames.

A Pauli operator is stored as (xbits, zbits, phase) meaning

    P = i^phase * X(xbits) * Z(zbits)

with X(v) = prod_i X_i^{v_i}, Z(w) = prod_i Z_i^{w_i}, and phase mod 4.
Qubit i corresponds to bit i of the packed words.  Multiplication uses
Z(w) X(v) = (-1)^{w.v} X(v) Z(w); most gate-level comparisons in this
package are projective (global phase ignored), but the phase is tracked
so that frame replay is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .f2ca import CARule, evolve_pow, popcount_parity, tilde

__all__ = [
    "PauliOp",
    "PauliFrame",
    "OutcomeBlock",
    "pauli_x",
    "pauli_z",
    "multiply",
    "commutes",
    "byproduct_fc",
    "byproduct_sc",
    "adapt_angle",
]


@dataclass(frozen=True)
class PauliOp:
    """i^phase * X(xbits) * Z(zbits) on n qubits."""

    n: int
    xbits: int = 0
    zbits: int = 0
    phase: int = 0  # exponent of i, mod 4

    def __post_init__(self):
        mask = (1 << self.n) - 1
        if (self.xbits & ~mask) or (self.zbits & ~mask):
            raise ValueError("support words exceed qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(n)

    def is_identity(self, projective: bool = True) -> bool:
        if self.xbits or self.zbits:
            return False
        return True if projective else self.phase == 0

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        if self.n != other.n:
            raise ValueError("qubit-count mismatch")
        # (X(a)Z(b)) (X(c)Z(d)): swap Z(b) past X(c) -> (-1)^{b.c}
        sign = 2 * popcount_parity(self.zbits & other.xbits)
        return PauliOp(
            self.n,
            self.xbits ^ other.xbits,
            self.zbits ^ other.zbits,
            self.phase + other.phase + sign,
        )

    def commutes_with(self, other: "PauliOp") -> bool:
        if self.n != other.n:
            raise ValueError("qubit-count mismatch")
        form = popcount_parity(self.xbits & other.zbits) ^ popcount_parity(
            self.zbits & other.xbits
        )
        return form == 0

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; basis index bit i = qubit i."""
        dim = 1 << self.n
        idx = np.arange(dim)
        cols = idx ^ self.xbits
        signs = np.array(
            [(-1) ** popcount_parity(int(c) & self.zbits) for c in cols],
            dtype=np.complex128,
        )
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[idx, cols] = (1j ** self.phase) * signs
        return m

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "x": format(self.xbits, "x"),
            "z": format(self.zbits, "x"),
            "phase": self.phase,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PauliOp":
        return cls(d["n"], int(d["x"], 16), int(d["z"], 16), d["phase"])

    def __str__(self) -> str:
        names = []
        for i in range(self.n):
            x = (self.xbits >> i) & 1
            z = (self.zbits >> i) & 1
            names.append("IXZY"[x + 2 * z] if x + 2 * z < 3 else "Y")
        return f"i^{self.phase} " + "".join(names)


def pauli_x(v: int, n: int) -> PauliOp:
    return PauliOp(n, xbits=v)


def pauli_z(v: int, n: int) -> PauliOp:
    return PauliOp(n, zbits=v)


def multiply(p: PauliOp, q: PauliOp) -> PauliOp:
    return p * q


def commutes(p: PauliOp, q: PauliOp) -> bool:
    return p.commutes_with(q)


@dataclass(frozen=True)
class OutcomeBlock:
    """Measurement outcomes of an L x L block, one L-bit word per row.

    eta_a[j] (eta_b[j]) packs the a-site (b-site) outcomes of row j,
    bit i = site i.
    """

    L: int
    eta_a: tuple
    eta_b: tuple

    def __post_init__(self):
        if len(self.eta_a) != self.L or len(self.eta_b) != self.L:
            raise ValueError("need one outcome word per row of the block")
        for w in (*self.eta_a, *self.eta_b):
            if not 0 <= w < (1 << self.L):
                raise ValueError("outcome word exceeds ring size")

    @classmethod
    def zero(cls, L: int) -> "OutcomeBlock":
        return cls(L, (0,) * L, (0,) * L)

    @classmethod
    def random(cls, L: int, rng: np.random.Generator) -> "OutcomeBlock":
        hi = 1 << L
        return cls(
            L,
            tuple(int(rng.integers(hi)) for _ in range(L)),
            tuple(int(rng.integers(hi)) for _ in range(L)),
        )


def byproduct_fc(outcomes: OutcomeBlock, rule: CARule) -> PauliOp:
    """Byproduct operator of an all-X FC block, up to an overall sign.

    U = prod_{j=0}^{L-1} X(f^j eta_b[L-1-j]) * prod_{j=1}^{L} Z(fbar^{-j} eta_a[L-j]).

    The Z product runs to j = L (the first row's a outcomes cross the whole
    block), one factor beyond the printed formula, which drops the j = L
    term; the block-gate factorization requires it.
    """
    if rule.kind != "fc":
        raise ValueError("byproduct_fc needs an fc rule")
    L = rule.L
    u = PauliOp.identity(L)
    for j in range(L):
        u = u * pauli_x(evolve_pow(rule, outcomes.eta_b[L - 1 - j], j), L)
    for j in range(1, L + 1):
        u = u * pauli_z(evolve_pow(rule, outcomes.eta_a[L - j], -j, reversed=True), L)
    return u


def byproduct_sc(outcomes: OutcomeBlock, rule: CARule) -> PauliOp:
    """Byproduct operator of an all-X SC block, up to an overall sign.

    U = Xbar^{sigma(eta_b[L-1])} Zbar^{sigma(eta_a[0])}
        * prod_{j=0}^{L-1} X(f^j ~eta_b[L-1-j])
        * prod_{j=1}^{L} Z(fbar^{-j} ~eta_a[L-j])

    where ~eta is the evened vector, so all the backward powers act within
    the even sector.  As with the FC case the Z product includes j = L.
    """
    if rule.kind != "sc":
        raise ValueError("byproduct_sc needs an sc rule")
    L = rule.L
    full = (1 << L) - 1
    u = PauliOp.identity(L)
    if popcount_parity(outcomes.eta_b[L - 1]):
        u = u * pauli_x(full, L)
    if popcount_parity(outcomes.eta_a[0]):
        u = u * pauli_z(full, L)
    for j in range(L):
        v = tilde(outcomes.eta_b[L - 1 - j], L)
        u = u * pauli_x(evolve_pow(rule, v, j), L)
    for j in range(1, L + 1):
        v = tilde(outcomes.eta_a[L - j], L)
        u = u * pauli_z(evolve_pow(rule, v, -j, reversed=True), L)
    return u


def adapt_angle(frame: "PauliFrame | PauliOp", axis: PauliOp, theta: float) -> float:
    """Sign-corrected rotation angle: +theta if the frame commutes with axis."""
    op = frame.op if isinstance(frame, PauliFrame) else frame
    return theta if op.commutes_with(axis) else -theta


def advance_pauli(rule: CARule, p: PauliOp, steps: int = 1) -> PauliOp:
    """Push a Pauli leftward through `steps` all-X wire rows.

    X(a) Z(b) emerges as X(f^steps a) Z(fbar^{-steps} b).  For the SC the
    z word is evened first: a Zbar factor acts as +1 on the even-parity
    states that sc frames multiply, and the x word's odd part is absorbed
    by the wire itself (T0 Xbar = T0, verified in the tensor tests).  The
    result is an exact operator identity T0 P = advance(P) T0 for even z
    words, and exact on even input states otherwise.  Phases are not
    tracked; frames are projective objects.
    """
    if steps < 0:
        raise ValueError("can only advance a frame forward")
    if steps == 0:
        return p
    x = evolve_pow(rule, p.xbits, steps)
    z = p.zbits
    if rule.kind == "sc":
        z = tilde(z, rule.L)
    z = evolve_pow(rule, z, -steps, reversed=True)
    return PauliOp(p.n, x, z, p.phase)


@dataclass
class PauliFrame:
    """Accumulated byproduct operator of one simulation run.

    The frame op is the ordered product of everything composed so far
    (newest on the left).  history records each event so the frame can be
    replayed: ("compose", tag, op_json) or ("advance", kind, L, steps).
    """

    op: PauliOp
    history: list = field(default_factory=list)

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(PauliOp.identity(n))

    @property
    def n(self) -> int:
        return self.op.n

    def compose_left(self, p: PauliOp, tag) -> None:
        """Record a new byproduct emitted after the current frame."""
        self.history.append(("compose", tag, p))
        self.op = p * self.op

    def advance(self, rule: CARule, steps: int) -> None:
        """Push the frame through `steps` wire rows."""
        self.history.append(("advance", rule.kind, rule.L, steps))
        self.op = advance_pauli(rule, self.op, steps)

    def replay(self) -> PauliOp:
        """Recompute the frame from history; must reproduce self.op."""
        op = PauliOp.identity(self.n)
        for entry in self.history:
            if entry[0] == "compose":
                op = entry[2] * op
            else:
                _, kind, L, steps = entry
                op = advance_pauli(CARule(kind, L), op, steps)
        return op

    def to_json(self) -> dict:
        events = []
        for entry in self.history:
            if entry[0] == "compose":
                events.append({"event": "compose", "tag": str(entry[1]),
                               "op": entry[2].to_json()})
            else:
                events.append({"event": "advance", "kind": entry[1],
                               "L": entry[2], "steps": entry[3]})
        return {"op": self.op.to_json(), "history": events}
