"""GF(2) cyclic polynomial algebra and the SC/FC cellular automata.

States of the automata are length-L bit vectors, packed into Python ints
(bit i = value at ring site i = coefficient of x^i).  All arithmetic is
mod 2 and mod x^L + 1, so multiplying by x is a cyclic shift upward.

Two rules are supported:

* ``sc`` (Sierpinski): step polynomial f = 1 + x, mirrored step
  fbar = 1 + x^-1.  Canonical ring sizes L = 2^l - 1.  The step map is
  2-to-1; it is invertible only on the even-parity sector.
* ``fc`` (Fibonacci): step polynomial f = x^-1 + 1 + x = fbar.
  Canonical ring sizes L = 2^l.  The step map is invertible and
  f^(L/2) = 1 exactly, so every state has period L/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

__all__ = [
    "CARule",
    "CycPoly",
    "Parity",
    "evolve",
    "evolve_rev",
    "evolve_pow",
    "inverse_explicit",
    "symmetry_rank",
    "cycle_state_rank",
    "parity",
    "tilde",
    "poly_mul",
    "rotl",
    "popcount_parity",
]


class Parity(Enum):
    EVEN = 0
    ODD = 1


def _is_canonical(kind: str, L: int) -> bool:
    if L < 2:
        return False
    if kind == "sc":
        return (L + 1) & L == 0  # L = 2^l - 1
    return L & (L - 1) == 0  # L = 2^l


@dataclass(frozen=True)
class CARule:
    """One of the two automata, fixed to a ring of size L.

    Non-canonical sizes are allowed for exploration by passing
    strict=False; the closed-form inverse and rank formulas are only
    guaranteed at canonical sizes.
    """

    kind: str  # 'sc' or 'fc'
    L: int
    strict: bool = True

    def __post_init__(self):
        if self.kind not in ("sc", "fc"):
            raise ValueError(f"unknown CA kind {self.kind!r}")
        if self.L < 2:
            raise ValueError("ring size must be at least 2")
        if self.strict and not _is_canonical(self.kind, self.L):
            want = "2^l - 1" if self.kind == "sc" else "2^l"
            raise ValueError(
                f"{self.kind} requires L = {want}; got L={self.L} "
                "(pass strict=False to explore non-canonical sizes)"
            )

    @property
    def mask(self) -> int:
        return (1 << self.L) - 1

    def step_poly(self) -> "CycPoly":
        """The step polynomial f as an element of GF(2)[x]/(x^L+1)."""
        if self.kind == "sc":
            bits = 0b11  # 1 + x
        else:
            bits = (1 << (self.L - 1)) | 0b11  # x^-1 + 1 + x
        return CycPoly(bits & self.mask, self.L)

    def step_poly_rev(self) -> "CycPoly":
        """The mirrored step polynomial fbar(x) = f(x^-1)."""
        return self.step_poly().reversed()


def rotl(q: int, s: int, L: int) -> int:
    """Cyclic left (upward) shift by s of an L-bit word, i.e. multiply by x^s."""
    s %= L
    mask = (1 << L) - 1
    return ((q << s) | (q >> (L - s))) & mask


def popcount_parity(q: int) -> int:
    return bin(q).count("1") & 1


def parity(q: int) -> Parity:
    """Total parity sigma(q) = sum_i q_i mod 2."""
    return Parity(popcount_parity(q))


def tilde(q: int, L: int) -> int:
    """The evened vector 1*sigma(q) + q.

    On odd rings (the sc family, where this enters the byproduct
    bookkeeping) the output always has even parity.
    """
    if popcount_parity(q):
        return q ^ ((1 << L) - 1)
    return q


@dataclass(frozen=True)
class CycPoly:
    """Element of GF(2)[x] / (x^L + 1), bit i = coefficient of x^i."""

    bits: int
    L: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << self.L):
            raise ValueError("coefficient word out of range for ring size")

    @classmethod
    def from_coeffs(cls, coeffs) -> "CycPoly":
        bits = 0
        for i, c in enumerate(coeffs):
            if c & 1:
                bits |= 1 << i
        return cls(bits, len(coeffs))

    @property
    def coeffs(self) -> tuple:
        return tuple((self.bits >> i) & 1 for i in range(self.L))

    def __mul__(self, other: "CycPoly") -> "CycPoly":
        if self.L != other.L:
            raise ValueError(f"ring-size mismatch: {self.L} != {other.L}")
        a, b, L = self.bits, other.bits, self.L
        acc = 0
        i = 0
        while a:
            if a & 1:
                acc ^= rotl(b, i, L)
            a >>= 1
            i += 1
        return CycPoly(acc, L)

    def __pow__(self, n: int) -> "CycPoly":
        if n < 0:
            raise ValueError("use evolve_pow for signed powers of a step map")
        result = CycPoly(1, self.L)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def reversed(self) -> "CycPoly":
        """p(x) -> p(x^-1), i.e. mirror the coefficient word."""
        bits = self.bits & 1
        for i in range(1, self.L):
            if (self.bits >> i) & 1:
                bits |= 1 << (self.L - i)
        return CycPoly(bits & ((1 << self.L) - 1), self.L)

    def is_even(self) -> bool:
        return popcount_parity(self.bits) == 0


def poly_mul(a: CycPoly, b: CycPoly) -> CycPoly:
    """Cyclic convolution over GF(2): a*b mod 2 mod x^L+1."""
    return a * b


def evolve(rule: CARule, q: int) -> int:
    """One forward step of the automaton.

    sc: out_i = q_i + q_{i-1};  fc: out_i = q_{i-1} + q_i + q_{i+1}.
    """
    _check_state(rule, q)
    L = rule.L
    out = q ^ rotl(q, 1, L)
    if rule.kind == "fc":
        out ^= rotl(q, L - 1, L)
    return out


def evolve_rev(rule: CARule, q: int) -> int:
    """One step of the mirrored automaton fbar (sc: out_i = q_i + q_{i+1})."""
    _check_state(rule, q)
    L = rule.L
    if rule.kind == "fc":
        return evolve(rule, q)
    return q ^ rotl(q, L - 1, L)


def _check_state(rule: CARule, q: int) -> None:
    if not 0 <= q < (1 << rule.L):
        raise ValueError(f"state word does not fit ring size L={rule.L}")


def _reduced_exponent(rule: CARule, t: int, q: int, reversed_: bool) -> int:
    """Map a signed power to an equivalent non-negative polynomial power."""
    if t >= 0:
        return t
    if rule.kind == "fc":
        # f^(L/2) = 1 exactly, for any state.
        return t % (rule.L // 2)
    # sc: f^L acts as the identity on even states only.
    if popcount_parity(q):
        name = "fbar" if reversed_ else "f"
        raise ValueError(
            f"negative powers of {name}_sc are defined only on even states"
        )
    return t % rule.L


def evolve_pow(rule: CARule, q: int, t: int, reversed: bool = False) -> int:
    """Apply f^t (or fbar^t) by square-and-multiply on the step polynomial.

    Negative t uses f^-1 = f^(L/2-1) (fc) or f^(L-1) on the even sector (sc).
    """
    _check_state(rule, q)
    e = _reduced_exponent(rule, t, q, reversed)
    f = rule.step_poly_rev() if reversed else rule.step_poly()
    p = f ** e
    return (p * CycPoly(q, rule.L)).bits


@lru_cache(maxsize=None)
def _fc_inverse_mask(L: int) -> int:
    """Closed-form word for f_fc^-1 on a canonical ring.

    f^-1 = f^(L/2-1) = prod_{k=0}^{l-2} (x^-2^k + 1 + x^2^k) by Frobenius,
    so the coefficient of x^r is the parity of the number of signed-digit
    words (s_0..s_{l-2}), s_k in {-1,0,1}, with sum_k s_k 2^k = r mod L.
    """
    l = L.bit_length() - 1
    counts = [0] * L
    stack = [(0, 0)]
    while stack:
        k, total = stack.pop()
        if k == l - 1:
            counts[total % L] += 1
            continue
        for s in (-1, 0, 1):
            stack.append((k + 1, total + s * (1 << k)))
    bits = 0
    for r, c in enumerate(counts):
        if c & 1:
            bits |= 1 << r
    return bits


@lru_cache(maxsize=None)
def _sc_inverse_mask(L: int) -> int:
    """Closed-form word for f_sc^-1 on the even sector: sum of all even powers.

    (1+x)^(L-1) has, by Lucas' theorem at L = 2^l - 1, exactly the even
    exponents 0, 2, ..., L-1; (1+x) * that equals 1 + u(x), which is the
    identity on even states.
    """
    bits = 0
    for r in range(0, L, 2):
        bits |= 1 << r
    return bits


def _mirror_word(mask: int, L: int) -> int:
    """g(x) -> g(x^-1) on the coefficient word: bit r -> bit (L-r) mod L."""
    out = mask & 1
    for r in range(1, L):
        if (mask >> r) & 1:
            out |= 1 << (L - r)
    return out


def _apply_poly_word(g: int, q: int, L: int) -> int:
    """Multiply q by the fixed polynomial g: out_i = sum_k g_k q_{i-k}.

    Written as a per-output-bit correlation (row i is g mirrored then
    rotated by i) so it shares no code path with CycPoly powering.
    """
    rows = _mirror_word(g, L)
    out = 0
    for i in range(L):
        out |= popcount_parity(rotl(rows, i, L) & q) << i
    return out


def inverse_explicit(rule: CARule, q: int, reversed: bool = False) -> int:
    """Single-step inverse via the explicit closed-form stencils.

    Independent of evolve_pow: the inverse word is written down directly
    (all even powers of x for sc; the signed-binary-digit expansion for fc)
    and applied as a fixed cyclic correlation.
    """
    _check_state(rule, q)
    if not _is_canonical(rule.kind, rule.L):
        raise ValueError("explicit inverse formulas require a canonical ring size")
    if rule.kind == "fc":
        # fbar = f, so the mirrored inverse coincides (the mask is symmetric).
        return _apply_poly_word(_fc_inverse_mask(rule.L), q, rule.L)
    if popcount_parity(q):
        raise ValueError("sc inverse is defined only on even states")
    word = _sc_inverse_mask(rule.L)
    if reversed:
        word = _mirror_word(word, rule.L)
    return _apply_poly_word(word, q, rule.L)


def symmetry_rank(rule: CARule) -> int:
    """k(L): log2 of the number of states lying on closed CA cycles.

    sc: L - 1 (even sector); fc: L (every state is periodic).
    """
    if not _is_canonical(rule.kind, rule.L):
        raise ValueError("symmetry rank formula requires a canonical ring size")
    return rule.L - 1 if rule.kind == "sc" else rule.L


def cycle_state_rank(rule: CARule) -> int:
    """Brute-force GF(2) dimension of the set of states with closed trajectories.

    Exponential in L; intended as an independent check of symmetry_rank
    at small sizes.
    """
    L = rule.L
    periodic = []
    for q in range(1 << L):
        seen = set()
        cur = q
        closed = False
        for _ in range(1 << L):
            cur = evolve(rule, cur)
            if cur == q:
                closed = True
                break
            if cur in seen:
                break
            seen.add(cur)
        if closed:
            periodic.append(q)
    # The periodic states form a linear subspace; count its dimension.
    basis = {}  # leading bit -> vector
    for v in periodic:
        w = v
        while w:
            lead = w.bit_length() - 1
            if lead in basis:
                w ^= basis[lead]
            else:
                basis[lead] = w
                break
    return len(basis)
