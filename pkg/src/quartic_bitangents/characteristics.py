"""Exact combinatorics of theta characteristics over F_2^6.

A characteristic is a pair of vectors m', m'' in {0,1}^3, written here as
``[a1a2a3, b1b2b3]`` and addressed by the label pair ``(i, j)`` with
i = 4*a1 + 2*a2 + a3 and j = 4*b1 + 2*b2 + b3.  The basic invariants are

    e(m)          = (-1)^(m' . m'')                       parity,
    e(m1, m2, m3) = e(m1) e(m2) e(m3) e(m1 + m2 + m3)     triple sign,
    e(m, n)       = (-1)^(m' . n'' - m'' . n')            symplectic pairing,

all arithmetic mod 2.  A triple is azygetic when its sign is -1; a
fundamental system is a set of 8 characteristics whose triples are all
azygetic; an Aronhold set is the 7 odd members of a fundamental system
containing exactly one even characteristic (which then equals the sum of
the 7 odd ones).  Genus 3 has 36 even and 28 odd characteristics, 2016
azygetic odd triples, and 288 Aronhold sets, 8 per even base.

Everything in this module is exact integer arithmetic; the numeric layer
consumes characteristics in reduced form only.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "Characteristic",
    "ZERO",
    "parity",
    "parity_sign",
    "triple_sign",
    "is_azygetic",
    "symplectic_pairing",
    "all_characteristics",
    "even_characteristics",
    "odd_characteristics",
    "is_fundamental_system",
    "complete_fundamental",
    "AronholdSet",
    "standard_aronhold_set",
    "enumerate_aronhold_sets",
    "translate_aronhold",
    "CharMatrix",
    "build_char_matrix",
    "standard_char_matrix",
    "STANDARD_ARONHOLD_CODES",
    "LAYOUT_CODES",
]

_TEXT_RE = re.compile(r"^\[([01]{3}),([01]{3})\]$")

Bits = tuple[int, int, int]


def _bits_to_int(bits: Bits) -> int:
    return bits[0] * 4 + bits[1] * 2 + bits[2]


def _int_to_bits(value: int) -> Bits:
    return ((value >> 2) & 1, (value >> 1) & 1, value & 1)


@dataclass(frozen=True, order=True)
class Characteristic:
    """A reduced theta characteristic: top half m', bottom half m''."""

    top: Bits
    bottom: Bits

    def __post_init__(self):
        for half in (self.top, self.bottom):
            if len(half) != 3 or any(b not in (0, 1) for b in half):
                raise ValueError(f"characteristic halves must be 3-bit 0/1 vectors, got {half!r}")

    @classmethod
    def from_label(cls, i: int, j: int) -> "Characteristic":
        if not (0 <= i <= 7 and 0 <= j <= 7):
            raise ValueError(f"label entries must lie in 0..7, got ({i}, {j})")
        return cls(_int_to_bits(i), _int_to_bits(j))

    @classmethod
    def from_code(cls, code: int) -> "Characteristic":
        """Two-digit shorthand: 64 means label (6, 4)."""
        return cls.from_label(code // 10, code % 10)

    @classmethod
    def from_text(cls, text: str) -> "Characteristic":
        m = _TEXT_RE.match(text.strip())
        if m is None:
            raise ValueError(f"expected characteristic text like '[110,100]', got {text!r}")
        top = tuple(int(c) for c in m.group(1))
        bottom = tuple(int(c) for c in m.group(2))
        return cls(top, bottom)

    @classmethod
    def parse(cls, value) -> "Characteristic":
        """Accept a Characteristic, a two-digit code, a label pair, or text form."""
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls.from_code(value)
        if isinstance(value, str):
            if _TEXT_RE.match(value.strip()):
                return cls.from_text(value)
            return cls.from_code(int(value))
        if isinstance(value, (tuple, list)) and len(value) == 2:
            return cls.from_label(int(value[0]), int(value[1]))
        raise ValueError(f"cannot interpret {value!r} as a characteristic")

    @property
    def label(self) -> tuple[int, int]:
        return (_bits_to_int(self.top), _bits_to_int(self.bottom))

    @property
    def code(self) -> int:
        i, j = self.label
        return 10 * i + j

    @property
    def text(self) -> str:
        return "[{},{}]".format("".join(map(str, self.top)), "".join(map(str, self.bottom)))

    @property
    def is_odd(self) -> bool:
        return parity_sign(self) == -1

    @property
    def is_even(self) -> bool:
        return parity_sign(self) == 1

    def __add__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(
            tuple(a ^ b for a, b in zip(self.top, other.top)),
            tuple(a ^ b for a, b in zip(self.bottom, other.bottom)),
        )

    def __repr__(self):
        return f"Characteristic{self.text}"


ZERO = Characteristic((0, 0, 0), (0, 0, 0))


def parity_sign(m: Characteristic) -> int:
    """e(m) = (-1)^(m' . m'')."""
    dot = sum(a * b for a, b in zip(m.top, m.bottom))
    return -1 if dot % 2 else 1


def parity(m: Characteristic) -> str:
    return "even" if parity_sign(m) == 1 else "odd"


def triple_sign(m1: Characteristic, m2: Characteristic, m3: Characteristic) -> int:
    """e(m1, m2, m3); -1 means azygetic, +1 syzygetic."""
    return parity_sign(m1) * parity_sign(m2) * parity_sign(m3) * parity_sign(m1 + m2 + m3)


def is_azygetic(m1: Characteristic, m2: Characteristic, m3: Characteristic) -> bool:
    return triple_sign(m1, m2, m3) == -1


def symplectic_pairing(m: Characteristic, n: Characteristic) -> int:
    """e(m, n) = (-1)^(m' . n'' - m'' . n')."""
    dot = sum(a * b for a, b in zip(m.top, n.bottom)) + sum(a * b for a, b in zip(m.bottom, n.top))
    return -1 if dot % 2 else 1


@lru_cache(maxsize=1)
def all_characteristics() -> tuple[Characteristic, ...]:
    """All 64 reduced characteristics in label order."""
    return tuple(Characteristic.from_label(i, j) for i in range(8) for j in range(8))


@lru_cache(maxsize=1)
def even_characteristics() -> tuple[Characteristic, ...]:
    return tuple(m for m in all_characteristics() if m.is_even)


@lru_cache(maxsize=1)
def odd_characteristics() -> tuple[Characteristic, ...]:
    return tuple(m for m in all_characteristics() if m.is_odd)


def is_fundamental_system(chars: Sequence[Characteristic]) -> bool:
    """True iff the characteristics are pairwise distinct and every triple is azygetic."""
    if len(set(chars)) != len(chars):
        return False
    return all(is_azygetic(a, b, c) for a, b, c in itertools.combinations(chars, 3))


def _extends_azygetically(members: Sequence[Characteristic], candidate: Characteristic) -> bool:
    return all(is_azygetic(a, b, candidate) for a, b in itertools.combinations(members, 2))


def complete_fundamental(n1, n2, n3) -> tuple[Characteristic, ...]:
    """The unique 5 even characteristics completing an azygetic odd triple to a fundamental system.

    Raises SyzygeticTriple when the input triple is syzygetic (no completion
    exists in that case).
    """
    from .errors import SyzygeticTriple

    triple = tuple(Characteristic.parse(n) for n in (n1, n2, n3))
    if len(set(triple)) != 3 or any(m.is_even for m in triple):
        raise ValueError("expected three distinct odd characteristics")
    if triple_sign(*triple) != -1:
        raise SyzygeticTriple(f"triple {[m.code for m in triple]} is syzygetic")

    evens = even_characteristics()
    completions: list[tuple[Characteristic, ...]] = []

    def extend(start: int, chosen: list[Characteristic]):
        if len(chosen) == 5:
            completions.append(tuple(chosen))
            return
        for k in range(start, len(evens)):
            cand = evens[k]
            if _extends_azygetically(triple + tuple(chosen), cand):
                chosen.append(cand)
                extend(k + 1, chosen)
                chosen.pop()

    extend(0, [])
    if len(completions) != 1:
        raise RuntimeError(
            f"expected a unique completion, found {len(completions)} for {[m.code for m in triple]}"
        )
    return completions[0]


@dataclass(frozen=True)
class AronholdSet:
    """Seven distinct odd characteristics, every triple azygetic.

    The member order is significant (it fixes row order of the derived
    characteristic table); the base is the mod-2 sum of the members and is
    always even.
    """

    members: tuple[Characteristic, ...]

    def __post_init__(self):
        if len(self.members) != 7 or len(set(self.members)) != 7:
            raise ValueError("an Aronhold set needs 7 distinct members")
        if any(m.is_even for m in self.members):
            raise ValueError("all Aronhold members must be odd")
        for a, b, c in itertools.combinations(self.members, 3):
            if not is_azygetic(a, b, c):
                raise ValueError(
                    f"triple {(a.code, b.code, c.code)} is syzygetic; not an Aronhold set"
                )

    @classmethod
    def from_codes(cls, codes: Iterable[int]) -> "AronholdSet":
        return cls(tuple(Characteristic.from_code(c) for c in codes))

    @property
    def base(self) -> Characteristic:
        total = ZERO
        for m in self.members:
            total = total + m
        return total

    def sorted(self) -> "AronholdSet":
        return AronholdSet(tuple(sorted(self.members, key=lambda m: m.label)))

    def member_set(self) -> frozenset[Characteristic]:
        return frozenset(self.members)

    def translate(self, index: int) -> "AronholdSet":
        return translate_aronhold(self, index)


# Member order fixed by the bitangent-matrix layout below.
STANDARD_ARONHOLD_CODES = (77, 64, 51, 46, 23, 15, 32)


def standard_aronhold_set() -> AronholdSet:
    """The base-zero Aronhold set this package's matrix layout is built on."""
    return AronholdSet.from_codes(STANDARD_ARONHOLD_CODES)


def translate_aronhold(s: AronholdSet, index: int) -> AronholdSet:
    """Translate the underlying fundamental system by base + members[index].

    The translated system swaps the roles of the base and the chosen member:
    slot ``index`` now holds the old member itself (the base translates onto
    it) and every other member n_k becomes n_k + base + n_index.  The result
    is again an Aronhold set with the same base.  Together with the identity
    this produces the 8 Aronhold sets sharing that base; translating twice by
    the same characteristic is the identity.
    """
    if not (0 <= index < 7):
        raise IndexError(f"member index must be in 0..6, got {index}")
    shift = s.base + s.members[index]
    members = tuple(
        s.base + shift if k == index else m + shift for k, m in enumerate(s.members)
    )
    return AronholdSet(members)


@lru_cache(maxsize=1)
def _azygetic_odd_masks() -> tuple[tuple[int, ...], ...]:
    """masks[a][b] = bitmask of odd indices c with (odd_a, odd_b, odd_c) azygetic."""
    odds = odd_characteristics()
    n = len(odds)
    masks = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            mask = 0
            for c in range(n):
                if c != a and c != b and is_azygetic(odds[a], odds[b], odds[c]):
                    mask |= 1 << c
            masks[a][b] = masks[b][a] = mask
    return tuple(tuple(row) for row in masks)


def enumerate_aronhold_sets() -> list[AronholdSet]:
    """All 288 unordered Aronhold sets, members sorted ascending by label."""
    odds = odd_characteristics()
    masks = _azygetic_odd_masks()
    n = len(odds)
    found: list[AronholdSet] = []

    def grow(chosen: list[int], allowed: int):
        # allowed: bitmask of indices azygetic with every pair already chosen
        if len(chosen) == 7:
            found.append(AronholdSet(tuple(odds[k] for k in chosen)))
            return
        for k in range(chosen[-1] + 1, n):
            if not (allowed >> k) & 1:
                continue
            narrowed = allowed
            for y in chosen:
                narrowed &= masks[y][k]
            grow(chosen + [k], narrowed)

    full = (1 << n) - 1
    for first in range(n):
        grow([first], full)
    return found


@dataclass(frozen=True)
class CharMatrix:
    """The 8x8 symmetric table of characteristics attached to an Aronhold set.

    Row and column 0 are indexed by the base m0; rows 1..7 by the members.
    entry(i, i) = m0, entry(0, k) = n_k, and entry(i, k) = (m0 + n_i) + n_k
    otherwise.  The 28 off-diagonal entries above the diagonal are exactly
    the 28 odd characteristics when m0 is even (always the case here).
    """

    entries: tuple[tuple[Characteristic, ...], ...]

    def entry(self, i: int, k: int) -> Characteristic:
        return self.entries[i][k]

    @property
    def base(self) -> Characteristic:
        return self.entries[0][0]

    def codes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(m.code for m in row) for row in self.entries)

    def row_members(self, i: int) -> frozenset[Characteristic]:
        return frozenset(self.entries[i][k] for k in range(8) if k != i)

    def off_diagonal_pairs(self):
        """Iterate (i, k, characteristic) over the 28 slots with i < k."""
        for i in range(8):
            for k in range(i + 1, 8):
                yield i, k, self.entries[i][k]

    def principal_triples(self):
        """The 56 azygetic odd triples sitting in 3x3 principal minors."""
        for i, j, k in itertools.combinations(range(8), 3):
            yield (self.entries[i][j], self.entries[i][k], self.entries[j][k])


def build_char_matrix(s: AronholdSet) -> CharMatrix:
    """Assemble the characteristic table of an Aronhold set (rows in member order)."""
    base = s.base
    if base.is_odd:
        raise ValueError("Aronhold base must be even")
    heads = (base,) + s.members

    def at(i: int, k: int) -> Characteristic:
        if i == k:
            return base
        if i == 0:
            return heads[k]
        if k == 0:
            return heads[i]
        return base + heads[i] + heads[k]

    return CharMatrix(tuple(tuple(at(i, k) for k in range(8)) for i in range(8)))


# Two-digit codes of the standard layout, i.e. build_char_matrix(standard_aronhold_set()).
# Slot (i, k) carries the characteristic of the bitangent placed there.
LAYOUT_CODES = (
    (0, 77, 64, 51, 46, 23, 15, 32),
    (77, 0, 13, 26, 31, 54, 62, 45),
    (64, 13, 0, 35, 22, 47, 71, 56),
    (51, 26, 35, 0, 17, 72, 44, 63),
    (46, 31, 22, 17, 0, 65, 53, 74),
    (23, 54, 47, 72, 65, 0, 36, 11),
    (15, 62, 71, 44, 53, 36, 0, 27),
    (32, 45, 56, 63, 74, 11, 27, 0),
)


@lru_cache(maxsize=1)
def standard_char_matrix() -> CharMatrix:
    matrix = build_char_matrix(standard_aronhold_set())
    if matrix.codes() != LAYOUT_CODES:
        raise RuntimeError("layout table out of sync with the standard Aronhold set")
    return matrix
