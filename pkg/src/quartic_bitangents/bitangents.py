"""Assembly of the rank-4 bitangent matrix from the 28 theta gradients.

The 8x8 layout places the bitangent form b_m(tau, z) = grad theta_m . z of
the odd characteristic m at the slots given by the standard characteristic
table.  Raw gradients give a matrix of generically full rank 8; a unique
(up to diagonal congruence) choice of scalar coefficients makes it rank 4.
The coefficients are closed-form ratios of the Jacobian determinants

    D(l, m, n) = det( grad theta_l ; grad theta_m ; grad theta_n ),

obtained in stages:

  * 5x5 principal blocks on rows/columns (1,2,3,4,k), k in {5..8}: each row
    is rescaled by Cramer weights so the block acquires a column relation,
    a left diagonal makes it symmetric (Jacobi's derivative formula
    guarantees consistency), and a congruence normalises the overlap;
  * the four blocks are merged after congruences whose entries involve the
    degree-zero determinant ratios A, B, C (their square roots cancel in
    every merged entry, so no branch of the root is ever chosen);
  * the remaining six entries X_ij of the lower 4x4 corner are closed-form
    determinant ratios; the entry X_65 admits two independent derivations
    whose agreement is a consistency check of the whole construction.

All positions here are 0-based; the two-digit numbers are characteristic
label codes, e.g. 64 = [110,100].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .characteristics import CharMatrix, Characteristic, standard_char_matrix
from .errors import DegenerateDenominator, SingularSystem
from .theta import ThetaTable

__all__ = [
    "LinearForm",
    "FormMatrix",
    "BitangentMatrix",
    "MergeConstants",
    "XCoefficients",
    "base_matrix",
    "cramer_lambdas",
    "build_S",
    "merged_minor",
    "merge_constants",
    "compute_X",
    "assemble_full",
    "rank_profile",
]


@dataclass(frozen=True)
class LinearForm:
    """A complex linear form c1 z1 + c2 z2 + c3 z3 tied to an odd characteristic."""

    coeffs: np.ndarray
    char: Characteristic

    def evaluate(self, z) -> complex:
        return complex(np.dot(self.coeffs, np.asarray(z, dtype=complex)))

    def scaled(self, s: complex) -> "LinearForm":
        return LinearForm(s * self.coeffs, self.char)


class FormMatrix:
    """A square matrix of scaled gradient forms with zero diagonal.

    ``chars[i][j]`` names the characteristic at slot (i, j) (None on the
    diagonal), ``raw[i, j]`` its unscaled gradient, ``scalars[i, j]`` the
    coefficient applied to it.  Entries are linear forms in z.
    """

    def __init__(self, chars, scalars, raw):
        self.chars = tuple(tuple(row) for row in chars)
        self.scalars = np.asarray(scalars, dtype=complex)
        self.raw = np.asarray(raw, dtype=complex)
        n = len(self.chars)
        if self.scalars.shape != (n, n) or self.raw.shape != (n, n, 3):
            raise ValueError("shape mismatch between chars, scalars and raw gradients")

    @property
    def size(self) -> int:
        return len(self.chars)

    def char_at(self, i: int, j: int) -> Characteristic | None:
        return self.chars[i][j]

    def coeff_vector(self, i: int, j: int) -> np.ndarray:
        """The scaled coefficient vector of the (i, j) entry form."""
        return self.scalars[i, j] * self.raw[i, j]

    def form(self, i: int, j: int) -> LinearForm:
        char = self.chars[i][j]
        if char is None:
            raise ValueError(f"slot ({i}, {j}) is a diagonal zero")
        return LinearForm(self.coeff_vector(i, j), char)

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.scalars * (self.raw @ z)

    def symmetry_residual(self) -> float:
        """max over i<j of |entry(i,j) - entry(j,i)| / |entry(i,j)| (coefficient norms)."""
        worst = 0.0
        for i in range(self.size):
            for j in range(i + 1, self.size):
                a = self.coeff_vector(i, j)
                b = self.coeff_vector(j, i)
                scale = max(np.linalg.norm(a), np.linalg.norm(b), 5e-324)
                worst = max(worst, float(np.linalg.norm(a - b) / scale))
        return worst

    def symmetrized(self) -> "FormMatrix":
        """Mirror the upper triangle onto the lower one."""
        scalars = self.scalars.copy()
        raw = self.raw.copy()
        i, j = np.triu_indices(self.size, 1)
        scalars[j, i] = scalars[i, j]
        raw[j, i] = raw[i, j]
        return type(self)._rebuild(self, scalars, raw)

    @classmethod
    def _rebuild(cls, like: "FormMatrix", scalars, raw) -> "FormMatrix":
        return FormMatrix(like.chars, scalars, raw)


class BitangentMatrix(FormMatrix):
    """The full 8x8 matrix over the standard layout.

    ``variant`` records how the scalars were produced: "base" (all ones),
    "merged" (rank-4 scalars), or "merged+congruence" (the extra diagonal
    congruence by diag(1, D(77,31,26), 1, ..., 1) applied).
    """

    def __init__(self, layout: CharMatrix, scalars, raw, variant: str):
        chars = [
            [None if i == j else layout.entry(i, j) for j in range(8)] for i in range(8)
        ]
        super().__init__(chars, scalars, raw)
        self.layout = layout
        self.variant = variant

    @classmethod
    def _rebuild(cls, like: "BitangentMatrix", scalars, raw) -> "BitangentMatrix":
        return cls(like.layout, scalars, raw, like.variant)


def _layout_raw(table: ThetaTable, layout: CharMatrix) -> np.ndarray:
    raw = np.zeros((8, 8, 3), dtype=complex)
    for i in range(8):
        for j in range(8):
            if i != j:
                raw[i, j] = table.gradient(layout.entry(i, j))
    return raw


def base_matrix(table: ThetaTable) -> BitangentMatrix:
    """The unscaled matrix of raw bitangent forms (generic rank 8)."""
    layout = standard_char_matrix()
    scalars = np.ones((8, 8), dtype=complex)
    np.fill_diagonal(scalars, 0.0)
    return BitangentMatrix(layout, scalars, _layout_raw(table, layout), "base")


def _gradient_scale(table: ThetaTable) -> float:
    return max(float(np.linalg.norm(g)) for g in table.gradients.values())


def _denominator_floor(table: ThetaTable) -> float:
    # Hadamard bound on |D| times a generous relative margin.
    return 1e-12 * _gradient_scale(table) ** 3


def _checked_div(numerator: complex, denominator: complex, floor: float, what: str) -> complex:
    if abs(denominator) < floor:
        raise DegenerateDenominator(f"{what} has magnitude {abs(denominator):.3e} < {floor:.3e}")
    return numerator / denominator


def cramer_lambdas(table: ThetaTable, row: int, cols: Sequence[int]) -> np.ndarray:
    """Row weights making the chosen 5x5 block satisfy its column relation.

    ``cols`` are five matrix positions, ``row`` one of them.  The four
    off-diagonal entries of the row split into three source gradients and a
    target (the last off-diagonal column); the weights solve

        sum_s lambda_s grad_s = lambda_t grad_t

    by Cramer's rule: lambda for a source is the determinant of the sources
    with that gradient replaced by the target's, lambda_t the determinant of
    the sources themselves.  Returned aligned with ``cols`` (0 at ``row``).

    The relation solved is always "first four columns sum to the fifth"; for
    the row whose diagonal occupies the fifth column the target lives in the
    fourth one and its weight picks up a minus sign so that the same column
    relation holds verbatim.  That sign is what makes the left-symmetrised
    block symmetric rather than anti-symmetric in its last corner.
    """
    cols = tuple(cols)
    if len(cols) != 5 or len(set(cols)) != 5 or row not in cols:
        raise ValueError("cols must be 5 distinct positions containing row")
    layout = standard_char_matrix()
    off = [c for c in cols if c != row]
    labels = [layout.entry(row, c) for c in off]
    sources, target = labels[:3], labels[3]
    target_sign = -1.0 if row == max(cols) else 1.0

    det_sources = table.jacobian(*sources)
    norms = [float(np.linalg.norm(table.gradient(n))) for n in sources]
    if abs(det_sources) < 1e-10 * np.prod(norms):
        raise SingularSystem(
            f"gradient system {[n.code for n in sources]} is singular "
            f"(|det| = {abs(det_sources):.3e})"
        )

    weights = np.zeros(5, dtype=complex)
    for k, col in enumerate(off):
        if k == 3:
            weights[cols.index(col)] = target_sign * det_sources
        else:
            replaced = list(sources)
            replaced[k] = target
            weights[cols.index(col)] = table.jacobian(*replaced)
    return weights


def _cramer_block(table: ThetaTable, positions: Sequence[int]) -> np.ndarray:
    """The 5x5 scalar matrix whose rows carry their Cramer weights."""
    block = np.zeros((5, 5), dtype=complex)
    for r, row in enumerate(positions):
        block[r] = cramer_lambdas(table, row, positions)
    return block


@dataclass(frozen=True)
class SMinor:
    """A symmetric rank-4 5x5 block of the construction."""

    positions: tuple[int, ...]
    matrix: FormMatrix


def _minor_form_matrix(table: ThetaTable, positions: Sequence[int], scalars) -> FormMatrix:
    layout = standard_char_matrix()
    chars = [
        [None if p == q else layout.entry(p, q) for q in positions] for p in positions
    ]
    raw = np.zeros((5, 5, 3), dtype=complex)
    for a, p in enumerate(positions):
        for b, q in enumerate(positions):
            if p != q:
                raw[a, b] = table.gradient(layout.entry(p, q))
    return FormMatrix(chars, scalars, raw)


def build_S(table: ThetaTable, fifth: int) -> SMinor:
    """The symmetric 5x5 block on rows/columns (1, 2, 3, 4, fifth), 1-based.

    Cramer weights per row, then a left diagonal d_j = block[0, j] / block[j, 0]
    (validated downstream against full symmetry), then the congruence that
    normalises the first row for merging.
    """
    if fifth not in (5, 6, 7, 8):
        raise ValueError("fifth must be one of 5, 6, 7, 8 (1-based column of the layout)")
    positions = (0, 1, 2, 3, fifth - 1)
    block = _cramer_block(table, positions)
    floor = _denominator_floor(table)

    d = np.ones(5, dtype=complex)
    for j in range(1, 5):
        d[j] = _checked_div(block[0, j], block[j, 0], floor, f"symmetrising ratio ({j},0)")
    sym = d[:, None] * block

    t = np.ones(5, dtype=complex)
    t[1] = _checked_div(block[1, 0], block[0, 1] * block[1, 2], floor, "overlap normaliser 1")
    t[2] = _checked_div(block[2, 0], block[0, 2], floor, "overlap normaliser 2")
    scalars = t[:, None] * t[None, :] * sym
    np.fill_diagonal(scalars, 0.0)
    return SMinor(positions, _minor_form_matrix(table, positions, scalars))


@dataclass(frozen=True)
class MergeConstants:
    """The degree-zero determinant ratios gluing the four 5x5 blocks."""

    A: complex
    B: complex
    C: complex

    def for_fifth(self, fifth: int) -> complex:
        return {6: self.A, 7: self.B, 8: self.C}[fifth]


def merge_constants(table: ThetaTable) -> MergeConstants:
    """A, B, C for the blocks with fifth column 6, 7, 8 respectively."""
    layout = standard_char_matrix()
    floor = _denominator_floor(table)
    values = {}
    for fifth in (6, 7, 8):
        p5 = fifth - 1
        x = layout.entry(0, p5)  # 23 / 15 / 32
        y = layout.entry(1, p5)  # 54 / 62 / 45
        num = (
            table.jacobian(77, 46, 51)
            * table.jacobian(31, 13, 26)
            * table.jacobian(77, y, 26)
        )
        den = (
            table.jacobian(77, 31, 26)
            * table.jacobian(77, x, 51)
            * table.jacobian(y, 13, 26)
        )
        values[fifth] = _checked_div(num, den, floor**3, f"merge constant denominator ({fifth})")
    return MergeConstants(A=values[6], B=values[7], C=values[8])


def merged_minor(table: ThetaTable, fifth: int, mc: MergeConstants | None = None) -> SMinor:
    """The 5x5 block congruence-aligned with the fifth=5 block on shared slots.

    The congruence diagonal is (sqrt(K), sqrt(K) r1, r2/sqrt(K), r3/sqrt(K),
    1/sqrt(K)) with K the block's merge constant; each entry picks up an
    integer power of K, so only K itself is ever used.
    """
    if fifth == 5:
        return build_S(table, 5)
    if fifth not in (6, 7, 8):
        raise ValueError("fifth must be one of 5, 6, 7, 8")
    if mc is None:
        mc = merge_constants(table)
    layout = standard_char_matrix()
    floor = _denominator_floor(table)
    p5 = fifth - 1
    x = layout.entry(0, p5)
    x2 = layout.entry(2, p5)  # 47 / 71 / 56
    K = mc.for_fifth(fifth)

    ratios = np.ones(5, dtype=complex)
    ratios[1] = _checked_div(
        table.jacobian(77, x, 51), table.jacobian(77, 46, 51), floor, "merge ratio 1"
    )
    ratios[2] = _checked_div(
        table.jacobian(22, 13, 35), table.jacobian(x2, 13, 35), floor, "merge ratio 2"
    )
    ratios[3] = _checked_div(
        table.jacobian(77, 64, 46), table.jacobian(77, 64, x), floor, "merge ratio 3"
    )
    exponents = np.array([1, 1, -1, -1, -1])

    s = build_S(table, fifth)
    scalars = s.matrix.scalars.copy()
    for i in range(5):
        for j in range(5):
            if i == j:
                continue
            scalars[i, j] *= ratios[i] * ratios[j] * K ** ((exponents[i] + exponents[j]) // 2)
    return SMinor(s.positions, _minor_form_matrix(table, s.positions, scalars))


@dataclass(frozen=True)
class XCoefficients:
    """The six scalars of the lower-right 4x4 corner; x65 both derivations."""

    x65_row5: complex
    x65_row6: complex
    x53: complex
    x74: complex
    x36: complex
    x11: complex
    x27: complex

    @property
    def x65(self) -> complex:
        return self.x65_row5

    def consistency(self) -> float:
        """Relative gap between the two derivations of x65."""
        return abs(self.x65_row5 - self.x65_row6) / max(abs(self.x65_row5), 5e-324)


def compute_X(table: ThetaTable, mc: MergeConstants | None = None) -> XCoefficients:
    """Closed-form corner coefficients from the merged column relations."""
    if mc is None:
        mc = merge_constants(table)
    D = table.jacobian
    A, B, C = mc.A, mc.B, mc.C
    floor = _denominator_floor(table)

    def div(num, den, what):
        return _checked_div(num, den, floor, what)

    x65_row5 = (
        (1 / A)
        * (A * D(77, 23, 51) - D(77, 46, 51))
        * div(D(22, 31, 17) * D(64, 13, 35), D(65, 31, 17) * D(22, 13, 35), "x65 row-5")
    )
    x65_row6 = (
        (1 / A - div(D(77, 64, 23), D(77, 64, 46), "x65 ratio"))
        * D(77, 64, 46)
        * D(51, 26, 35)
        * div(D(72, 54, 47), D(72, 26, 35) * D(65, 54, 47), "x65 row-6")
    )
    x53 = (
        (1 / B)
        * (B * D(77, 15, 51) - D(77, 46, 51))
        * div(D(22, 31, 17) * D(64, 13, 35), D(53, 31, 17) * D(22, 13, 35), "x53")
    )
    x74 = (
        (1 / C)
        * (1 - C * div(D(77, 64, 32), D(77, 64, 46), "x74 ratio"))
        * div(D(77, 64, 51) * D(46, 31, 22), D(74, 31, 22), "x74")
    )
    x36 = (
        (1 / B)
        * (
            1
            - div(
                D(54, 13, 26) * D(77, 23, 51) * D(15, 64, 51) * D(77, 62, 26),
                D(23, 64, 51) * D(77, 54, 26) * D(77, 15, 51) * D(62, 13, 26),
                "x36 ratio",
            )
        )
        * div(D(77, 64, 51) * D(23, 47, 72), D(36, 47, 72), "x36")
    )
    x11 = (
        (1 / C - div(D(77, 64, 32), A * D(77, 64, 23), "x11 ratio"))
        * div(D(23, 54, 47) * D(77, 64, 51), D(11, 54, 47), "x11")
    )
    x27 = (
        (1 / C - div(D(77, 64, 32), B * D(77, 64, 15), "x27 ratio"))
        * div(D(15, 62, 71) * D(77, 64, 51), D(27, 62, 71), "x27")
    )
    return XCoefficients(x65_row5, x65_row6, x53, x74, x36, x11, x27)


def assemble_full(table: ThetaTable, final_congruence: bool = True) -> BitangentMatrix:
    """The full 8x8 rank-4 matrix of scaled bitangent forms.

    Scalars follow the merged closed forms; with ``final_congruence`` the
    diagonal congruence by diag(1, D(77,31,26), 1, ..., 1) is applied, which
    makes every entry homogeneous of the same degree in the gradients.
    """
    layout = standard_char_matrix()
    D = table.jacobian
    mc = merge_constants(table)
    A, B, C = mc.A, mc.B, mc.C
    x = compute_X(table, mc)
    floor = _denominator_floor(table)

    def div(num, den, what="entry denominator"):
        return _checked_div(num, den, floor, what)

    s = np.zeros((8, 8), dtype=complex)
    s[0, 1] = div(D(31, 13, 26), D(77, 31, 26))
    s[0, 2] = D(22, 13, 35)
    s[0, 3] = D(77, 64, 46)
    s[0, 4] = s[0, 5] = s[0, 6] = s[0, 7] = D(77, 64, 51)
    s[1, 2] = div(D(22, 13, 35), D(77, 46, 51))
    s[1, 3] = div(D(77, 13, 31), D(77, 31, 26))
    s[1, 4] = div(D(77, 13, 26), D(77, 31, 26))
    row1_tail = D(31, 13, 26) * D(77, 13, 26)
    s[1, 5] = div(row1_tail, A * D(54, 13, 26) * D(77, 31, 26))
    s[1, 6] = div(row1_tail, B * D(62, 13, 26) * D(77, 31, 26))
    s[1, 7] = div(row1_tail, C * D(45, 13, 26) * D(77, 31, 26))
    s[2, 3] = D(64, 13, 22)
    s[2, 4] = D(64, 13, 35)
    row2_tail = D(22, 13, 35) * D(64, 13, 35)
    s[2, 5] = div(row2_tail, A * D(47, 13, 35))
    s[2, 6] = div(row2_tail, B * D(71, 13, 35))
    s[2, 7] = div(row2_tail, C * D(56, 13, 35))
    row3_tail = D(77, 64, 46) * D(51, 26, 35)
    s[3, 4] = div(row3_tail, D(17, 26, 35))
    s[3, 5] = div(row3_tail, A * D(72, 26, 35))
    s[3, 6] = div(row3_tail, B * D(44, 26, 35))
    s[3, 7] = div(row3_tail, C * D(63, 26, 35))
    s[4, 5] = x.x65
    s[4, 6] = x.x53
    s[4, 7] = x.x74
    s[5, 6] = x.x36
    s[5, 7] = x.x11
    s[6, 7] = x.x27

    i, j = np.triu_indices(8, 1)
    s[j, i] = s[i, j]

    variant = "merged"
    if final_congruence:
        diag = np.ones(8, dtype=complex)
        diag[1] = D(77, 31, 26)
        s = diag[:, None] * s * diag[None, :]
        variant = "merged+congruence"
    return BitangentMatrix(layout, s, _layout_raw(table, layout), variant)


def rank_profile(matrix: FormMatrix, z_samples) -> list[float]:
    """sigma_5 / sigma_4 of the evaluated matrix per z sample (NaN for z = 0)."""
    ratios = []
    for z in z_samples:
        values = matrix.evaluate(z)
        scale = np.max(np.abs(values))
        if scale == 0.0:
            ratios.append(float("nan"))
            continue
        sv = np.linalg.svd(values, compute_uv=False)
        ratios.append(float(sv[4] / sv[3]) if sv[3] > 0 else float("nan"))
    return ratios
