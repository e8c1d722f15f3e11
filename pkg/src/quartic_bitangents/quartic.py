"""Quartic recovery from 4x4 minors and geometric verification.

Any 4x4 minor of the rank-4 bitangent matrix expands to a homogeneous
quartic in (z1, z2, z3); all such minors are proportional and cut out the
same smooth plane quartic.  Restricting the quartic to one of its 28 entry
lines must give a perfect square of a binary quadratic, i.e. a double
contact: this is the defining property of a bitangent and the end-to-end
acceptance check of the whole construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bitangents import (
    BitangentMatrix,
    FormMatrix,
    LinearForm,
    assemble_full,
    base_matrix,
    build_S,
    compute_X,
    merge_constants,
    merged_minor,
    rank_profile,
)
from .characteristics import Characteristic, standard_char_matrix
from .errors import DegenerateDenominator, ZeroForm, ZeroMinor
from .theta import (
    ThetaTable,
    degeneracy_indicator,
    jacobi_identity_residual,
    riemann_relation_check,
)

__all__ = [
    "MONOMIALS",
    "HomogeneousQuartic",
    "BinaryQuartic",
    "minor_quartic",
    "proportionality",
    "extract_Q",
    "restrict_to_line",
    "DoubleContact",
    "double_contact",
    "is_double_contact",
    "VerificationThresholds",
    "CheckResult",
    "VerificationReport",
    "verify_all",
    "RIEMANN_RELATIONS",
]

# Exponent triples (a, b, c) of z1^a z2^b z3^c, graded-lexicographic.
MONOMIALS: tuple[tuple[int, int, int], ...] = tuple(
    sorted(
        ((a, b, 4 - a - b) for a in range(5) for b in range(5 - a)),
        key=lambda m: (-m[0], -m[1], -m[2]),
    )
)

_MONOMIAL_INDEX = {m: k for k, m in enumerate(MONOMIALS)}

# The two quartic identities among genus-3 theta constants used by the
# construction; each row is (r1, r2, r3) with r1 = +-r2 +-r3 for one sign
# pattern, every quad a product of four even constants.
RIEMANN_RELATIONS = (
    ((52, 75, 41, 66), (3, 10, 24, 37), (14, 7, 33, 20)),
    ((40, 67, 41, 66), (3, 2, 24, 25), (6, 21, 7, 20)),
)


@dataclass(frozen=True)
class HomogeneousQuartic:
    """15 coefficients of a degree-4 form, normalised by its largest one."""

    coeffs: np.ndarray
    pivot_index: int
    pivot_value: complex

    @classmethod
    def from_raw(cls, raw) -> "HomogeneousQuartic":
        raw = np.asarray(raw, dtype=complex)
        if raw.shape != (15,):
            raise ValueError("a homogeneous quartic has 15 coefficients")
        pivot = int(np.argmax(np.abs(raw)))
        value = raw[pivot]
        if value == 0:
            raise ZeroForm("cannot normalise the zero quartic")
        coeffs = raw / value
        coeffs.setflags(write=False)
        return cls(coeffs, pivot, complex(value))

    def evaluate(self, z) -> complex:
        z = np.asarray(z, dtype=complex)
        total = 0j
        for (a, b, c), coef in zip(MONOMIALS, self.coeffs):
            total += coef * z[0] ** a * z[1] ** b * z[2] ** c
        return complex(total)

    def gradient_at(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        grad = np.zeros(3, dtype=complex)
        for (a, b, c), coef in zip(MONOMIALS, self.coeffs):
            if a:
                grad[0] += coef * a * z[0] ** (a - 1) * z[1] ** b * z[2] ** c
            if b:
                grad[1] += coef * b * z[0] ** a * z[1] ** (b - 1) * z[2] ** c
            if c:
                grad[2] += coef * c * z[0] ** a * z[1] ** b * z[2] ** (c - 1)
        return grad


@dataclass(frozen=True)
class BinaryQuartic:
    """g(s, t) = sum_k coeffs[k] s^(4-k) t^k."""

    coeffs: np.ndarray

    def evaluate(self, s: complex, t: complex) -> complex:
        return complex(sum(c * s ** (4 - k) * t**k for k, c in enumerate(self.coeffs)))


def _homo_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Product of homogeneous polynomials stored as P[a, b], c implied."""
    dp = p.shape[0] - 1
    dq = q.shape[0] - 1
    out = np.zeros((dp + dq + 1, dp + dq + 1), dtype=complex)
    for a in range(dp + 1):
        for b in range(dp + 1 - a):
            v = p[a, b]
            if v != 0:
                out[a : a + dq + 1, b : b + dq + 1] += v * q
    return out


def _linear_table(vec: np.ndarray) -> np.ndarray:
    table = np.zeros((2, 2), dtype=complex)
    table[1, 0] = vec[0]
    table[0, 1] = vec[1]
    table[0, 0] = vec[2]
    return table


def minor_quartic(matrix: FormMatrix, rows, cols, zero_tol: float | None = None) -> HomogeneousQuartic:
    """Expand det of the (rows x cols) 4x4 submatrix of linear forms.

    Leibniz expansion over the 24 permutations; raises ZeroMinor when every
    coefficient sits at the roundoff floor of the expansion.
    """
    rows = tuple(rows)
    cols = tuple(cols)
    if len(rows) != 4 or len(cols) != 4:
        raise ValueError("need 4 row and 4 column indices")
    entries = [[matrix.coeff_vector(i, j) for j in cols] for i in rows]

    acc = np.zeros((5, 5), dtype=complex)
    mass = np.zeros((5, 5))  # cancellation-free magnitude of the expansion
    for perm in itertools.permutations(range(4)):
        vecs = [entries[i][perm[i]] for i in range(4)]
        if any(not v.any() for v in vecs):
            continue
        sign = _permutation_sign(perm)
        prod = _homo_mul(_linear_table(vecs[0]), _linear_table(vecs[1]))
        prod = _homo_mul(prod, _linear_table(vecs[2]))
        prod = _homo_mul(prod, _linear_table(vecs[3]))
        acc += sign * prod
        mass += np.abs(prod)

    raw = np.zeros(15, dtype=complex)
    for (a, b, c), k in _MONOMIAL_INDEX.items():
        raw[k] = acc[a, b]
    if zero_tol is None:
        zero_tol = 1e-12 * float(np.max(mass))
    if np.max(np.abs(raw)) <= zero_tol:
        raise ZeroMinor(f"minor rows={rows} cols={cols} expands below {zero_tol:.3e}")
    return HomogeneousQuartic.from_raw(raw)


def _permutation_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def proportionality(q1: HomogeneousQuartic, q2: HomogeneousQuartic) -> float:
    """min over scalars s of ||q1 - s q2|| / ||q1|| (closed-form least squares)."""
    a = q1.coeffs
    b = q2.coeffs
    denom = np.vdot(b, b)
    if denom == 0:
        raise ZeroForm("cannot compare against the zero quartic")
    s = np.vdot(b, a) / denom
    return float(np.linalg.norm(a - s * b) / np.linalg.norm(a))


def extract_Q(table: ThetaTable, matrix: BitangentMatrix) -> FormMatrix:
    """The symmetric 4x4 determinantal representation Q of the quartic.

    The principal 4x4 corner of the assembled matrix (congruence form)
    divided by D(77,31,26); det Q = 0 is an equation of the curve.
    """
    divisor = table.jacobian(77, 31, 26)
    scale = max(float(np.linalg.norm(g)) for g in table.gradients.values())
    if abs(divisor) < 1e-12 * scale**3:
        raise DegenerateDenominator("D(77,31,26) is numerically zero")
    scalars = matrix.scalars[:4, :4].copy()
    if matrix.variant == "merged":
        diag = np.ones(4, dtype=complex)
        diag[1] = divisor
        scalars = diag[:, None] * scalars * diag[None, :]
    elif matrix.variant != "merged+congruence":
        raise ValueError(f"need an assembled matrix, got variant {matrix.variant!r}")
    scalars /= divisor
    chars = [row[:4] for row in matrix.chars[:4]]
    return FormMatrix(chars, scalars, matrix.raw[:4, :4])


def restrict_to_line(f: HomogeneousQuartic, line) -> BinaryQuartic:
    """g(s, t) = f(s u + t v) with {u, v} an orthonormal basis of the line."""
    coeffs = line.coeffs if isinstance(line, LinearForm) else np.asarray(line, dtype=complex)
    norm = np.linalg.norm(coeffs)
    if norm == 0:
        raise ZeroForm("cannot restrict to the zero line")
    _, _, vh = np.linalg.svd(coeffs.reshape(1, 3) / norm)
    u = vh[1].conj()
    v = vh[2].conj()

    out = np.zeros(5, dtype=complex)
    for (a, b, c), coef in zip(MONOMIALS, f.coeffs):
        if coef == 0:
            continue
        term = np.array([1.0 + 0j])  # coeff of s^(d-i) t^i, d the running degree
        for power, k in ((a, 0), (b, 1), (c, 2)):
            lin = np.array([u[k], v[k]])
            for _ in range(power):
                term = np.convolve(term, lin)
        out += coef * term  # a + b + c == 4, so term always has 5 entries
    return BinaryQuartic(out)


def _chordal(r1: np.ndarray, r2: np.ndarray) -> float:
    return float(abs(r1[0] * r2[1] - r1[1] * r2[0]))


def _projective_roots(coeffs: np.ndarray) -> list[np.ndarray]:
    """Four projective roots of a binary quartic as unit 2-vectors."""
    c = np.asarray(coeffs, dtype=complex)
    scale = float(np.max(np.abs(c)))
    if scale == 0:
        raise ZeroForm("zero binary quartic has no isolated roots")
    c = c / scale
    flipped = abs(c[0]) < abs(c[4])
    work = c[::-1] if flipped else c
    lead = 0
    while lead < 4 and abs(work[lead]) <= 1e-11:
        lead += 1
    finite = np.roots(work[lead:]) if lead < 4 else np.array([])
    roots = []
    for x in finite:
        vec = np.array([x, 1.0 + 0j])
        roots.append(vec / np.linalg.norm(vec))
    for _ in range(lead):
        roots.append(np.array([1.0 + 0j, 0j]))
    if flipped:
        roots = [r[::-1] for r in roots]
    return roots


def _aligned_mean(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    inner = np.vdot(r1, r2)
    if abs(inner) > 0:
        r2 = r2 * (inner.conjugate() / abs(inner))
    mean = r1 + r2
    norm = np.linalg.norm(mean)
    return mean / norm if norm > 0 else r1


def _quadratic_from_points(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    # (beta s - alpha t) per point, coefficients ordered s^2, st, t^2
    return np.convolve(np.array([p1[1], -p1[0]]), np.array([p2[1], -p2[0]]))


def _refine_square(g: np.ndarray, quad: np.ndarray) -> tuple[np.ndarray, float]:
    """Gauss-Newton fit of q with ||q*q - g|| minimal, from a starting quadratic."""
    target = g
    q = quad.astype(complex)
    scale_num = np.vdot(np.convolve(q, q), target)
    scale_den = np.vdot(np.convolve(q, q), np.convolve(q, q))
    if abs(scale_den) > 0:
        q = q * np.sqrt(scale_num / scale_den)
    best_q, best_res = q, float(np.linalg.norm(np.convolve(q, q) - target))
    for _ in range(25):
        conv = np.convolve(q, q)
        residual = conv - target
        jac = np.zeros((5, 3), dtype=complex)
        for m in range(5):
            for k in range(3):
                if 0 <= m - k <= 2:
                    jac[m, k] = 2.0 * q[m - k]
        step, *_ = np.linalg.lstsq(jac, -residual, rcond=None)
        q = q + step
        res = float(np.linalg.norm(np.convolve(q, q) - target))
        if res < best_res:
            best_q, best_res = q, res
        if np.linalg.norm(step) < 1e-15 * max(np.linalg.norm(q), 1.0):
            break
    return best_q, best_res


@dataclass(frozen=True)
class DoubleContact:
    """Outcome of testing a binary quartic for being a perfect square."""

    is_square: bool
    residual: float
    gap_residual: float
    fit_residual: float
    contact_points: tuple[np.ndarray, np.ndarray]


def double_contact(g: BinaryQuartic, tol: float = 1e-6) -> DoubleContact:
    coeffs = np.asarray(g.coeffs, dtype=complex)
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0:
        raise ZeroForm("the zero binary quartic is not testable")
    normalised = coeffs / scale

    roots = _projective_roots(normalised)
    pairings = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
    spread = max(_chordal(a, b) for a, b in itertools.combinations(roots, 2))
    best_pairing = None
    best_cost = math.inf
    for pairing in pairings:
        cost = sum(_chordal(roots[i], roots[j]) ** 2 for i, j in pairing)
        if cost < best_cost:
            best_cost = cost
            best_pairing = pairing
    if spread < 1e-8:
        gap_residual = 0.0  # quadruple root: a fourth power, trivially a square
    else:
        gap_residual = math.sqrt(best_cost) / spread

    mids = tuple(_aligned_mean(roots[i], roots[j]) for i, j in best_pairing)
    quad0 = _quadratic_from_points(*mids)
    fitted, fit_norm = _refine_square(normalised, quad0)
    fit_residual = fit_norm / float(np.linalg.norm(normalised))

    contact = _projective_roots_of_quadratic(fitted)
    residual = min(gap_residual, fit_residual)
    return DoubleContact(residual < tol, residual, gap_residual, fit_residual, contact)


def _projective_roots_of_quadratic(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scale = float(np.max(np.abs(q)))
    q = q / scale
    if abs(q[0]) >= 1e-12:
        xs = np.roots(q)
        pts = [np.array([x, 1.0 + 0j]) for x in xs]
        while len(pts) < 2:
            pts.append(np.array([1.0 + 0j, 0j]))
    elif abs(q[1]) >= 1e-12:
        pts = [np.array([-q[2] / q[1], 1.0 + 0j]), np.array([1.0 + 0j, 0j])]
    else:
        pts = [np.array([1.0 + 0j, 0j]), np.array([1.0 + 0j, 0j])]
    return tuple(p / np.linalg.norm(p) for p in pts)


def is_double_contact(g: BinaryQuartic, tol: float = 1e-6) -> tuple[bool, float]:
    result = double_contact(g, tol)
    return result.is_square, result.residual


@dataclass(frozen=True)
class VerificationThresholds:
    """Pass thresholds; defaults assume theta tolerance 1e-12."""

    rank_ratio: float = 1e-8
    base_rank_floor: float = 1e-2
    symmetry: float = 1e-8
    overlap: float = 1e-8
    jacobi: float = 1e-8
    riemann: float = 1e-8
    x65_consistency: float = 1e-8
    x65_theta: float = 1e-6
    minor_proportionality: float = 1e-6
    det_q_proportionality: float = 1e-8
    bitangency: float = 1e-6
    nonsingularity_floor: float = 1e-6
    degeneracy_floor: float = 1e-6
    z_samples: int = 5
    nonprincipal_samples: int = 30
    seed: int = 20240


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    threshold: float
    larger_is_better: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "worst", float(self.worst))
        object.__setattr__(self, "threshold", float(self.threshold))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst": self.worst,
            "threshold": self.threshold,
            "larger_is_better": self.larger_is_better,
            "details": self.details,
        }


@dataclass(frozen=True)
class VerificationReport:
    degeneracy: float
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "degeneracy_indicator": self.degeneracy,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _sample_z(rng: np.random.Generator, count: int) -> list[np.ndarray]:
    samples = []
    for _ in range(count):
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        samples.append(v / np.linalg.norm(v))
    return samples


def _x65_theta_crosscheck(table: ThetaTable, x65: complex) -> float:
    c = table.constant
    expr = (
        abs(c(14) * c(33))
        * abs(c(0) * c(42) * c(57) * c(61) * c(70) / (c(52) * c(75)))
        * abs(c(6) * c(21) * c(7) * c(20) / (c(41) * c(40) * c(66) * c(67)))
    )
    expected = math.pi**3 * expr
    return abs(abs(x65) - expected) / max(abs(x65), 5e-324)


def verify_all(
    table: ThetaTable,
    matrix: BitangentMatrix,
    thresholds: VerificationThresholds = VerificationThresholds(),
) -> VerificationReport:
    """Run every analytic and geometric contract; failures are data, not errors."""
    th = thresholds
    rng = np.random.default_rng(th.seed)
    checks: list[CheckResult] = []

    indicator = degeneracy_indicator(table)
    checks.append(
        CheckResult(
            "degeneracy",
            indicator >= th.degeneracy_floor,
            indicator,
            th.degeneracy_floor,
            larger_is_better=True,
        )
    )

    z_samples = _sample_z(rng, th.z_samples)
    assembled_ratios = rank_profile(matrix, z_samples)
    base_ratios = rank_profile(base_matrix(table), z_samples)
    checks.append(
        CheckResult(
            "rank_assembled",
            max(assembled_ratios) < th.rank_ratio,
            max(assembled_ratios),
            th.rank_ratio,
            details={"ratios": assembled_ratios},
        )
    )
    checks.append(
        CheckResult(
            "rank_base",
            min(base_ratios) > th.base_rank_floor,
            min(base_ratios),
            th.base_rank_floor,
            larger_is_better=True,
            details={"ratios": base_ratios},
        )
    )

    sym_worst = max(build_S(table, fifth).matrix.symmetry_residual() for fifth in (5, 6, 7, 8))
    checks.append(CheckResult("block_symmetry", sym_worst < th.symmetry, sym_worst, th.symmetry))

    reference = merged_minor(table, 5)
    overlap_worst = 0.0
    for fifth in (6, 7, 8):
        other = merged_minor(table, fifth)
        for i in range(4):
            for j in range(4):
                if i == j:
                    continue
                a = reference.matrix.scalars[i, j]
                b = other.matrix.scalars[i, j]
                overlap_worst = max(overlap_worst, abs(a - b) / max(abs(a), 5e-324))
    checks.append(
        CheckResult("block_overlap", overlap_worst < th.overlap, overlap_worst, th.overlap)
    )

    layout = standard_char_matrix()
    jacobi_res = {}
    for t1, t2, t3 in layout.principal_triples():
        jacobi_res[f"{t1.code},{t2.code},{t3.code}"] = jacobi_identity_residual(table, t1, t2, t3)
    jacobi_worst = max(jacobi_res.values())
    checks.append(
        CheckResult(
            "jacobi_formula",
            jacobi_worst < th.jacobi,
            jacobi_worst,
            th.jacobi,
            details={"per_triple": jacobi_res},
        )
    )

    riemann_details = []
    riemann_worst = 0.0
    for q1, q2, q3 in RIEMANN_RELATIONS:
        (signs, residual) = riemann_relation_check(table, q1, q2, q3)
        r1 = 1.0 + 0j
        for m in q1:
            r1 *= table.constant(m)
        relative = residual / abs(r1)
        riemann_worst = max(riemann_worst, relative)
        riemann_details.append({"quads": [list(q1), list(q2), list(q3)],
                                "signs": list(signs), "relative_residual": relative})
    checks.append(
        CheckResult(
            "riemann_relations",
            riemann_worst < th.riemann,
            riemann_worst,
            th.riemann,
            details={"relations": riemann_details},
        )
    )

    x = compute_X(table, merge_constants(table))
    checks.append(
        CheckResult(
            "x65_consistency", x.consistency() < th.x65_consistency, x.consistency(), th.x65_consistency
        )
    )
    x_theta = _x65_theta_crosscheck(table, x.x65)
    checks.append(CheckResult("x65_theta_crosscheck", x_theta < th.x65_theta, x_theta, th.x65_theta))

    principal_sets = list(itertools.combinations(range(8), 4))
    principal_quartics = [minor_quartic(matrix, s, s) for s in principal_sets]
    prop_worst = 0.0
    for qa, qb in itertools.combinations(principal_quartics, 2):
        prop_worst = max(prop_worst, proportionality(qa, qb))
    reference_quartic = principal_quartics[principal_sets.index((0, 1, 2, 3))]

    nonprincipal_worst = 0.0
    seen = set()
    while len(seen) < th.nonprincipal_samples:
        rows = tuple(sorted(rng.choice(8, size=4, replace=False)))
        cols = tuple(sorted(rng.choice(8, size=4, replace=False)))
        if rows == cols or (rows, cols) in seen:
            continue
        seen.add((rows, cols))
        q = minor_quartic(matrix, rows, cols)
        nonprincipal_worst = max(nonprincipal_worst, proportionality(reference_quartic, q))
    minors_worst = max(prop_worst, nonprincipal_worst)
    checks.append(
        CheckResult(
            "minor_proportionality",
            minors_worst < th.minor_proportionality,
            minors_worst,
            th.minor_proportionality,
            details={
                "principal_pairwise_worst": prop_worst,
                "nonprincipal_worst": nonprincipal_worst,
                "nonprincipal_count": len(seen),
            },
        )
    )

    q_matrix = extract_Q(table, matrix)
    det_q = minor_quartic(q_matrix, range(4), range(4))
    det_q_res = proportionality(det_q, reference_quartic)
    checks.append(
        CheckResult(
            "det_q_proportionality",
            det_q_res < th.det_q_proportionality,
            det_q_res,
            th.det_q_proportionality,
        )
    )

    bitangency_res = {}
    contact_grad_min = math.inf
    for n, grad in sorted(table.gradients.items(), key=lambda kv: kv[0].label):
        norm = np.linalg.norm(grad)
        restricted = restrict_to_line(reference_quartic, grad / norm)
        contact = double_contact(restricted, th.bitangency)
        bitangency_res[str(n.code)] = contact.residual
        coeffs = grad / norm
        _, _, vh = np.linalg.svd(coeffs.reshape(1, 3))
        basis = (vh[1].conj(), vh[2].conj())
        for point in contact.contact_points:
            zstar = point[0] * basis[0] + point[1] * basis[1]
            zstar = zstar / np.linalg.norm(zstar)
            contact_grad_min = min(
                contact_grad_min, float(np.linalg.norm(reference_quartic.gradient_at(zstar)))
            )
    bitangency_worst = max(bitangency_res.values())
    checks.append(
        CheckResult(
            "bitangency",
            bitangency_worst < th.bitangency,
            bitangency_worst,
            th.bitangency,
            details={"per_line": bitangency_res},
        )
    )
    checks.append(
        CheckResult(
            "nonsingularity",
            contact_grad_min > th.nonsingularity_floor,
            contact_grad_min,
            th.nonsingularity_floor,
            larger_is_better=True,
        )
    )

    return VerificationReport(degeneracy=indicator, checks=tuple(checks))
