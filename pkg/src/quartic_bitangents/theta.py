"""Numerical genus-3 theta constants and gradients with certified truncation.

The series evaluated here is

    theta_m(tau, z) = sum_{p in Z^3} exp(pi i [ v . tau v  +  2 v . (z + m''/2) ]),
    v = p + m'/2,

for a reduced characteristic m = (m', m'') and tau in the Siegel upper
half-space H_3.  At z=0 the even characteristics give the 36 theta
constants; the odd ones vanish and contribute through their z-gradients

    d/dz_k theta_m(tau, 0) = sum_p  2 pi i v_k exp(pi i [ v . tau v + v . m'' ]).

Truncation keeps lattice points with ||v||_inf <= R.  Every dropped term is
bounded by exp(-pi lmin ||v||^2), lmin the smallest eigenvalue of Im tau,
so the tail is controlled by one-dimensional Gaussian sums: with
T0/T1 the plain/|v|-weighted 1-D tails past R and G0/G1 the corresponding
full sums (maximised over the two half-integer shifts),

    constant tail <= 3 T0 G0^2,
    gradient tail <= 2 pi (T1 G0^2 + 2 T0 G1 G0),

via the union bound on which coordinate exceeds R.  The radius search
returns the smallest R whose bound, times the safety factor, meets the
requested tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .characteristics import (
    Characteristic,
    all_characteristics,
    complete_fundamental,
    even_characteristics,
    odd_characteristics,
)
from .errors import EvenCharacteristic, InvalidInput, OddCharacteristic, RadiusOverflow

__all__ = [
    "PeriodMatrix",
    "TruncationConfig",
    "ThetaTable",
    "truncation_radius",
    "series_tail_bound",
    "theta_constant",
    "theta_gradient",
    "theta_series_value",
    "build_theta_table",
    "jacobian_D",
    "complete_fundamental",
    "jacobi_identity_residual",
    "riemann_relation_check",
    "degeneracy_indicator",
]


class PeriodMatrix:
    """A 3x3 complex symmetric matrix with positive definite imaginary part."""

    def __init__(self, tau):
        tau = np.asarray(tau, dtype=complex)
        if tau.shape != (3, 3):
            raise InvalidInput(f"period matrix must be 3x3, got shape {tau.shape}")
        if not np.array_equal(tau, tau.T):
            raise InvalidInput("period matrix must be exactly symmetric as stored")
        eigs = np.linalg.eigvalsh(tau.imag)
        if eigs[0] <= 0.0:
            raise InvalidInput(
                f"imaginary part must be positive definite (min eigenvalue {eigs[0]:.3e})"
            )
        self.tau = tau
        self.tau.setflags(write=False)
        self.min_imag_eigenvalue = float(eigs[0])

    def __repr__(self):
        return f"PeriodMatrix({self.tau.tolist()!r})"


@dataclass(frozen=True)
class TruncationConfig:
    """Knobs for the truncation of the lattice sum."""

    tol: float = 1e-12
    safety: float = 10.0
    max_radius: int = 60

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidInput("tol must be positive")
        if not self.safety >= 1:
            raise InvalidInput("safety must be >= 1")
        if not self.max_radius >= 3:
            raise InvalidInput("max_radius must be >= 3")


def _one_dim_sums(c: float, shift: float, radius: float | None = None) -> tuple[float, float]:
    """Plain and |v|-weighted sums of exp(-c v^2) over v = p + shift, p in Z.

    With ``radius`` set, only |v| > radius contributes (the 1-D tail).
    """
    s0 = s1 = 0.0
    floor = 0 if radius is None else int(radius) + 2
    p = 0
    while True:
        contrib = 0.0
        for q in {p, -p}:
            v = q + shift
            if radius is not None and abs(v) <= radius:
                continue
            e = math.exp(-c * v * v)
            contrib += e
            s0 += e
            s1 += abs(v) * e
        if p > floor and contrib <= s0 * 1e-30 + 5e-324:
            break
        p += 1
    return s0, s1


def series_tail_bound(lambda_min: float, radius: int) -> float:
    """Upper bound on the dropped mass past ||v||_inf <= radius, constants and gradients."""
    c = math.pi * lambda_min
    g0 = g1 = t0 = t1 = 0.0
    for shift in (0.0, 0.5):
        a0, a1 = _one_dim_sums(c, shift)
        b0, b1 = _one_dim_sums(c, shift, radius=radius)
        g0, g1 = max(g0, a0), max(g1, a1)
        t0, t1 = max(t0, b0), max(t1, b1)
    constant_tail = 3.0 * t0 * g0 * g0
    gradient_tail = 2.0 * math.pi * (t1 * g0 * g0 + 2.0 * t0 * g1 * g0)
    return max(constant_tail, gradient_tail)


def truncation_radius(tau: PeriodMatrix, cfg: TruncationConfig = TruncationConfig()) -> int:
    """Smallest radius whose tail bound, times cfg.safety, is within cfg.tol."""
    lam = tau.min_imag_eigenvalue
    if lam <= 0:
        raise InvalidInput("imaginary part of tau is not positive definite")
    for radius in range(1, cfg.max_radius + 1):
        if cfg.safety * series_tail_bound(lam, radius) <= cfg.tol:
            return radius
    raise RadiusOverflow(
        f"no radius <= {cfg.max_radius} reaches tol {cfg.tol:g} at lambda_min {lam:.3e}"
    )


@lru_cache(maxsize=None)
def _lattice(radius: int, top: tuple[int, int, int]) -> np.ndarray:
    """All v = p + top/2 with ||v||_inf <= radius, as an (N, 3) float array."""
    axes = []
    for b in top:
        if b == 0:
            axes.append(np.arange(-radius, radius + 1, dtype=float))
        else:
            axes.append(np.arange(-radius, radius, dtype=float) + 0.5)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    grid.setflags(write=False)
    return grid


def _exp_block(tau: np.ndarray, top: tuple[int, int, int], radius: int) -> tuple[np.ndarray, np.ndarray]:
    v = _lattice(radius, top)
    quad = np.einsum("ni,ij,nj->n", v, tau, v)
    return v, np.exp(1j * np.pi * quad)


def _constant_from_block(v, weights, bottom) -> complex:
    phase = np.exp(1j * np.pi * (v @ np.asarray(bottom, dtype=float)))
    return complex((weights * phase).sum())


def _gradient_from_block(v, weights, bottom) -> np.ndarray:
    phase = np.exp(1j * np.pi * (v @ np.asarray(bottom, dtype=float)))
    return 2j * np.pi * (v.T @ (weights * phase))


def theta_series_value(tau: PeriodMatrix, m, z, radius: int) -> complex:
    """Direct series value theta_m(tau, z) at fixed radius.

    Internal helper for finite-difference and vanishing tests; the tail bound
    certifies z=0 only, so keep ||Im z|| small relative to 1/radius.
    """
    m = Characteristic.parse(m)
    z = np.asarray(z, dtype=complex)
    v = _lattice(radius, m.top)
    quad = np.einsum("ni,ij,nj->n", v, tau.tau, v)
    shift = v @ (z + np.asarray(m.bottom, dtype=float) / 2.0)
    return complex(np.exp(1j * np.pi * (quad + 2.0 * shift)).sum())


def theta_constant(tau: PeriodMatrix, m, cfg: TruncationConfig = TruncationConfig()) -> complex:
    """theta_m(tau, 0) for an even characteristic."""
    m = Characteristic.parse(m)
    if m.is_odd:
        raise OddCharacteristic(f"theta constant of odd characteristic {m.code} vanishes")
    radius = truncation_radius(tau, cfg)
    v, weights = _exp_block(tau.tau, m.top, radius)
    return _constant_from_block(v, weights, m.bottom)


def theta_gradient(tau: PeriodMatrix, n, cfg: TruncationConfig = TruncationConfig()) -> np.ndarray:
    """grad_z theta_n(tau, 0) for an odd characteristic, as a length-3 complex array."""
    n = Characteristic.parse(n)
    if n.is_even:
        raise EvenCharacteristic(f"gradient at z=0 of even characteristic {n.code} is zero")
    radius = truncation_radius(tau, cfg)
    v, weights = _exp_block(tau.tau, n.top, radius)
    return _gradient_from_block(v, weights, n.bottom)


@dataclass
class ThetaTable:
    """All 36 theta constants and 28 gradients of one period matrix."""

    tau: PeriodMatrix
    constants: dict[Characteristic, complex]
    gradients: dict[Characteristic, np.ndarray]
    radius: int
    tail_bound: float
    config: TruncationConfig
    _jacobian_cache: dict[tuple[int, int, int], complex] = field(default_factory=dict, repr=False)

    def constant(self, m) -> complex:
        return self.constants[Characteristic.parse(m)]

    def gradient(self, n) -> np.ndarray:
        return self.gradients[Characteristic.parse(n)]

    def gradient_rows(self, labels) -> np.ndarray:
        return np.array([self.gradient(n) for n in labels])

    def jacobian(self, n1, n2, n3) -> complex:
        key = tuple(Characteristic.parse(n).code for n in (n1, n2, n3))
        got = self._jacobian_cache.get(key)
        if got is None:
            got = complex(np.linalg.det(self.gradient_rows(key)))
            self._jacobian_cache[key] = got
        return got


def build_theta_table(tau: PeriodMatrix, cfg: TruncationConfig = TruncationConfig()) -> ThetaTable:
    """Evaluate every characteristic at one shared radius (deterministic order)."""
    radius = truncation_radius(tau, cfg)
    constants: dict[Characteristic, complex] = {}
    gradients: dict[Characteristic, np.ndarray] = {}
    for top in itertools.product((0, 1), repeat=3):
        v, weights = _exp_block(tau.tau, top, radius)
        for bottom in itertools.product((0, 1), repeat=3):
            m = Characteristic(top, bottom)
            if m.is_even:
                constants[m] = _constant_from_block(v, weights, bottom)
            else:
                grad = _gradient_from_block(v, weights, bottom)
                grad.setflags(write=False)
                gradients[m] = grad
    return ThetaTable(
        tau=tau,
        constants=constants,
        gradients=gradients,
        radius=radius,
        tail_bound=series_tail_bound(tau.min_imag_eigenvalue, radius),
        config=cfg,
    )


def jacobian_D(table: ThetaTable, n1, n2, n3) -> complex:
    """Determinant of the three gradients (rows ordered as given)."""
    chars = tuple(Characteristic.parse(n) for n in (n1, n2, n3))
    for n in chars:
        if n.is_even:
            raise EvenCharacteristic(f"jacobian_D needs odd characteristics, got {n.code}")
    return table.jacobian(*chars)


def jacobi_identity_residual(table: ThetaTable, n1, n2, n3) -> float:
    """Relative error of |D(n1,n2,n3)| against pi^3 * prod |theta_m|.

    The product runs over the five even characteristics completing the
    azygetic triple to a fundamental system (Jacobi's derivative formula).
    """
    det = abs(jacobian_D(table, n1, n2, n3))
    completion = complete_fundamental(n1, n2, n3)
    expected = math.pi**3
    for m in completion:
        expected *= abs(table.constant(m))
    return abs(det - expected) / max(expected, 5e-324)


def riemann_relation_check(table: ThetaTable, quad1, quad2, quad3):
    """Best sign pattern and residual for r1 + s2 r2 + s3 r3 = 0.

    Each quad is four even characteristics; r_i is the product of their
    constants.  Returns ((s2, s3), |r1 + s2 r2 + s3 r3|) minimised over the
    four sign patterns; callers normalise by |r1| as needed.
    """
    products = []
    for quad in (quad1, quad2, quad3):
        chars = [Characteristic.parse(m) for m in quad]
        if len(chars) != 4:
            raise ValueError("each quad must contain 4 even characteristics")
        r = 1.0 + 0.0j
        for m in chars:
            r *= table.constant(m)
        products.append(r)
    r1, r2, r3 = products
    best = None
    for s2, s3 in itertools.product((1, -1), repeat=2):
        residual = abs(r1 + s2 * r2 + s3 * r3)
        if best is None or residual < best[1]:
            best = ((s2, s3), residual)
    return best


def degeneracy_indicator(table: ThetaTable) -> float:
    """min |theta_m| / max |theta_m| over even m; ~0 flags the hyperelliptic locus."""
    mags = [abs(v) for v in table.constants.values()]
    return min(mags) / max(mags)
