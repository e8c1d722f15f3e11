"""Theta series against independent oracles: 1-D factorisation, explicit tails,
finite differences, Jacobi's derivative formula, Riemann's quartic relations."""

import itertools
import math

import numpy as np
import pytest

from quartic_bitangents.characteristics import Characteristic, standard_char_matrix
from quartic_bitangents.errors import (
    EvenCharacteristic,
    InvalidInput,
    OddCharacteristic,
    RadiusOverflow,
)
from quartic_bitangents.theta import (
    PeriodMatrix,
    ThetaTable,
    TruncationConfig,
    build_theta_table,
    degeneracy_indicator,
    jacobi_identity_residual,
    jacobian_D,
    riemann_relation_check,
    series_tail_bound,
    theta_constant,
    theta_gradient,
    theta_series_value,
    truncation_radius,
)

from conftest import admissible_table

IDENTITY_TAU = PeriodMatrix(1j * np.eye(3))


def theta_1d(a, b, t, z=0.0, terms=60):
    """Independent genus-1 series oracle."""
    total = 0j
    for n in range(-terms, terms + 1):
        v = n + a / 2.0
        total += np.exp(1j * np.pi * (v * v * t + 2.0 * v * (z + b / 2.0)))
    return total


def explicit_tail(tau: PeriodMatrix, radius: int, extra: int = 20) -> float:
    """Oracle: exact sum of dropped |term| magnitudes out to radius + extra."""
    worst = 0.0
    for top in itertools.product((0, 1), repeat=3):
        axes = [
            np.arange(-radius - extra, radius + extra + 1, dtype=float) + (0.5 if b else 0.0)
            for b in top
        ]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        dropped = grid[np.max(np.abs(grid), axis=1) > radius + 1e-12]
        terms = np.exp(-np.pi * np.einsum("ni,ij,nj->n", dropped, tau.tau.imag, dropped))
        constant_tail = float(terms.sum())
        gradient_tail = 2.0 * math.pi * float(np.max(np.abs(dropped).T @ terms))
        worst = max(worst, constant_tail, gradient_tail)
    return worst


def test_radius_at_identity():
    cfg = TruncationConfig(tol=1e-14)
    radius = truncation_radius(IDENTITY_TAU, cfg)
    assert radius <= 5
    tail = explicit_tail(IDENTITY_TAU, radius)
    assert tail <= cfg.tol
    # the analytic bound dominates the explicit tail
    assert tail <= series_tail_bound(1.0, radius)


def test_radius_grows_when_imaginary_part_shrinks():
    cfg = TruncationConfig(tol=1e-14)
    r_full = truncation_radius(IDENTITY_TAU, cfg)
    r_quarter = truncation_radius(PeriodMatrix(0.25j * np.eye(3)), cfg)
    # the Gaussian bound scales the radius like sqrt(4) = 2 up to the integer
    # rounding of the shell start, so allow one step of slack below doubling
    assert r_quarter >= 2 * r_full - 1
    assert r_quarter > r_full


def test_radius_overflow():
    with pytest.raises(RadiusOverflow):
        truncation_radius(PeriodMatrix(1e-4j * np.eye(3)), TruncationConfig(tol=1e-12, max_radius=5))


def test_period_matrix_rejects_non_positive_imaginary():
    with pytest.raises(InvalidInput):
        PeriodMatrix(np.diag([1j, 1j, -1j]))
    with pytest.raises(InvalidInput):
        PeriodMatrix(np.array([[1j, 0.1, 0], [0.2, 1j, 0], [0, 0, 1j]]))


def test_constant_factorizes_at_identity():
    value = theta_constant(IDENTITY_TAU, 0)
    oracle = theta_1d(0, 0, 1j) ** 3
    assert abs(value - oracle) < 1e-12


def test_constant_with_odd_one_dim_factor_vanishes():
    assert abs(theta_constant(IDENTITY_TAU, 66)) < 1e-12  # [110,110]


def test_constant_rejects_odd_characteristic():
    with pytest.raises(OddCharacteristic):
        theta_constant(IDENTITY_TAU, 77)


def test_diagonal_factorization_all_even():
    rng = np.random.default_rng(3)
    diag = np.diag(0.4 * rng.uniform(-1, 1, 3) + 1j * (1.0 + 0.5 * rng.uniform(0, 1, 3)))
    tau = PeriodMatrix(diag)
    table = build_theta_table(tau)
    for m, value in table.constants.items():
        product = 1.0 + 0j
        for k in range(3):
            product *= theta_1d(m.top[k], m.bottom[k], diag[k, k])
        assert abs(value - product) <= 1e-10 * max(abs(product), 1.0)


def test_constant_conjugation_oracle(main_table):
    # term-by-term conjugation sends tau to -conj(tau) for even characteristics
    tau = main_table.tau
    mirrored = build_theta_table(PeriodMatrix(-tau.tau.conj()), main_table.config)
    for m, value in main_table.constants.items():
        assert abs(np.conj(value) - mirrored.constants[m]) < 1e-11


def test_gradient_single_slot_on_diagonal_tau():
    tau = PeriodMatrix(np.diag([1.1j, 0.9j, 1.3j]))
    grad = theta_gradient(tau, 44)  # [100,100]: odd slot 1, even slots 2, 3
    assert abs(grad[0]) > 1e-3
    assert abs(grad[1]) < 1e-12
    assert abs(grad[2]) < 1e-12


def test_gradient_rejects_even_characteristic():
    with pytest.raises(EvenCharacteristic):
        theta_gradient(IDENTITY_TAU, 0)


def test_gradient_finite_difference(main_table):
    tau = main_table.tau
    radius = main_table.radius
    eps = 1e-4
    for code in (77, 13, 44):
        grad = main_table.gradient(code)
        for k in range(3):
            step = np.zeros(3)
            step[k] = eps
            difference = (
                theta_series_value(tau, code, step, radius)
                - theta_series_value(tau, code, -step, radius)
            ) / (2 * eps)
            assert abs(grad[k] - difference) < 1e-6


def test_odd_series_antisymmetric_in_z(main_table):
    tau = main_table.tau
    rng = np.random.default_rng(11)
    z = 0.05 * (rng.normal(size=3) + 1j * rng.normal(size=3))
    for code in (77, 32):
        plus = theta_series_value(tau, code, z, main_table.radius)
        minus = theta_series_value(tau, code, -z, main_table.radius)
        assert abs(plus + minus) < 1e-10 * max(abs(plus), 1.0)


def test_odd_constants_vanish(main_table):
    for n in main_table.gradients:
        value = theta_series_value(main_table.tau, n, np.zeros(3), main_table.radius)
        assert abs(value) < main_table.tail_bound


def test_table_shape_and_radius(main_table):
    assert len(main_table.constants) == 36
    assert len(main_table.gradients) == 28
    assert main_table.tail_bound < main_table.config.tol


def test_table_deterministic(main_table):
    again = build_theta_table(main_table.tau, main_table.config)
    for m, value in main_table.constants.items():
        assert again.constants[m] == value
    for n, grad in main_table.gradients.items():
        assert np.array_equal(again.gradients[n], grad)


def test_halving_tolerance_moves_values_within_old_tail(main_table):
    finer = build_theta_table(
        main_table.tau,
        TruncationConfig(
            tol=main_table.config.tol / 2,
            safety=main_table.config.safety,
            max_radius=main_table.config.max_radius,
        ),
    )
    for m, value in main_table.constants.items():
        assert abs(finer.constants[m] - value) <= main_table.tail_bound
    for n, grad in main_table.gradients.items():
        assert np.max(np.abs(finer.gradients[n] - grad)) <= main_table.tail_bound


def test_jacobian_repeated_row_vanishes(main_table):
    assert jacobian_D(main_table, 77, 77, 64) == 0


def test_jacobian_antisymmetry(main_table):
    assert jacobian_D(main_table, 77, 64, 51) == pytest.approx(
        -jacobian_D(main_table, 64, 77, 51)
    )


def test_jacobian_rejects_even(main_table):
    with pytest.raises(EvenCharacteristic):
        jacobian_D(main_table, 0, 77, 64)


def test_jacobi_identity_reference_triple(main_table):
    assert jacobi_identity_residual(main_table, 77, 64, 51) < 1e-8


def test_jacobi_identity_all_layout_triples(main_table):
    triples = list(standard_char_matrix().principal_triples())
    assert len(triples) == 56
    for t1, t2, t3 in triples:
        assert jacobi_identity_residual(main_table, t1, t2, t3) < 1e-8


RELATION_1 = ((52, 75, 41, 66), (3, 10, 24, 37), (14, 7, 33, 20))
RELATION_2 = ((40, 67, 41, 66), (3, 2, 24, 25), (6, 21, 7, 20))


def _relative_riemann_residual(table, relation):
    signs, residual = riemann_relation_check(table, *relation)
    r1 = 1.0 + 0j
    for code in relation[0]:
        r1 *= table.constant(code)
    return signs, residual / abs(r1)


@pytest.mark.parametrize("relation", [RELATION_1, RELATION_2])
def test_riemann_relations_hold(main_table, relation):
    signs, relative = _relative_riemann_residual(main_table, relation)
    assert relative < 1e-8
    assert set(signs) <= {1, -1}


def test_riemann_relation_fails_with_foreign_constant(batch_tables):
    # swap one constant for an unrelated one: residual stays away from zero
    corrupted = ((52, 75, 41, 66), (3, 10, 24, 37), (14, 7, 33, 47))
    for table in batch_tables:
        _, relative = _relative_riemann_residual(table, corrupted)
        assert relative > 1e-3


def test_degeneracy_indicator_at_identity():
    table = build_theta_table(IDENTITY_TAU)
    assert degeneracy_indicator(table) < 1e-10


def test_degeneracy_indicator_generic(batch_tables):
    for table in batch_tables:
        indicator = degeneracy_indicator(table)
        assert 0.0 <= indicator <= 1.0
        assert indicator > 1e-3


def test_truncation_config_validation():
    with pytest.raises(InvalidInput):
        TruncationConfig(tol=0.0)
    with pytest.raises(InvalidInput):
        TruncationConfig(safety=0.5)
    with pytest.raises(InvalidInput):
        TruncationConfig(max_radius=2)
