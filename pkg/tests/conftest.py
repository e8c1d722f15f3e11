import pytest

from quartic_bitangents.bitangents import assemble_full
from quartic_bitangents.cli import draw_period_matrix
from quartic_bitangents.quartic import verify_all
from quartic_bitangents.theta import TruncationConfig

ACCEPTANCE_SEEDS = tuple(range(1, 21))
SCALE = 0.1
DEGENERACY_THRESHOLD = 1e-6


def admissible_table(seed, scale=SCALE, tol=1e-12, threshold=DEGENERACY_THRESHOLD):
    _, table, _ = draw_period_matrix(seed, scale, TruncationConfig(tol=tol), threshold)
    return table


@pytest.fixture(scope="session")
def main_table():
    """One admissible period matrix shared by most numeric tests."""
    return admissible_table(7)


@pytest.fixture(scope="session")
def assembled(main_table):
    return assemble_full(main_table)


@pytest.fixture(scope="session")
def batch_tables():
    """The acceptance corpus: 20 admissible tables at scale 0.1, theta tol 1e-12."""
    return [admissible_table(seed) for seed in ACCEPTANCE_SEEDS]


@pytest.fixture(scope="session")
def batch_reports(batch_tables):
    return [verify_all(table, assemble_full(table)) for table in batch_tables]
