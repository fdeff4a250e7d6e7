import pytest

from shiubounds import dickman


@pytest.fixture(scope="session")
def rho_table():
    """Default-resolution table over the full default range, built once."""
    return dickman.default_table()


@pytest.fixture(scope="session")
def rho_table_small():
    """Default-resolution table restricted to u <= 12; cheap to rebuild."""
    return dickman.build_table(step=dickman.DEFAULT_STEP, u_max=12.0)
