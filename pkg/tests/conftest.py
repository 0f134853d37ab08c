import sys
from pathlib import Path

import pytest

# make the sibling oracle helpers importable from any rootdir
sys.path.insert(0, str(Path(__file__).parent))

from mpesplit.order import make_matrix_oracle


@pytest.fixture(scope="session")
def oracle():
    return make_matrix_oracle()
