from pathlib import Path

import numpy as np
import pytest

from collective_recourse.dataset import LabeledBatch, load_csv
from collective_recourse.recourse import QuerySpec

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def iris_path():
    return DATA_DIR / "iris.csv"


@pytest.fixture(scope="session")
def embeddings_path():
    return DATA_DIR / "embeddings_d10.csv"


@pytest.fixture(scope="session")
def iris_batch(iris_path):
    return load_csv(iris_path, "species")


@pytest.fixture
def collinear_pair():
    # Two 1-point classes at (1,0) and (-1,0); query at their 1:3 interpolant
    # asking for class 0. Fit reproduces the centroids exactly.
    batch = LabeledBatch(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0, 1]), 2)
    return batch, QuerySpec(np.array([-0.5, 0.0]), 0)


@pytest.fixture
def three_blob_pair():
    batch = LabeledBatch(
        np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0]]), np.array([0, 1, 2]), 3
    )
    return batch, QuerySpec(np.array([-0.5, 0.0]), 0)


@pytest.fixture
def verdict(capsys):
    """Emit one PASS/FAIL line per acceptance criterion on the real stdout.

    Capture is suspended for the print so the line shows up even in a piped
    ``pytest`` run, then the check is asserted as usual.
    """

    def emit(num: int, ok: bool, detail: str) -> None:
        line = f"[criterion {num}] {'PASS' if ok else 'FAIL'} - {detail}"
        with capsys.disabled():
            print(line, flush=True)
        assert ok, line

    return emit
