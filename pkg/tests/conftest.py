import numpy as np
import pytest

from rentfs import Dataset, save_csv


@pytest.fixture(scope="session")
def wisconsin():
    """Breast Cancer Wisconsin with malignant = class 1 (bundled with scikit-learn)."""
    from sklearn.datasets import load_breast_cancer

    d = load_breast_cancer()
    names = [n.replace(" ", "_") for n in d.feature_names]
    return Dataset(d.data, 1 - d.target, names, "classification")


@pytest.fixture(scope="session")
def wisconsin_csv(wisconsin, tmp_path_factory):
    path = tmp_path_factory.mktemp("wdbc") / "wdbc.csv"
    save_csv(wisconsin, path, "malignant")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def standardized(x):
    x = np.asarray(x, float)
    return (x - x.mean(0)) / x.std(0, ddof=1)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
