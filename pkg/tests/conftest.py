import time

import numpy as np
import pytest

from mcpss.ingest import Dataset
from mcpss.pipeline import FKNN_LABELS, RunConfig, cross_validated_streams
from mcpss.synthetic import CorpusSpec, synthetic_corpus


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def toy_dataset() -> Dataset:
    """Six short proteins; small enough for end-to-end runs in seconds."""
    spec = CorpusSpec(proteins=6, min_length=40, max_length=40, min_segment=6, max_segment=14)
    return synthetic_corpus(7, spec, name="toy")


@pytest.fixture(scope="session")
def toy_config() -> RunConfig:
    return RunConfig(window_size=9, k=3, k_prime=3, folds=2)


@pytest.fixture(scope="session")
def synthetic():
    return synthetic_corpus(0)


@pytest.fixture(scope="session")
def synthetic_streams(synthetic):
    """3-fold cross-validated streams for all three measures, plus their wall time.

    Training is the expensive step, so acceptance checks that only vary the
    aggregation share this one run.
    """
    config = RunConfig(folds=3)
    start = time.perf_counter()
    streams = cross_validated_streams(synthetic, config, tuple(FKNN_LABELS))
    return config, streams, time.perf_counter() - start


ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, status, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d} {status:4s} {name}: {detail}")
