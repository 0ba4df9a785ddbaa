import numpy as np
import pytest

from tactile_bci.core import EpochSet, Recording, Event
from tactile_bci.dsp import extract_epochs
from tactile_bci.synth import GeneratorConfig, default_class_defs, generate


def make_epochs(erd_depth=0.6, seed=0, n_trials_per_class=50, window_ms=(500.0, 4500.0)):
    config = GeneratorConfig(seed=seed, n_trials_per_class=n_trials_per_class,
                             class_defs=default_class_defs(erd_depth))
    rec, truth = generate(config)
    return extract_epochs(rec, window_ms, config.labels), truth


@pytest.fixture(scope="session")
def high_snr_epochs():
    return make_epochs(0.6)[0]


@pytest.fixture(scope="session")
def null_epochs():
    return make_epochs(0.0)[0]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_recording():
    rng = np.random.default_rng(7)
    data = rng.standard_normal((2, 1000))
    return Recording(250.0, ("C3", "C4"), data, [Event(100, "a"), Event(400, "b")])


def random_epochs(rng, n_trials=40, n_channels=6, n_samples=200, labels=("a", "b")):
    data = rng.standard_normal((n_trials, n_channels, n_samples))
    lab = [labels[i % len(labels)] for i in range(n_trials)]
    return EpochSet(data, lab, 250.0, 0.0, tuple(f"ch{i}" for i in range(n_channels)), label_set=labels)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
