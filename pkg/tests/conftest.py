import numpy as np
import pytest

from sarhawk import gesture, synth
from sarhawk.model import DroneState


@pytest.fixture(scope="session")
def small_corpus():
    """Tiny gesture corpus shared across tests (3 templates, 4 probes per class)."""
    return synth.make_corpus(seed=99, templates_per_label=3, probes_per_label=4)


@pytest.fixture(scope="session")
def small_training_set(small_corpus):
    train, _ = small_corpus
    ts = gesture.TrainingSet(m=32)
    for label, trace in train:
        ts = gesture.add_template(ts, trace, label)
    return ts


@pytest.fixture
def fleet():
    return [
        DroneState(id="d1", position=np.array([20.0, 10.0, 15.0])),
        DroneState(id="d2", position=np.array([60.0, 10.0, 15.0])),
        DroneState(id="d3", position=np.array([100.0, 10.0, 15.0])),
    ]


@pytest.fixture
def names():
    return {"red hawk": "d1", "blue hawk": "d2", "green hawk": "d3"}
