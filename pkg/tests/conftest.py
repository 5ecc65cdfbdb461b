import numpy as np
import pytest

from kgrefine.fixture import cholestasis_fixture
from kgrefine.synth import SynthConfig, generate_synthetic_cohort


@pytest.fixture
def chole():
    return cholestasis_fixture()


@pytest.fixture(scope="session")
def small_synth():
    """A small but non-trivial benchmark instance shared across tests."""
    cfg = SynthConfig(n_diseases=6, rules_per_disease=2, conditions_per_rule=2,
                      n_patients=60, p_background_measurement=0.1)
    return generate_synthetic_cohort(cfg, seed=7)


@pytest.fixture(scope="session")
def tiny_model():
    """Embedding model over a tiny two-clique corpus, reused where any
    trained model will do."""
    from kgrefine.embeddings import TrainHyperparams, build_vocab, train_skipgram
    rng = np.random.default_rng(0)
    corpus = []
    for _ in range(300):
        corpus.append(list(rng.permutation(["a1", "a2", "a3"])))
        corpus.append(list(rng.permutation(["b1", "b2", "b3"])))
    vocab = build_vocab(corpus)
    hp = TrainHyperparams(window=2, epochs=3)
    return train_skipgram(corpus, vocab, 16, hp, seed=1)
