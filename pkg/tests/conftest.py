"""Shared fixtures: the four reference surrogates, trained once per session.

Training is deterministic (fixed seeds, fixed thread count), so every run
reproduces the same models.  Budgets are chosen so the full suite stays
around an hour on two laptop cores.
"""

import numpy as np
import pytest

from qsurrogate import datagen, surrogate
from qsurrogate.datagen import CircuitFamily, NoiseConfig


def _train(family, n, noise, master_seed, config, initial_state_mode="fixed"):
    dataset = datagen.generate_records(
        family, n, noise=noise, master_seed=master_seed, initial_state_mode=initial_state_mode
    )
    return surrogate.train(dataset, config)


@pytest.fixture(scope="session")
def model_1q_clean():
    """Pure-state single-qubit surrogate: 3 angles -> 4 state parameters."""
    config = surrogate.ModelConfig(
        input_len=3, output_len=4, learning_rate=1.5e-3, batch_size=64, max_epochs=45, seed=1
    )
    model, report = _train(CircuitFamily.ONE_Q, 7000, None, 42, config)
    _, eval_records = datagen.generate_records(CircuitFamily.ONE_Q, 700, master_seed=1042)
    return model, report, eval_records


@pytest.fixture(scope="session")
def model_1q_noisy():
    """Density-matrix single-qubit surrogate under relaxation + dephasing."""
    noise = NoiseConfig(0.02, 0.02, 0.0)
    config = surrogate.ModelConfig(
        input_len=3, output_len=4, learning_rate=1.5e-3, batch_size=64, max_epochs=60, seed=2
    )
    model, report = _train(CircuitFamily.ONE_Q, 10_000, noise, 52, config)
    _, eval_records = datagen.generate_records(CircuitFamily.ONE_Q, 700, noise=noise, master_seed=1052)
    return model, report, eval_records


@pytest.fixture(scope="session")
def model_2q_special_noisy():
    """Two-qubit special-circuit surrogate: 12 angles -> 16 density params."""
    noise = NoiseConfig(0.02, 0.02, 0.0)
    config = surrogate.ModelConfig(
        input_len=12, output_len=16, n_encoder_layers=3,
        learning_rate=2e-3, batch_size=128, max_epochs=90, seed=3,
    )
    model, report = _train(CircuitFamily.TWO_Q_SPECIAL, 20_000, noise, 62, config)
    _, eval_records = datagen.generate_records(
        CircuitFamily.TWO_Q_SPECIAL, 1000, noise=noise, master_seed=1062
    )
    return model, report, eval_records


@pytest.fixture(scope="session")
def model_universal():
    """Universal half-block surrogate: initial density + 6 angles -> density.

    Trained noise-free on the block-pipeline state distribution; serves the
    3-qubit extension, the surrogate VQE, and the surrogate Grover run.
    """
    config = surrogate.ModelConfig(
        input_len=22, output_len=16, n_encoder_layers=3,
        learning_rate=2e-3, batch_size=128, max_epochs=60, seed=4,
    )
    model, report = _train(
        CircuitFamily.TWO_Q_HALFBLOCK_A, 20_000, NoiseConfig(0.0, 0.0, 0.0), 11, config,
        initial_state_mode="blocks",
    )
    return model, report
