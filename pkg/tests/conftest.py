import numpy as np
import pytest

from policymc.benchmarks import load_benchmark
from policymc.explicit import build_mdp
from policymc.training import QLearnConfig, q_learning_train

@pytest.fixture(scope="session")
def coin_model():
    return load_benchmark("coin")


@pytest.fixture(scope="session")
def coin_mdp(coin_model):
    return build_mdp(coin_model)


@pytest.fixture(scope="session")
def lake_model():
    return load_benchmark("frozen_lake")


@pytest.fixture(scope="session")
def lake_mdp(lake_model):
    return build_mdp(lake_model)


@pytest.fixture(scope="session")
def taxi_model():
    return load_benchmark("taxi")


@pytest.fixture(scope="session")
def taxi_mdp(taxi_model):
    return build_mdp(taxi_model)


@pytest.fixture(scope="session")
def lake_policy(lake_model):
    """Mid-quality seeded policy used by non-acceptance tests."""
    cfg = QLearnConfig(episodes=15_000, seed=7)
    policy, _, _ = q_learning_train(lake_model, cfg, "finished", "goal")
    return policy


@pytest.fixture(scope="session")
def taxi_policy(taxi_model):
    cfg = QLearnConfig(episodes=20_000, seed=11, max_steps_per_episode=60)
    policy, _, _ = q_learning_train(taxi_model, cfg, "finished", "penalty_step")
    return policy


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
