from pathlib import Path
from typing import Callable, List, Tuple

import numpy as np
import pytest

import config
import main
from models.models import EddInstance, GeneratorConfig
from services.data_io import generate, load_instance

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "data" / "fixtures"


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture
def net10() -> EddInstance:
    return load_instance(FIXTURES / "net10.edd")


@pytest.fixture
def net9() -> EddInstance:
    return load_instance(FIXTURES / "net9.edd")


def random_instance(seed: int, n: int = 12, delta: float = 1.5, rho: float = 0.3,
                    gamma: int = 100, slack: int = 40, weight_max: int = 30) -> EddInstance:
    cfg = GeneratorConfig(
        n=n, delta=delta, rho=rho, gamma=gamma, l_limit=gamma + slack,
        weight_min=1, weight_max=weight_max, seed=seed,
    )
    return generate(cfg)


def small_instance(seed: int, max_nodes: int = 8, max_destinations: int = 5,
                   gamma: int = 30, slack: int = 25, weight_max: int = 15) -> EddInstance:
    """Seeded instance small enough for exhaustive checks; size and density vary with the seed."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, max_nodes + 1))
    m = int(rng.integers(n - 1, min(n * (n - 1) // 2, 2 * n) + 1))
    k = int(rng.integers(1, min(n, max_destinations) + 1))
    cfg = GeneratorConfig(
        n=n, edge_count=m, destination_count=k, gamma=gamma, l_limit=gamma + int(rng.integers(0, slack + 1)),
        weight_min=1, weight_max=weight_max, seed=seed,
    )
    return generate(cfg)


@pytest.fixture
def make_instance() -> Callable[..., EddInstance]:
    return random_instance


@pytest.fixture
def run_cli(capsys) -> Callable[[List[str]], Tuple[int, str, str]]:
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""

    def _run(argv: List[str]) -> Tuple[int, str, str]:
        code = main.run(argv)
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


@pytest.fixture
def env_settings(monkeypatch):
    """Patch EDD_* variables through ``set``; settings are re-read and restored afterwards."""

    def _set(**values) -> config.EddSettings:
        for key, value in values.items():
            monkeypatch.setenv(f"EDD_{key.upper()}", str(value))
        return config.reload_settings()

    yield _set
    monkeypatch.undo()
    config.reload_settings()
