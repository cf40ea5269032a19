import numpy as np
import pytest

from treepg.games import make_game


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_states(game, n_states, rng):
    """States visited by uniform random play until ``n_states`` are collected."""
    out = []
    while len(out) < n_states:
        s = game.initial_state()
        while not s.terminal:
            out.append(s)
            acts = game.legal_actions(s)
            s = game.apply(s, acts[rng.integers(len(acts))])
        out.append(s)
    return out


@pytest.fixture(params=["tictactoe", "connect4", "breakthrough", "hex", "yavalath"])
def any_game(request):
    return make_game(request.param)


def synthetic_entry(feature_sets, n_features, visit=None, q=None):
    """Experience entry over abstract actions; ``feature_sets[a]`` lists active indices."""
    from treepg.experience import ExperienceEntry
    from treepg.features import SparseFeatureVector

    n = len(feature_sets)
    feats = [SparseFeatureVector(sorted(set(f)), n_features) for f in feature_sets]
    visit = np.full(n, 1 / n) if visit is None else np.asarray(visit, dtype=float)
    return ExperienceEntry(None, tuple(range(n)), feats, visit, q)


def random_instance(rng, max_actions=20, max_features=50):
    n_actions = int(rng.integers(2, max_actions + 1))
    n_features = int(rng.integers(1, max_features + 1))
    sets = [rng.choice(n_features, size=rng.integers(0, min(n_features, 6) + 1), replace=False).tolist()
            for _ in range(n_actions)]
    visit = rng.dirichlet(np.ones(n_actions))
    q = rng.uniform(-1, 1, n_actions)
    return synthetic_entry(sets, n_features, visit, q), n_features


_CRITERIA: list[tuple[int, bool, str]] = []


def record_criterion(number, passed, detail):
    _CRITERIA.append((number, passed, detail))


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: slow end-to-end acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
