import pytest

from cachenet import BackhaulModel, CacheParams, NetworkParams

# Parameters shared by the storage / density / bitrate figures
FIG_SNR_DB = 10.0
FIG_LAMBDA = 0.2
FIG_GAMMA = 2.0
FIG_L = 1.0
FIG_ALPHA = 4.0
FIG_BACKHAUL = BackhaulModel(0.0005, 0.0)


def fig_net(lam=FIG_LAMBDA, T=0.1, snr_db=FIG_SNR_DB, alpha=FIG_ALPHA):
    return NetworkParams(lam, alpha, snr_db, T)


def fig_cache(S, L=FIG_L, gamma=FIG_GAMMA):
    return CacheParams(S, L, gamma)


@pytest.fixture
def backhaul():
    return FIG_BACKHAUL


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
