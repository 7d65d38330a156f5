import numpy as np
import pytest

from mitigate.streams import substream


@pytest.fixture
def rng(request):
    # a stable stream per test, keyed on the test name
    key = sum(ord(c) * (i + 1) for i, c in enumerate(request.node.name)) % (2**31)
    return substream(12345, key)


def ks_stat(sample, cdf):
    """One-sample Kolmogorov-Smirnov statistic."""
    x = np.sort(np.asarray(sample))
    m = x.size
    F = cdf(x)
    return float(max(np.max(np.arange(1, m + 1) / m - F), np.max(F - np.arange(m) / m)))
