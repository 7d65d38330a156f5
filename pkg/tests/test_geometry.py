import numpy as np
import pytest
from scipy import stats

from mitigate.errors import ConfigError, DegenerateRay
from mitigate.geometry import (
    Box,
    CollinearPair,
    MembershipBody,
    UnitBall,
    collinearity_residual,
    correlated_pair,
    correlated_pairs,
    correlated_tuple,
    correlated_tuples,
    min_node_gaps,
    resample,
    resample_radius,
)
from mitigate.streams import substream


def coord_cdf(n):
    # a coordinate of a uniform point in the n-ball: (x + 1) / 2 ~ Beta((n+1)/2, (n+1)/2)
    a = (n + 1) / 2
    return lambda x: stats.beta.cdf((x + 1) / 2, a, a)


def test_ball_exit_examples():
    b = UnitBall(4)
    assert b.ray_exit_length(np.zeros(4), np.array([0.3, 0, 0, 0])) == pytest.approx(1.0)
    b2 = UnitBall(2)
    assert b2.ray_exit_length(np.array([0.5, 0]), np.array([0.7, 0])) == pytest.approx(0.5)
    with pytest.raises(DegenerateRay):
        b2.ray_exit_length(np.array([0.5, 0]), np.array([0.5, 0]))


def test_box_exit_matches_bisection(rng):
    n = 5
    box = Box(n)
    generic = MembershipBody(n, box.contains, box.sample_uniform)
    origins = box.sample_uniform(200, rng)
    for p in origins:
        u = rng.normal(size=(3, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        assert np.allclose(box.exit_lengths(p, u), generic.exit_lengths(p, u), atol=1e-9)


def test_ball_exit_matches_bisection(rng):
    ball = UnitBall(6)
    generic = MembershipBody(6, ball.contains, ball.sample_uniform)
    p = ball.sample_uniform(1, rng)[0] * 0.9
    u = rng.normal(size=(50, 6))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    t = ball.exit_lengths(p, u)
    assert np.allclose(t, generic.exit_lengths(p, u), atol=1e-9)
    assert np.allclose(np.linalg.norm(p + t[:, None] * u, axis=1), 1.0, atol=1e-9)


def test_box_rejects_oversized():
    with pytest.raises(ConfigError):
        Box(4, half_width=0.9)


def test_resample_radius_examples(rng):
    assert resample_radius(1.0, 0.25, 2) == pytest.approx(0.5)
    u = rng.random(100_000)
    r = resample_radius(2.0, u, 1)
    assert stats.kstest(r, stats.uniform(0, 2).cdf).statistic < 0.01


def test_resample_radius_law_n10(rng):
    r = resample_radius(1.0, rng.random(100_000), 10)
    assert stats.kstest(r, lambda x: np.clip(x, 0, 1) ** 10).statistic < 0.01


def test_resample_stays_on_ray_and_in_body(rng):
    ball = UnitBall(7)
    xs = np.full(7, 0.1)
    for _ in range(100):
        x = ball.sample_uniform(1, rng)[0]
        xp = resample(xs, x, ball, rng)
        assert ball.contains(xp)[0]
        assert collinearity_residual(xs, x, xp)[0] <= 1e-9


def test_pair_lambda_examples():
    p = CollinearPair(np.zeros(2), np.zeros(2), 1.0, 0.8, 0.4)
    assert p.lam == pytest.approx(2.0)
    assert p.lam_prime == pytest.approx(-1.0)
    tie = CollinearPair(np.zeros(2), np.zeros(2), 1.0, 0.5, 0.5)
    assert tie.lam == np.inf and not tie.accepted(1e9)


def test_pairs_invariants(rng):
    ball = UnitBall(10)
    xs = np.array([0.3] + [0.0] * 9)
    pairs = correlated_pairs(xs, ball, 20_000, rng)
    assert np.all(collinearity_residual(xs, pairs.x, pairs.x_prime) <= 1e-9)
    ok = np.isfinite(pairs.lam)
    assert np.all(np.abs(pairs.lam[ok] + pairs.lam_prime[ok] - 1) <= 1e-9 * np.maximum(1, np.abs(pairs.lam[ok])))
    assert np.all((pairs.r > 0) & (pairs.r <= pairs.t + 1e-12))
    assert np.all((pairs.r_prime >= 0) & (pairs.r_prime <= pairs.t + 1e-12))
    assert np.all(ball.contains(pairs.x_prime))
    single = correlated_pair(xs, ball, rng)
    assert single.x.shape == (10,)


def test_resampled_marginal_is_uniform_n8():
    n = 8
    ball = UnitBall(n)
    xs = np.array([0.4, -0.2] + [0.0] * (n - 2))
    pairs = correlated_pairs(xs, ball, 100_000, substream(77))
    fresh = ball.sample_uniform(100_000, substream(78))
    radius = np.linalg.norm(pairs.x_prime, axis=1)
    assert stats.kstest(radius, lambda r: np.clip(r, 0, 1) ** n).statistic < 0.01
    assert stats.ks_2samp(radius, np.linalg.norm(fresh, axis=1)).statistic < 0.01
    cdf = coord_cdf(n)
    for j in range(n):
        assert stats.kstest(pairs.x_prime[:, j], cdf).statistic < 0.015


def test_naive_segment_resampling_is_not_uniform(rng):
    # drawing the new distance uniformly on [0, t] concentrates mass near x_star
    n = 10
    ball = UnitBall(n)
    pairs = correlated_pairs(np.zeros(n), ball, 100_000, rng)
    naive_r = pairs.t * rng.random(100_000)
    assert stats.kstest(naive_r, lambda r: np.clip(r, 0, 1) ** n).statistic > 0.1


def test_tuples_d1_reduce_to_pairs():
    ball = UnitBall(6)
    xs = np.full(6, 0.05)
    pairs = correlated_pairs(xs, ball, 500, substream(5))
    tup = correlated_tuples(xs, ball, 500, 1, substream(5))
    assert np.allclose(tup.points[:, 0], pairs.x)
    assert np.allclose(tup.points[:, 1], pairs.x_prime)
    assert np.allclose(tup.nodes[:, 0], pairs.r / pairs.t)


def test_tuple_marginals_uniform():
    n, d = 6, 3
    ball = UnitBall(n)
    tup = correlated_tuples(np.zeros(n), ball, 50_000, d, substream(8))
    assert np.all(tup.nodes >= 0) and np.all(tup.nodes <= 1 + 1e-12)
    for j in range(d + 1):
        r = np.linalg.norm(tup.points[:, j], axis=1)
        assert stats.kstest(r, lambda x: np.clip(x, 0, 1) ** n).statistic < 0.015
    one = correlated_tuple(np.zeros(n), ball, d, substream(9))
    assert one.points.shape == (1, d + 1, n)


def test_tuple_points_lie_on_segment(rng):
    ball = UnitBall(5)
    xs = np.array([0.2, 0.1, 0, 0, 0])
    tup = correlated_tuples(xs, ball, 1000, 3, rng)
    u = (tup.points[:, 0] - xs) / np.linalg.norm(tup.points[:, 0] - xs, axis=1, keepdims=True)
    recon = xs + (tup.nodes * tup.t[:, None])[:, :, None] * u[:, None, :]
    assert np.allclose(recon, tup.points, atol=1e-12)
    assert np.all(ball.contains(tup.points.reshape(-1, 5)))


def test_node_separation_probability():
    n, d = 5, 3
    tup = correlated_tuples(np.zeros(n), UnitBall(n), 10_000, d, substream(11))
    frac = float(np.mean(min_node_gaps(tup.nodes) >= 1 / (40 * n * d * d)))
    assert frac >= 5 / 6 - 0.02


def test_box_pairs_stay_inside(rng):
    box = Box(4)
    pairs = correlated_pairs(np.zeros(4), box, 5000, rng)
    assert np.all(box.contains(pairs.x_prime))
