import math

import numpy as np
import pytest

from mitigate.adversary import (
    attack_from_config,
    certify,
    eps_mass_random_attack,
    flat_bump_polynomials,
    hash_uniforms,
    linear_bias_attack,
    missing_coefficient_attack,
    spectral_perturbation_attack,
    targeted_ball_attack,
)
from mitigate.distributions import AffineModel
from mitigate.errors import ConfigError, InadmissibleAttack
from mitigate.fourier import FourierSpectrum, mask_of
from mitigate.geometry import UnitBall
from mitigate.oracle import Hypercube, LossKind, cube_points
from mitigate.streams import substream


def test_missing_coefficient_loss():
    tau = 0.5
    S1, S2 = mask_of([0]), mask_of([1, 2])
    h = FourierSpectrum(6, {S1: tau, S2: tau})
    f = missing_coefficient_attack(h, S1)
    assert f.certificate.value == pytest.approx(tau**2)
    assert certify(f, h, Hypercube(6), LossKind("square")).value == pytest.approx(tau**2)


def test_missing_coefficient_leaves_constant():
    h = FourierSpectrum(4, {0: 0.3, 0b101: 0.6})
    f = missing_coefficient_attack(h, 0b101)
    assert np.allclose(f.evaluate(cube_points(4)), 0.3)
    with pytest.raises(ConfigError):
        missing_coefficient_attack(h, 0b11)


def test_missing_coefficient_matches_synthesis():
    n = 8
    h = FourierSpectrum(n, {0b1: 0.4, 0b110: -0.3, 0b10000001: 0.2})
    f = missing_coefficient_attack(h, 0b110)
    X = cube_points(n)
    direct = 0.4 * X[:, 0] + 0.2 * X[:, 0] * X[:, 7]
    assert np.allclose(f.evaluate(X), direct)


def test_spectral_perturbation_exact_certificate():
    h = FourierSpectrum(6, {0b11: 0.5})
    f = spectral_perturbation_attack(h, {0b100000: 0.1})
    assert f.certificate.method == "exact"
    assert f.certificate.value == pytest.approx(0.01)


def test_targeted_ball():
    n = 20
    body = UnitBall(n)
    h = AffineModel(np.ones(n) / n, 0.0)
    c = np.zeros(n)
    c[0] = 0.2
    f0 = targeted_ball_attack(h, c, 0.0, 5.0, body, 0.01)
    X = body.sample_uniform(100, substream(1))
    assert np.allclose(f0.evaluate(X), h(X))
    f = targeted_ball_attack(h, c, 0.05, 5.0, body, 0.01)
    assert f.certificate.value <= 1e-10
    assert f.evaluate(c[None])[0] - h(c[None])[0] == 5.0
    with pytest.raises(InadmissibleAttack):
        targeted_ball_attack(h, np.zeros(n), 0.99, 5.0, body, 0.01)


def test_linear_bias():
    n = 4
    body = UnitBall(n)
    h = AffineModel(np.arange(n) / n, 0.1)
    anchor = np.array([0.2, 0.0, 0.0, 0.0])
    X = body.sample_uniform(50, substream(2))
    assert np.allclose(linear_bias_attack(h, anchor, 0.0).evaluate(X), h(X))
    f = linear_bias_attack(h, anchor, 1.0, body, threshold=0.5)
    assert f.evaluate(anchor[None])[0] == pytest.approx(h(anchor[None])[0])
    cert = f.certificate
    assert cert.closed_form == pytest.approx(1 - 0.5**n)
    assert abs(cert.value - cert.closed_form) <= 0.01


def test_eps_mass_zero_is_clean():
    h = AffineModel(np.ones(3), 0.0)
    body = UnitBall(3)
    X = body.sample_uniform(200, substream(3))
    assert np.allclose(eps_mass_random_attack(h, 0.0, 5.0, 1, body).evaluate(X), h(X))


def test_eps_mass_fraction():
    h = AffineModel(np.zeros(5), 0.0)
    body = UnitBall(5)
    f = eps_mass_random_attack(h, 0.15, 1.0, 9, body)
    X = body.sample_uniform(100_000, substream(4))
    assert abs(np.mean(f.evaluate(X) != 0.0) - 0.15) <= 0.005


def test_eps_mass_cube_fraction_and_flip():
    n = 14
    h = FourierSpectrum(n, {0b1: 1.0})
    f = eps_mass_random_attack(h, 0.15, "flip", 5, Hypercube(n), LossKind("zero_one"))
    X = cube_points(n)
    assert abs(np.mean(f.evaluate(X) != h.evaluate(X)) - 0.15) <= 0.005
    assert f.certificate.method == "exact"
    assert f.certificate.value == pytest.approx(np.mean(f.evaluate(X) != h.evaluate(X)))


def test_eps_mass_deterministic():
    h = AffineModel(np.ones(4), 0.0)
    body = UnitBall(4)
    X = body.sample_uniform(1000, substream(5))
    f = eps_mass_random_attack(h, 0.3, lambda Z: np.full(len(Z), 7.0), 2, body)
    a = f.evaluate(X)
    assert np.array_equal(a, f.evaluate(X))
    assert np.array_equal(a, eps_mass_random_attack(h, 0.3, lambda Z: np.full(len(Z), 7.0), 2, body).evaluate(X))
    # membership depends on the point only, not on its position in the batch
    assert np.array_equal((a == 7.0)[::-1], f.evaluate(X[::-1]) == 7.0)
    assert not np.array_equal(a, eps_mass_random_attack(h, 0.3, 7.0, 3, body).evaluate(X))


def test_hash_uniforms_range():
    u = hash_uniforms(UnitBall(3).sample_uniform(10_000, substream(6)), 1)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01


def test_flat_bump():
    h0, h1 = flat_bump_polynomials(4, 2)
    x = np.array([[0.5, 0.5, 0.0, 0.0]])
    assert h1(x)[0] == pytest.approx(1 - 0.5)
    assert h1(np.zeros((1, 4)))[0] - h0(np.zeros((1, 4)))[0] == 1.0
    n, d = 16, 2
    _, h1 = flat_bump_polynomials(n, d)
    X = UnitBall(n).sample_uniform(200_000, substream(7))
    assert np.mean(np.abs(h1(X)) >= n ** (-d / 4)) <= math.exp(-math.sqrt(n) / 2)
    with pytest.raises(ConfigError):
        flat_bump_polynomials(4, 3)


def test_attack_from_config():
    h = FourierSpectrum(10, {0x3: 0.5, 0x30: 0.5})
    cube = Hypercube(10)
    # clipping at +-1 removes part of the perturbation where |h| = 1
    spectral = attack_from_config({"kind": "spectral", "extra": {"0x200": 0.08}}, h, cube)
    assert spectral.certificate.value == pytest.approx(0.75 * 0.0064)
    assert attack_from_config({"kind": "missing_coefficient", "character": "0x30"}, h, cube).certificate.value == 0.25
    clean = attack_from_config({"kind": "none"}, h, cube)
    assert np.allclose(clean.evaluate(cube_points(10)), h.truth_table())
    with pytest.raises(ConfigError):
        attack_from_config({"kind": "nope"}, h, cube)
