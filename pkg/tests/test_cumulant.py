import math

import numpy as np
import pytest

from tensorgap.cumulant import (
    SampleSet,
    khat,
    population_planted_cumulant,
    read_samples,
    sample_moments,
    whitening_matrix,
    write_samples,
)
from tensorgap.planted import H1, PlantedConfig, sample_dataset
from tensorgap.specnorm import lower_cert_power, oracle_net, upper_cert_unfold


def brute_khat(Y, order):
    """Per-entry plug-in cumulant by explicit loops, independent of packed storage."""
    Y = np.asarray(Y, float)
    n, p = Y.shape
    Yc = Y - Y.mean(axis=0)
    cov = Yc.T @ Yc / n
    out = {}
    import itertools

    for idx in itertools.combinations_with_replacement(range(p), order):
        m = np.mean(np.prod([Yc[:, i] for i in idx], axis=0))
        if order == 4:
            i, j, k, l = idx
            m -= cov[i, j] * cov[k, l] + cov[i, k] * cov[j, l] + cov[i, l] * cov[j, k]
        out[idx] = m
    return np.array(list(out.values()))


def test_sample_moments_examples():
    mean, cov = sample_moments(np.full((5, 3), 2.5))
    np.testing.assert_array_equal(cov, np.zeros((3, 3)))
    mean, cov = sample_moments([[-1.0], [1.0]])
    assert mean[0] == 0.0 and cov[0, 0] == 1.0
    mean, cov = sample_moments([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(mean, [0.5, 0.5])
    np.testing.assert_allclose(cov, [[0.25, -0.25], [-0.25, 0.25]])


def test_sampleset_validation():
    with pytest.raises(ValueError):
        SampleSet([[1.0, 2.0]])
    with pytest.raises(ValueError):
        SampleSet([[1.0], [np.inf]])
    with pytest.raises(ValueError):
        sample_moments([[1.0]])


def test_khat_scalar_examples():
    k3 = khat([[0.0], [0.0], [3.0]], 3)
    assert k3.tensor.values[0] == 2.0 and k3.provenance == "plugin_empirical"
    assert khat([[-1.0], [1.0], [-1.0], [1.0]], 4).tensor.values[0] == -2.0
    for order in (3, 4):
        assert khat(np.tile([1.0, -2.0, 0.5], (7, 1)), order).tensor.is_zero()


def test_khat_rejects_order():
    with pytest.raises(ValueError):
        khat(np.zeros((4, 2)), 5)


@pytest.mark.parametrize("order", [3, 4])
def test_khat_matches_brute_force(rng, order):
    Y = rng.exponential(size=(300, 3))
    np.testing.assert_allclose(khat(Y, order).tensor.values, brute_khat(Y, order), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("order", [3, 4])
def test_khat_shift_invariant(rng, order):
    Y = rng.gamma(2.0, size=(500, 3))
    shifted = Y + np.array([10.0, -3.0, 0.25])
    np.testing.assert_allclose(khat(shifted, order).tensor.values, khat(Y, order).tensor.values, atol=1e-10)


def test_khat_odd_order_antisymmetry(rng):
    Y = rng.gamma(2.0, size=(400, 4))
    np.testing.assert_allclose(khat(-Y, 3).tensor.values, -khat(Y, 3).tensor.values, atol=1e-14)


def test_khat_chunking_is_exact(rng, monkeypatch):
    import tensorgap.cumulant as cm

    Y = rng.standard_normal((1000, 3))
    full = khat(Y, 4).tensor.values
    monkeypatch.setattr(cm, "CHUNK_ENTRIES", 1)
    np.testing.assert_allclose(khat(Y, 4).tensor.values, full, rtol=1e-12, atol=1e-15)


def test_gaussian_null_envelope():
    n = 100_000
    Y = np.random.default_rng(7).standard_normal((n, 3))
    envelope = 5 * math.sqrt(30 / n)
    for order in (3, 4):
        assert np.max(np.abs(khat(Y, order).tensor.values)) <= envelope


# ---------------------------------------------------------------------------
# whitening


def test_whitening_examples():
    U = np.ones(4)
    np.testing.assert_array_equal(whitening_matrix(0.0, U), np.eye(4))
    S = whitening_matrix(3.0, U)
    np.testing.assert_allclose(S @ U, 0.5 * U, rtol=1e-15)
    np.testing.assert_allclose(S @ (np.eye(4) + 3.0 * np.outer(U, U) / 4) @ S, np.eye(4), atol=1e-14)


@pytest.mark.parametrize("a", [0.1, 1.0, 3.0, 10.0])
@pytest.mark.parametrize("p", [2, 10, 50])
def test_whitening_identities(rng, a, p):
    U = rng.standard_normal(p)
    U *= math.sqrt(p) / np.linalg.norm(U)
    S = whitening_matrix(a, U)
    np.testing.assert_array_equal(S, S.T)
    assert np.linalg.norm(S @ (np.eye(p) + a * np.outer(U, U) / p) @ S - np.eye(p)) <= 1e-12
    assert np.linalg.norm(S @ U) ** 2 == pytest.approx(p / (1 + a), rel=1e-10)


def test_whitening_rejects_bad_inputs():
    with pytest.raises(ValueError):
        whitening_matrix(1.0, np.ones(3) * 2)
    with pytest.raises(ValueError):
        whitening_matrix(-0.5, np.ones(3))


def test_whitened_covariance_converges():
    p, n, a = 10, 200_000, 0.5
    S = sample_dataset(PlantedConfig(p=p, n=n, a=a, d=3, seed=3), H1)
    _, cov = sample_moments(S)
    assert np.linalg.norm(cov - np.eye(p)) <= 5 * p / math.sqrt(n)


# ---------------------------------------------------------------------------
# population tensor


def test_population_examples():
    U = np.ones(3)
    assert population_planted_cumulant(0.0, U, 1.5, 3).tensor.is_zero()
    T4 = population_planted_cumulant(1.0, U, -2.0, 4).tensor
    assert lower_cert_power(T4, rng=0).value == pytest.approx(0.5, rel=1e-9)
    v, b = oracle_net(T4, 0.01)
    assert v - 1e-12 <= 0.5 <= v + b
    T3 = population_planted_cumulant(3.0, U, 1.5, 3).tensor
    expected = 1.5 * 0.75**1.5
    assert expected == pytest.approx(0.97427857925749, rel=1e-12)
    assert lower_cert_power(T3, rng=0).value == pytest.approx(expected, rel=1e-9)
    assert upper_cert_unfold(T3).value == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        population_planted_cumulant(1.0, U, 1.0, 5)


# ---------------------------------------------------------------------------
# CSV


def test_samples_csv_roundtrip(tmp_path, rng):
    Y = rng.standard_normal((20, 3)) / 3
    write_samples(Y, tmp_path / "s.csv")
    np.testing.assert_array_equal(read_samples(tmp_path / "s.csv").data, Y)


def test_samples_csv_errors(tmp_path):
    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="ragged.csv:2"):
        read_samples(tmp_path / "ragged.csv")
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(ValueError):
        read_samples(tmp_path / "empty.csv")
