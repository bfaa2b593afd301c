import math

import numpy as np
import pytest

from oisac import modem
from oisac.channel import compute_channel_state, lambertian_pattern
from oisac.geometry import Scenario


def _gains(device=(0.0, 0.0, 0.0), config=None):
    config = config or modem.OfdmConfig()
    sc = Scenario().with_tx_intensity(1800.0)
    state = compute_channel_state(sc, lambertian_pattern(sc.semi_angle), device)
    g = modem.subcarrier_gains(state, config.num_subcarriers, config.t_sample)
    return g * sc.tx_intensity


def test_config_validation():
    with pytest.raises(ValueError):
        modem.OfdmConfig(num_subcarriers=7)
    with pytest.raises(ValueError):
        modem.OfdmConfig(constellation="8psk")
    cfg = modem.OfdmConfig()
    assert cfg.payload_per_frame == 15
    assert cfg.bits_per_symbol == 1


@pytest.mark.parametrize("constellation", ["bpsk", "16qam"])
def test_map_demap_round_trip(constellation):
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 4000)
    syms = modem.map_bits(bits, constellation)
    assert math.isclose(float(np.mean(np.abs(syms) ** 2)), 1.0, rel_tol=0.05)
    assert np.array_equal(modem.demap_symbols(syms, constellation), bits)


def test_qam_gray_adjacency():
    # adjacent levels differ in exactly one bit per axis
    for a, b in zip(modem._GRAY2[:-1], modem._GRAY2[1:]):
        assert bin(a ^ b).count("1") == 1


def test_hermitian_extend_structure():
    U = np.arange(1, 16)[:, None] * (1 + 1j)
    X = modem.hermitian_extend(U)
    assert X.shape == (32, 1)
    assert X[0] == 0 and X[16] == 0
    assert np.allclose(X[17:], np.conj(X[15:0:-1]))


def test_modulate_real_and_unitary():
    rng = np.random.default_rng(1)
    U = rng.normal(size=(15, 8)) + 1j * rng.normal(size=(15, 8))
    X = modem.hermitian_extend(U)
    V = modem.modulate(X)
    assert V.dtype == float
    assert np.allclose(modem.demodulate(V), X, atol=1e-12)
    # Parseval under the unitary pair
    assert math.isclose(
        float(np.sum(V**2)), float(np.sum(np.abs(X) ** 2)), rel_tol=1e-12
    )
    bad = np.zeros((32, 1), complex)
    bad[1] = 1.0  # missing the conjugate mirror bin
    with pytest.raises(ValueError):
        modem.modulate(bad)


def test_zero_payload_gives_zero_samples():
    X = modem.hermitian_extend(np.zeros((15, 2), complex))
    V = modem.modulate(X)
    assert np.all(V == 0.0)
    s, bias = modem.apply_dc_bias(V)
    assert bias == 0.0 and np.all(s == 0.0)


def test_dc_bias():
    rng = np.random.default_rng(2)
    V = rng.normal(size=(32, 100))
    s, bias = modem.apply_dc_bias(V, bias_sigma=3.0)
    assert math.isclose(bias, 3.0 * float(np.std(V)), rel_tol=1e-12)
    assert np.allclose(s - bias, V)
    clipped, _ = modem.apply_dc_bias(V, bias_sigma=1.0, clipping_enabled=True)
    assert clipped.min() >= 0.0


def test_subcarrier_gains_dc_bin():
    g = _gains()
    # bin 0 carries no phase: equals the plain gain sum per PD
    sc = Scenario().with_tx_intensity(1800.0)
    state = compute_channel_state(sc, lambertian_pattern(sc.semi_angle), (0, 0, 0))
    assert np.allclose(g[0], 1800.0 * state.gains.sum(axis=0))
    assert g.shape == (32, 4)


def test_combining_noise_gain_real_channel():
    # delay-free channel: reduces to 1/G
    gains = np.tile(np.array([0.5, 0.25, 0.25, 0.5]), (32, 1))
    G = float(np.sum(gains[1] ** 2))
    assert math.isclose(modem.combining_noise_gain(gains), 1.0 / G, rel_tol=1e-12)


def test_noise_variance_inverts_snr():
    g = _gains()
    sigma2 = modem.noise_variance_for_ebn0(g, 7.0, 1)
    q = modem.combining_noise_gain(g)
    assert math.isclose(1.0 / (sigma2 * q), 10 ** 0.7, rel_tol=1e-12)


def test_noiseless_round_trip():
    rng = np.random.default_rng(3)
    g = _gains()
    for constellation in ("bpsk", "16qam"):
        cfg = modem.OfdmConfig(constellation=constellation)
        bits = rng.integers(0, 2, 10_000)
        decoded = modem.simulate_frames(bits, cfg, g, 0.0, rng)
        assert np.array_equal(decoded, bits)


def test_mrc_rejects_dead_channel():
    with pytest.raises(ValueError):
        modem.mrc_combine(np.zeros((4, 32, 1), complex), np.zeros((32, 4)))


def test_bpsk_sim_matches_analytic():
    sc = Scenario().with_tx_intensity(1800.0)
    rows = modem.run_ber(
        sc, lambertian_pattern(sc.semi_angle), (0, 0, 0), "bpsk", [4.0],
        num_bits=100_000, seed=11,
    )
    (_, ber, n, errors) = rows[0]
    p = float(modem.bpsk_ber_analytic(4.0))
    assert errors >= 100
    assert abs(ber - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_16qam_sim_matches_analytic():
    sc = Scenario().with_tx_intensity(1800.0)
    rows = modem.run_ber(
        sc, lambertian_pattern(sc.semi_angle), (0, 0, 0), "16qam", [10.0],
        num_bits=200_000, seed=12,
    )
    (_, ber, n, _) = rows[0]
    # nearest-neighbour Gray approximation: (3/4) Q(sqrt(0.8 Eb/N0))
    from scipy.special import erfc

    p = 0.75 * 0.5 * erfc(math.sqrt(0.8 * 10.0 / 2))
    assert abs(ber - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_run_ber_deterministic_and_order_free():
    sc = Scenario().with_tx_intensity(1800.0)
    pat = lambertian_pattern(sc.semi_angle)
    a = modem.run_ber(sc, pat, (0, 0, 0), "bpsk", [2.0, 4.0], num_bits=20_000, seed=5)
    b = modem.run_ber(sc, pat, (0, 0, 0), "bpsk", [2.0, 4.0], num_bits=20_000, seed=5)
    assert a == b
    with pytest.raises(ValueError):
        modem.run_ber(sc, pat, (0, 0, 0), "bpsk", [2.0], num_bits=100)
