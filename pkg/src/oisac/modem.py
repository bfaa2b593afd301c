"""DCO-OFDM transmit chain, AWGN reception, MRC combining and BER runs.

Conventions
-----------
* Subcarrier layout per frame: [0, u_1..u_{N/2-1}, 0, u*_{N/2-1}..u*_1].
* Unitary transform pair: modulate is sqrt(N) * ifft (i.e. F^H / sqrt(N)),
  demodulate is fft / sqrt(N), so modulate/demodulate round-trip exactly
  and Parseval holds without scale factors.
* Noise is real AWGN in the time domain with per-sample variance sigma2;
  under the unitary DFT each frequency bin then carries complex noise of
  total variance sigma2 (Hermitian-correlated across mirrored bins).
* Eb/N0 is defined after channel attenuation at the combiner output:
  N0 is the post-MRC complex noise variance sigma2 / G[n] with
  G[n] = sum_k |g_k[n]|^2, and Eb = Es / log2(M).  Under this definition
  BPSK BER follows Q(sqrt(2 Eb/N0)) regardless of geometry; absolute
  optical power enters through the harness's transmit-power sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .channel import ChannelState, compute_channel_state
from .geometry import SPEED_OF_LIGHT


@dataclass(frozen=True)
class OfdmConfig:
    num_subcarriers: int = 32
    constellation: str = "bpsk"
    dc_bias_sigma: float = 3.0
    clipping_enabled: bool = False
    t_sample: float = 1e-7

    def __post_init__(self):
        n = self.num_subcarriers
        if n < 4 or n % 2:
            raise ValueError("num_subcarriers must be even and >= 4")
        if self.constellation not in ("bpsk", "16qam"):
            raise ValueError(f"unknown constellation {self.constellation!r}")

    @property
    def payload_per_frame(self):
        return self.num_subcarriers // 2 - 1

    @property
    def bits_per_symbol(self):
        return 1 if self.constellation == "bpsk" else 4


# ---------------------------------------------------------------------------
# constellations (unit average energy, Gray-mapped)

_QAM_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(10)
_GRAY2 = np.array([0, 1, 3, 2])  # level index -> 2-bit Gray label
_GRAY2_INV = np.argsort(_GRAY2)  # Gray label -> level index


def map_bits(bits, constellation):
    """Map a bit array to complex symbols."""
    bits = np.asarray(bits, int)
    if constellation == "bpsk":
        return (2.0 * bits - 1.0).astype(complex)
    if len(bits) % 4:
        raise ValueError("16qam needs a multiple of 4 bits")
    b = bits.reshape(-1, 4)
    ii = _GRAY2_INV[b[:, 0] * 2 + b[:, 1]]
    qq = _GRAY2_INV[b[:, 2] * 2 + b[:, 3]]
    return _QAM_LEVELS[ii] + 1j * _QAM_LEVELS[qq]


def demap_symbols(symbols, constellation):
    """Hard-decision demap back to bits."""
    s = np.asarray(symbols)
    if constellation == "bpsk":
        return (s.real >= 0).astype(int)
    ii = np.argmin(np.abs(s.real[:, None] - _QAM_LEVELS[None, :]), axis=1)
    qq = np.argmin(np.abs(s.imag[:, None] - _QAM_LEVELS[None, :]), axis=1)
    gi, gq = _GRAY2[ii], _GRAY2[qq]
    out = np.empty((len(s), 4), int)
    out[:, 0], out[:, 1] = gi // 2, gi % 2
    out[:, 2], out[:, 3] = gq // 2, gq % 2
    return out.ravel()


# ---------------------------------------------------------------------------
# OFDM frame processing


def hermitian_extend(U):
    """Payload (N/2-1, L) -> Hermitian-symmetric spectrum (N, L)."""
    U = np.atleast_2d(np.asarray(U, complex))
    half = U.shape[0] + 1
    N = 2 * half
    X = np.zeros((N, U.shape[1]), complex)
    X[1:half] = U
    X[half + 1 :] = np.conj(U[::-1])
    return X


def modulate(X):
    """Hermitian spectrum -> real time samples (unitary IDFT)."""
    N = X.shape[0]
    v = math.sqrt(N) * np.fft.ifft(X, axis=0)
    if np.max(np.abs(v.imag)) > 1e-10:
        raise ValueError("spectrum is not Hermitian-symmetric")
    return v.real


def demodulate(V):
    N = V.shape[0]
    return np.fft.fft(V, axis=0) / math.sqrt(N)


def apply_dc_bias(V, bias_sigma=3.0, clipping_enabled=False):
    """Shift samples nonnegative-ward by bias_sigma * std(V).

    Returns (samples, bias) so the receiver can remove the bias.
    """
    bias = bias_sigma * float(np.std(V))
    s = V + bias
    if clipping_enabled:
        s = np.maximum(s, 0.0)
    return s, bias


def subcarrier_gains(channel: ChannelState, num_subcarriers, t_sample):
    """Equivalent per-subcarrier complex gains g_k[n] = Delta_k^T h_k.

    Shape (N, kappa); entry n holds sum_m h_{m,k} exp(-j 2 pi (n/N)
    d_{m,k} / (c t_sample)).
    """
    n = np.arange(num_subcarriers)
    frac = channel.distances / (SPEED_OF_LIGHT * t_sample)  # (mu, kappa)
    phase = np.exp(
        -2j * math.pi * n[:, None, None] / num_subcarriers * frac[None]
    )
    return np.einsum("mk,nmk->nk", channel.gains, phase)


def channel_and_receive(s, bias, gains, sigma2, rng):
    """Propagate biased samples through the LTI channel and add real AWGN.

    ``gains`` is (N, kappa) from subcarrier_gains; returns Y of shape
    (kappa, N, L).  The DC bias is removed ideally before the DFT.
    """
    if sigma2 < 0:
        raise ValueError("noise variance must be nonnegative")
    X = demodulate(s - bias)
    N, L = X.shape
    kappa = gains.shape[1]
    Y = np.empty((kappa, N, L), complex)
    for k in range(kappa):
        Y[k] = X * gains[:, k, None]
        if sigma2 > 0:
            w = rng.normal(0.0, math.sqrt(sigma2), size=(N, L))
            Y[k] += np.fft.fft(w, axis=0) / math.sqrt(N)
    return Y


def mrc_combine(Y, gains):
    """Maximum ratio combining across PDs: conj-weighted sum over k,
    normalized by G[n] = sum_k |g_k[n]|^2."""
    G = np.sum(np.abs(gains) ** 2, axis=1)
    if np.all(G == 0):
        raise ValueError("all channel gains are zero; nothing to combine")
    num = np.einsum("nk,knl->nl", np.conj(gains), Y)
    return num / np.where(G > 0, G, 1.0)[:, None]


def demap_payload(Xhat):
    """Recover U from the two-sided Hermitian average."""
    N = Xhat.shape[0]
    half = N // 2
    upper = Xhat[1:half]
    lower = np.conj(Xhat[N - 1 : half : -1])
    return 0.5 * (upper + lower)


def combining_noise_gain(gains):
    """Post-demap complex noise variance per unit sample variance.

    The Hermitian demap averages bin n with the conjugate of bin N-n.
    Real time-domain noise makes those bins conjugate images of each
    other, while the fractional-delay gains are not, so the averaged
    noise is partially correlated: the payload noise on bin n is
    sum_k (conj(g_k[n]) + g_k[N-n]) W_k[n] / (2 G[n]) with independent
    circular W_k.  Returns the payload-average variance factor; reduces
    to 1/G for a delay-free (real-gain) channel.
    """
    N = gains.shape[0]
    G = np.sum(np.abs(gains) ** 2, axis=1)
    upper = gains[1 : N // 2]
    mirror = gains[N - 1 : N // 2 : -1]
    q = np.sum(np.abs(np.conj(upper) + mirror) ** 2, axis=1) / (
        4 * G[1 : N // 2] ** 2
    )
    return float(np.mean(q))


def noise_variance_for_ebn0(gains, ebn0_db, bits_per_symbol, es=1.0):
    """Per-sample time-domain noise variance hitting a target Eb/N0.

    N0 is the payload-average post-demap complex noise variance
    sigma2 * combining_noise_gain(gains); see module docstring.
    """
    ebn0 = 10 ** (ebn0_db / 10)
    return es / (bits_per_symbol * ebn0 * combining_noise_gain(gains))


def bpsk_ber_analytic(ebn0_db):
    """Q(sqrt(2 Eb/N0)) reference curve."""
    ebn0 = 10 ** (np.asarray(ebn0_db, float) / 10)
    return 0.5 * special.erfc(np.sqrt(ebn0))


def simulate_frames(bits, config: OfdmConfig, gains, sigma2, rng):
    """Run one transmit-receive pass; returns decoded bits."""
    bps = config.bits_per_symbol
    per_frame = config.payload_per_frame * bps
    L = -(-len(bits) // per_frame)
    padded = np.zeros(L * per_frame, int)
    padded[: len(bits)] = bits
    U = map_bits(padded, config.constellation).reshape(
        L, config.payload_per_frame
    ).T
    X = hermitian_extend(U)
    V = modulate(X)
    s, bias = apply_dc_bias(V, config.dc_bias_sigma, config.clipping_enabled)
    Y = channel_and_receive(s, bias, gains, sigma2, rng)
    Xhat = mrc_combine(Y, gains)
    Uhat = demap_payload(Xhat)
    decoded = demap_symbols(Uhat.T.ravel(), config.constellation)
    return decoded[: len(bits)]


def run_ber(
    scenario,
    pattern,
    device_pos,
    constellation,
    ebn0_db_list,
    num_bits=200_000,
    seed=0,
    aim=None,
    config=None,
):
    """Monte Carlo BER over an Eb/N0 sweep at one device position.

    Each sweep point draws from its own RNG substream so results do not
    depend on evaluation order.
    """
    if num_bits < 1e4:
        raise ValueError("num_bits must be at least 1e4")
    if config is None:
        config = OfdmConfig(constellation=constellation)
    state = compute_channel_state(scenario, pattern, device_pos, aim)
    gains = subcarrier_gains(state, config.num_subcarriers, config.t_sample)
    streams = np.random.SeedSequence(seed).spawn(len(ebn0_db_list))
    rows = []
    for ebn0_db, ss in zip(ebn0_db_list, streams):
        rng = np.random.default_rng(ss)
        bits = rng.integers(0, 2, num_bits)
        sigma2 = noise_variance_for_ebn0(
            gains, ebn0_db, config.bits_per_symbol
        )
        decoded = simulate_frames(bits, config, gains, sigma2, rng)
        errors = int(np.count_nonzero(decoded != bits))
        rows.append((float(ebn0_db), errors / num_bits, num_bits, errors))
    return rows
