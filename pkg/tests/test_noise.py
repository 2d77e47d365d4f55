import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from kipa_esr import DomainError, kipa, noise

TP = 2 * np.pi
W = TP * 7.2e9

chains = st.builds(
    noise.NoiseChain,
    G_k=st.floats(1.0, 100.0),
    eta=st.floats(0.05, 1.0),
    G_h=st.floats(1.0, 1e3),
    n_k=st.floats(0.0, 2.0),
    n_eta=st.floats(0.0, 2.0),
    n_h=st.floats(0.0, 50.0),
    signal_I=st.floats(1e-3, 10.0),
    noise_in=st.floats(0.25, 3.0),
)


@settings(max_examples=80, deadline=None)
@given(chains)
def test_closed_form_equals_stage_by_stage_propagation(c):
    s, n = c.signal_I, c.noise_in
    s, n = noise.kipa_i_transform(s, n, c.G_k, c.n_k)
    s, n = noise.attenuator_transform(s, n, c.eta, c.n_eta)
    s, n = noise.hemt_transform(s, n, c.G_h, c.n_h)
    assert noise.chain_snr(c) == pytest.approx(s / np.sqrt(n), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(chains)
def test_unit_gain_is_neutral_and_snr_gain_bounded(c):
    assert noise.snr_gain(c.with_gain(1.0)) == pytest.approx(1.0, rel=1e-12)
    if c.n_k <= noise.system_noise(c):
        assert noise.snr_gain(c) <= noise.snr_gain_high_gain_limit(c) * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(chains, st.floats(1.0, 100.0), st.floats(1.0, 100.0))
def test_snr_gain_grows_with_gain_when_amplifier_is_quieter_than_chain(c, g1, g2):
    if c.n_k >= noise.system_noise(c):
        return
    lo, hi = sorted((g1, g2))
    assert noise.snr_gain(c.with_gain(hi)) >= noise.snr_gain(c.with_gain(lo)) * (1 - 1e-12)


@settings(max_examples=60, deadline=None)
@given(chains)
def test_fit_coefficients_reproduce_snr(c):
    if noise.system_noise(c) - c.n_k <= 1e-6:
        return
    A, B = noise.snr_fit_coefficients(c)
    g2 = c.G_k ** 2
    assert np.sqrt(g2 * A / (g2 * B + 1)) == pytest.approx(noise.chain_snr(c), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(1.0, 1e4))
def test_system_noise_never_negative(eta, gh):
    assert noise.system_noise(noise.NoiseChain(eta=eta, G_h=gh)) >= 0


def test_fully_lossy_chain_rejected():
    with pytest.raises(DomainError):
        noise.system_noise(noise.NoiseChain(eta=0.0))


def test_lossless_noiseless_chain_adds_only_hemt_vacuum():
    c = noise.NoiseChain(G_h=1e3)
    assert noise.system_noise(c) == pytest.approx(0.25 * (1 - 1e-6))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(1e8, 2e10))
def test_thermal_occupation_against_bose_oracle(T, f):
    assert noise.n_thermal(T, TP * f) == pytest.approx(oracles.bose_half(T, f), rel=1e-12)


def test_thermal_occupation_edges():
    assert noise.n_thermal(0.0, W) == 0.0
    with pytest.raises(DomainError):
        noise.n_thermal(-1.0, W)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0))
def test_thermal_occupation_monotone_in_temperature(t1, t2):
    lo, hi = sorted((t1, t2))
    assert noise.n_thermal(lo, W) <= noise.n_thermal(hi, W)


def test_input_noise_at_400mK():
    n = noise.VACUUM + noise.n_thermal(0.4, W)
    assert n == pytest.approx(0.614, abs=0.002)


def test_polarization_at_400mK():
    assert noise.polarization(0.4, W) == pytest.approx(0.407, abs=0.002)
    with pytest.raises(DomainError):
        noise.polarization(0.0, W)


def test_vacuum_floor_enforced():
    with pytest.raises(DomainError):
        noise.NoiseChain(noise_in=0.2)
    with pytest.raises(DomainError):
        noise.NoiseChain(eta=1.2)
    with pytest.raises(DomainError):
        noise.NoiseChain(G_h=0.5)
    with pytest.raises(DomainError):
        noise.NoiseChain(n_h=-1.0)


def test_db_conversions():
    assert noise.db_to_amplitude(40.0) == pytest.approx(100.0)
    assert noise.insertion_loss_to_eta(3.5) ** 2 == pytest.approx(10 ** -0.35)
    assert noise.insertion_loss_to_eta(-3.5) == noise.insertion_loss_to_eta(3.5)


def test_default_chain_system_noise():
    c = noise.default_chain(W)
    assert noise.system_noise(c) == pytest.approx(12.42, abs=0.05)
    cold = noise.default_chain(W, T_attenuator=0.0)
    assert noise.system_noise(cold) == pytest.approx(11.97, abs=0.05)


def test_documented_example_snr_gain():
    # n_k = 0, <I^2> = 0.61, n_sys = 12, G_k = 2.51
    eta = noise.insertion_loss_to_eta(3.5)
    n_h = (12 - (1 / eta ** 2 - 1) * 0.25) * eta ** 2 / (1 - 1e-6) - 0.25
    c = noise.NoiseChain(G_k=2.51, eta=eta, G_h=1e3, noise_in=0.61, n_h=n_h)
    assert noise.system_noise(c) == pytest.approx(12.0, rel=1e-9)
    assert noise.snr_gain(c) == pytest.approx(2.24, abs=0.01)
    assert noise.snr_gain_high_gain_limit(c) == pytest.approx(np.sqrt(12.61 / 0.61), rel=1e-9)


def test_kipa_added_noise_enters_like_n_k():
    p = kipa.KipaParams(omega0=W, kappa=1e6, gamma=5e4)
    p = p.with_xi(kipa.xi_for_gain(p.kappa, p.gamma, 10.0))
    nk = kipa.added_noise(p, noise.n_thermal(0.4, W))
    c = noise.default_chain(W, G_k=10.0, n_k=nk)
    assert nk > 0
    assert noise.chain_snr(c) < noise.chain_snr(noise.default_chain(W, G_k=10.0))


def test_snr_sweep_columns():
    rows = noise.snr_sweep(noise.default_chain(W), [1.0, 2.0])
    assert list(rows[0]) == ["Gk", "SNR", "G_SNR"]
    assert rows[0]["G_SNR"] == pytest.approx(1.0)
