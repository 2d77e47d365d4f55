import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kipa_esr import DomainError, fitting as ft, noise


@settings(max_examples=30, deadline=None)
@given(st.floats(-5.0, 5.0), st.floats(0.2, 3.0), st.floats(-10.0, 10.0).filter(lambda p: abs(p) > 0.1),
       st.floats(-2.0, 2.0))
def test_lorentzian_round_trip(c, w, peak, off):
    x = np.linspace(-15, 15, 401)
    r = ft.fit_lorentzian(x, ft.lorentzian(x, c, w, peak, off))
    assert r.converged
    for k, v in dict(center=c, fwhm=w, peak=peak, offset=off).items():
        assert r[k] == pytest.approx(v, rel=1e-6, abs=1e-8)


def test_lorentzian_rejects_flat_and_short_data():
    with pytest.raises(DomainError):
        ft.fit_lorentzian(np.arange(10.0), np.ones(10))
    with pytest.raises(DomainError):
        ft.fit_lorentzian([0, 1, 2], [0, 1, 0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 10.0).filter(lambda a: a > 0.5), st.floats(0.5, 20.0), st.floats(-1.0, 1.0),
       st.sampled_from(["decay", "recovery"]))
def test_exponential_round_trip(a, tau, off, kind):
    t = np.linspace(0, 50, 200)
    model = ft.exp_decay if kind == "decay" else ft.exp_recovery
    r = ft.fit_exponential(t, model(t, a, tau, off), kind)
    assert r.converged
    assert r["tau"] == pytest.approx(tau, rel=1e-6)
    assert r["amplitude"] == pytest.approx(a, rel=1e-6)


def test_exponential_without_amplitude_is_not_converged():
    t = np.linspace(0, 10, 50)
    r = ft.fit_exponential(t, np.full(50, 3.0))
    assert not r.converged
    with pytest.raises(DomainError):
        ft.fit_exponential(t, t, kind="linear")


def test_snr_gain_fit_recovers_chain_coefficients():
    chain = noise.default_chain(2 * np.pi * 7.2e9, signal_I=0.2)
    A, B = noise.snr_fit_coefficients(chain)
    g = 10 ** (np.linspace(0, 10, 11) / 20)
    snr = [noise.chain_snr(chain.with_gain(x)) for x in g]
    r = ft.fit_snr_vs_gain(g, snr)
    assert r.converged
    assert r["A"] == pytest.approx(A, rel=1e-6)
    assert r["B"] == pytest.approx(B, rel=1e-6)
    assert r["inv_B"] == pytest.approx(1 / B, rel=1e-6)


def test_snr_gain_fit_monte_carlo_coverage():
    rng = np.random.default_rng(7)
    A, B = 2e-3, 0.05
    g = 10 ** (np.linspace(0, 12, 13) / 20)
    clean = ft.snr_vs_gain(g, A, B)
    sigma = 0.01 * clean.mean()
    pulls = []
    for _ in range(200):
        r = ft.fit_snr_vs_gain(g, clean + sigma * rng.standard_normal(g.size))
        pulls.append((r["B"] - B) / r.stderr["B"])
    pulls = np.array(pulls)
    assert abs(np.mean(pulls)) < 0.3
    assert 0.7 < np.std(pulls) < 1.3


def test_snr_gain_fit_needs_three_gains():
    with pytest.raises(DomainError):
        ft.fit_snr_vs_gain([1, 1, 2], [1, 1, 2])


def test_gsnr_saturation_round_trip():
    Te = np.linspace(5e-6, 200e-6, 20)
    r = ft.fit_gsnr_vs_Te(Te, ft.saturating_gsnr(Te, 4.0, 30e-6))
    assert r.converged
    assert r["tau_k"] == pytest.approx(30e-6, rel=1e-6)


def test_gsnr_unidentifiable_when_saturated():
    Te = np.linspace(1.0, 2.0, 10)
    r = ft.fit_gsnr_vs_Te(Te, ft.saturating_gsnr(Te, 4.0, 1e-3))
    assert not r.converged


def test_report_lists_parameters():
    x = np.linspace(-5, 5, 50)
    text = ft.fit_lorentzian(x, ft.lorentzian(x, 0, 1, 1, 0)).report()
    for name in ("center", "fwhm", "peak", "offset", "converged"):
        assert name in text


def _echo(theta=0.7, amp=1.0, noise_sd=0.3, offset=0.2 - 0.1j, seed=0, n=2000):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 100e-6, n)
    env = amp * np.exp(-((t - 60e-6) / 5e-6) ** 2)
    z = env * np.exp(1j * theta) + offset
    zs = z + noise_sd * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    zb = offset + noise_sd * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return ft.Trace(t, zs.real, zs.imag), ft.Trace(t, zb.real, zb.imag)


def test_echo_rotation_recovered_without_noise():
    s, b = _echo(theta=2.1, noise_sd=0.0)
    b = ft.Trace(b.t, b.I + 1e-3 * np.sin(np.arange(b.t.size)), b.Q)
    r = ft.echo_snr(s, b, (55e-6, 65e-6), lowpass_hz=None)
    assert r.rotation == pytest.approx(2.1, abs=1e-6)
    assert r.mean_I > 0


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_echo_snr_invariant_under_common_phase(theta, extra):
    s, b = _echo(theta=theta)
    rot = np.exp(1j * extra)
    s2 = ft.Trace(s.t, (s.z * rot).real, (s.z * rot).imag)
    b2 = ft.Trace(b.t, (b.z * rot).real, (b.z * rot).imag)
    w = (55e-6, 65e-6)
    assert ft.echo_snr(s2, b2, w).snr == pytest.approx(ft.echo_snr(s, b, w).snr, rel=1e-6)


def test_echo_snr_invariant_under_offset_and_scale():
    s, b = _echo()
    w = (55e-6, 65e-6)
    ref = ft.echo_snr(s, b, w).snr
    s2 = ft.Trace(s.t, 3 * s.I + 5, 3 * s.Q - 2)
    b2 = ft.Trace(b.t, 3 * b.I + 5, 3 * b.Q - 2)
    assert ft.echo_snr(s2, b2, w).snr == pytest.approx(ref, rel=1e-6)


def test_echo_snr_grows_with_amplitude():
    w = (55e-6, 65e-6)
    lo = ft.echo_snr(*_echo(amp=0.5), w).snr
    hi = ft.echo_snr(*_echo(amp=2.0), w).snr
    assert hi == pytest.approx(4 * lo, rel=0.05)


def test_echo_window_validation():
    s, b = _echo()
    with pytest.raises(DomainError):
        ft.echo_snr(s, b, (65e-6, 55e-6))
    with pytest.raises(DomainError):
        ft.echo_snr(s, b, (55e-6, 200e-6))
    with pytest.raises(DomainError):
        ft.echo_snr(s, b, (0.0, 10e-6))


def test_trace_validation():
    with pytest.raises(DomainError):
        ft.Trace([0, 0], [1, 1], [0, 0])
    with pytest.raises(DomainError):
        ft.Trace([0, 1], [1], [0, 0])


def test_lowpass_unity_dc_gain():
    z = np.ones(5000, dtype=complex)
    assert ft.lowpass(z, 1e-8, 1e6)[-1] == pytest.approx(1.0, rel=1e-9)


def test_trace_and_xy_round_trip(tmp_path):
    s, _ = _echo(n=50)
    path = tmp_path / "tr.csv"
    ft.write_trace(path, s)
    back = ft.read_trace(path)
    np.testing.assert_array_equal(back.I, s.I)
    x, y = ft.read_xy(path, "t_s", "Q")
    np.testing.assert_array_equal(y, s.Q)
    with pytest.raises(ValueError):
        ft.read_xy(path, "t_s", "missing")


def test_fit_names():
    assert set(ft.fit_names()) == {"lorentzian", "decay", "recovery", "snr-gain", "gsnr-te"}
