"""Signal and noise propagation through KIPA -> attenuator -> HEMT.

Noise is counted per quadrature in photons with the vacuum contributing 1/4.
``n_sys`` is referred to the KIPA output (equivalently the attenuator input);
multiply by eta^2 to refer it to the HEMT input.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import DomainError
from .constants import hbar, k_B

VACUUM = 0.25


def n_thermal(T: float, omega: float) -> float:
    """Thermal occupation per quadrature, 1 / (2 (exp(hbar w / k T) - 1))."""
    if T < 0:
        raise DomainError("temperature must be non-negative")
    if T == 0:
        return 0.0
    return 0.5 / np.expm1(hbar * omega / (k_B * T))


def polarization(T: float, omega: float) -> float:
    """Spin polarization tanh(hbar w / 2 k T)."""
    if T <= 0:
        raise DomainError("temperature must be positive")
    return float(np.tanh(hbar * omega / (2 * k_B * T)))


def db_to_amplitude(db: float) -> float:
    return 10 ** (db / 20)


def insertion_loss_to_eta(loss_db: float) -> float:
    """Amplitude transmissivity of an attenuator with ``loss_db`` of power loss."""
    return 10 ** (-abs(loss_db) / 20)


@dataclass(frozen=True)
class NoiseChain:
    G_k: float = 1.0
    eta: float = 1.0
    G_h: float = 1.0
    n_k: float = 0.0
    n_eta: float = 0.0
    n_h: float = 0.0
    signal_I: float = 1.0
    noise_in: float = VACUUM

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise DomainError("eta must lie in [0, 1]")
        if self.G_h < 1:
            raise DomainError("HEMT gain must be >= 1")
        if self.n_eta < 0 or self.n_h < 0 or self.n_k < 0:
            raise DomainError("noise occupations must be non-negative")
        if self.noise_in < VACUUM - 1e-12:
            raise DomainError("input noise cannot fall below the vacuum level 1/4")

    def with_gain(self, G_k: float) -> "NoiseChain":
        return replace(self, G_k=G_k)


def system_noise(chain: NoiseChain) -> float:
    eta2 = chain.eta ** 2
    if eta2 <= 0:
        raise DomainError("eta must be positive")
    g2 = chain.G_h ** 2
    return (1 / eta2 - 1) * (VACUUM + chain.n_eta) + (1 - 1 / g2) * (VACUUM + chain.n_h) / eta2


def _snr2(chain: NoiseChain, G_k: float) -> float:
    g2 = G_k ** 2
    den = g2 * chain.noise_in + (g2 - 1) * chain.n_k + system_noise(chain)
    if den <= 0:
        raise DomainError("SNR denominator must be positive")
    return g2 * chain.signal_I ** 2 / den


def chain_snr(chain: NoiseChain) -> float:
    """Amplitude SNR at the HEMT input."""
    return float(np.sqrt(_snr2(chain, chain.G_k)))


def snr_gain(chain: NoiseChain) -> float:
    """SNR with the KIPA gain applied relative to the same chain at unit gain."""
    return float(np.sqrt(_snr2(chain, chain.G_k) / _snr2(chain, 1.0)))


def snr_gain_high_gain_limit(chain: NoiseChain) -> float:
    n_sys = system_noise(chain)
    return float(np.sqrt((chain.noise_in + n_sys) / (chain.noise_in + chain.n_k)))


def snr_fit_coefficients(chain: NoiseChain) -> tuple[float, float]:
    """(A, B) such that SNR = sqrt(G_k^2 A / (G_k^2 B + 1)) reproduces :func:`chain_snr`."""
    d = system_noise(chain) - chain.n_k
    if d <= 0:
        raise DomainError("closed-form identification needs n_sys > n_k")
    return chain.signal_I ** 2 / d, (chain.noise_in + chain.n_k) / d


def attenuator_transform(signal: float, noise: float, eta: float, n_eta: float) -> tuple[float, float]:
    """Beamsplitter with amplitude transmissivity eta mixing in a bath of excess occupation n_eta."""
    if not 0 <= eta <= 1:
        raise DomainError("eta must lie in [0, 1]")
    return eta * signal, eta ** 2 * noise + (1 - eta ** 2) * (VACUUM + n_eta)


def hemt_transform(signal: float, noise: float, G_h: float, n_h: float) -> tuple[float, float]:
    """Phase-insensitive amplifier obeying the Caves bound."""
    if G_h < 1:
        raise DomainError("HEMT gain must be >= 1")
    g2 = G_h ** 2
    return G_h * signal, g2 * noise + (g2 - 1) * (VACUUM + n_h)


def kipa_i_transform(signal: float, noise: float, G_k: float, n_k: float) -> tuple[float, float]:
    """Amplified I quadrature of the KIPA: mean times G_k, variance G_k^2 <I^2> + (G_k^2 - 1) n_k."""
    g2 = G_k ** 2
    return G_k * signal, g2 * noise + (g2 - 1) * n_k


def snr_sweep(chain: NoiseChain, gains) -> list[dict[str, float]]:
    return [
        {"Gk": float(g), "SNR": chain_snr(chain.with_gain(float(g))), "G_SNR": snr_gain(chain.with_gain(float(g)))}
        for g in gains
    ]


def default_chain(
    omega: float,
    T_device: float = 0.4,
    T_hemt: float = 3.6,
    eta_db: float = 3.5,
    G_h_db: float = 40.0,
    G_k: float = 1.0,
    n_k: float = 0.0,
    T_attenuator: float | None = None,
    signal_I: float = 1.0,
) -> NoiseChain:
    """Chain built from temperatures and losses; the attenuator bath defaults to the device temperature."""
    t_att = T_device if T_attenuator is None else T_attenuator
    return NoiseChain(
        G_k=G_k,
        eta=insertion_loss_to_eta(eta_db),
        G_h=db_to_amplitude(G_h_db),
        n_k=n_k,
        n_eta=n_thermal(t_att, omega),
        n_h=n_thermal(T_hemt, omega),
        signal_I=signal_I,
        noise_in=VACUUM + n_thermal(T_device, omega),
    )
