"""Degenerate three-wave-mixing amplification in a kinetic-inductance resonator.

Rates are angular frequencies. ``kappa`` is the coupling to the measurement
port, ``gamma`` the internal loss, ``Delta = omega0 - omega_p/2`` the pump
detuning and ``xi`` the three-wave-mixing strength.

Quadrature amplitudes use the convention I = (a + a^dag)/2, so the vacuum
variance per quadrature is 1/4.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import DomainError, NumericalError
from .constants import hbar

#: Operations refuse |xi| beyond this fraction of the self-oscillation threshold kappa_L/2.
STABILITY_MARGIN = 0.999

#: Pump phase that maximizes gain along I in the A_G matrix convention.
MAX_GAIN_PHASE = 1.5 * np.pi


class ThresholdError(DomainError):
    """Pump strength at or beyond the parametric self-oscillation threshold."""


@dataclass(frozen=True)
class KipaParams:
    omega0: float
    kappa: float
    gamma: float = 0.0
    xi_mag: float = 0.0
    Delta: float = 0.0
    phi_p: float = MAX_GAIN_PHASE
    phi_offset: float = 0.0
    alpha: float = 1.0
    I_dc: float = 0.0
    I_p: float = 0.0
    I_star: float = 34.5e-3
    L_T: float = float("nan")

    def __post_init__(self):
        if self.kappa < 0 or self.gamma < 0 or self.xi_mag < 0:
            raise DomainError("kappa, gamma and |xi| must be non-negative")

    @property
    def kappaL(self) -> float:
        return self.kappa + self.gamma

    @property
    def phase(self) -> float:
        """Pump phase in the A_G convention (user phase plus reference offset)."""
        return self.phi_p + self.phi_offset

    @property
    def omega_p(self) -> float:
        return 2 * (self.omega0 - self.Delta)

    def with_xi(self, xi_mag: float) -> "KipaParams":
        return replace(self, xi_mag=xi_mag)

    @classmethod
    def from_q(cls, omega0: float, Qc: float, Qi: float, **kw) -> "KipaParams":
        return cls(omega0=omega0, kappa=omega0 / Qc, gamma=omega0 / Qi, **kw)


def _check_stable(p: KipaParams) -> None:
    if p.xi_mag >= STABILITY_MARGIN * p.kappaL / 2:
        raise ThresholdError(
            f"|xi| = {p.xi_mag:.6g} is at or beyond {STABILITY_MARGIN} x kappa_L/2 = "
            f"{STABILITY_MARGIN * p.kappaL / 2:.6g}"
        )


def hamiltonian_params(
    alpha: float,
    I_dc: float,
    I_p: float,
    phi_p: float,
    I_star: float,
    omega0: float,
    L_T: float,
) -> tuple[float, float, float, complex]:
    """(delta_dc, delta_p, K_kerr, xi) for kinetic-inductance fraction ``alpha``.

    Each term is the high-kinetic-inductance expression scaled by ``alpha``.
    The Kerr term is returned for completeness; the gain model ignores it.
    """
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    if abs(I_dc) >= I_star or abs(I_p) >= I_star:
        raise DomainError("bias and pump currents must stay below I_*")
    r_dc = (I_dc / I_star) ** 2
    r_p = (I_p / I_star) ** 2
    delta_dc = -0.5 * alpha * r_dc * omega0
    delta_p = -alpha / 8 * r_p * omega0
    kerr = -3 * alpha / 8 * hbar * omega0 / (L_T * I_star ** 2) * omega0
    xi = -alpha / 4 * I_dc * I_p / I_star ** 2 * omega0 * np.exp(-1j * phi_p)
    return delta_dc, delta_p, kerr, xi


def _denominator(p: KipaParams, omega: float) -> complex:
    d = omega - p.omega_p / 2
    den = p.Delta ** 2 + (p.kappaL / 2 + 1j * d) ** 2 - p.xi_mag ** 2
    scale = p.Delta ** 2 + p.kappaL ** 2 / 4 + d * d + p.xi_mag ** 2
    if abs(den) <= 1e-12 * scale:
        raise NumericalError("reflection coefficient at a pole")
    return den


def reflection_gain(p: KipaParams, omega: float) -> complex:
    """Signal reflection coefficient Gamma(omega) in the laboratory frame.

    This is the direct (signal-to-signal) term. At omega = omega_p/2 the idler
    lands on the signal frequency; see :func:`idler_gain` and
    :func:`degenerate_reflection`.
    """
    _check_stable(p)
    d = omega - p.omega_p / 2
    num = p.kappa * p.kappaL / 2 + 1j * p.kappa * (p.Delta + d)
    return num / _denominator(p, omega) - 1


def idler_gain(p: KipaParams, omega: float) -> complex:
    """Conjugate (signal-to-idler) coefficient kappa xi / den, up to the pump phase factor."""
    _check_stable(p)
    return p.kappa * p.xi_mag / _denominator(p, omega)


def degenerate_reflection(p: KipaParams) -> float:
    """Amplitude gain for a tone at omega_p/2 along the best-amplified quadrature.

    Signal and idler coincide in degenerate operation; with the pump phase set
    for maximal gain the two amplitudes add coherently.
    """
    w = p.omega_p / 2
    return float(abs(reflection_gain(p, w) + idler_gain(p, w)))


def degenerate_gain(p: KipaParams) -> float:
    """Phase-sensitive amplitude gain kappa / (kappa_L/2 - |xi|) - 1."""
    _check_stable(p)
    return p.kappa / (p.kappaL / 2 - p.xi_mag) - 1


def deamplification_gain(p: KipaParams) -> float:
    _check_stable(p)
    return p.kappa / (p.kappaL / 2 + p.xi_mag) - 1


def xi_for_gain(kappa: float, gamma: float, G_k: float) -> float:
    """Invert :func:`degenerate_gain` for |xi|."""
    if G_k < (kappa - gamma) / (kappa + gamma):
        raise DomainError("gain below the unpumped reflection cannot be reached")
    return (kappa + gamma) / 2 - kappa / (G_k + 1)


def quadrature_transform(p: KipaParams) -> np.ndarray:
    """The 2x2 matrix A_G mapping input (I, Q) to output (I, Q)."""
    den = p.Delta ** 2 + p.kappaL ** 2 / 4 - p.xi_mag ** 2
    if den <= 0:
        raise ThresholdError("A_G denominator is not positive; amplifier beyond threshold")
    _check_stable(p)
    x, ph, half = p.xi_mag, p.phase, p.kappaL / 2
    m = np.array([
        [half - x * np.sin(ph), -x * np.cos(ph) + p.Delta],
        [-x * np.cos(ph) - p.Delta, half + x * np.sin(ph)],
    ])
    return p.kappa / den * m - np.eye(2)


def bath_transform(p: KipaParams) -> np.ndarray:
    """Matrix sqrt(gamma/kappa) (A_G + 1) acting on the internal-loss bath quadratures."""
    return np.sqrt(p.gamma / p.kappa) * (quadrature_transform(p) + np.eye(2))


def added_noise(p: KipaParams, n_th_bath: float) -> float:
    """Noise added to the amplified I quadrature, referred to the input (photons)."""
    G = degenerate_gain(p)
    if G <= 1:
        raise DomainError(f"added noise is undefined for G_k = {G:.6g} <= 1")
    return p.gamma / p.kappa * (G + 1) / (G - 1) * (0.25 + n_th_bath)


def pump_power(alpha: float, I_p_at_alpha1: float, Z_r0: float) -> float:
    """Pump power holding the gain fixed as the kinetic-inductance fraction changes.

    The pump current must grow as 1/alpha and the resonator impedance as
    1/sqrt(1 - alpha), so P_p = I_p^2 Z_r0 / (2 alpha^2 sqrt(1 - alpha)).
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie strictly between 0 and 1")
    return I_p_at_alpha1 ** 2 * Z_r0 / (2 * alpha ** 2 * np.sqrt(1 - alpha))


def pump_power_change_db(alpha_from: float, alpha_to: float) -> float:
    return 10 * np.log10(pump_power(alpha_to, 1.0, 1.0) / pump_power(alpha_from, 1.0, 1.0))


def gain_sweep(p: KipaParams, omegas) -> list[dict[str, float]]:
    rows = []
    for w in omegas:
        g = reflection_gain(p, float(w))
        rows.append({
            "freq_Hz": float(w) / (2 * np.pi),
            "gain_dB": float(20 * np.log10(abs(g))),
            "phase_rad": float(np.angle(g)),
        })
    return rows
