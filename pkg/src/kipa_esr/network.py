"""Coplanar-waveguide lines, the kinetic-inductance resonator and the stepped-impedance filter.

Line parameters come from zeroth-order conformal mapping of a zero-thickness
CPW on a substrate half-space (eps_eff = (1 + eps_r)/2) plus a thin-film
kinetic inductance Lk0_sq / w. Networks are cascades of lossless line
sections described by ABCD matrices.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import DomainError, NumericalError
from .constants import EPS_R_SI, LK0_SQ, epsilon_0, mu_0, pi


def ellipk_agm(k: float, tol: float = 1e-15, max_iter: int = 60) -> float:
    """Complete elliptic integral of the first kind K(k), modulus k, via the AGM.

    K(k) = pi / (2 AGM(1, sqrt(1 - k^2))).
    """
    if not 0 <= k < 1:
        raise DomainError(f"modulus must lie in [0, 1), got {k}")
    a, b = 1.0, np.sqrt(1.0 - k * k)
    for _ in range(max_iter):
        if abs(a - b) <= tol * a:
            return pi / (a + b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    raise NumericalError(f"AGM did not converge for k={k}")


@dataclass(frozen=True)
class CpwLine:
    w: float
    gap: float
    length: float = 0.0
    eps_r: float = EPS_R_SI
    Lk0_sq: float = LK0_SQ

    def __post_init__(self):
        if self.w <= 0 or self.gap <= 0:
            raise DomainError("CPW width and gap must be positive")
        if self.length < 0:
            raise DomainError("length must be non-negative")

    @property
    def k(self) -> float:
        return self.w / (self.w + 2 * self.gap)

    @property
    def _k_ratio(self) -> float:
        k = self.k
        return ellipk_agm(k) / ellipk_agm(np.sqrt(1 - k * k))

    @property
    def C_l(self) -> float:
        return 4 * epsilon_0 * 0.5 * (1 + self.eps_r) * self._k_ratio

    @property
    def Lg_l(self) -> float:
        return 0.25 * mu_0 / self._k_ratio

    @property
    def Lk_l(self) -> float:
        return self.Lk0_sq / self.w

    @property
    def L_l(self) -> float:
        return self.Lg_l + self.Lk_l

    @property
    def Z(self) -> float:
        return float(np.sqrt(self.L_l / self.C_l))

    @property
    def Z_geometric(self) -> float:
        return float(np.sqrt(self.Lg_l / self.C_l))

    @property
    def alpha(self) -> float:
        return self.Lk_l / self.L_l

    @property
    def v_phase(self) -> float:
        return 1.0 / np.sqrt(self.L_l * self.C_l)

    def quarter_wave_length(self, omega: float) -> float:
        return 0.5 * pi * self.v_phase / omega

    def with_length(self, length: float) -> "CpwLine":
        return CpwLine(self.w, self.gap, length, self.eps_r, self.Lk0_sq)


def cpw_params(w: float, gap: float, eps_r: float = EPS_R_SI, Lk0_sq: float = LK0_SQ) -> CpwLine:
    return CpwLine(w, gap, 0.0, eps_r, Lk0_sq)


def kinetic_inductance(Lk0: float, I: float, I_star: float) -> float:
    """Current-dependent kinetic inductance L_k0 (1 + I^2/I_*^2)."""
    if abs(I) >= I_star:
        raise DomainError(f"|I| = {abs(I)} A must stay below I_* = {I_star} A")
    return Lk0 * (1 + (I / I_star) ** 2)


def dc_tuning(omega0_at_zero: float, I_dc: float, I_star: float) -> float:
    """Resonance shift under DC bias, -omega0(0) I_dc^2 / (2 I_*^2)."""
    if abs(I_dc) >= I_star:
        raise DomainError(f"|I_dc| = {abs(I_dc)} A must stay below I_* = {I_star} A")
    return -omega0_at_zero * I_dc ** 2 / (2 * I_star ** 2)


def resonator_frequency(line: CpwLine, length: float) -> float:
    """Quarter-wave fundamental pi / (2 l sqrt(L C)) in rad/s."""
    if length <= 0:
        raise DomainError("resonator length must be positive")
    return pi / (2 * length * np.sqrt(line.L_l * line.C_l))


@dataclass(frozen=True)
class ResonatorState:
    omega0: float
    I_dc: float = 0.0
    I_star: float = 34.5e-3
    length: float = 1.75e-3
    Qi: float = 117e3
    Qc: float = float("nan")
    QL: float = float("nan")

    def __post_init__(self):
        qc, ql = self.Qc, self.QL
        if np.isnan(qc) and np.isnan(ql):
            raise DomainError("give at least two of Qi, Qc, QL")
        if np.isnan(qc):
            object.__setattr__(self, "Qc", 1.0 / (1.0 / ql - 1.0 / self.Qi))
        elif np.isnan(ql):
            object.__setattr__(self, "QL", 1.0 / (1.0 / self.Qi + 1.0 / qc))
        if abs(self.I_dc) >= self.I_star:
            raise DomainError("|I_dc| must stay below I_*")

    @property
    def kappa(self) -> float:
        """External coupling rate omega0 / Qc."""
        return self.omega0 / self.Qc

    @property
    def gamma(self) -> float:
        """Internal loss rate omega0 / Qi."""
        return self.omega0 / self.Qi

    @property
    def omega_biased(self) -> float:
        return self.omega0 + dc_tuning(self.omega0, self.I_dc, self.I_star)


@dataclass
class SifNetwork:
    segments: list[CpwLine]
    Z0: float = 50.0

    def __post_init__(self):
        if not self.segments:
            raise DomainError("network needs at least one segment")
        if self.Z0 <= 0:
            raise DomainError("port impedance must be positive")


def line_abcd(Z: float, beta_l: float) -> np.ndarray:
    c, s = np.cos(beta_l), np.sin(beta_l)
    return np.array([[c, 1j * Z * s], [1j * s / Z, c]])


def abcd_cascade(network: SifNetwork, omega: float) -> np.ndarray:
    if omega <= 0:
        raise DomainError("omega must be positive")
    m = np.eye(2, dtype=complex)
    for seg in network.segments:
        m = m @ line_abcd(seg.Z, omega * seg.length / seg.v_phase)
    return m


def abcd_to_s(m: np.ndarray, Z0: float) -> np.ndarray:
    """Standard ABCD -> S conversion for equal real port impedances."""
    (A, B), (C, D) = m
    den = A + B / Z0 + C * Z0 + D
    s11 = (A + B / Z0 - C * Z0 - D) / den
    s12 = 2 * (A * D - B * C) / den
    s21 = 2 / den
    s22 = (-A + B / Z0 - C * Z0 + D) / den
    return np.array([[s11, s12], [s21, s22]])


def s_params(network: SifNetwork, omega: float, Z0: float | None = None) -> np.ndarray:
    return abcd_to_s(abcd_cascade(network, omega), network.Z0 if Z0 is None else Z0)


def s21(network: SifNetwork, omega: float, Z0: float | None = None) -> complex:
    z0 = network.Z0 if Z0 is None else Z0
    if z0 <= 0:
        raise DomainError("Z0 must be positive")
    return complex(s_params(network, omega, z0)[1, 0])


# Geometries of the fabricated device: bondpad, SIF sections, resonator (w, gap) in metres.
DEVICE_GEOMETRY = {
    "bondpad": (100e-6, 45e-6),
    "sif_lo": (138e-6, 6e-6),
    "sif_hi": (10e-6, 70e-6),
    "sif_hi_final": (5e-6, 15e-6),
    "resonator": (1e-6, 10e-6),
}


def device_sif(omega0: float, Z0: float = 50.0, eps_r: float = EPS_R_SI, Lk0_sq: float = LK0_SQ) -> SifNetwork:
    """Eight-section filter, port side first, each section a quarter wave at ``omega0``.

    Sections alternate low/high impedance; the last high-impedance section
    (next to the resonator) uses the narrower final geometry.
    """
    names = ["sif_lo", "sif_hi"] * 3 + ["sif_lo", "sif_hi_final"]
    segs = []
    for name in names:
        line = CpwLine(*DEVICE_GEOMETRY[name], eps_r=eps_r, Lk0_sq=Lk0_sq)
        segs.append(line.with_length(line.quarter_wave_length(omega0)))
    return SifNetwork(segs, Z0)


def read_network(path) -> SifNetwork:
    """Parse a network description file.

    Header lines ``eps_r=``, ``Lk0_sq=``, ``Z0=`` may appear anywhere; every
    other non-blank, non-comment line is ``w_m gap_m length_m``.
    """
    header = {"eps_r": EPS_R_SI, "Lk0_sq": LK0_SQ, "Z0": 50.0}
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, value = (s.strip() for s in line.split("=", 1))
                if key not in header:
                    raise ValueError(f"{path}:{lineno}: unknown header key {key!r}")
                header[key] = float(value)
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'w_m gap_m length_m'")
            rows.append(tuple(float(p) for p in parts))
    segs = [CpwLine(w, g, l, header["eps_r"], header["Lk0_sq"]) for w, g, l in rows]
    return SifNetwork(segs, header["Z0"])


def write_network(network: SifNetwork, path) -> None:
    first = network.segments[0]
    with open(path, "w") as fh:
        fh.write(f"eps_r={float(first.eps_r)!r}\nLk0_sq={float(first.Lk0_sq)!r}\nZ0={float(network.Z0)!r}\n")
        for seg in network.segments:
            fh.write(" ".join(repr(float(v)) for v in (seg.w, seg.gap, seg.length)) + "\n")


SWEEP_COLUMNS = ["freq_Hz", "S21_mag", "S21_phase_rad", "S11_mag"]


def sweep(network: SifNetwork, freqs_hz: Sequence[float]) -> list[dict[str, float]]:
    rows = []
    for f in freqs_hz:
        s = s_params(network, 2 * pi * f)
        rows.append({
            "freq_Hz": float(f),
            "S21_mag": float(abs(s[1, 0])),
            "S21_phase_rad": float(np.angle(s[1, 0])),
            "S11_mag": float(abs(s[0, 0])),
        })
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(row[k]) for k in SWEEP_COLUMNS})


@dataclass
class StandingWave:
    """Current envelope |I(y)| along each section, normalized to 1 A at the shorted end."""
    segments: list[CpwLine]
    positions: list[np.ndarray] = field(default_factory=list)
    currents: list[np.ndarray] = field(default_factory=list)


def standing_wave(segments: Sequence[CpwLine], omega: float, n_points: int = 64) -> StandingWave:
    """Propagate (V, I) = (0, 1) from a short through ``segments`` in order.

    Sample positions are section midpoints of ``n_points`` equal cells, so the
    result can be used directly as cell centres.
    """
    v, i = 0j, 1 + 0j
    out = StandingWave(list(segments))
    for seg in segments:
        beta = omega / seg.v_phase
        y = (np.arange(n_points) + 0.5) * seg.length / n_points
        cur = np.cos(beta * y) * i - 1j * np.sin(beta * y) * v / seg.Z
        out.positions.append(y)
        out.currents.append(np.abs(cur))
        bl = beta * seg.length
        v, i = np.cos(bl) * v - 1j * seg.Z * np.sin(bl) * i, -1j * np.sin(bl) / seg.Z * v + np.cos(bl) * i
    return out
