"""Spin-sensitivity budget: photon number, coupling, effective volume, beta factors, N_tot and N_min.

Rates are angular frequencies. The echo-duration rate 1/T_E is called
``w_echo`` to keep it apart from CPW widths.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import DomainError, NumericalError
from .constants import hbar

CM3 = 1e-6  # m^3 per cm^3
UM3 = 1e-18  # m^3 per um^3


def intracavity_photons(P_in: float, omega0: float, kappa: float, gamma: float) -> float:
    """Mean photon number 4 kappa P_in / (hbar omega0 (kappa + gamma)^2)."""
    if P_in < 0:
        raise DomainError("input power must be non-negative")
    return 4 * kappa * P_in / (hbar * omega0 * (kappa + gamma) ** 2)


def dbm_to_watt(p_dbm: float) -> float:
    return 1e-3 * 10 ** (p_dbm / 10)


def rabi_frequency(pi2_duration: float) -> float:
    """Rabi angular frequency of a pulse that rotates by pi/2 in ``pi2_duration``."""
    return np.pi / (2 * pi2_duration)


def rabi_to_g0(pi2_duration: float, n_bar: float) -> float:
    if n_bar <= 0:
        raise DomainError("photon number must be positive")
    return rabi_frequency(pi2_duration) / (2 * np.sqrt(n_bar))


def g0_to_rabi(g0: float, n_bar: float) -> float:
    """Inverse of :func:`rabi_to_g0`: returns the pi/2 duration."""
    return np.pi / (2 * 2 * g0 * np.sqrt(n_bar))


def rms_field(B1: float, n_bar: float) -> float:
    if n_bar <= 0:
        raise DomainError("photon number must be positive")
    return B1 / (2 * np.sqrt(n_bar))


def coupling_from_field(delta_B1_perp: float, M: float, gamma_e: float) -> float:
    if delta_B1_perp < 0 or M < 0 or gamma_e < 0:
        raise DomainError("inputs must be non-negative")
    return delta_B1_perp * M * gamma_e


@dataclass(frozen=True)
class FieldMap:
    """Sampled B1 mode. Arrays share one length; ``max_B1`` is the mode maximum."""
    volumes: np.ndarray
    b_perp: np.ndarray
    in_implant: np.ndarray
    max_B1: float

    def __post_init__(self):
        v = np.asarray(self.volumes, dtype=float)
        b = np.asarray(self.b_perp, dtype=float)
        m = np.asarray(self.in_implant, dtype=bool)
        if not (v.shape == b.shape == m.shape and v.ndim == 1):
            raise DomainError("field-map arrays must be 1-D and equally long")
        if v.size and (np.any(v <= 0) or np.any(b < 0)):
            raise DomainError("cell volumes must be positive and fields non-negative")
        if v.size and b.max() > self.max_B1 * (1 + 1e-9):
            raise DomainError("max_B1 is smaller than a sampled field")
        object.__setattr__(self, "volumes", v)
        object.__setattr__(self, "b_perp", b)
        object.__setattr__(self, "in_implant", m)

    @classmethod
    def from_samples(cls, volumes, b_perp, in_implant, max_B1: float | None = None) -> "FieldMap":
        b = np.asarray(b_perp, dtype=float)
        return cls(np.asarray(volumes), b, np.asarray(in_implant), float(b.max()) if max_B1 is None else max_B1)

    def scaled(self, factor: float) -> "FieldMap":
        return FieldMap(self.volumes, self.b_perp * factor, self.in_implant, self.max_B1 * factor)

    def __len__(self) -> int:
        return self.volumes.size


def effective_volume(fmap: FieldMap) -> tuple[float, float, float]:
    """(V_d, V_m, filling factor) of a sampled mode."""
    if len(fmap) == 0:
        raise DomainError("empty field map")
    weight = fmap.volumes * (fmap.b_perp / fmap.max_B1) ** 2
    v_m = float(weight.sum())
    v_d = float(weight[fmap.in_implant].sum())
    return v_d, v_m, (v_d / v_m if v_m > 0 else 0.0)


def coupling_histogram(fmap: FieldMap, zpf_scale: float, M: float, gamma_e: float, bins: int = 200):
    """Histogram of single-spin couplings, weighted by implanted cell volume.

    ``zpf_scale`` converts map fields into RMS vacuum fields (tesla per map unit).
    """
    if zpf_scale <= 0:
        raise DomainError("field scale must be positive")
    sel = fmap.in_implant
    g = coupling_from_field(1.0, M, gamma_e) * zpf_scale * fmap.b_perp[sel]
    weights, edges = np.histogram(g, bins=bins, weights=fmap.volumes[sel])
    return CouplingDistribution(0.5 * (edges[1:] + edges[:-1]), weights)


def write_coupling_histogram(path, dist: "CouplingDistribution") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["g0_hz", "weight"])
        for g, wt in zip(dist.g, dist.weight):
            w.writerow([repr(float(g / (2 * np.pi))), repr(float(wt))])


@dataclass(frozen=True)
class CouplingDistribution:
    """Spin count per linear g bin; ``g`` in rad/s."""
    g: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        w = np.asarray(self.weight, dtype=float)
        if g.shape != w.shape:
            raise DomainError("g and weight must have equal length")
        if np.any(w < 0) or not np.any(w > 0):
            raise DomainError("weights must be non-negative with at least one positive")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "weight", w)


def spin_fraction(dist: CouplingDistribution, g0_cal: float) -> float:
    """Fraction of echo-contributing spins when pulses are calibrated for coupling ``g0_cal``.

    Spins rotated past pi contribute with reversed sign through the sin^3 factor.
    """
    if g0_cal <= 0:
        raise DomainError("calibrated coupling must be positive")
    gw = dist.g * dist.weight
    return float(np.sum(gw * np.sin(np.pi * dist.g / (2 * g0_cal)) ** 3) / np.sum(gw))


def excitation_profile(detuning, kappa: float, t_p: float):
    """Cavity-filtered pulse spectrum, normalized to 1 on resonance."""
    d = np.asarray(detuning, dtype=float)
    r_res = 1 / (1 + 4 * d ** 2 / kappa ** 2)
    r_pulse = np.sinc(t_p * d / (2 * np.pi)) ** 2  # np.sinc(x) = sin(pi x)/(pi x)
    return r_res * r_pulse


def pulse_overlap(linewidth_fwhm: float, line_offset: float, QL: float, omega0: float, t_p: float) -> float:
    """Fraction of a Lorentzian spin line excited by the cavity-filtered pulse.

    ``line_offset`` is the spin-line centre minus the cavity frequency (rad/s).
    """
    if linewidth_fwhm < 0 or QL <= 0 or omega0 <= 0 or t_p <= 0:
        raise DomainError("linewidth must be non-negative and QL, omega0, t_p positive")
    kappa = omega0 / QL
    if linewidth_fwhm == 0:
        return float(excitation_profile(line_offset, kappa, t_p))
    hw = linewidth_fwhm / 2

    def integrand(d):
        return excitation_profile(d, kappa, t_p) * hw / np.pi / ((d - line_offset) ** 2 + hw ** 2)

    # the profile is negligible beyond a few hundred cavity/pulse widths
    span = 400 * max(kappa, 2 * np.pi / t_p)
    lobes = np.arange(-span, span + 1e-9, 2 * np.pi / t_p)
    total = 0.0
    for a, b in zip(lobes[:-1], lobes[1:]):
        val, _ = quad(integrand, a + line_offset, b + line_offset, epsabs=0, epsrel=1e-8, limit=200)
        total += val
    # beyond the span the profile falls as 1/d^4, so the tails are dropped
    if not np.isfinite(total) or total < 0:
        raise NumericalError("overlap quadrature failed")
    return float(min(total, 1.0))


@dataclass
class SensitivityBudget:
    beta_a: float = 0.6
    beta_b: float = 1 / 54.3
    beta_c: float = 0.082
    beta_d: float = 0.1
    C_d: float = 1.03e17 / CM3
    V_d: float = 1009.8 * UM3

    def __post_init__(self):
        for name in ("beta_a", "beta_b", "beta_c", "beta_d"):
            if not 0 <= getattr(self, name) <= 1:
                raise DomainError(f"{name} must lie in [0, 1]")
        if self.C_d < 0 or self.V_d < 0:
            raise DomainError("concentration and volume must be non-negative")

    @property
    def N_d(self) -> float:
        return self.beta_a * self.C_d * self.V_d

    @property
    def N_tot(self) -> float:
        return self.beta_a * self.beta_b * self.beta_c * self.beta_d * self.C_d * self.V_d

    def N_min(self, SNR1: float) -> float:
        return n_min_measured(self.N_tot, SNR1)

    def report(self, snr_rows: dict[str, float] | None = None) -> list[tuple[str, float]]:
        rows = [
            ("beta_a", self.beta_a),
            ("beta_b", self.beta_b),
            ("beta_c", self.beta_c),
            ("beta_d", self.beta_d),
            ("C_d_m-3", self.C_d),
            ("V_d_m3", self.V_d),
            ("N_d", self.N_d),
            ("N_tot", self.N_tot),
        ]
        for label, snr in (snr_rows or {}).items():
            rows.append((f"N_min[{label}]", self.N_min(snr)))
        return rows


def total_spins(budget: SensitivityBudget) -> tuple[float, float]:
    return budget.N_d, budget.N_tot


def n_min_measured(N_tot: float, SNR1: float) -> float:
    if SNR1 <= 0:
        raise DomainError("single-shot SNR must be positive")
    return N_tot / SNR1


def n_min_theory(kappa: float, kappa_c: float, w_echo: float, g0: float, p: float, n_n: float) -> float:
    """Single-shot sensitivity of an echo detected through a resonator of linewidth ``kappa``."""
    if min(kappa, kappa_c, w_echo, g0) <= 0 or not 0 < p <= 1 or n_n < 0:
        raise DomainError("rates must be positive, p in (0, 1], n_n >= 0")
    return (kappa + w_echo) / (2 * g0 * p) * np.sqrt(n_n * w_echo * kappa / (kappa_c * (kappa + 2 * w_echo)))


def noise_from_n_min(kappa: float, kappa_c: float, w_echo: float, g0: float, p: float, N_min: float) -> float:
    """Noise photons n_n that make :func:`n_min_theory` return ``N_min``."""
    unit = n_min_theory(kappa, kappa_c, w_echo, g0, p, 1.0)
    return (N_min / unit) ** 2


def purcell_rate(g0: float, kappa: float, gamma: float, delta: float = 0.0) -> float:
    kl = kappa + gamma
    if kl <= 0:
        raise DomainError("total linewidth must be positive")
    return kl * g0 ** 2 / (kl ** 2 / 4 + delta ** 2)


def purcell_t1(g0: float, kappaL: float) -> float:
    """On-resonance Purcell-limited T1 = kappa_L / (4 g0^2)."""
    return kappaL / (4 * g0 ** 2)


def alpha_scaling(alpha: float, alpha_ref: float = 0.0) -> dict[str, float]:
    """Design-law factors at kinetic-inductance fraction ``alpha`` relative to ``alpha_ref``.

    Assumes w, L_g and omega0 fixed, film thickness setting alpha, and the
    resonator length adjusted to hold omega0.
    """
    for a in (alpha, alpha_ref):
        if not 0 <= a < 1:
            raise DomainError("alpha must lie in [0, 1)")
    r = (1 - alpha) / (1 - alpha_ref)
    return {
        "g0_factor": r ** 0.25,
        "N_min_factor": r ** -0.25,
        "N_tot_factor": r ** 0.5,
        "SNR_factor": r ** 0.75,
        "abs_N_min_factor": r ** -0.5,
        "abs_SNR_factor": r,
        "length_factor": r ** 0.5,
    }


def resonator_length_for_alpha(alpha: float, Z_r0: float, omega0: float, Lg_l: float) -> float:
    """Quarter-wave length holding omega0 fixed: pi Z_r0 sqrt(1 - alpha) / (2 omega0 L_g)."""
    if not 0 <= alpha < 1:
        raise DomainError("alpha must lie in [0, 1)")
    return np.pi * Z_r0 * np.sqrt(1 - alpha) / (2 * omega0 * Lg_l)


FIELDMAP_COLUMNS = ["x_m", "y_m", "z_m", "cell_vol_m3", "B1perp_T", "in_implant"]


def read_field_map(path, max_B1: float | None = None) -> FieldMap:
    vols, fields, flags = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(FIELDMAP_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"field-map CSV lacks columns {sorted(missing)}")
        for row in reader:
            vols.append(float(row["cell_vol_m3"]))
            fields.append(float(row["B1perp_T"]))
            flag = row["in_implant"].strip()
            if flag not in ("0", "1"):
                raise ValueError(f"in_implant must be 0 or 1, got {flag!r}")
            flags.append(flag == "1")
    if not vols:
        raise DomainError("empty field map")
    return FieldMap.from_samples(vols, fields, flags, max_B1)


def write_field_map(path, x, y, z, fmap: FieldMap) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELDMAP_COLUMNS)
        for row in zip(x, y, z, fmap.volumes, fmap.b_perp, fmap.in_implant):
            w.writerow([repr(float(v)) for v in row[:5]] + [int(row[5])])


def read_coupling_histogram(path) -> CouplingDistribution:
    """Histogram CSV with columns ``g0_hz, weight``; g0 is an ordinary frequency."""
    g, wt = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not {"g0_hz", "weight"} <= set(reader.fieldnames or []):
            raise ValueError("coupling histogram needs columns g0_hz, weight")
        for row in reader:
            g.append(2 * np.pi * float(row["g0_hz"]))
            wt.append(float(row["weight"]))
    return CouplingDistribution(np.array(g), np.array(wt))
