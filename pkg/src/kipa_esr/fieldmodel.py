"""Analytic magnetic-field model of the resonator mode, producing a :class:`FieldMap`.

Each CPW section is treated as zero-thickness sheet currents on the substrate
surface: a uniform sheet on the centre track and a ground return spread over
both ground planes with the conformal-mapping profile
1 / sqrt((x^2 - a^2)(x^2 - b^2)). Along the line the current follows the
lossless standing wave of the shorted resonator continued through the filter.

Coordinates: x across the line, y along it, z depth into the substrate. B0 is
taken along y, so the whole cross-sectional field counts as B1-perpendicular.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import DomainError
from .constants import hbar, mu_0, pi
from .network import CpwLine, device_sif, resonator_frequency, standing_wave
from .sensitivity import FieldMap, coupling_histogram

IMPLANT_DEPTH = (0.35e-6, 1.6e-6)


def sheet_strip_field(x, z, x1: float, x2: float, K: float):
    """(Bx, Bz) at depth z > 0 below a sheet current density K (A/m) filling x1 < x < x2."""
    bx = mu_0 * K / (2 * pi) * (np.arctan((x - x1) / z) - np.arctan((x - x2) / z))
    bz = mu_0 * K / (4 * pi) * np.log(((x - x2) ** 2 + z ** 2) / ((x - x1) ** 2 + z ** 2))
    return bx, bz


def ground_return(a: float, b: float, n: int = 60, extent: float = 30.0):
    """Strip edges and current fractions for one ground plane, x from b to extent*b."""
    edges = b + (extent - 1) * b * np.linspace(0, 1, n + 1) ** 3

    def density(x):
        return 1 / np.sqrt((x * x - a * a) * (x * x - b * b))

    weights = np.array([quad(density, lo, hi)[0] for lo, hi in zip(edges[:-1], edges[1:])])
    return edges, weights / weights.sum()


def _graded_axis(marks, lo: float, hi: float, h_min: float, growth: float, n_uniform: int = 6) -> np.ndarray:
    """Cell edges in [lo, hi]: uniform h_min for ``n_uniform`` cells around each mark, then geometric growth.

    Points grown from one mark are discarded inside another mark's uniform
    band, so the cells touching every mark are identical at any ``growth``.
    """
    band = n_uniform * h_min
    pts = [lo, hi]
    for m in marks:
        own = [m + k * h_min for k in range(-n_uniform, n_uniform + 1)]
        step, off = h_min * growth, band
        while off < hi - lo:
            off += step
            own += [m - off, m + off]
            step *= growth
        others = [o for o in marks if o != m]
        pts += [p for p in own if all(abs(p - o) > band + 0.5 * h_min or abs(p - m) <= band for o in others)]
    pts = np.unique(np.clip(pts, lo, hi))
    keep = np.concatenate([[True], np.diff(pts) > 0.5 * h_min])
    return pts[keep]


@dataclass(frozen=True)
class CrossSection:
    """Field per ampere of line current on a graded (x, z) grid of cell centres."""
    x: np.ndarray
    z: np.ndarray
    dx: np.ndarray
    dz: np.ndarray
    B: np.ndarray  # shape (len(x), len(z)), tesla per ampere
    in_implant: np.ndarray


def cross_section(
    line: CpwLine,
    depth: float = 4e-6,
    implant: tuple[float, float] = IMPLANT_DEPTH,
    h_min: float = 0.05e-6,
    growth: float = 1.25,
    n_ground: int = 60,
) -> CrossSection:
    a, b = line.w / 2, line.w / 2 + line.gap
    xmax = 3 * b + 2 * line.w
    xe = _graded_axis([-b, -a, a, b], -xmax, xmax, h_min, growth)
    ze = _graded_axis([0.0, *implant], 0.0, depth, h_min, growth)
    ze = np.unique(np.concatenate([ze, implant]))
    xc, zc = 0.5 * (xe[1:] + xe[:-1]), 0.5 * (ze[1:] + ze[:-1])
    X, Z = np.meshgrid(xc, zc, indexing="ij")

    bx, bz = sheet_strip_field(X, Z, -a, a, 1 / line.w)
    edges, frac = ground_return(a, b, n_ground)
    for sign in (-1, 1):
        for lo, hi, f in zip(edges[:-1], edges[1:], frac):
            x1, x2 = sorted((sign * lo, sign * hi))
            cx, cz = sheet_strip_field(X, Z, x1, x2, -0.5 * f / (x2 - x1))
            bx += cx
            bz += cz
    imp = (zc >= implant[0]) & (zc <= implant[1])
    return CrossSection(xc, zc, np.diff(xe), np.diff(ze), np.hypot(bx, bz), imp)


@dataclass(frozen=True)
class ModeGeometry:
    """Shorted resonator followed by filter sections, nearest first."""
    sections: tuple[CpwLine, ...]
    omega0: float

    @classmethod
    def device(cls, resonator_length: float = 1.75e-3, w: float = 1e-6, gap: float = 10e-6) -> "ModeGeometry":
        res = CpwLine(w, gap, resonator_length)
        omega0 = resonator_frequency(res, resonator_length)
        sif = device_sif(omega0).segments[::-1]
        return cls((res, *sif), omega0)


@dataclass(frozen=True)
class ModeFieldMap:
    fmap: FieldMap
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    section: np.ndarray
    zero_point_current: float  # RMS vacuum current at the short, amperes

    def coupling_distribution(self, M: float, gamma_e: float, bins: int = 200):
        return coupling_histogram(self.fmap, self.zero_point_current, M, gamma_e, bins)


def zero_point_current(sections, currents, positions, omega0: float) -> float:
    """Vacuum current amplitude at the short: hbar omega0 / (2 sum L |u|^2 dy) under the square root."""
    energy = 0.0
    for seg, u, y in zip(sections, currents, positions):
        dy = seg.length / len(y)
        energy += seg.L_l * np.sum(u ** 2) * dy
    return float(np.sqrt(hbar * omega0 / (2 * energy)))


def mode_field_map(geom: ModeGeometry, n_slices: int = 8, **xsec_kw) -> ModeFieldMap:
    """Sample |B1| over every section, ``n_slices`` cells along each.

    Fields are tesla per ampere of standing-wave current at the short.
    """
    if n_slices < 1:
        raise DomainError("need at least one slice per section")
    wave = standing_wave(geom.sections, geom.omega0, n_slices)
    vols, fields, flags, xs, ys, zs, sec = [], [], [], [], [], [], []
    y0 = 0.0
    for k, (seg, y, cur) in enumerate(zip(geom.sections, wave.positions, wave.currents)):
        xs_ = cross_section(seg, **xsec_kw)
        cell = np.outer(xs_.dx, xs_.dz).ravel()
        X, Z = np.meshgrid(xs_.x, xs_.z, indexing="ij")
        imp = np.broadcast_to(xs_.in_implant, X.shape).ravel()
        dy = seg.length / n_slices
        for yy, ii in zip(y, cur):
            vols.append(cell * dy)
            fields.append(ii * xs_.B.ravel())
            flags.append(imp)
            xs.append(X.ravel())
            zs.append(Z.ravel())
            ys.append(np.full(cell.size, y0 + yy))
            sec.append(np.full(cell.size, k))
        y0 += seg.length
    fm = FieldMap.from_samples(np.concatenate(vols), np.concatenate(fields), np.concatenate(flags))
    i_zpf = zero_point_current(geom.sections, wave.currents, wave.positions, geom.omega0)
    return ModeFieldMap(fm, np.concatenate(xs), np.concatenate(ys), np.concatenate(zs), np.concatenate(sec), i_zpf)


def section_volumes(mode: ModeFieldMap) -> list[float]:
    """Contribution of each section to V_d (m^3)."""
    fm = mode.fmap
    w = fm.volumes * (fm.b_perp / fm.max_B1) ** 2 * fm.in_implant
    return [float(w[mode.section == k].sum()) for k in range(int(mode.section.max()) + 1)]
