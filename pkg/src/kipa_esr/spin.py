"""Spin Hamiltonian of the 209Bi donor in silicon.

The electron (S = 1/2) and nuclear (I = 9/2) spins are coupled by the contact
hyperfine interaction and Zeeman-split by a static field B0 along z::

    H = A S.I + B0 (gamma_e S_z + gamma_n I_z)

All energies are angular frequencies (rad/s). The matrix is built in the
product basis |m_S> x |m_I> with Condon-Shortley phases, which keeps it real,
and diagonalized with a cyclic Jacobi eigensolver.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import NumericalError
from .constants import BI_A, BI_GAMMA_E, BI_GAMMA_N, BI_I, BI_S

Label = tuple[float, float]

DEFAULT_THRESHOLD = 0.05


class NoCrossingError(ValueError):
    """The selected transition never reaches the target frequency in the search interval."""


@dataclass(frozen=True)
class SpinSystem:
    S: float = BI_S
    I: float = BI_I
    A: float = BI_A
    gamma_e: float = BI_GAMMA_E
    gamma_n: float = BI_GAMMA_N

    @property
    def dim(self) -> int:
        return int(round((2 * self.S + 1) * (2 * self.I + 1)))

    def zero_field_energy(self, F: float) -> float:
        """Energy of the F manifold for H = A S.I."""
        S, I = self.S, self.I
        return 0.5 * self.A * (F * (F + 1) - S * (S + 1) - I * (I + 1))

    def operators(self) -> dict[str, np.ndarray]:
        """Full-space spin operators Sx, Sz, Iz, Fz (real matrices)."""
        sz, sp = _spin_matrices(self.S)
        iz, ip = _spin_matrices(self.I)
        one_s = np.eye(sz.shape[0])
        one_i = np.eye(iz.shape[0])
        return {
            "Sx": np.kron(0.5 * (sp + sp.T), one_i),
            "Sz": np.kron(sz, one_i),
            "Iz": np.kron(one_s, iz),
            "Fz": np.kron(sz, one_i) + np.kron(one_s, iz),
        }


def _spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray]:
    """Return (J_z, J_+) for spin j, basis ordered m = j, j-1, ..., -j."""
    m = np.arange(j, -j - 1, -1)
    jz = np.diag(m)
    jp = np.zeros((m.size, m.size))
    for k in range(1, m.size):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    return jz, jp


def build_hamiltonian(system: SpinSystem, B0: float) -> np.ndarray:
    if B0 < 0:
        raise ValueError(f"B0 must be non-negative, got {B0}")
    sz, sp = _spin_matrices(system.S)
    iz, ip = _spin_matrices(system.I)
    one_s = np.eye(sz.shape[0])
    one_i = np.eye(iz.shape[0])
    # S.I = SzIz + (S+I- + S-I+)/2, all real with Condon-Shortley phases
    s_dot_i = np.kron(sz, iz) + 0.5 * (np.kron(sp, ip.T) + np.kron(sp.T, ip))
    zeeman = system.gamma_e * np.kron(sz, one_i) + system.gamma_n * np.kron(one_s, iz)
    return system.A * s_dot_i + B0 * zeeman


def jacobi_eigh(H: np.ndarray, max_sweeps: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors as
    columns. Raises NumericalError if the off-diagonal norm has not dropped to
    machine precision after ``max_sweeps`` sweeps.
    """
    a = np.array(H, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(np.abs(a).max(), 1.0)):
        raise ValueError("matrix must be square and symmetric")
    v = np.eye(n)
    scale = np.abs(a).max()
    if scale == 0.0:
        return np.zeros(n), v
    tiny = np.finfo(float).eps * scale

    for sweep in range(1, max_sweeps + 1):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tiny:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-3 * tiny:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off > tiny:
            raise NumericalError(
                f"Jacobi eigensolver did not converge after {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})"
            )

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass
class EigenSolution:
    field: float
    energies: np.ndarray
    states: np.ndarray
    labels: list[Label]
    system: SpinSystem = field(default_factory=SpinSystem)

    def index(self, label: Label) -> int:
        return self.labels.index((float(label[0]), float(label[1])))

    def energy(self, label: Label) -> float:
        return float(self.energies[self.index(label)])


def _resolve_degenerate(energies: np.ndarray, states: np.ndarray, fz: np.ndarray) -> np.ndarray:
    """Rotate each degenerate eigenspace so its basis diagonalizes F_z."""
    states = states.copy()
    tol = 1e-9 * max(np.abs(energies).max(), 1.0)
    n = energies.size
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and energies[stop] - energies[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            block = states[:, start:stop]
            sub = block.T @ fz @ block
            _, u = jacobi_eigh(0.5 * (sub + sub.T))
            states[:, start:stop] = block @ u
        start = stop
    return states


def _assign_labels(system: SpinSystem, energies: np.ndarray, states: np.ndarray, fz: np.ndarray) -> list[Label]:
    """Label eigenstates |F, m_F>.

    F_z commutes with H, so each m_F sector evolves independently with B0 and
    its levels never cross (non-crossing rule within a symmetry sector). The
    k-th lowest level of a sector therefore continues adiabatically into the
    k-th lowest allowed F manifold at zero field.
    """
    m_f = np.round(2.0 * np.einsum("ij,ik,kj->j", states, fz, states)) / 2.0
    f_values = np.arange(abs(system.I - system.S), system.I + system.S + 1)
    labels: list[Label] = [(0.0, 0.0)] * energies.size
    for mf in np.unique(m_f):
        members = np.flatnonzero(m_f == mf)
        allowed = sorted((F for F in f_values if F >= abs(mf) - 1e-9), key=system.zero_field_energy)
        if len(allowed) != members.size:
            raise NumericalError(f"cannot label m_F = {mf}: {members.size} states, {len(allowed)} manifolds")
        for F, idx in zip(allowed, members[np.argsort(energies[members], kind="stable")]):
            labels[idx] = (float(F), float(mf))
    return labels


def diagonalize(H: np.ndarray, system: SpinSystem | None = None, B0: float = float("nan")) -> EigenSolution:
    system = system or SpinSystem()
    energies, states = jacobi_eigh(H)
    fz = system.operators()["Fz"]
    states = _resolve_degenerate(energies, states, fz)
    labels = _assign_labels(system, energies, states, fz)
    return EigenSolution(field=B0, energies=energies, states=states, labels=labels, system=system)


def solve(system: SpinSystem, B0: float) -> EigenSolution:
    """Build and diagonalize in one step."""
    return diagonalize(build_hamiltonian(system, B0), system, B0)


@dataclass(frozen=True)
class Transition:
    lower: Label
    upper: Label
    frequency: float
    mx: float
    mz: float
    dfdB: float = float("nan")

    @property
    def kind(self) -> str:
        return "Sx" if self.mx >= self.mz else "Sz"


def transitions(sol: EigenSolution, operator: str = "Sx", threshold: float = DEFAULT_THRESHOLD) -> list[Transition]:
    """All level pairs whose |<f|op|i>| reaches ``threshold``.

    Pairs of exactly degenerate levels are skipped: they carry no spectroscopic
    frequency.
    """
    if operator not in ("Sx", "Sz"):
        raise ValueError(f"operator must be 'Sx' or 'Sz', got {operator!r}")
    if not 0 < threshold < 0.5:
        raise ValueError("threshold must lie in (0, 0.5)")
    ops = sol.system.operators()
    vec = sol.states
    mx = np.abs(vec.T @ ops["Sx"] @ vec)
    mz = np.abs(vec.T @ ops["Sz"] @ vec)
    element = mx if operator == "Sx" else mz
    degenerate = 1e-9 * max(np.abs(sol.energies).max(), 1.0)
    out = []
    n = sol.energies.size
    for i in range(n):
        for j in range(i + 1, n):
            freq = sol.energies[j] - sol.energies[i]
            if freq <= degenerate or element[i, j] < threshold:
                continue
            out.append(Transition(sol.labels[i], sol.labels[j], float(freq), float(mx[i, j]), float(mz[i, j])))
    return out


def transition_frequency(system: SpinSystem, selector: tuple[Label, Label], B0: float) -> float:
    """E(upper) - E(lower) for a labelled pair; may be negative if the levels invert."""
    sol = solve(system, B0)
    lower, upper = selector
    return sol.energy(upper) - sol.energy(lower)


def matrix_elements(system: SpinSystem, selector: tuple[Label, Label], B0: float) -> tuple[float, float]:
    """(|<u|Sx|l>|, |<u|Sz|l>|) for a labelled pair."""
    sol = solve(system, B0)
    ops = system.operators()
    lo = sol.states[:, sol.index(selector[0])]
    up = sol.states[:, sol.index(selector[1])]
    return abs(float(up @ ops["Sx"] @ lo)), abs(float(up @ ops["Sz"] @ lo))


def resonant_field(
    system: SpinSystem,
    selector: tuple[Label, Label],
    omega_target: float,
    B_min: float = 0.0,
    B_max: float = 0.4,
    n_scan: int = 400,
    tol: float = 2 * np.pi * 1e3,
) -> float:
    """Lowest field in [B_min, B_max] where the transition frequency equals ``omega_target``.

    A coarse scan brackets the first sign change; bisection then refines it
    until the frequency mismatch is below ``tol`` (rad/s).
    """
    def mismatch(b: float) -> float:
        return transition_frequency(system, selector, b) - omega_target

    grid = np.linspace(B_min, B_max, n_scan + 1)
    prev_b, prev_f = grid[0], mismatch(grid[0])
    if abs(prev_f) < tol:
        return float(prev_b)
    for b in grid[1:]:
        f = mismatch(b)
        if abs(f) < tol:
            return float(b)
        if np.sign(f) != np.sign(prev_f):
            lo, hi, f_lo = prev_b, b, prev_f
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                f_mid = mismatch(mid)
                if abs(f_mid) < tol or hi - lo < 1e-15:
                    return float(mid)
                if np.sign(f_mid) == np.sign(f_lo):
                    lo, f_lo = mid, f_mid
                else:
                    hi = mid
            return float(0.5 * (lo + hi))
        prev_b, prev_f = b, f
    raise NoCrossingError(
        f"transition {selector} does not reach {omega_target / (2 * np.pi):.6g} Hz "
        f"between {B_min} T and {B_max} T"
    )


def transition_gradient(system: SpinSystem, selector: tuple[Label, Label], B0: float, step: float = 1e-6) -> float:
    """d(omega)/dB by central difference (rad/s per tesla)."""
    if B0 <= 0:
        raise ValueError("B0 must be positive")
    h = min(step, B0)
    return (transition_frequency(system, selector, B0 + h) - transition_frequency(system, selector, B0 - h)) / (2 * h)


@dataclass(frozen=True)
class Crossing:
    transition: Transition
    field: float


def find_crossings(
    system: SpinSystem,
    omega_target: float,
    B_min: float,
    B_max: float,
    step: float = 1e-4,
    operators: Sequence[str] = ("Sx", "Sz"),
    threshold: float = DEFAULT_THRESHOLD,
) -> list[Crossing]:
    """Every allowed transition whose frequency passes through ``omega_target`` on [B_min, B_max].

    Crossings are bracketed on a grid of spacing ``step``, refined by bisection
    and kept only if the matrix element of the driving operator still reaches
    ``threshold`` at the crossing field.
    """
    if not B_max > B_min:
        raise ValueError("empty field range")
    fields = np.arange(B_min, B_max + 0.5 * step, step)
    fields = fields[fields <= B_max + 1e-15]
    if fields.size < 2:
        raise ValueError("field range shorter than one step")

    def pair_frequencies(sol: EigenSolution) -> dict[tuple[Label, Label], float]:
        order = {lab: k for k, lab in enumerate(sol.labels)}
        out = {}
        for lo in sol.labels:
            for up in sol.labels:
                if lo != up:
                    out[(lo, up)] = sol.energies[order[up]] - sol.energies[order[lo]]
        return out

    prev = pair_frequencies(solve(system, fields[0]))
    found: list[Crossing] = []
    for b_prev, b in zip(fields[:-1], fields[1:]):
        cur = pair_frequencies(solve(system, b))
        for pair, f in cur.items():
            f0 = prev[pair]
            if f0 <= 0 and f <= 0:
                continue
            if (f0 - omega_target) * (f - omega_target) <= 0 and f0 != f:
                if f - omega_target == 0 and b != fields[-1]:
                    continue  # counted on the next interval
                b_cross = resonant_field(system, pair, omega_target, b_prev, b, n_scan=1)
                mx, mz = matrix_elements(system, pair, b_cross)
                for op in operators:
                    if (mx if op == "Sx" else mz) >= threshold:
                        freq = transition_frequency(system, pair, b_cross)
                        found.append(Crossing(Transition(pair[0], pair[1], freq, mx, mz), b_cross))
                        break
        prev = cur
    return sorted(found, key=lambda c: c.field)


SWEEP_COLUMNS = ["B0_T", "freq_Hz", "mx", "mz", "F_lower", "mF_lower", "F_upper", "mF_upper"]


def sweep(
    system: SpinSystem,
    fields: Iterable[float],
    operators: Sequence[str] = ("Sx",),
    threshold: float = DEFAULT_THRESHOLD,
) -> list[dict[str, float]]:
    rows = []
    for b in fields:
        sol = solve(system, float(b))
        seen = set()
        for op in operators:
            for tr in transitions(sol, op, threshold):
                key = (tr.lower, tr.upper)
                if key in seen:
                    continue
                seen.add(key)
                rows.append({
                    "B0_T": float(b),
                    "freq_Hz": tr.frequency / (2 * np.pi),
                    "mx": tr.mx,
                    "mz": tr.mz,
                    "F_lower": tr.lower[0],
                    "mF_lower": tr.lower[1],
                    "F_upper": tr.upper[0],
                    "mF_upper": tr.upper[1],
                })
    return rows


def write_sweep_csv(rows: Iterable[dict[str, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(float(row[k])) for k in SWEEP_COLUMNS})
