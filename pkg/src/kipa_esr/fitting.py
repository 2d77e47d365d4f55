"""Model fits and echo-trace SNR extraction."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares as _scipy_lsq
from scipy.optimize import minimize_scalar
from scipy.signal import lfilter

from . import DomainError

#: Fits whose scale-normalized Jacobian is worse conditioned than this are unidentifiable.
MAX_CONDITION = 1e8


@dataclass
class FitResult:
    params: dict[str, float]
    residual_rms: float
    converged: bool
    iterations: int
    stderr: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    def report(self) -> str:
        lines = [f"{k} = {v!r}" for k, v in self.params.items()]
        lines += [f"stderr_{k} = {v!r}" for k, v in self.stderr.items()]
        lines += [
            f"residual_rms = {self.residual_rms!r}",
            f"converged = {str(self.converged).lower()}",
            f"iterations = {self.iterations}",
        ]
        return "\n".join(lines) + "\n"


def least_squares(
    model: Callable[..., np.ndarray],
    x,
    y,
    p0: dict[str, float],
    max_iter: int = 200,
    xtol: float = 1e-8,
    scales: dict[str, float] | None = None,
) -> FitResult:
    """Levenberg-Marquardt fit of ``model(x, *params)`` to ``y``.

    Parameters are passed positionally in the order of ``p0``. A fit whose
    Jacobian is rank deficient at the solution is returned with
    ``converged=False``. Conditioning is judged on the Jacobian with each
    column multiplied by a characteristic scale of its parameter: ``scales``
    where given (needed for offsets and centres that may sit at zero),
    otherwise the fitted magnitude.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    names = list(p0)
    if y.size < len(names):
        raise DomainError(f"{y.size} points cannot determine {len(names)} parameters")
    start = np.array([p0[n] for n in names], dtype=float)

    def resid(p):
        return np.asarray(model(x, *p), dtype=float) - y

    # scipy's "lm" needs at least as many residuals as parameters, checked above
    res = _scipy_lsq(resid, start, method="lm", xtol=xtol, ftol=1e-12, gtol=1e-12,
                     max_nfev=max_iter * (len(names) + 1))
    rms = float(np.sqrt(np.mean(res.fun ** 2)))
    scales = scales or {}
    scale = np.array([scales.get(n, abs(v)) for n, v in zip(names, res.x)])
    well_posed = bool(np.all(scale > 0) and np.all(np.isfinite(res.jac)))
    if well_posed:
        sv = np.linalg.svd(res.jac * scale, compute_uv=False)
        well_posed = sv[-1] > 0 and sv[0] / sv[-1] < MAX_CONDITION
    converged = bool(res.status > 0 and np.all(np.isfinite(res.x)) and well_posed)

    stderr = {n: float("inf") for n in names}
    dof = y.size - len(names)
    jtj = res.jac.T @ res.jac
    if dof > 0 and np.linalg.cond(jtj) < 1e14:
        cov = np.linalg.inv(jtj) * np.sum(res.fun ** 2) / dof
        stderr = {n: float(np.sqrt(max(cov[i, i], 0.0))) for i, n in enumerate(names)}
    return FitResult(dict(zip(names, map(float, res.x))), rms, converged, int(res.nfev), stderr)


def lorentzian(x, center, fwhm, peak, offset):
    return offset + peak / (1 + (2 * (x - center) / fwhm) ** 2)


def fit_lorentzian(x, y) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size < 4:
        raise DomainError("Lorentzian fit needs at least 4 points")
    if np.ptp(y) == 0:
        raise DomainError("flat data: Lorentzian parameters are not identifiable")
    offset = float(np.median(y))
    k = int(np.argmax(np.abs(y - offset)))
    peak = float(y[k] - offset)
    above = np.abs(y - offset) >= abs(peak) / 2
    width = float(np.ptp(x[above])) or float(np.ptp(x)) / 10
    r = least_squares(lorentzian, x, y, {"center": float(x[k]), "fwhm": width, "peak": peak, "offset": offset},
                      scales={"center": float(np.ptp(x)), "offset": float(np.ptp(y))})
    r.params["fwhm"] = abs(r.params["fwhm"])
    return r


def exp_decay(t, amplitude, tau, offset):
    return amplitude * np.exp(-t / tau) + offset


def exp_recovery(t, amplitude, tau, offset):
    return amplitude * (1 - np.exp(-t / tau)) + offset


def fit_exponential(t, y, kind: str = "decay") -> FitResult:
    models = {"decay": exp_decay, "recovery": exp_recovery}
    if kind not in models:
        raise DomainError(f"kind must be one of {sorted(models)}")
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size < 4:
        raise DomainError("exponential fit needs at least 4 points")
    span = float(np.ptp(t)) or 1.0
    if kind == "decay":
        p0 = {"amplitude": float(y[0] - y[-1]), "tau": span / 3, "offset": float(y[-1])}
    else:
        p0 = {"amplitude": float(y[-1] - y[0]), "tau": span / 3, "offset": float(y[0])}
    # both models approach y[-1] as exp(-t/tau): start tau at the 1/e point
    dist = np.abs(y - y[-1])
    below = np.nonzero(dist <= dist[0] / np.e)[0]
    if dist[0] > 0 and t[below[0]] > t[0]:
        p0["tau"] = float(t[below[0]] - t[0])
    if p0["amplitude"] == 0:
        p0["amplitude"] = float(np.ptp(y)) or 1e-3 * (abs(p0["offset"]) or 1.0)
    r = least_squares(models[kind], t, y, p0, scales={"offset": float(np.ptp(y)) or abs(p0["offset"]) or 1.0})
    if r.params["tau"] <= 0 or abs(r.params["amplitude"]) <= 1e-9 * max(abs(r.params["offset"]), 1e-300):
        r.converged = False
    return r


def snr_vs_gain(G, A, B):
    return np.sqrt(G ** 2 * A / (G ** 2 * B + 1))


def fit_snr_vs_gain(gains, snr) -> FitResult:
    """Fit SNR = sqrt(G^2 A / (G^2 B + 1)); the result also carries ``inv_B``."""
    g = np.asarray(gains, dtype=float)
    s = np.asarray(snr, dtype=float)
    if np.unique(g).size < 3:
        raise DomainError("need at least 3 distinct gain values")
    # linear in (1/A, B/A): 1/SNR^2 = (B/A) + (1/A)/G^2
    coef = np.polyfit(1 / g ** 2, 1 / s ** 2, 1)
    A0 = 1 / coef[0] if coef[0] > 0 else float(np.max(s ** 2))
    B0 = max(coef[1] * A0, 1e-6)
    # B only matters once G^2 B approaches 1, which sets its scale when B is near 0
    r = least_squares(snr_vs_gain, g, s, {"A": A0, "B": B0}, scales={"B": 1 / float(np.max(g)) ** 2})
    r.params["inv_B"] = 1 / r.params["B"] if r.params["B"] != 0 else float("inf")
    return r


def saturating_gsnr(Te, a, tau_k):
    return a * (1 - np.exp(-Te / tau_k))


def fit_gsnr_vs_Te(Te, gsnr) -> FitResult:
    Te = np.asarray(Te, dtype=float)
    g = np.asarray(gsnr, dtype=float)
    if g.size < 3:
        raise DomainError("need at least 3 points")
    return least_squares(saturating_gsnr, Te, g, {"a": float(g.max()), "tau_k": float(np.median(Te))})


@dataclass(frozen=True)
class Trace:
    t: np.ndarray
    I: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        t, i, q = (np.asarray(v, dtype=float) for v in (self.t, self.I, self.Q))
        if not (t.shape == i.shape == q.shape and t.ndim == 1) or t.size < 2:
            raise DomainError("trace arrays must be 1-D, equal length, at least 2 samples")
        if np.any(np.diff(t) <= 0):
            raise DomainError("trace times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "I", i)
        object.__setattr__(self, "Q", q)

    @property
    def z(self) -> np.ndarray:
        return self.I + 1j * self.Q

    @property
    def dt(self) -> float:
        return float(np.mean(np.diff(self.t)))


def _remove_offset(tr: Trace, t1: float) -> np.ndarray:
    n = max(1, int(np.ceil(0.1 * tr.t.size)))
    pre = np.arange(tr.t.size) < n
    pre &= tr.t < t1
    if not pre.any():
        raise DomainError("no samples before the echo window to estimate the DC offset")
    z = tr.z
    return z - z[pre].mean()


def lowpass(z: np.ndarray, dt: float, cutoff_hz: float) -> np.ndarray:
    """Single-pole IIR low-pass, unity DC gain."""
    a = 1 - np.exp(-2 * np.pi * cutoff_hz * dt)
    return lfilter([a], [1, -(1 - a)], z)


def _best_rotation(z: np.ndarray) -> float:
    def cost(theta):
        return float(np.sum(np.abs((z * np.exp(-1j * theta)).imag)))

    grid = np.linspace(0, np.pi, 181)
    k = int(np.argmin([cost(th) for th in grid]))
    step = grid[1] - grid[0]
    res = minimize_scalar(cost, bounds=(grid[k] - step, grid[k] + step), method="bounded",
                          options={"xatol": 1e-10})
    theta = float(res.x)
    if np.mean((z * np.exp(-1j * theta)).real) < 0:
        theta += np.pi
    return theta


@dataclass(frozen=True)
class EchoSnr:
    snr: float
    mean_I: float
    rms_blank: float
    rotation: float


def echo_snr(signal: Trace, blank: Trace, window: tuple[float, float], lowpass_hz: float | None = 1e6) -> EchoSnr:
    """Amplitude SNR of an echo: mean(I_signal) / rms(I_blank) over ``window``.

    Offsets come from the first 10% of samples (those before the window);
    both traces are low-pass filtered and rotated by the angle that minimizes
    the integrated |Q| of the signal inside the window.
    """
    t1, t2 = window
    if t2 <= t1:
        raise DomainError("window must have t2 > t1")
    for tr in (signal, blank):
        if t1 < tr.t[0] or t2 > tr.t[-1]:
            raise DomainError("window lies outside a trace")
    zs = _remove_offset(signal, t1)
    zb = _remove_offset(blank, t1)
    if lowpass_hz is not None:
        zs = lowpass(zs, signal.dt, lowpass_hz)
        zb = lowpass(zb, blank.dt, lowpass_hz)
    ws = (signal.t >= t1) & (signal.t <= t2)
    wb = (blank.t >= t1) & (blank.t <= t2)
    theta = _best_rotation(zs[ws])
    rot = np.exp(-1j * theta)
    mean_i = float(np.mean((zs[ws] * rot).real))
    rms = float(np.sqrt(np.mean((zb[wb] * rot).real ** 2)))
    if rms == 0:
        raise DomainError("blank trace has zero RMS in the window")
    return EchoSnr(mean_i / rms, mean_i, rms, theta % (2 * np.pi))


TRACE_COLUMNS = ["t_s", "I", "Q"]


def read_trace(path) -> Trace:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not set(TRACE_COLUMNS) <= set(reader.fieldnames or []):
            raise ValueError(f"trace CSV needs columns {TRACE_COLUMNS}")
        rows = [(float(r["t_s"]), float(r["I"]), float(r["Q"])) for r in reader]
    if not rows:
        raise DomainError("empty trace")
    t, i, q = map(np.array, zip(*rows))
    return Trace(t, i, q)


def write_trace(path, tr: Trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in zip(tr.t, tr.I, tr.Q):
            w.writerow([repr(float(v)) for v in row])


def read_xy(path, x_col: str, y_col: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not {x_col, y_col} <= set(reader.fieldnames or []):
            raise ValueError(f"CSV needs columns {x_col}, {y_col}")
        rows = [(float(r[x_col]), float(r[y_col])) for r in reader]
    if not rows:
        raise DomainError("empty data file")
    x, y = map(np.array, zip(*rows))
    return x, y


def fit_names() -> Sequence[str]:
    return ("lorentzian", "decay", "recovery", "snr-gain", "gsnr-te")
