"""Command-line front end.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Callable

import numpy as np

from . import DomainError, NumericalError
from . import fitting, kipa, network, noise, sensitivity, spin
from .config import Config, ConfigError, load_config
from .constants import TWO_PI

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class FitFailed(NumericalError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _kv(pairs) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in pairs)


# ---- builders shared by several commands ---------------------------------

def spin_system(cfg: Config) -> spin.SpinSystem:
    return spin.SpinSystem(
        A=TWO_PI * cfg.float("spin", "A_hz"),
        gamma_e=TWO_PI * cfg.float("spin", "gamma_e_hz_per_t"),
        gamma_n=TWO_PI * cfg.float("spin", "gamma_n_hz_per_t"),
    )


def resonator_line(cfg: Config) -> network.CpwLine:
    return network.CpwLine(
        cfg.float("network", "w_m"), cfg.float("network", "gap_m"), cfg.float("network", "length_m"),
        cfg.float("network", "eps_r"), cfg.float("network", "Lk0_sq_h"),
    )


def device_state(cfg: Config) -> network.ResonatorState:
    return network.ResonatorState(
        omega0=TWO_PI * cfg.float("device", "f0_hz"),
        I_dc=cfg.float("device", "I_dc_a"),
        I_star=cfg.float("device", "I_star_a"),
        length=cfg.float("network", "length_m"),
        Qi=cfg.float("device", "Qi"),
        QL=cfg.float("device", "QL"),
    )


def kipa_params(cfg: Config) -> kipa.KipaParams:
    st = device_state(cfg)
    kappa = cfg.optional("kipa", "kappa")
    gamma = cfg.optional("kipa", "gamma")
    kappa = st.kappa if kappa is None else TWO_PI * kappa
    gamma = st.gamma if gamma is None else TWO_PI * gamma
    xi = cfg.optional("kipa", "xi")
    if xi is None:
        xi = kipa.xi_for_gain(kappa, gamma, 10 ** (cfg.float("kipa", "gain_db") / 20))
    else:
        xi = TWO_PI * xi
    return kipa.KipaParams(
        omega0=st.omega0, kappa=kappa, gamma=gamma, xi_mag=xi,
        Delta=TWO_PI * cfg.float("kipa", "Delta"),
        phi_p=cfg.float("kipa", "phi_p"), phi_offset=cfg.float("kipa", "phi_offset"),
        I_dc=st.I_dc, I_star=st.I_star,
    )


def noise_chain(cfg: Config) -> noise.NoiseChain:
    return noise.default_chain(
        TWO_PI * cfg.float("device", "f0_hz"),
        T_device=cfg.float("noise", "T_device_K"),
        T_hemt=cfg.float("noise", "T_hemt_K"),
        eta_db=cfg.float("noise", "eta_db"),
        G_h_db=cfg.float("noise", "G_h_db"),
        n_k=cfg.float("noise", "n_k"),
        T_attenuator=cfg.optional("noise", "T_attenuator_K"),
        signal_I=cfg.float("noise", "signal_I"),
    )


def _field_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not hi > lo:
        raise ConfigError(f"empty range [{lo}, {hi}]")
    if step <= 0:
        raise ConfigError("step must be positive")
    n = int(np.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


# ---- commands -------------------------------------------------------------

def cmd_spectrum(cfg: Config, args) -> str:
    system = spin_system(cfg)
    ops = cfg.words("spin", "operators")
    if not ops or any(o not in ("Sx", "Sz") for o in ops):
        raise ConfigError("spin.operators must list Sx and/or Sz")
    thr = cfg.float("spin", "threshold")
    if not 0 < thr < 0.5:
        raise ConfigError("spin.threshold must lie in (0, 0.5)")
    lo, hi, step = (cfg.float("spin", k) for k in ("B_min_t", "B_max_t", "B_step_t"))
    fields = _field_grid(lo, hi, step)
    mode = cfg.text("spin", "output")
    if mode == "sweep":
        return _csv(spin.sweep(system, fields, ops, thr), spin.SWEEP_COLUMNS)
    if mode != "crossings":
        raise ConfigError("spin.output must be 'sweep' or 'crossings'")
    found = spin.find_crossings(system, TWO_PI * cfg.float("spin", "target_hz"), lo, hi, step, ops, thr)
    rows = [{
        "B0_T": c.field, "freq_Hz": c.transition.frequency / TWO_PI,
        "mx": c.transition.mx, "mz": c.transition.mz,
        "F_lower": c.transition.lower[0], "mF_lower": c.transition.lower[1],
        "F_upper": c.transition.upper[0], "mF_upper": c.transition.upper[1],
    } for c in found]
    return _csv(rows, spin.SWEEP_COLUMNS)


def build_network(cfg: Config) -> network.SifNetwork:
    path = cfg.path("network", "network_file", required=False)
    if path is not None:
        return network.read_network(path)
    line = resonator_line(cfg)
    omega0 = network.resonator_frequency(line, line.length)
    return network.device_sif(omega0, cfg.float("network", "Z0_ohm"), line.eps_r, line.Lk0_sq)


def cmd_sif(cfg: Config, args) -> str:
    net = build_network(cfg)
    f0, f1 = cfg.float("network", "f_start_hz"), cfg.float("network", "f_stop_hz")
    n = cfg.int("network", "n_points")
    if not (0 < f0 < f1) or n < 2:
        raise ConfigError("need 0 < f_start_hz < f_stop_hz and n_points >= 2")
    return _csv(network.sweep(net, np.linspace(f0, f1, n)), network.SWEEP_COLUMNS)


def cmd_kipa_gain(cfg: Config, args) -> str:
    p = kipa_params(cfg)
    span, n = cfg.float("kipa", "span_hz"), cfg.int("kipa", "n_points")
    if span <= 0 or n < 2:
        raise ConfigError("need span_hz > 0 and n_points >= 2")
    omegas = p.omega_p / 2 + TWO_PI * np.linspace(-span / 2, span / 2, n)
    return _csv(kipa.gain_sweep(p, omegas), ["freq_Hz", "gain_dB", "phase_rad"])


def cmd_snr_chain(cfg: Config, args) -> str:
    chain = noise_chain(cfg)
    lo, hi, n = cfg.float("noise", "Gk_db_min"), cfg.float("noise", "Gk_db_max"), cfg.int("noise", "n_points")
    if hi < lo or n < 1:
        raise ConfigError("need Gk_db_max >= Gk_db_min and n_points >= 1")
    gains = 10 ** (np.linspace(lo, hi, n) / 20)
    out = _csv(noise.snr_sweep(chain, gains), ["Gk", "SNR", "G_SNR"])
    meas = cfg.path("noise", "measurement_file", required=False)
    if meas is not None:
        g, s = fitting.read_xy(meas, "Gk", "SNR")
        fit = fitting.fit_snr_vs_gain(g, s)
        A, B = noise.snr_fit_coefficients(chain)
        sys.stderr.write(fit.report() + _kv([("model_A", A), ("model_B", B), ("model_inv_B", 1 / B)]))
        if not fit.converged:
            raise FitFailed("SNR-vs-gain fit did not converge")
    return out


def budget_rows(cfg: Config) -> list[tuple[str, float]]:
    b = cfg.float
    omega0 = TWO_PI * b("device", "f0_hz")
    st = device_state(cfg)
    overlap = sensitivity.pulse_overlap(
        TWO_PI * b("budget", "linewidth_hz"), TWO_PI * b("budget", "line_offset_hz"),
        st.QL, omega0, b("budget", "t_p_s"),
    )
    beta_b = cfg.optional("budget", "beta_b")
    vd = cfg.optional("budget", "V_d_um3")
    if vd is None:
        from .fieldmodel import ModeGeometry, mode_field_map
        vd_m3 = sensitivity.effective_volume(mode_field_map(ModeGeometry.device(
            cfg.float("network", "length_m"), cfg.float("network", "w_m"), cfg.float("network", "gap_m"))).fmap)[0]
    else:
        vd_m3 = vd * sensitivity.UM3
    budget = sensitivity.SensitivityBudget(
        beta_a=b("budget", "beta_a"), beta_b=overlap if beta_b is None else beta_b,
        beta_c=b("budget", "beta_c"), beta_d=b("budget", "beta_d"),
        C_d=b("budget", "C_d_cm3") / sensitivity.CM3, V_d=vd_m3,
    )
    snrs, labels = cfg.floats("budget", "snr1"), cfg.words("budget", "snr1_labels")
    if len(snrs) != len(labels):
        raise ConfigError("budget.snr1 and budget.snr1_labels must have equal length")
    rows = budget.report(dict(zip(labels, snrs)))

    nbar_p = sensitivity.intracavity_photons(sensitivity.dbm_to_watt(b("budget", "P_in_dbm")), omega0, st.kappa, st.gamma)
    g0_cal = sensitivity.rabi_to_g0(b("budget", "pi2_s"), b("budget", "nbar"))
    g0 = TWO_PI * b("budget", "g0_hz")
    w_echo = 1 / b("budget", "T_E_s")
    rows += [
        ("inv_beta_b_computed", 1 / overlap),
        ("nbar_from_power", nbar_p),
        ("g0_from_rabi_Hz", g0_cal / TWO_PI),
        ("Qc", st.Qc),
    ]
    for label, snr in zip(labels, snrs):
        n_min = budget.N_min(snr)
        rows.append((f"n_n[{label}]", sensitivity.noise_from_n_min(
            omega0 / st.QL, st.kappa, w_echo, g0, b("budget", "p"), n_min)))
    return rows


def cmd_budget(cfg: Config, args) -> str:
    rows = budget_rows(cfg)
    if args.out and args.out.endswith(".csv"):
        return _csv([{"quantity": k, "value": v} for k, v in rows], ["quantity", "value"])
    return _kv(rows)


ALPHA_COLUMNS = ["alpha", "P_p_W", "P_p_rel_dB", "g0_factor", "N_tot_factor", "N_min_factor",
                 "SNR_factor", "abs_N_min_factor", "abs_SNR_factor", "length_factor"]


def cmd_optimize_alpha(cfg: Config, args) -> str:
    alphas = _field_grid(cfg.float("alpha", "alpha_min"), cfg.float("alpha", "alpha_max"), cfg.float("alpha", "alpha_step"))
    if alphas[0] <= 0 or alphas[-1] >= 1:
        raise ConfigError("alpha grid must lie inside (0, 1)")
    ref = cfg.float("alpha", "alpha_ref")
    z_r0 = resonator_line(cfg).Z_geometric
    i_p = cfg.float("alpha", "I_p_a")
    power = np.array([kipa.pump_power(a, i_p, z_r0) for a in alphas])
    rows = []
    for a, pw in zip(alphas, power):
        row = {"alpha": float(a), "P_p_W": float(pw), "P_p_rel_dB": float(10 * np.log10(pw / power.min()))}
        row.update(sensitivity.alpha_scaling(float(a), ref))
        rows.append(row)
    return _csv(rows, ALPHA_COLUMNS)


FIT_COLUMNS = {
    "lorentzian": ("x", "y"),
    "decay": ("t_s", "y"),
    "recovery": ("t_s", "y"),
    "snr-gain": ("Gk", "SNR"),
    "gsnr-te": ("Te_s", "G_SNR"),
}


def cmd_fit(cfg: Config, args) -> str:
    kind = args.kind
    path = cfg.path("fit", "input_file")
    xc, yc = cfg.text("fit", "x_col"), cfg.text("fit", "y_col")
    dx, dy = FIT_COLUMNS[kind]
    x, y = fitting.read_xy(path, dx if xc == "auto" else xc, dy if yc == "auto" else yc)
    if kind == "lorentzian":
        r = fitting.fit_lorentzian(x, y)
    elif kind in ("decay", "recovery"):
        r = fitting.fit_exponential(x, y, kind)
    elif kind == "snr-gain":
        r = fitting.fit_snr_vs_gain(x, y)
    else:
        r = fitting.fit_gsnr_vs_Te(x, y)
    if not r.converged:
        sys.stderr.write(r.report())
        raise FitFailed(f"{kind} fit did not converge")
    return r.report()


def cmd_echo_snr(cfg: Config, args) -> str:
    sig = fitting.read_trace(cfg.path("echo", "signal_file"))
    blank = fitting.read_trace(cfg.path("echo", "blank_file"))
    lp = cfg.float("echo", "lowpass_hz")
    res = fitting.echo_snr(sig, blank, (cfg.float("echo", "t1_s"), cfg.float("echo", "t2_s")),
                           lowpass_hz=lp if lp > 0 else None)
    return _kv([("SNR", res.snr), ("mean_I", res.mean_I), ("rms_blank_I", res.rms_blank), ("rotation_rad", res.rotation)])


COMMANDS: dict[str, Callable[[Config, argparse.Namespace], str]] = {
    "spectrum": cmd_spectrum,
    "sif": cmd_sif,
    "kipa-gain": cmd_kipa_gain,
    "snr-chain": cmd_snr_chain,
    "budget": cmd_budget,
    "optimize-alpha": cmd_optimize_alpha,
    "fit": cmd_fit,
    "echo-snr": cmd_echo_snr,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file overriding the packaged defaults")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one key, as section.key=value or key=value; repeatable")
    parser = argparse.ArgumentParser(prog="kipa-esr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "fit":
            sp.add_argument("kind", choices=sorted(FIT_COLUMNS))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, args.overrides)
        text = COMMANDS[args.command](cfg, args)
    except (NumericalError, spin.NoCrossingError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
