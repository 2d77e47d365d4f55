"""Pump power and sensitivity versus kinetic-inductance fraction alpha."""
import numpy as np

from kipa_esr import kipa, network, sensitivity as sv


def main() -> None:
    z_r0 = network.cpw_params(1e-6, 10e-6).Z_geometric
    alphas = np.round(np.arange(0.05, 0.951, 0.05), 2)
    power = np.array([kipa.pump_power(a, 1e-3, z_r0) for a in alphas])
    print(f"{'alpha':>6}{'P_p (dB rel min)':>18}{'g0':>8}{'N_min':>8}{'SNR':>8}")
    for a, p in zip(alphas, power):
        f = sv.alpha_scaling(a)
        print(f"{a:6.2f}{10 * np.log10(p / power.min()):18.3f}{f['g0_factor']:8.3f}"
              f"{f['N_min_factor']:8.3f}{f['SNR_factor']:8.3f}")

    fine = np.linspace(0.01, 0.99, 9801)
    best = fine[np.argmin([kipa.pump_power(a, 1.0, 1.0) for a in fine])]
    print(f"continuous pump-power minimum at alpha = {best:.4f}")
    print(f"pump power change 0.8 -> 0.4: {kipa.pump_power_change_db(0.8, 0.4):+.3f} dB")
    print(f"SNR factor 0.8 -> 0.4: {sv.alpha_scaling(0.4, 0.8)['SNR_factor']:.4f}")


if __name__ == "__main__":
    main()
