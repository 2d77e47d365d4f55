"""Spin-count budget and sensitivity rows for the default device, side by side with the model-derived inputs."""
import numpy as np

from kipa_esr import sensitivity as sv
from kipa_esr.fieldmodel import ModeGeometry, mode_field_map

TP = 2 * np.pi
W0 = TP * 7.203e9
QL, QI = 28.2e3, 117e3
SNR1 = {"0 dB": 0.55, "8 dB": 3.99}


def main() -> None:
    ref = sv.SensitivityBudget()
    overlap = sv.pulse_overlap(TP * 2.55e6, TP * 0.5e6, QL, W0, 10e-6)
    mode = mode_field_map(ModeGeometry.device())
    vd = sv.effective_volume(mode.fmap)[0]
    dist = mode.coupling_distribution(0.473, TP * 27.997e9)
    beta_c = sv.spin_fraction(dist, sv.rabi_to_g0(3e-6, 1e7))
    model = sv.SensitivityBudget(beta_b=overlap, beta_c=beta_c, V_d=vd)

    print(f"{'quantity':<14}{'reference':>14}{'model':>14}")
    for (k, a), (_, b) in zip(ref.report(SNR1), model.report(SNR1)):
        print(f"{k:<14}{a:14.4g}{b:14.4g}")

    kl = W0 / QL
    kc = kl - W0 / QI
    for label, snr in SNR1.items():
        n = sv.noise_from_n_min(kl, kc, 1 / 20e-6, TP * 13.2, 0.4, ref.N_min(snr))
        print(f"implied noise photons at {label}: {n:.3g}")


if __name__ == "__main__":
    main()
