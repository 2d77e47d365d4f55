"""Convergence of the analytic mode volume V_d against the discretisation knobs."""
import numpy as np

from kipa_esr import sensitivity as sv
from kipa_esr.fieldmodel import ModeGeometry, mode_field_map, section_volumes

UM3 = 1e-18


def vd(geom, **kw) -> float:
    return sv.effective_volume(mode_field_map(geom, **kw).fmap)[0] / UM3


def main() -> None:
    geom = ModeGeometry.device()
    print(f"resonator frequency {geom.omega0 / (2 * np.pi) / 1e9:.3f} GHz")
    mode = mode_field_map(geom)
    print(f"V_d = {sv.effective_volume(mode.fmap)[0] / UM3:.1f} um^3, "
          f"I_zpf = {mode.zero_point_current * 1e9:.2f} nA")
    for k, v in enumerate(section_volumes(mode)):
        print(f"  section {k}: {v / UM3:8.1f} um^3")
    for label, kw in [
        ("n_slices=16", {"n_slices": 16}),
        ("growth=1.15", {"growth": 1.15}),
        ("depth=8um", {"depth": 8e-6}),
        ("n_ground=120", {"n_ground": 120}),
    ]:
        print(f"{label:<14} V_d = {vd(geom, **kw):.1f} um^3")


if __name__ == "__main__":
    main()
