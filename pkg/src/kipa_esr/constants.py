"""Physical constants and the device parameter set used as defaults throughout."""
from scipy.constants import hbar, k as k_B, mu_0, epsilon_0, pi

TWO_PI = 2 * pi

# 209Bi donor in silicon
BI_S = 0.5
BI_I = 4.5
BI_A = TWO_PI * 1.478e9          # rad/s
BI_GAMMA_E = TWO_PI * 27.997e9   # rad/s/T
BI_GAMMA_N = TWO_PI * -6.96e6    # rad/s/T

# NbTiN film and silicon substrate
LK0_SQ = 3.5e-12                 # H/square
EPS_R_SI = 11.9

# Device operating point
F0_ZERO_BIAS = 7.233e9           # Hz, resonance at I_DC = 0
F0_ESR = 7.203e9                 # Hz, resonance during the 6.78 mT experiments
I_STAR = 34.5e-3                 # A
QI = 117e3
QL = 28.2e3
T_DEVICE = 0.4                   # K
T_HEMT = 3.6                     # K
INSERTION_LOSS_DB = 3.5

__all__ = [
    "hbar", "k_B", "mu_0", "epsilon_0", "pi", "TWO_PI",
    "BI_S", "BI_I", "BI_A", "BI_GAMMA_E", "BI_GAMMA_N",
    "LK0_SQ", "EPS_R_SI", "F0_ZERO_BIAS", "F0_ESR", "I_STAR", "QI", "QL",
    "T_DEVICE", "T_HEMT", "INSERTION_LOSS_DB",
]
