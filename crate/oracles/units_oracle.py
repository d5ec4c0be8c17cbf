"""Physical constants and 2D coupling from CODATA 2018 values."""
import json
import math

HBAR = 1.054571817e-34
KB = 1.380649e-23
U = 1.66053906660e-27
A0 = 5.29177210903e-11
M = 86.909 * U  # mass used by the models
A_S = 98.98 * A0

hbar_over_kb = HBAR / KB * 1e9  # nK s
hbar2_over_2mkb = HBAR**2 / (2 * M * KB) * 1e9 * 1e12  # nK um^2
a_um = A_S * 1e6
hbar_over_m = HBAR / M * 1e12  # um^2/s


def g2d(omega_z):
    # g3D / (sqrt(2 pi) a_z), a_z = sqrt(hbar / (m omega_z))
    a_z = math.sqrt(HBAR / (M * omega_z)) * 1e6
    g3d = 4 * math.pi * 2 * hbar2_over_2mkb * a_um
    return g3d / (math.sqrt(2 * math.pi) * a_z)


def f0_one_dim(r0_um):
    return hbar_over_m / (2 * math.pi * r0_um**2)


out = {
    "hbar_over_kb": hbar_over_kb,
    "hbar2_over_2mkb": hbar2_over_2mkb,
    "scattering_length_um": a_um,
    "hbar_over_m": hbar_over_m,
    "g2d_297hz": g2d(2 * math.pi * 297.0),
    "f0_one_dim": {str(r): f0_one_dim(r) for r in (3.85, 4.82, 8.00)},
}
if __name__ == "__main__":
    print(json.dumps(out, indent=2))
