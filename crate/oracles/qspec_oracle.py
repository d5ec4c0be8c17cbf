"""Reference values for the quantized two-mode Hamiltonian.

Dense numpy eigensolves on the full plane-wave basis (no symmetry blocks),
scipy Mathieu characteristic values and brentq roots. Inputs are the
tabulated two-mode parameters of the four scenarios; K(f) and P_eff(f)
follow the closed-form fast model.
"""
import json

import numpy as np
from scipy.optimize import brentq
from scipy.special import mathieu_a, mathieu_b

HBAR = 7.6382325775776454e-3  # nK s
NMAX = 64

# N, U, P at f0/2, U_eff/U, P_eff/P, I0/N, alpha0
ROWS = {
    "r385": (3000, 0.01435, -0.0462, 0.8192, 0.01549, 0.39067, -0.013321),
    "r482": (2700, 0.01214, -0.00335, 0.8701, 0.010274, 0.07029, -0.0027587),
    "r800_n4500": (4500, 0.006821, -0.00514, 0.8964, 0.002749, 0.02524, -0.0017754),
    "r800_n4000": (4000, 0.006993, -0.00214, 0.9075, 0.003012, 0.01722, -0.0011648),
}


def hamiltonian(ue, k, pe, n_atoms, nmax=NMAX):
    n = np.arange(-nmax, nmax + 1)
    m = np.diag(ue * n.astype(float) ** 2)
    m += np.diag(np.full(2 * nmax, -n_atoms * k / 2), 1) + np.diag(np.full(2 * nmax, -n_atoms * k / 2), -1)
    m += np.diag(np.full(2 * nmax - 1, n_atoms * pe / 8), 2) + np.diag(np.full(2 * nmax - 1, n_atoms * pe / 8), -2)
    return n, m


class Fast:
    def __init__(self, n_atoms, ue, i0, a0, pe_half):
        self.n, self.ue = n_atoms, ue
        self.k0 = 2 * HBAR * i0
        pe0 = -2 * a0 * self.k0
        self.a, self.b = (pe0 + pe_half) / 2, (pe0 - pe_half) / 2

    def k(self, f):
        return self.k0 * np.sin(np.pi * (0.5 - f))

    def dk(self, f):
        return -np.pi * self.k0 * np.cos(np.pi * (0.5 - f))

    def pe(self, f):
        return self.a + self.b * np.cos(2 * np.pi * f)

    def dpe(self, f):
        return -2 * np.pi * self.b * np.sin(2 * np.pi * f)

    def eig(self, f):
        return np.linalg.eigh(hamiltonian(self.ue, self.k(f), self.pe(f), self.n)[1])


def cos_el(a, b, shift=1):
    return 0.5 * (a[:-shift] @ b[shift:] + a[shift:] @ b[:-shift])


def row(name):
    n_atoms, u, p, ur, pr, i0, a0 = ROWS[name]
    ue, pe = u * ur, p * pr
    q = n_atoms * abs(pe) / (8 * ue)
    nn, m = hamiltonian(ue, 0.0, pe, n_atoms)
    w, v = np.linalg.eigh(m)
    de1, de2 = w[1] - w[0], w[2] - w[0]
    da_mathieu = mathieu_b(1, q) - mathieu_a(0, q)
    da_asym = 4 * np.sqrt(2 / np.pi) * (16 * q) ** 0.75 * np.exp(-4 * np.sqrt(q))
    c01 = abs(cos_el(v[:, 0], v[:, 1]))
    model = Fast(n_atoms, ue, i0, a0, pe)

    def k_root(target):
        # |K(0.5 + d)| = target on each side; K is odd about 0.5
        d = np.arcsin(target / model.k0) / np.pi
        return 0.5 - d, 0.5 + d

    pp = k_root(0.375 * de1 / (n_atoms * c01))

    def eqd(d):
        ww = np.linalg.eigvalsh(hamiltonian(ue, model.k(0.5 + d), model.pe(0.5 + d), n_atoms)[1])
        return (ww[2] - ww[1]) - (ww[1] - ww[0])

    ds = np.geomspace(1e-10, 0.05, 400)
    gv = [eqd(d) for d in ds]
    i = next(i for i in range(len(ds) - 1) if np.sign(gv[i]) != np.sign(gv[i + 1]))
    d_eqd = brentq(eqd, ds[i], ds[i + 1], xtol=1e-16, rtol=1e-13)

    # ground-state current from <dH/df>, just outside |1-2A^2| = 0.9
    s19 = np.sqrt(19.0)
    # 2|E01|/dE1 = (s - 1/s)/2 with s = sqrt(19)
    lo, hi = k_root(0.25 * (s19 - 1 / s19) * de1 / (n_atoms * c01))
    ip = 0.0
    for f in (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo)):
        _, vv = model.eig(f)
        g = vv[:, 0]
        de = n_atoms * (-model.dk(f) * cos_el(g, g) + 0.25 * model.dpe(f) * cos_el(g, g, 2))
        ip += 0.5 * abs(de) / (2 * np.pi * HBAR * n_atoms)

    return {
        "n_atoms": n_atoms,
        "u_eff": ue,
        "p_eff_half": pe,
        "i0_per_n": i0,
        "alpha0": a0,
        "q": q,
        "quality": de2 / de1,
        "delta_e1": de1,
        "t_osc_s": np.pi * HBAR / de1,
        "t_osc_mathieu_s": np.pi * HBAR / (ue * da_mathieu),
        "t_osc_asymptotic_s": np.pi * HBAR / (ue * da_asym),
        "cos_element_01": c01,
        "delta_f_pp_over_f0": pp[1] - pp[0],
        "delta_f_eqd_over_f0": 2 * d_eqd,
        "product_q_dfpp": de2 / de1 * (pp[1] - pp[0]),
        "i_p_per_n": ip,
        "i_p_analytic_per_n": np.pi * model.k0 / (2 * np.pi * HBAR),
    }


def mathieu_table():
    out = {}
    for q in (0.5, 1.0, 5.0, 22.8288):
        vals = [("ce0", mathieu_a(0, q)), ("se1", mathieu_b(1, q)), ("ce1", mathieu_a(1, q)),
                ("se2", mathieu_b(2, q)), ("ce2", mathieu_a(2, q)), ("se3", mathieu_b(3, q)),
                ("ce3", mathieu_a(3, q)), ("se4", mathieu_b(4, q))]
        # dense cross-check: U_eff = 1, N = 1, N P_eff / 8 = -q
        w = np.linalg.eigvalsh(hamiltonian(1.0, 0.0, -8 * q, 1.0)[1])[:8]
        assert np.allclose([x for _, x in vals], w, rtol=1e-9, atol=1e-9), (q, vals, w)
        out[str(q)] = [[lab, float(x)] for lab, x in zip([l for l, _ in vals], w)]
    return out


if __name__ == "__main__":
    rows = {k: {a: float(b) for a, b in row(k).items()} for k in ROWS}
    for r in rows.values():
        assert abs(r["t_osc_mathieu_s"] / r["t_osc_s"] - 1) < 1e-6
    print(json.dumps({"rows": rows, "mathieu": mathieu_table()}, indent=2))
