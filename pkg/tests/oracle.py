"""Independent high-precision oracles, sharing no code with the package.

Entropy variables come from mpmath differentiation of the Harten entropy in
conservative variables; the two forced density fluxes are then obtained by
solving the scalar entropy-conservation equation directly. Nothing here uses
the closed-form jump ratios that the package implements.

``FROZEN`` pins the values produced by these routines at 30 digits; the
package tests compare against the frozen numbers, and ``test_oracle.py``
checks that the frozen numbers still agree with a fresh oracle run.
"""

import mpmath as mp

mp.mp.dps = 40

FROZEN = {
    # (alpha, quantity) at gamma=1.4, rho-=1, rho+=2, p(+)=1, v=1;
    # gap = lhs - rhs with lhs = -alpha f_lemma1 / v and rhs = -alpha f_lemma2 / v
    (1.0, "lemma1_flux"): mp.mpf("1.40951257761579990662601898922"),
    (1.0, "lemma2_flux"): mp.mpf("1.42637014780161678540893569349"),
    (1.0, "gap"): mp.mpf("0.0168575701858168787829167042637"),
    (1.0, "p_minus"): mp.mpf("0.609506827102237702842737085606"),
    (-1.8, "lemma1_flux"): mp.mpf("1.63096759360708070456884947885"),
    (-1.8, "lemma2_flux"): mp.mpf("1.45909452655645376304179433243"),
    (-1.8, "gap"): mp.mpf("0.309371520691128502381396717655"),
    (-1.8, "p_minus"): mp.mpf("0.410167678003818991867311612871"),
    (-2.2, "lemma1_flux"): mp.mpf("1.54196381738053456890113159988"),
    (-2.2, "lemma2_flux"): mp.mpf("1.45544703089885584811332334180"),
    (-2.2, "gap"): mp.mpf("0.190336930259693201101646706755"),
    (-2.2, "p_minus"): mp.mpf("0.428621991426536440526039768712"),
}


def harten_U(u, alpha, gamma):
    rho, m, E = u
    p = (gamma - 1) * (E - m * m / (2 * rho))
    return -(gamma + alpha) / (gamma - 1) * rho * (p / rho**gamma) ** (1 / (alpha + gamma))


def cons(rho, v, p, gamma):
    rho, v, p = mp.mpf(rho), mp.mpf(v), mp.mpf(p)
    return [rho, rho * v, p / (gamma - 1) + rho * v * v / 2]


def entropy_variables(u, alpha, gamma):
    """Gradient of U by mpmath numerical differentiation (40 digits)."""
    out = []
    for i in range(3):
        def along(x, i=i):
            w = list(u)
            w[i] = x
            return harten_U(w, alpha, gamma)
        out.append(mp.diff(along, u[i]))
    return out


def flux_potential(u, alpha, gamma):
    """psi = w . f - v U, built from the mpmath gradient."""
    rho, m, E = u
    v = m / rho
    p = (gamma - 1) * (E - m * m / (2 * rho))
    f = [m, m * v + p, (E + p) * v]
    w = entropy_variables(u, alpha, gamma)
    return sum(wi * fi for wi, fi in zip(w, f)) - v * harten_U(u, alpha, gamma)


def lemma1_flux(rho_m, rho_p, p, v, alpha, gamma):
    """Density flux making the PEP-completed flux entropy conservative."""
    um, up = cons(rho_m, v, p, gamma), cons(rho_p, v, p, gamma)
    wm, wp = entropy_variables(um, alpha, gamma), entropy_variables(up, alpha, gamma)
    dw = [b - a for a, b in zip(wm, wp)]
    dpsi = flux_potential(up, alpha, gamma) - flux_potential(um, alpha, gamma)
    v, p = mp.mpf(v), mp.mpf(p)
    # f = (f_rho, v f_rho + p, v^2/2 f_rho + p v gamma/(gamma-1)) is linear in f_rho
    coef = dw[0] + v * dw[1] + v * v / 2 * dw[2]
    rest = p * dw[1] + p * v * gamma / (gamma - 1) * dw[2]
    return (dpsi - rest) / coef


def _last_variable(rho, p, alpha, gamma):
    u = cons(rho, 0, p, gamma)
    return mp.diff(lambda E: harten_U([u[0], u[1], E], alpha, gamma), u[2])


def special_pressure(rho_m, rho_p, p_p, alpha, gamma):
    """Left pressure with equal last entropy variable, by bisection in log p.

    The last entropy variable is monotone in p at fixed density, so a sign
    change bracket shrinks safely to full working precision.
    """
    target = _last_variable(rho_p, p_p, alpha, gamma)
    lo, hi = mp.log(p_p) - 20, mp.log(p_p) + 20
    g_lo = _last_variable(rho_m, mp.exp(lo), alpha, gamma) - target
    for _ in range(140):
        mid = (lo + hi) / 2
        g_mid = _last_variable(rho_m, mp.exp(mid), alpha, gamma) - target
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return mp.exp((lo + hi) / 2)


def lemma2_flux(rho_m, rho_p, p_p, v, alpha, gamma):
    """Density flux forced by entropy conservation at the special pressure pair."""
    p_m = special_pressure(rho_m, rho_p, p_p, alpha, gamma)
    um, up = cons(rho_m, v, p_m, gamma), cons(rho_p, v, p_p, gamma)
    wm, wp = entropy_variables(um, alpha, gamma), entropy_variables(up, alpha, gamma)
    dpsi = flux_potential(up, alpha, gamma) - flux_potential(um, alpha, gamma)
    # last and momentum entropy-variable jumps vanish, leaving f_rho [[w_1]] = [[psi]]
    return dpsi / (wp[0] - wm[0])


def gap(rho_m, rho_p, alpha, gamma):
    f1 = lemma1_flux(rho_m, rho_p, 1, 1, alpha, gamma)
    f2 = lemma2_flux(rho_m, rho_p, 1, 1, alpha, gamma)
    return -alpha * f1 + alpha * f2
