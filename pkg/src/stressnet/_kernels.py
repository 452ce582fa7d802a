"""Compiled array kernels shared by the public operators and the time loop.

All arrays are ``(ny, nx)`` cell arrays except face arrays: x-faces are
``(ny, nx + 1)`` and y-faces ``(ny + 1, nx)``. Reductions run in a fixed
row-major order so results are bitwise reproducible.
"""

import functools
import math

import numpy as np
from numba import njit as _njit

# IEEE semantics for division (inf/nan instead of ZeroDivisionError): lets the
# loops vectorize, and the step checks already reject non-finite values
njit = functools.partial(_njit, error_model="numpy")

# zone parameter vector layout
HX, HY, D_P, D_N, V_P, V_N, A, B, ALPHA_P, ALPHA_N, EPS, SPEED_SPECIES = range(12)
ZONE_PARAM_COUNT = 12

# control vector layout
K1, T0_1, T1_1, K2, T0_2, T1_2, U2_LOCAL = range(7)
CONTROL_PARAM_COUNT = 7

STATUS_OK = 0
STATUS_NEGATIVE = 1
STATUS_DRIFT = 2
STATUS_NONFINITE = 3


@njit(cache=True)
def ramp(t, t0, t1):
    if t < t0:
        return 0.0
    if t <= t1:
        return 0.5 - 0.5 * math.cos((t - t0) / (t1 - t0) * math.pi)
    return 1.0


@njit(cache=True)
def xi(s):
    s2 = s * s
    return s2 / (1.0 + s2)


@njit(cache=True)
def imitation(up, un, alpha_p, alpha_n, eps):
    return alpha_p * xi(up / (un + eps)) - alpha_n * xi(un / (up + eps))


@njit(cache=True)
def total_sum(u):
    s = 0.0
    ny, nx = u.shape
    for j in range(ny):
        for i in range(nx):
            s += u[j, i]
    return s


@njit(cache=True)
def weighted_sum(w, u):
    s = 0.0
    ny, nx = u.shape
    for j in range(ny):
        for i in range(nx):
            s += w[j, i] * u[j, i]
    return s


@njit(cache=True)
def add_laplacian(u, d, hx, hy, out):
    """out += d * Laplacian(u) with mirrored (zero-gradient) ghosts."""
    if d == 0.0:
        return
    ny, nx = u.shape
    cx = d / (hx * hx)
    cy = d / (hy * hy)
    # face differences; boundary faces carry none
    for j in range(ny):
        for i in range(1, nx):
            g = cx * (u[j, i] - u[j, i - 1])
            out[j, i - 1] += g
            out[j, i] -= g
    for j in range(1, ny):
        for i in range(nx):
            g = cy * (u[j, i] - u[j - 1, i])
            out[j - 1, i] += g
            out[j, i] -= g


@njit(cache=True)
def add_upwind_divergence(u, velx, vely, hx, hy, out):
    """out -= div(vel * u) with first-order upwind face values.

    ``velx``/``vely`` are face-normal velocities on x-/y-faces; boundary
    entries are ignored (no flux through the domain boundary).
    """
    ny, nx = u.shape
    for j in range(ny):
        for i in range(1, nx):
            v = velx[j, i]
            if v > 0.0:
                flux = v * u[j, i - 1] / hx
            else:
                flux = v * u[j, i] / hx
            out[j, i - 1] -= flux
            out[j, i] += flux
    for j in range(1, ny):
        for i in range(nx):
            v = vely[j, i]
            if v > 0.0:
                flux = v * u[j - 1, i] / hy
            else:
                flux = v * u[j, i] / hy
            out[j - 1, i] -= flux
            out[j, i] += flux


@njit(cache=True)
def face_velocities(density, nux, nuy, vmax, velx, vely):
    """Face speeds vmax * max(1 - mean density, 0) times face direction."""
    ny, nx = density.shape
    for j in range(ny):
        velx[j, 0] = 0.0
        velx[j, nx] = 0.0
        for i in range(1, nx):
            s = 1.0 - 0.5 * (density[j, i - 1] + density[j, i])
            if s < 0.0:
                s = 0.0
            velx[j, i] = vmax * s * nux[j, i]
    for i in range(nx):
        vely[0, i] = 0.0
        vely[ny, i] = 0.0
    for j in range(1, ny):
        for i in range(nx):
            s = 1.0 - 0.5 * (density[j - 1, i] + density[j, i])
            if s < 0.0:
                s = 0.0
            vely[j, i] = vmax * s * nuy[j, i]


@njit(cache=True)
def add_advection(u, density, nux, nuy, vmax, hx, hy, velx, vely, out):
    if vmax == 0.0:
        return
    face_velocities(density, nux, nuy, vmax, velx, vely)
    add_upwind_divergence(u, velx, vely, hx, hy, out)


@njit(cache=True)
def reaction(up, un, a, b, alpha_p, alpha_n, eps, outp, outn):
    """outp = a un - b up + f up un; outn = -outp (overwrites)."""
    ny, nx = up.shape
    for j in range(ny):
        for i in range(nx):
            p = up[j, i]
            n = un[j, i]
            r = a * n - b * p + imitation(p, n, alpha_p, alpha_n, eps) * n * p
            outp[j, i] = r
            outn[j, i] = -r


@njit(cache=True)
def zone_local_rhs(up, un, zp, nux, nuy, fxp, fxn, fyp, fyn, outp, outn):
    """Reaction, diffusion and advection of one zone (overwrites outputs).

    Net face fluxes (diffusive minus advective) of both species go into the
    x-face buffers ``fxp``/``fxn`` ``(ny, nx + 1)`` and y-face buffers
    ``fyp``/``fyn`` ``(ny + 1, nx)``; each cell then gains the flux through
    its lower face and loses the flux through its upper face. Boundary faces
    carry zero flux.
    """
    hx = zp[HX]
    hy = zp[HY]
    ny, nx = up.shape
    dpx = zp[D_P] / (hx * hx)
    dnx = zp[D_N] / (hx * hx)
    dpy = zp[D_P] / (hy * hy)
    dny = zp[D_N] / (hy * hy)
    vp = zp[V_P] / hx
    vn = zp[V_N] / hx
    vpy = zp[V_P] / hy
    vny = zp[V_N] / hy
    species = zp[SPEED_SPECIES] != 0.0
    advect = zp[V_P] != 0.0 or zp[V_N] != 0.0
    for j in range(ny):
        fxp[j, 0] = 0.0
        fxn[j, 0] = 0.0
        fxp[j, nx] = 0.0
        fxn[j, nx] = 0.0
        for i in range(1, nx):
            pl = up[j, i - 1]
            pr = up[j, i]
            nl = un[j, i - 1]
            nr = un[j, i]
            gp = dpx * (pl - pr)
            gn = dnx * (nl - nr)
            if advect:
                if species:
                    sp = 1.0 - 0.5 * (pl + pr)
                    sn = 1.0 - 0.5 * (nl + nr)
                else:
                    sp = 1.0 - 0.5 * (pl + pr + nl + nr)
                    sn = sp
                sp = max(sp, 0.0) * nux[j, i]
                sn = max(sn, 0.0) * nux[j, i]
                gp += vp * sp * (pl if sp > 0.0 else pr)
                gn += vn * sn * (nl if sn > 0.0 else nr)
            fxp[j, i] = gp
            fxn[j, i] = gn
    for i in range(nx):
        fyp[0, i] = 0.0
        fyn[0, i] = 0.0
        fyp[ny, i] = 0.0
        fyn[ny, i] = 0.0
    for j in range(1, ny):
        for i in range(nx):
            pl = up[j - 1, i]
            pr = up[j, i]
            nl = un[j - 1, i]
            nr = un[j, i]
            gp = dpy * (pl - pr)
            gn = dny * (nl - nr)
            if advect:
                if species:
                    sp = 1.0 - 0.5 * (pl + pr)
                    sn = 1.0 - 0.5 * (nl + nr)
                else:
                    sp = 1.0 - 0.5 * (pl + pr + nl + nr)
                    sn = sp
                sp = max(sp, 0.0) * nuy[j, i]
                sn = max(sn, 0.0) * nuy[j, i]
                gp += vpy * sp * (pl if sp > 0.0 else pr)
                gn += vny * sn * (nl if sn > 0.0 else nr)
            fyp[j, i] = gp
            fyn[j, i] = gn
    a = zp[A]
    b = zp[B]
    alpha_p = zp[ALPHA_P]
    alpha_n = zp[ALPHA_N]
    eps = zp[EPS]
    for j in range(ny):
        for i in range(nx):
            p = up[j, i]
            n = un[j, i]
            # xi(p / (n + eps)) == p^2 / (p^2 + (n + eps)^2); both weights over one division
            p2 = p * p
            n2 = n * n
            dn = n + eps
            dp = p + eps
            wp = p2 + dn * dn
            wn = n2 + dp * dp
            f = (alpha_p * p2 * wn - alpha_n * n2 * wp) / (wp * wn)
            r = a * n - b * p + f * n * p
            outp[j, i] = r + ((fxp[j, i] - fxp[j, i + 1]) + (fyp[j, i] - fyp[j + 1, i]))
            outn[j, i] = -r + ((fxn[j, i] - fxn[j, i + 1]) + (fyn[j, i] - fyn[j + 1, i]))


@njit(cache=True)
def add_migration(u_src, p_src, m, cell_area_src, eps_dst, out_src, out_dst):
    """One directed channel: local outflow at the source, spread inflow at the destination.

    Returns the transferred rate ``m * integral(p * u)``.
    """
    if m == 0.0:
        return 0.0
    ny, nx = u_src.shape
    for j in range(ny):
        for i in range(nx):
            out_src[j, i] -= m * p_src[j, i] * u_src[j, i]
    rate = m * cell_area_src * weighted_sum(p_src, u_src)
    my, mx = eps_dst.shape
    for j in range(my):
        for i in range(mx):
            out_dst[j, i] += eps_dst[j, i] * rate
    return rate


@njit(cache=True)
def add_controls(t, P1, P2, area1, area2, p1, e2, m12, ctl, oP1, oN1, oP2, oN2):
    """Departure control (zone 1) and arrival control (zone 2)."""
    k1 = ctl[K1]
    if k1 != 0.0:
        k = k1 * ramp(t, ctl[T0_1], ctl[T1_1])
        ny, nx = P1.shape
        for j in range(ny):
            for i in range(nx):
                c = k * p1[j, i] * P1[j, i]
                oP1[j, i] -= c
                oN1[j, i] += c
    k2 = ctl[K2]
    if k2 != 0.0:
        k = k2 * ramp(t, ctl[T0_2], ctl[T1_2])
        if ctl[U2_LOCAL] != 0.0:
            level = k * m12 * area2 * weighted_sum(e2, P2)
        else:
            level = k * m12 * area1 * weighted_sum(p1, P1)
        ny, nx = P2.shape
        for j in range(ny):
            for i in range(nx):
                c = e2[j, i] * level
                oP2[j, i] -= c
                oN2[j, i] += c


@njit(cache=True)
def face_buffers(shape):
    ny, nx = shape
    return (np.empty((ny, nx + 1)), np.empty((ny, nx + 1)), np.empty((ny + 1, nx)),
            np.empty((ny + 1, nx)))


@njit(cache=True)
def network_rhs(t, P1, N1, P2, N2, z1, z2, nu1x, nu1y, nu2x, nu2y,
                p1, e1, p2, e2, cpl, ctl, scratch1, scratch2, oP1, oN1, oP2, oN2):
    """Full right-hand side of the four-field system (overwrites outputs).

    ``cpl = [m_1to2, m_2to1]``; each scratch tuple holds the face buffers
    ``(fxp, fxn, fyp, fyn)`` of its zone.
    """
    zone_local_rhs(P1, N1, z1, nu1x, nu1y, scratch1[0], scratch1[1], scratch1[2], scratch1[3],
                   oP1, oN1)
    zone_local_rhs(P2, N2, z2, nu2x, nu2y, scratch2[0], scratch2[1], scratch2[2], scratch2[3],
                   oP2, oN2)
    area1 = z1[HX] * z1[HY]
    area2 = z2[HX] * z2[HY]
    add_migration(P1, p1, cpl[0], area1, e2, oP1, oP2)
    add_migration(N1, p1, cpl[0], area1, e2, oN1, oN2)
    add_migration(P2, p2, cpl[1], area2, e1, oP2, oP1)
    add_migration(N2, p2, cpl[1], area2, e1, oN2, oN1)
    add_controls(t, P1, P2, area1, area2, p1, e2, cpl[0], ctl, oP1, oN1, oP2, oN2)


@njit(cache=True)
def network_mass(P1, N1, P2, N2, area1, area2):
    return area1 * (total_sum(P1) + total_sum(N1)) + area2 * (total_sum(P2) + total_sum(N2))


@njit(cache=True)
def _scan(u, which, pos_tol, info):
    ny, nx = u.shape
    for j in range(ny):
        for i in range(nx):
            v = u[j, i]
            if not math.isfinite(v):
                info[0] = which
                info[1] = j
                info[2] = i
                info[3] = v
                return STATUS_NONFINITE
            if v < -pos_tol:
                info[0] = which
                info[1] = j
                info[2] = i
                info[3] = v
                return STATUS_NEGATIVE
    return STATUS_OK


@njit(cache=True)
def _euler_stage(u, h, k, out):
    ny, nx = u.shape
    for j in range(ny):
        for i in range(nx):
            out[j, i] = u[j, i] + h * k[j, i]


@njit(cache=True)
def _heun_update(u, half, ka, kb, pos_tol):
    """u += half * (ka + kb) in place; returns (sum of u, all values >= -pos_tol)."""
    ny, nx = u.shape
    total = 0.0
    ok = True
    for j in range(ny):
        for i in range(nx):
            v = u[j, i] + half * (ka[j, i] + kb[j, i])
            u[j, i] = v
            total += v
            if not v >= -pos_tol:
                ok = False
    return total, ok


@njit(cache=True)
def advance(t, t_stop, dt, P1, N1, P2, N2, z1, z2, nu1x, nu1y, nu2x, nu2y,
            p1, e1, p2, e2, cpl, ctl, pos_tol, drift_tol, info):
    """Heun steps in place from ``t`` until ``t_stop`` (last step shortened).

    Returns ``(t, steps, status)``. On failure the state holds the offending
    step's result, ``t`` is the time before it, and ``info`` carries
    ``[field, j, i, value, mass_before, mass_after, step_dt]``.
    """
    area1 = z1[HX] * z1[HY]
    area2 = z2[HX] * z2[HY]
    s1 = face_buffers(P1.shape)
    s2 = face_buffers(P2.shape)
    a1, b1, c1, d1 = (np.empty_like(P1), np.empty_like(N1), np.empty_like(P2),
                      np.empty_like(N2))
    a2, b2, c2, d2 = (np.empty_like(P1), np.empty_like(N1), np.empty_like(P2),
                      np.empty_like(N2))
    yP1, yN1, yP2, yN2 = (np.empty_like(P1), np.empty_like(N1), np.empty_like(P2),
                          np.empty_like(N2))
    steps = 0
    mass = network_mass(P1, N1, P2, N2, area1, area2)
    while t < t_stop:
        h = dt
        last = False
        if t_stop - t <= h * (1.0 + 1e-9):
            h = t_stop - t
            last = True
        network_rhs(t, P1, N1, P2, N2, z1, z2, nu1x, nu1y, nu2x, nu2y,
                    p1, e1, p2, e2, cpl, ctl, s1, s2, a1, b1, c1, d1)
        _euler_stage(P1, h, a1, yP1)
        _euler_stage(N1, h, b1, yN1)
        _euler_stage(P2, h, c1, yP2)
        _euler_stage(N2, h, d1, yN2)
        network_rhs(t + h, yP1, yN1, yP2, yN2, z1, z2, nu1x, nu1y, nu2x, nu2y,
                    p1, e1, p2, e2, cpl, ctl, s1, s2, a2, b2, c2, d2)
        half = 0.5 * h
        sP1, okP1 = _heun_update(P1, half, a1, a2, pos_tol)
        sN1, okN1 = _heun_update(N1, half, b1, b2, pos_tol)
        sP2, okP2 = _heun_update(P2, half, c1, c2, pos_tol)
        sN2, okN2 = _heun_update(N2, half, d1, d2, pos_tol)
        steps += 1
        if not (okP1 and okN1 and okP2 and okN2):
            for f, u in enumerate((P1, N1, P2, N2)):
                status = _scan(u, f, pos_tol, info)
                if status != STATUS_OK:
                    info[6] = h
                    return t, steps, status
        new_mass = area1 * (sP1 + sN1) + area2 * (sP2 + sN2)
        if not abs(new_mass - mass) <= drift_tol * max(abs(mass), 1e-300):
            if not math.isfinite(new_mass):
                for f, u in enumerate((P1, N1, P2, N2)):
                    status = _scan(u, f, np.inf, info)
                    if status != STATUS_OK:
                        info[6] = h
                        return t, steps, status
            info[4] = mass
            info[5] = new_mass
            info[6] = h
            return t, steps, STATUS_DRIFT
        mass = new_mass
        if last:
            t = t_stop
        else:
            t = t + h
    return t, steps, STATUS_OK
