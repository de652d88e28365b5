"""Pure-Python kernels: reference implementation of the hot loops.

The compiled extension (kanlab._kernels) implements the same functions with
the same IEEE-754 double operations in the same order, so both backends give
bit-identical results; this module is the fallback selected at import when
the extension is unavailable, and the agreement is asserted in the tests.

State representation for orbit iteration
----------------------------------------
Base angle: theta = u + h/2 with h in {0,1}, u in [0, 1/2).  Fiber point:
t = m if side == 0 else 1 - m, with m in [0, 1/2] the distance to the
nearest boundary circle.  Trig polynomials at theta = u + h/2 are evaluated
through the half-period parity of each harmonic, so for the classic map
(odd harmonics only, degree-3 base) the trajectory of (theta + 1/2, 1 - t)
is the exact bitwise mirror of the trajectory of (theta, t).  That makes
the involution symmetry of basin labels exact instead of statistical, and
keeps full relative precision near both boundary circles.

Kernel params tuple: (k, epsE, bac, bas, eps, cac, cas, xi, xi_ref, xi_d,
xi_ref_d) with coefficient sequences as float64 numpy arrays.
"""

from math import cos, sin, floor, log, fabs, pi

import numpy as np

BACKEND = "python"

LABEL_BASIN0 = 0
LABEL_BASIN1 = 1
LABEL_UNDECIDED = 2
LABEL_ERROR = 3

_TWO_PI = 2.0 * pi


def _trig_half(ac, as_, u, h):
    # trig polynomial at theta = u + h/2; slot 0 of the arrays is the
    # constant term, slot j >= 1 the j-th harmonic (odd ones flip with h)
    x = _TWO_PI * u
    s = ac[0]
    n = len(ac)
    for j in range(1, n):
        jx = j * x
        term = ac[j] * cos(jx)
        b = as_[j]
        if b != 0.0:
            term = term + b * sin(jx)
        if h == 1 and (j & 1) == 1:
            term = -term
        s = s + term
    return s


def _horner(c, t):
    v = c[len(c) - 1]
    for i in range(len(c) - 2, -1, -1):
        v = v * t + c[i]
    return v


def classify_point(params, theta, t, n_max, delta, window):
    """Finite-time basin label for one start point.

    Returns (label, steps): label 0/1 with the step at which the
    persistence window fired, 2 if n_max was exhausted, 3 on an
    invariance-violation excursion.
    """
    k, epsE = params[0], params[1]
    if theta >= 0.5:
        h = 1
        u = theta - 0.5
    else:
        h = 0
        u = theta
    if t > 0.5:
        side = 1
        m = 1.0 - t
    else:
        side = 0
        m = t
    return _classify_core_py(
        float(k), abs(k) & 1, epsE != 0.0, epsE, params[2], params[3], params[4],
        params[5], params[6], params[7], params[8],
        h, u, side, m, n_max, delta, window,
    )


def _classify_core_py(kd, k_odd, has_pert, epsE, bac, bas, eps, cac, cas, xi, xi_ref,
                      h, u, side, m, n_max, delta, window):
    if m == 0.0:
        return side, 0
    run0 = 0
    run1 = 0
    for step in range(1, n_max + 1):
        c = _trig_half(cac, cas, u, h)
        if side == 0:
            m2 = m + eps * (c * _horner(xi, m))
        else:
            m2 = m - eps * (c * _horner(xi_ref, m))
        if m2 > 0.5:
            side = 1 - side
            m2 = 1.0 - m2
        if m2 < 0.0:
            if m2 >= -1e-12:
                m2 = 0.0
            else:
                return LABEL_ERROR, step
        m = m2
        w = kd * u
        if has_pert:
            w = w + epsE * _trig_half(bac, bas, u, h)
        v = w - floor(w)
        if v >= 0.5:
            b = 1
            u = v - 0.5
        else:
            b = 0
            u = v
        if k_odd == 1:
            h = b ^ h
        else:
            h = b
        if m < delta:
            if side == 0:
                run0 += 1
                run1 = 0
                if run0 >= window:
                    return LABEL_BASIN0, step
            else:
                run1 += 1
                run0 = 0
                if run1 >= window:
                    return LABEL_BASIN1, step
        else:
            run0 = 0
            run1 = 0
    return LABEL_UNDECIDED, n_max


def classify_block(params, thetas, ts, n_max, delta, window):
    npts = len(thetas)
    labels = np.empty(npts, dtype=np.uint8)
    steps = np.empty(npts, dtype=np.int64)
    for i in range(npts):
        lab, st = classify_point(params, float(thetas[i]), float(ts[i]), n_max, delta, window)
        labels[i] = lab
        steps[i] = st
    return labels, steps


# Sub-cell offset of the raster and sigma-grid sample angles.  Exact cell
# centers on power-of-two grids are dyadic rationals, which an affine
# degree-k base maps exactly within a finite set: every column would follow
# a short periodic cycle (period <= ord(k mod 2W)) instead of a generic
# orbit, producing a spurious sharp interface instead of the intermingled
# structure.  An irrational offset makes the float orbits pseudo-generic
# while staying deterministic.
GOLDEN_OFFSET = 0.6180339887498949


def classify_state(params, h, u, t, n_max, delta, window):
    """classify_point for a pre-split angle theta = u + h/2 (exact pairing:
    mirrored samples share u bitwise and differ only in h)."""
    return _classify_from_state(params, int(h), float(u), float(t), n_max, delta, window)


def _classify_from_state(params, h, u, t, n_max, delta, window):
    k, epsE, bac, bas, eps, cac, cas, xi, xi_ref = params[:9]
    if t > 0.5:
        side = 1
        m = 1.0 - t
    else:
        side = 0
        m = t
    return _classify_core_py(
        float(k), abs(k) & 1, epsE != 0.0, epsE, bac, bas, eps, cac, cas, xi, xi_ref,
        h, u, side, m, n_max, delta, window,
    )


def raster_rows(params, width, height, j0, j1, n_max, delta, window):
    """Classify one sample per cell for rows j0..j1-1 of a width x height grid.

    Sample angles are (i + GOLDEN_OFFSET)/width, built in half-grid form for
    even widths so the involution pairing i <-> i + width/2 is bitwise
    exact; fiber values are the dyadic row centers (j+1/2)/height.
    """
    nrows = j1 - j0
    labels = np.empty(nrows * width, dtype=np.uint8)
    steps = np.empty(nrows * width, dtype=np.int64)
    wd = float(width)
    hd = float(height)
    half = width // 2
    even = width % 2 == 0
    pos = 0
    for j in range(j0, j1):
        t = (j + 0.5) / hd
        for i in range(width):
            if even:
                h = 1 if i >= half else 0
                u = ((i - half if i >= half else i) + GOLDEN_OFFSET) / wd
            else:
                theta = (i + GOLDEN_OFFSET) / wd
                if theta >= 0.5:
                    h = 1
                    u = theta - 0.5
                else:
                    h = 0
                    u = theta
            lab, st = _classify_from_state(params, h, u, t, n_max, delta, window)
            labels[pos] = lab
            steps[pos] = st
            pos += 1
    return labels, steps


def classify_pinned(cvals, eps, xi, xi_ref, t, n_max, delta, window):
    """Basin label on the fiber over an exactly periodic base point.

    The base orbit is pinned to the given cycle of coupling values
    C(theta_0), ..., C(theta_{p-1}), so the fiber dynamics follow the true
    periodic composition instead of a floating-point base orbit that would
    shadow away from the cycle after ~35 steps.
    """
    p = len(cvals)
    run0 = 0
    run1 = 0
    if t == 0.0:
        return LABEL_BASIN0, 0
    if t == 1.0:
        return LABEL_BASIN1, 0
    for step in range(1, n_max + 1):
        c = cvals[(step - 1) % p]
        t = t + eps * (c * _horner(xi, t))
        if t < delta:
            run0 += 1
            run1 = 0
            if run0 >= window:
                return LABEL_BASIN0, step
        elif t > 1.0 - delta:
            run1 += 1
            run0 = 0
            if run1 >= window:
                return LABEL_BASIN1, step
        else:
            run0 = 0
            run1 = 0
    return LABEL_UNDECIDED, n_max


def cycle_fiber_eval(cvals, eps, xi, xi_d, t):
    """One pass of the fiber composition along a base cycle: value and d/dt."""
    d = 1.0
    for i in range(len(cvals)):
        c = cvals[i]
        d = d * (1.0 + eps * (c * _horner(xi_d, t)))
        t = t + eps * (c * _horner(xi, t))
    return t, d


def birkhoff_batches(params, theta, t, burn_in, n_batches, batch_len):
    """Batch means of log|d_t phi| along one orbit; nan if a zero derivative is hit."""
    k, epsE, bac, bas, eps, cac, cas, xi, xi_ref, xi_d, xi_ref_d = params
    if theta >= 0.5:
        h = 1
        u = theta - 0.5
    else:
        h = 0
        u = theta
    if t > 0.5:
        side = 1
        m = 1.0 - t
    else:
        side = 0
        m = t
    kd = float(k)
    k_odd = abs(k) & 1
    has_pert = epsE != 0.0
    out = np.empty(n_batches, dtype=np.float64)
    total = burn_in + n_batches * batch_len
    acc = 0.0
    cnt = 0
    bi = 0
    for step in range(total):
        c = _trig_half(cac, cas, u, h)
        if side == 0:
            dphi = 1.0 + eps * (c * _horner(xi_d, m))
        else:
            dphi = 1.0 - eps * (c * _horner(xi_ref_d, m))
        if step >= burn_in:
            if dphi == 0.0:
                out[:] = np.nan
                return out
            acc += log(fabs(dphi))
            cnt += 1
            if cnt == batch_len:
                out[bi] = acc / batch_len
                bi += 1
                acc = 0.0
                cnt = 0
        if side == 0:
            m2 = m + eps * (c * _horner(xi, m))
        else:
            m2 = m - eps * (c * _horner(xi_ref, m))
        if m2 > 0.5:
            side = 1 - side
            m2 = 1.0 - m2
        if m2 < 0.0:
            m2 = 0.0
        m = m2
        w = kd * u
        if has_pert:
            w = w + epsE * _trig_half(bac, bas, u, h)
        v = w - floor(w)
        if v >= 0.5:
            b = 1
            u = v - 0.5
        else:
            b = 0
            u = v
        if k_odd == 1:
            h = b ^ h
        else:
            h = b
    return out


def orbit_arrays(params, theta, t, n):
    """First n iterates (including the start) of one point; for audits."""
    k, epsE, bac, bas, eps, cac, cas, xi, xi_ref = params[:9]
    if theta >= 0.5:
        h = 1
        u = theta - 0.5
    else:
        h = 0
        u = theta
    if t > 0.5:
        side = 1
        m = 1.0 - t
    else:
        side = 0
        m = t
    kd = float(k)
    k_odd = abs(k) & 1
    has_pert = epsE != 0.0
    thetas = np.empty(n, dtype=np.float64)
    ts = np.empty(n, dtype=np.float64)
    for i in range(n):
        thetas[i] = u + 0.5 * h
        ts[i] = m if side == 0 else 1.0 - m
        c = _trig_half(cac, cas, u, h)
        if side == 0:
            m2 = m + eps * (c * _horner(xi, m))
        else:
            m2 = m - eps * (c * _horner(xi_ref, m))
        if m2 > 0.5:
            side = 1 - side
            m2 = 1.0 - m2
        if m2 < 0.0:
            m2 = 0.0
        m = m2
        w = kd * u
        if has_pert:
            w = w + epsE * _trig_half(bac, bas, u, h)
        v = w - floor(w)
        if v >= 0.5:
            b = 1
            u = v - 0.5
        else:
            b = 0
            u = v
        if k_odd == 1:
            h = b ^ h
        else:
            h = b
    return thetas, ts


def phi_n_values(params, pac, pas, theta0s, n):
    """Birkhoff sums sum_{i<n} phi(theta_i) of a base trig potential."""
    k, epsE, bac, bas = params[:4]
    kd = float(k)
    k_odd = abs(k) & 1
    has_pert = epsE != 0.0
    npts = len(theta0s)
    out = np.empty(npts, dtype=np.float64)
    for idx in range(npts):
        theta = float(theta0s[idx])
        if theta >= 0.5:
            h = 1
            u = theta - 0.5
        else:
            h = 0
            u = theta
        s = 0.0
        for _ in range(n):
            s = s + _trig_half(pac, pas, u, h)
            w = kd * u
            if has_pert:
                w = w + epsE * _trig_half(bac, bas, u, h)
            v = w - floor(w)
            if v >= 0.5:
                b = 1
                u = v - 0.5
            else:
                b = 0
                u = v
            if k_odd == 1:
                h = b ^ h
            else:
                h = b
        out[idx] = s
    return out


def _base_orbit(params, theta, n):
    k, epsE, bac, bas = params[:4]
    kd = float(k)
    k_odd = abs(k) & 1
    has_pert = epsE != 0.0
    if theta >= 0.5:
        h = 1
        u = theta - 0.5
    else:
        h = 0
        u = theta
    us = np.empty(n, dtype=np.float64)
    hs = np.empty(n, dtype=np.int8)
    for i in range(n):
        us[i] = u
        hs[i] = h
        w = kd * u
        if has_pert:
            w = w + epsE * _trig_half(bac, bas, u, h)
        v = w - floor(w)
        if v >= 0.5:
            b = 1
            u = v - 0.5
        else:
            b = 0
            u = v
        if k_odd == 1:
            h = b ^ h
        else:
            h = b
    return us, hs


def _circ(d):
    d = fabs(d)
    if d > 0.5:
        d = 1.0 - d
    return d


def sep_greedy_cylinder(params, n, eps, n_theta, n_t, window_theta, cap_active):
    """Greedy maximal (n,eps)-separated set on the cylinder.

    Deterministic scan order: theta columns ascending, fiber levels ascending
    within a column.  An admitted point is retired from the comparison set
    once all future candidates are guaranteed base-separated from it (start
    angles differing by more than window_theta); admitted near theta=0 are
    kept for the wrap-around comparison at the end of the sweep.

    Returns (theta0s, t0s) of the admitted points.
    """
    eps_f = params[4]
    cac, cas, xi, xi_ref = params[5], params[6], params[7], params[8]
    # active ring: start angles, theta orbits, t orbits
    act_theta0 = np.empty(cap_active, dtype=np.float64)
    act_thorb = np.empty((cap_active, n), dtype=np.float64)
    act_torb = np.empty((cap_active, n), dtype=np.float64)
    act_lo = 0
    act_hi = 0  # ring is act_lo..act_hi-1 (mod cap)
    head_theta0 = []
    head_thorb = []
    head_torb = []
    out_theta = []
    out_t = []
    th_orb = np.empty(n, dtype=np.float64)
    t_orb = np.empty(n, dtype=np.float64)
    cval = np.empty(n, dtype=np.float64)
    for ci in range(n_theta):
        theta0 = ci / n_theta
        us, hs = _base_orbit(params, theta0, n)
        for i in range(n):
            th_orb[i] = us[i] + 0.5 * hs[i]
            cval[i] = _trig_half(cac, cas, us[i], int(hs[i]))
        # retire admitted out of the window
        while act_lo < act_hi and theta0 - act_theta0[act_lo % cap_active] > window_theta:
            act_lo += 1
        near_wrap = theta0 > 1.0 - window_theta
        for ri in range(n_t):
            t0 = (ri + 0.5) / n_t
            if t0 > 0.5:
                side = 1
                m = 1.0 - t0
            else:
                side = 0
                m = t0
            for i in range(n):
                t_orb[i] = m if side == 0 else 1.0 - m
                c = cval[i]
                if side == 0:
                    m2 = m + eps_f * (c * _horner(xi, m))
                else:
                    m2 = m - eps_f * (c * _horner(xi_ref, m))
                if m2 > 0.5:
                    side = 1 - side
                    m2 = 1.0 - m2
                if m2 < 0.0:
                    m2 = 0.0
                m = m2
            ok = True
            for ai in range(act_hi - 1, act_lo - 1, -1):
                slot = ai % cap_active
                sep = False
                for i in range(n):
                    d = _circ(th_orb[i] - act_thorb[slot, i])
                    dt = fabs(t_orb[i] - act_torb[slot, i])
                    if dt > d:
                        d = dt
                    if d > eps:
                        sep = True
                        break
                if not sep:
                    ok = False
                    break
            if ok and near_wrap:
                # wrap pairs: mod-1 distance to a head admitted is below the
                # window iff theta0 - head >= 1 - window
                for hi_ in range(len(head_theta0)):
                    if theta0 - head_theta0[hi_] >= 1.0 - window_theta:
                        sep = False
                        horb = head_thorb[hi_]
                        htorb = head_torb[hi_]
                        for i in range(n):
                            d = _circ(th_orb[i] - horb[i])
                            dt = fabs(t_orb[i] - htorb[i])
                            if dt > d:
                                d = dt
                            if d > eps:
                                sep = True
                                break
                        if not sep:
                            ok = False
                            break
            if ok:
                if act_hi - act_lo >= cap_active:
                    raise RuntimeError("separated-set active window overflow")
                slot = act_hi % cap_active
                act_theta0[slot] = theta0
                act_thorb[slot, :] = th_orb
                act_torb[slot, :] = t_orb
                act_hi += 1
                if theta0 < window_theta:
                    head_theta0.append(theta0)
                    head_thorb.append(th_orb.copy())
                    head_torb.append(t_orb.copy())
                out_theta.append(theta0)
                out_t.append(t0)
    return np.asarray(out_theta, dtype=np.float64), np.asarray(out_t, dtype=np.float64)


def sep_greedy_base(params, n, eps, n_theta, window_theta, cap_active):
    """Greedy (n,eps)-separated set for the base circle map alone."""
    act_theta0 = np.empty(cap_active, dtype=np.float64)
    act_thorb = np.empty((cap_active, n), dtype=np.float64)
    act_lo = 0
    act_hi = 0
    head_theta0 = []
    head_thorb = []
    out_theta = []
    th_orb = np.empty(n, dtype=np.float64)
    for ci in range(n_theta):
        theta0 = ci / n_theta
        us, hs = _base_orbit(params, theta0, n)
        for i in range(n):
            th_orb[i] = us[i] + 0.5 * hs[i]
        while act_lo < act_hi and theta0 - act_theta0[act_lo % cap_active] > window_theta:
            act_lo += 1
        ok = True
        for ai in range(act_hi - 1, act_lo - 1, -1):
            slot = ai % cap_active
            sep = False
            for i in range(n):
                if _circ(th_orb[i] - act_thorb[slot, i]) > eps:
                    sep = True
                    break
            if not sep:
                ok = False
                break
        if ok and theta0 > 1.0 - window_theta:
            for hi_ in range(len(head_theta0)):
                if theta0 - head_theta0[hi_] >= 1.0 - window_theta:
                    sep = False
                    horb = head_thorb[hi_]
                    for i in range(n):
                        if _circ(th_orb[i] - horb[i]) > eps:
                            sep = True
                            break
                    if not sep:
                        ok = False
                        break
        if ok:
            if act_hi - act_lo >= cap_active:
                raise RuntimeError("separated-set active window overflow")
            slot = act_hi % cap_active
            act_theta0[slot] = theta0
            act_thorb[slot, :] = th_orb
            act_hi += 1
            if theta0 < window_theta:
                head_theta0.append(theta0)
                head_thorb.append(th_orb.copy())
            out_theta.append(theta0)
    return np.asarray(out_theta, dtype=np.float64)


def sep_greedy_fiber(params, theta0, n, eps, n_t):
    """Greedy (n,eps)-separated set on a single fiber {theta0} x [0,1]."""
    eps_f = params[4]
    cac, cas, xi, xi_ref = params[5], params[6], params[7], params[8]
    us, hs = _base_orbit(params, theta0, n)
    cval = [_trig_half(cac, cas, us[i], int(hs[i])) for i in range(n)]
    admitted = []
    t_orb = np.empty(n, dtype=np.float64)
    for ri in range(n_t):
        t0 = (ri + 0.5) / n_t
        if t0 > 0.5:
            side = 1
            m = 1.0 - t0
        else:
            side = 0
            m = t0
        for i in range(n):
            t_orb[i] = m if side == 0 else 1.0 - m
            c = cval[i]
            if side == 0:
                m2 = m + eps_f * (c * _horner(xi, m))
            else:
                m2 = m - eps_f * (c * _horner(xi_ref, m))
            if m2 > 0.5:
                side = 1 - side
                m2 = 1.0 - m2
            if m2 < 0.0:
                m2 = 0.0
            m = m2
        ok = True
        for aorb, _ in admitted:
            sep = False
            for i in range(n):
                if fabs(t_orb[i] - aorb[i]) > eps:
                    sep = True
                    break
            if not sep:
                ok = False
                break
        if ok:
            admitted.append((t_orb.copy(), t0))
    return np.asarray([t0 for _, t0 in admitted], dtype=np.float64)
