# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: hot loops of the laboratory.

Bit-identical twin of kanlab._kernels_py (same IEEE-754 double operations in
the same order; no fast-math).  See that module's docstring for the state
representation and the exact-mirror property of the involution symmetry.
"""

from libc.math cimport cos, sin, floor, log, fabs, M_PI

import numpy as np

BACKEND = "cython"

LABEL_BASIN0 = 0
LABEL_BASIN1 = 1
LABEL_UNDECIDED = 2
LABEL_ERROR = 3

cdef double _TWO_PI = 2.0 * M_PI


cdef inline double _trig_half(double[::1] ac, double[::1] as_, double u, int h) noexcept:
    # trig polynomial at theta = u + h/2; slot 0 of the arrays is the
    # constant term, slot j >= 1 the j-th harmonic (odd ones flip with h)
    cdef double x = _TWO_PI * u
    cdef double s = ac[0]
    cdef double jx, term, b
    cdef int n = ac.shape[0]
    cdef int j
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


cdef inline double _horner(double[::1] c, double t) noexcept:
    cdef int n = c.shape[0]
    cdef double v = c[n - 1]
    cdef int i
    for i in range(n - 2, -1, -1):
        v = v * t + c[i]
    return v


cdef struct ClsResult:
    int label
    long steps


cdef ClsResult _classify_core(double kd, int k_odd, bint has_pert, double epsE,
                              double[::1] bac, double[::1] bas,
                              double eps, double[::1] cac, double[::1] cas,
                              double[::1] xi, double[::1] xi_ref,
                              double theta, double t,
                              long n_max, double delta, int window) noexcept:
    cdef int h, side
    cdef double u, m
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
    return _classify_core_state(kd, k_odd, has_pert, epsE, bac, bas, eps, cac, cas,
                                xi, xi_ref, h, u, side, m, n_max, delta, window)


cdef ClsResult _classify_core_state(double kd, int k_odd, bint has_pert, double epsE,
                                    double[::1] bac, double[::1] bas,
                                    double eps, double[::1] cac, double[::1] cas,
                                    double[::1] xi, double[::1] xi_ref,
                                    int h, double u, int side, double m,
                                    long n_max, double delta, int window) noexcept:
    cdef ClsResult res
    cdef int b, run0, run1
    cdef double c, m2, w, v
    cdef long step
    if m == 0.0:
        res.label = side
        res.steps = 0
        return res
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
                res.label = 3
                res.steps = step
                return res
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
                    res.label = 0
                    res.steps = step
                    return res
            else:
                run1 += 1
                run0 = 0
                if run1 >= window:
                    res.label = 1
                    res.steps = step
                    return res
        else:
            run0 = 0
            run1 = 0
    res.label = 2
    res.steps = n_max
    return res


def classify_point(params, double theta, double t, long n_max, double delta, int window):
    """Finite-time basin label for one start point; see the Python twin."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef ClsResult r = _classify_core(kd, k_odd, epsE != 0.0, epsE, bac, bas,
                                      eps, cac, cas, xi, xi_ref,
                                      theta, t, n_max, delta, window)
    return r.label, r.steps


def classify_block(params, thetas, ts, long n_max, double delta, int window):
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] tt = np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t npts = th.shape[0]
    labels_arr = np.empty(npts, dtype=np.uint8)
    steps_arr = np.empty(npts, dtype=np.int64)
    cdef unsigned char[::1] labels = labels_arr
    cdef long[::1] steps = steps_arr
    cdef Py_ssize_t i
    cdef ClsResult r
    for i in range(npts):
        r = _classify_core(kd, k_odd, has_pert, epsE, bac, bas,
                           eps, cac, cas, xi, xi_ref,
                           th[i], tt[i], n_max, delta, window)
        labels[i] = <unsigned char>r.label
        steps[i] = r.steps
    return labels_arr, steps_arr


# Sub-cell offset of the raster and sigma-grid sample angles.  Exact cell
# centers on power-of-two grids are dyadic rationals, which an affine
# degree-k base maps exactly within a finite set: every column would follow
# a short periodic cycle (period <= ord(k mod 2W)) instead of a generic
# orbit, producing a spurious sharp interface instead of the intermingled
# structure.  An irrational offset makes the float orbits pseudo-generic
# while staying deterministic.
GOLDEN_OFFSET = 0.6180339887498949
cdef double _GOLDEN = 0.6180339887498949


def classify_state(params, int h, double u, double t, long n_max, double delta, int window):
    """classify_point for a pre-split angle theta = u + h/2 (exact pairing:
    mirrored samples share u bitwise and differ only in h)."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef int side
    cdef double m
    if t > 0.5:
        side = 1
        m = 1.0 - t
    else:
        side = 0
        m = t
    cdef ClsResult r = _classify_core_state(kd, k_odd, epsE != 0.0, epsE, bac, bas,
                                            eps, cac, cas, xi, xi_ref,
                                            h, u, side, m, n_max, delta, window)
    return r.label, r.steps


def raster_rows(params, int width, int height, int j0, int j1,
                long n_max, double delta, int window):
    """Classify one sample per cell for rows j0..j1-1 of a width x height grid.

    Sample angles are (i + GOLDEN_OFFSET)/width, built in half-grid form for
    even widths so the involution pairing i <-> i + width/2 is bitwise
    exact; fiber values are the dyadic row centers (j+1/2)/height.
    """
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0
    cdef int nrows = j1 - j0
    labels_arr = np.empty(nrows * width, dtype=np.uint8)
    steps_arr = np.empty(nrows * width, dtype=np.int64)
    cdef unsigned char[::1] labels = labels_arr
    cdef long[::1] steps = steps_arr
    cdef double wd = <double>width
    cdef double hd = <double>height
    cdef int half = width // 2
    cdef bint even = width % 2 == 0
    cdef Py_ssize_t pos = 0
    cdef int i, j, h, side
    cdef double theta, t, u, m
    cdef ClsResult r
    for j in range(j0, j1):
        t = (j + 0.5) / hd
        if t > 0.5:
            side = 1
            m = 1.0 - t
        else:
            side = 0
            m = t
        for i in range(width):
            if even:
                if i >= half:
                    h = 1
                    u = ((i - half) + _GOLDEN) / wd
                else:
                    h = 0
                    u = (i + _GOLDEN) / wd
            else:
                theta = (i + _GOLDEN) / wd
                if theta >= 0.5:
                    h = 1
                    u = theta - 0.5
                else:
                    h = 0
                    u = theta
            r = _classify_core_state(kd, k_odd, has_pert, epsE, bac, bas,
                                     eps, cac, cas, xi, xi_ref,
                                     h, u, side, m, n_max, delta, window)
            labels[pos] = <unsigned char>r.label
            steps[pos] = r.steps
            pos += 1
    return labels_arr, steps_arr


def classify_pinned(cvals, double eps, xi, xi_ref, double t,
                    long n_max, double delta, int window):
    """Basin label on the fiber over an exactly periodic base point."""
    cdef double[::1] cv = np.ascontiguousarray(cvals, dtype=np.float64)
    cdef double[::1] xiv = xi
    cdef double[::1] xrv = xi_ref
    cdef int p = cv.shape[0]
    cdef int run0 = 0, run1 = 0
    cdef long step
    cdef double c
    if t == 0.0:
        return 0, 0
    if t == 1.0:
        return 1, 0
    for step in range(1, n_max + 1):
        c = cv[(step - 1) % p]
        t = t + eps * (c * _horner(xiv, t))
        if t < delta:
            run0 += 1
            run1 = 0
            if run0 >= window:
                return 0, step
        elif t > 1.0 - delta:
            run1 += 1
            run0 = 0
            if run1 >= window:
                return 1, step
        else:
            run0 = 0
            run1 = 0
    return 2, n_max


def cycle_fiber_eval(cvals, double eps, xi, xi_d, double t):
    """One pass of the fiber composition along a base cycle: value and d/dt."""
    cdef double[::1] cv = np.ascontiguousarray(cvals, dtype=np.float64)
    cdef double[::1] xiv = xi
    cdef double[::1] xdv = xi_d
    cdef double d = 1.0
    cdef double c
    cdef int i
    for i in range(cv.shape[0]):
        c = cv[i]
        d = d * (1.0 + eps * (c * _horner(xdv, t)))
        t = t + eps * (c * _horner(xiv, t))
    return t, d


def birkhoff_batches(params, double theta, double t, long burn_in,
                     int n_batches, long batch_len):
    """Batch means of log|d_t phi| along one orbit; nan on a zero derivative."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double[::1] xi_d = params[9]
    cdef double[::1] xi_ref_d = params[10]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0
    cdef int h, side, b
    cdef double u, m, c, m2, w, v, dphi
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
    out_arr = np.empty(n_batches, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef long total = burn_in + n_batches * batch_len
    cdef double acc = 0.0
    cdef long cnt = 0
    cdef int bi = 0
    cdef long step
    for step in range(total):
        c = _trig_half(cac, cas, u, h)
        if side == 0:
            dphi = 1.0 + eps * (c * _horner(xi_d, m))
        else:
            dphi = 1.0 - eps * (c * _horner(xi_ref_d, m))
        if step >= burn_in:
            if dphi == 0.0:
                out_arr[:] = np.nan
                return out_arr
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
    return out_arr


def orbit_arrays(params, double theta, double t, int n):
    """First n iterates (including the start) of one point; for audits."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0
    cdef int h, side, b
    cdef double u, m, c, m2, w, v
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
    thetas_arr = np.empty(n, dtype=np.float64)
    ts_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] thetas = thetas_arr
    cdef double[::1] ts = ts_arr
    cdef int i
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
    return thetas_arr, ts_arr


def phi_n_values(params, pac, pas, theta0s, int n):
    """Birkhoff sums sum_{i<n} phi(theta_i) of a base trig potential."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] pa = np.ascontiguousarray(pac, dtype=np.float64)
    cdef double[::1] ps = np.ascontiguousarray(pas, dtype=np.float64)
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0
    cdef double[::1] th0 = np.ascontiguousarray(theta0s, dtype=np.float64)
    cdef Py_ssize_t npts = th0.shape[0]
    out_arr = np.empty(npts, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t idx
    cdef int h, b, i
    cdef double theta, u, s, w, v
    for idx in range(npts):
        theta = th0[idx]
        if theta >= 0.5:
            h = 1
            u = theta - 0.5
        else:
            h = 0
            u = theta
        s = 0.0
        for i in range(n):
            s = s + _trig_half(pa, ps, u, h)
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
    return out_arr


cdef inline double _circ(double d) noexcept:
    d = fabs(d)
    if d > 0.5:
        d = 1.0 - d
    return d


cdef void _base_orbit_c(double kd, int k_odd, bint has_pert, double epsE,
                        double[::1] bac, double[::1] bas,
                        double theta, int n,
                        double[::1] us, signed char[::1] hs) noexcept:
    cdef int h, b, i
    cdef double u, w, v
    if theta >= 0.5:
        h = 1
        u = theta - 0.5
    else:
        h = 0
        u = theta
    for i in range(n):
        us[i] = u
        hs[i] = <signed char>h
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


def sep_greedy_cylinder(params, int n, double eps, long n_theta, int n_t,
                        double window_theta, int cap_active):
    """Greedy maximal (n,eps)-separated set on the cylinder; see Python twin."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps_f = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0

    act_theta0_arr = np.empty(cap_active, dtype=np.float64)
    act_thorb_arr = np.empty((cap_active, n), dtype=np.float64)
    act_torb_arr = np.empty((cap_active, n), dtype=np.float64)
    cdef double[::1] act_theta0 = act_theta0_arr
    cdef double[:, ::1] act_thorb = act_thorb_arr
    cdef double[:, ::1] act_torb = act_torb_arr
    head_theta0_arr = np.empty(cap_active, dtype=np.float64)
    head_thorb_arr = np.empty((cap_active, n), dtype=np.float64)
    head_torb_arr = np.empty((cap_active, n), dtype=np.float64)
    cdef double[::1] head_theta0 = head_theta0_arr
    cdef double[:, ::1] head_thorb = head_thorb_arr
    cdef double[:, ::1] head_torb = head_torb_arr
    cdef int n_head = 0

    cdef long out_cap = 4096
    out_theta_arr = np.empty(out_cap, dtype=np.float64)
    out_t_arr = np.empty(out_cap, dtype=np.float64)
    cdef double[::1] out_theta = out_theta_arr
    cdef double[::1] out_t = out_t_arr
    cdef long n_out = 0

    th_orb_arr = np.empty(n, dtype=np.float64)
    t_orb_arr = np.empty(n, dtype=np.float64)
    cval_arr = np.empty(n, dtype=np.float64)
    us_arr = np.empty(n, dtype=np.float64)
    hs_arr = np.empty(n, dtype=np.int8)
    cdef double[::1] th_orb = th_orb_arr
    cdef double[::1] t_orb = t_orb_arr
    cdef double[::1] cval = cval_arr
    cdef double[::1] us = us_arr
    cdef signed char[::1] hs = hs_arr

    cdef long act_lo = 0, act_hi = 0
    cdef long ci, ai
    cdef int ri, i, slot, hi_
    cdef double theta0, t0, m, m2, c, d, dt
    cdef int side
    cdef bint near_wrap, ok, sep

    for ci in range(n_theta):
        theta0 = (<double>ci) / (<double>n_theta)
        _base_orbit_c(kd, k_odd, has_pert, epsE, bac, bas, theta0, n, us, hs)
        for i in range(n):
            th_orb[i] = us[i] + 0.5 * hs[i]
            cval[i] = _trig_half(cac, cas, us[i], hs[i])
        while act_lo < act_hi and theta0 - act_theta0[act_lo % cap_active] > window_theta:
            act_lo += 1
        near_wrap = theta0 > 1.0 - window_theta
        for ri in range(n_t):
            t0 = (ri + 0.5) / (<double>n_t)
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
                for hi_ in range(n_head):
                    if theta0 - head_theta0[hi_] >= 1.0 - window_theta:
                        sep = False
                        for i in range(n):
                            d = _circ(th_orb[i] - head_thorb[hi_, i])
                            dt = fabs(t_orb[i] - head_torb[hi_, i])
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
                for i in range(n):
                    act_thorb[slot, i] = th_orb[i]
                    act_torb[slot, i] = t_orb[i]
                act_hi += 1
                if theta0 < window_theta:
                    if n_head >= cap_active:
                        raise RuntimeError("separated-set head window overflow")
                    head_theta0[n_head] = theta0
                    for i in range(n):
                        head_thorb[n_head, i] = th_orb[i]
                        head_torb[n_head, i] = t_orb[i]
                    n_head += 1
                if n_out >= out_cap:
                    out_cap = out_cap * 2
                    out_theta_arr = np.resize(out_theta_arr, out_cap)
                    out_t_arr = np.resize(out_t_arr, out_cap)
                    out_theta = out_theta_arr
                    out_t = out_t_arr
                out_theta[n_out] = theta0
                out_t[n_out] = t0
                n_out += 1
    return out_theta_arr[:n_out].copy(), out_t_arr[:n_out].copy()


def sep_greedy_base(params, int n, double eps, long n_theta,
                    double window_theta, int cap_active):
    """Greedy (n,eps)-separated set for the base circle map alone."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0

    act_theta0_arr = np.empty(cap_active, dtype=np.float64)
    act_thorb_arr = np.empty((cap_active, n), dtype=np.float64)
    cdef double[::1] act_theta0 = act_theta0_arr
    cdef double[:, ::1] act_thorb = act_thorb_arr
    head_theta0_arr = np.empty(cap_active, dtype=np.float64)
    head_thorb_arr = np.empty((cap_active, n), dtype=np.float64)
    cdef double[::1] head_theta0 = head_theta0_arr
    cdef double[:, ::1] head_thorb = head_thorb_arr
    cdef int n_head = 0

    cdef long out_cap = 4096
    out_theta_arr = np.empty(out_cap, dtype=np.float64)
    cdef double[::1] out_theta = out_theta_arr
    cdef long n_out = 0

    th_orb_arr = np.empty(n, dtype=np.float64)
    us_arr = np.empty(n, dtype=np.float64)
    hs_arr = np.empty(n, dtype=np.int8)
    cdef double[::1] th_orb = th_orb_arr
    cdef double[::1] us = us_arr
    cdef signed char[::1] hs = hs_arr

    cdef long act_lo = 0, act_hi = 0
    cdef long ci, ai
    cdef int i, slot, hi_
    cdef double theta0
    cdef bint ok, sep

    for ci in range(n_theta):
        theta0 = (<double>ci) / (<double>n_theta)
        _base_orbit_c(kd, k_odd, has_pert, epsE, bac, bas, theta0, n, us, hs)
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
            for hi_ in range(n_head):
                if theta0 - head_theta0[hi_] >= 1.0 - window_theta:
                    sep = False
                    for i in range(n):
                        if _circ(th_orb[i] - head_thorb[hi_, i]) > eps:
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
            for i in range(n):
                act_thorb[slot, i] = th_orb[i]
            act_hi += 1
            if theta0 < window_theta:
                if n_head >= cap_active:
                    raise RuntimeError("separated-set head window overflow")
                head_theta0[n_head] = theta0
                for i in range(n):
                    head_thorb[n_head, i] = th_orb[i]
                n_head += 1
            if n_out >= out_cap:
                out_cap = out_cap * 2
                out_theta_arr = np.resize(out_theta_arr, out_cap)
                out_theta = out_theta_arr
            out_theta[n_out] = theta0
            n_out += 1
    return out_theta_arr[:n_out].copy()


def sep_greedy_fiber(params, double theta0, int n, double eps, int n_t):
    """Greedy (n,eps)-separated set on a single fiber {theta0} x [0,1]."""
    cdef double[::1] bac = params[2]
    cdef double[::1] bas = params[3]
    cdef double[::1] cac = params[5]
    cdef double[::1] cas = params[6]
    cdef double[::1] xi = params[7]
    cdef double[::1] xi_ref = params[8]
    cdef double kd = <double>params[0]
    cdef double epsE = params[1]
    cdef double eps_f = params[4]
    cdef int k_odd = abs(<long>params[0]) & 1
    cdef bint has_pert = epsE != 0.0

    us_arr = np.empty(n, dtype=np.float64)
    hs_arr = np.empty(n, dtype=np.int8)
    cdef double[::1] us = us_arr
    cdef signed char[::1] hs = hs_arr
    _base_orbit_c(kd, k_odd, has_pert, epsE, bac, bas, theta0, n, us, hs)
    cval_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] cval = cval_arr
    cdef int i
    for i in range(n):
        cval[i] = _trig_half(cac, cas, us[i], hs[i])

    adm_orb_arr = np.empty((n_t, n), dtype=np.float64)
    adm_t0_arr = np.empty(n_t, dtype=np.float64)
    cdef double[:, ::1] adm_orb = adm_orb_arr
    cdef double[::1] adm_t0 = adm_t0_arr
    cdef int n_adm = 0

    t_orb_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] t_orb = t_orb_arr
    cdef int ri, ai
    cdef int side
    cdef double t0, m, m2, c
    cdef bint ok, sep
    for ri in range(n_t):
        t0 = (ri + 0.5) / (<double>n_t)
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
        for ai in range(n_adm):
            sep = False
            for i in range(n):
                if fabs(t_orb[i] - adm_orb[ai, i]) > eps:
                    sep = True
                    break
            if not sep:
                ok = False
                break
        if ok:
            for i in range(n):
                adm_orb[n_adm, i] = t_orb[i]
            adm_t0[n_adm] = t0
            n_adm += 1
    return adm_t0_arr[:n_adm].copy()
