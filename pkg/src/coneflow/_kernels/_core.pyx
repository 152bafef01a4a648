# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled time stepping kernel.

Mirrors _kernels.pure.advance for the analytic weight kinds; tabulated
weights take the pure path.  Weight kinds: 0 = power, 1 = log1p,
2 = sigmoid_exp.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, isfinite, INFINITY

BACKEND = "compiled"


cdef inline double _f_of_phi(int wkind, double alpha, double phi) nogil:
    cdef double u
    if wkind == 0:
        return exp(alpha * phi)
    u = exp(phi)
    if wkind == 1:
        return u + log1p(u)
    return u / (1.0 + exp(-u))


cdef int _rhs(double[::1] phi, double[::1] q, int n, double dtheta,
              double[::1] cot_theta, int wkind, double alpha,
              double* fd2_min, double* denom_min) nogil:
    cdef Py_ssize_t J = phi.shape[0]
    cdef Py_ssize_t j
    cdef double h2 = dtheta * dtheta
    cdef double pt, ptt, v2, denom, fu, fd2
    cdef double fmin = INFINITY, dmin = INFINITY
    for j in range(J):
        if j == 0:
            pt = (phi[1] - phi[0]) / (2.0 * dtheta)
            ptt = (phi[1] - phi[0]) / h2
        elif j == J - 1:
            pt = (phi[J - 1] - phi[J - 2]) / (2.0 * dtheta)
            ptt = (phi[J - 2] - phi[J - 1]) / h2
        else:
            pt = (phi[j + 1] - phi[j - 1]) / (2.0 * dtheta)
            ptt = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / h2
        v2 = 1.0 + pt * pt
        denom = n - ptt / v2 - (n - 1) * cot_theta[j] * pt
        fu = _f_of_phi(wkind, alpha, phi[j])
        q[j] = v2 / (fu * denom)
        fd2 = fu * denom * denom
        if fd2 < fmin:
            fmin = fd2
        if denom < dmin:
            dmin = denom
    fd2_min[0] = fmin
    denom_min[0] = dmin
    return 0


def advance(cnp.ndarray[double, ndim=1] phi_arr, double t, double t_end,
            int n, double dtheta, cnp.ndarray[double, ndim=1] cot_arr,
            double cfl, double denom_floor, int wkind, double alpha,
            long max_steps):
    """Integrate phi (modified in place) from t to t_end.

    Returns (t, steps, min_denom_seen, status); status as in the pure
    backend: 0 ok, 1 convexity floor crossed, 2 non-finite values.
    """
    cdef double[::1] phi = np.ascontiguousarray(phi_arr)
    cdef double[::1] cot_theta = np.ascontiguousarray(cot_arr)
    cdef Py_ssize_t J = phi.shape[0]
    cdef cnp.ndarray[double, ndim=1] k1a = np.empty(J), k2a = np.empty(J)
    cdef cnp.ndarray[double, ndim=1] k3a = np.empty(J), k4a = np.empty(J)
    cdef cnp.ndarray[double, ndim=1] tmpa = np.empty(J)
    cdef double[::1] k1 = k1a, k2 = k2a, k3 = k3a, k4 = k4a, tmp = tmpa
    cdef double fd2 = 0.0, dmin = 0.0, dt, min_denom_seen = INFINITY
    cdef double eps_end = 1e-15 * (1.0 if t_end < 1.0 else t_end)
    cdef long steps = 0
    cdef Py_ssize_t j
    cdef int status = 0
    cdef bint bad

    with nogil:
        while t < t_end - eps_end:
            if steps >= max_steps:
                break
            _rhs(phi, k1, n, dtheta, cot_theta, wkind, alpha, &fd2, &dmin)
            if dmin < min_denom_seen:
                min_denom_seen = dmin
            if dmin <= denom_floor:
                status = 1
                break
            dt = cfl * dtheta * dtheta * fd2
            if dt > t_end - t:
                dt = t_end - t

            for j in range(J):
                tmp[j] = phi[j] + 0.5 * dt * k1[j]
            _rhs(tmp, k2, n, dtheta, cot_theta, wkind, alpha, &fd2, &dmin)
            if dmin < min_denom_seen:
                min_denom_seen = dmin
            if dmin <= denom_floor:
                status = 1
                break

            for j in range(J):
                tmp[j] = phi[j] + 0.5 * dt * k2[j]
            _rhs(tmp, k3, n, dtheta, cot_theta, wkind, alpha, &fd2, &dmin)
            if dmin < min_denom_seen:
                min_denom_seen = dmin
            if dmin <= denom_floor:
                status = 1
                break

            for j in range(J):
                tmp[j] = phi[j] + dt * k3[j]
            _rhs(tmp, k4, n, dtheta, cot_theta, wkind, alpha, &fd2, &dmin)
            if dmin < min_denom_seen:
                min_denom_seen = dmin
            if dmin <= denom_floor:
                status = 1
                break

            bad = False
            for j in range(J):
                phi[j] = phi[j] + (dt / 6.0) * (k1[j] + 2.0 * k2[j]
                                                + 2.0 * k3[j] + k4[j])
                if not isfinite(phi[j]):
                    bad = True
            if bad:
                status = 2
                break
            t = t + dt
            steps += 1

    return t, steps, min_denom_seen, status
