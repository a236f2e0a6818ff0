# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled SMO kernel; the hot twin of ``_smo_py``.

Same arithmetic in the same order as the pure-Python fallback, so the
two backends produce bit-identical models (the build disables FP
contraction for that reason).  See _smo_py for the algorithm notes.
"""

from array import array


cdef int _MAX_ACCEL_PASSES = 50


cdef inline double _row_dot_w(int[::1] indptr, int[::1] indices,
                              double[::1] data, double[::1] w,
                              Py_ssize_t i):
    cdef double s = 0.0
    cdef Py_ssize_t p
    for p in range(indptr[i], indptr[i + 1]):
        s += w[indices[p]] * data[p]
    return s


cdef inline double _kdot(int[::1] indptr, int[::1] indices,
                         double[::1] data, Py_ssize_t i, Py_ssize_t j):
    cdef Py_ssize_t pi = indptr[i], pe = indptr[i + 1]
    cdef Py_ssize_t qi = indptr[j], qe = indptr[j + 1]
    cdef double s = 0.0
    cdef int ci, cj
    while pi < pe and qi < qe:
        ci = indices[pi]
        cj = indices[qi]
        if ci == cj:
            s += data[pi] * data[qi]
            pi += 1
            qi += 1
        elif ci < cj:
            pi += 1
        else:
            qi += 1
    return s


cdef inline bint _violates(int[::1] indptr, int[::1] indices, double[::1] data,
                           double[::1] y, double[::1] alphas, double[::1] w,
                           double b, double c, double tol, Py_ssize_t i):
    cdef double r = y[i] * (_row_dot_w(indptr, indices, data, w, i) + b - y[i])
    return (r < -tol and alphas[i] < c) or (r > tol and alphas[i] > 0.0)


cdef bint _take_step(int[::1] indptr, int[::1] indices, double[::1] data,
                     double[::1] y, double[::1] alphas, double[::1] w,
                     double* b, double c, double eps,
                     Py_ssize_t i, Py_ssize_t j):
    cdef double ai, aj, yi, yj, ei, ej, s, lo, hi
    cdef double kii, kjj, kij, eta, aj_new, ai_new, dai, daj, b1, b2, dwi, dwj
    cdef double g1, g2, lo1, hi1, psi_lo, psi_hi
    cdef Py_ssize_t p
    if i == j:
        return False
    ai = alphas[i]
    aj = alphas[j]
    yi = y[i]
    yj = y[j]
    ei = _row_dot_w(indptr, indices, data, w, i) + b[0] - yi
    ej = _row_dot_w(indptr, indices, data, w, j) + b[0] - yj
    s = yi * yj
    if s > 0.0:
        lo = ai + aj - c
        if lo < 0.0:
            lo = 0.0
        hi = ai + aj
        if hi > c:
            hi = c
    else:
        lo = aj - ai
        if lo < 0.0:
            lo = 0.0
        hi = c + aj - ai
        if hi > c:
            hi = c
    if lo >= hi:
        return False
    kii = _kdot(indptr, indices, data, i, i)
    kjj = _kdot(indptr, indices, data, j, j)
    kij = _kdot(indptr, indices, data, i, j)
    eta = kii + kjj - 2.0 * kij
    if eta > 0.0:
        aj_new = aj + yj * (ei - ej) / eta
        if aj_new < lo:
            aj_new = lo
        elif aj_new > hi:
            aj_new = hi
    else:
        # flat pair objective (identical rows): evaluate the endpoints
        g1 = yi * (ei - b[0]) - ai * kii - s * aj * kij
        g2 = yj * (ej - b[0]) - s * ai * kij - aj * kjj
        lo1 = ai + s * (aj - lo)
        hi1 = ai + s * (aj - hi)
        psi_lo = (0.5 * kii * lo1 * lo1 + 0.5 * kjj * lo * lo
                  + s * kij * lo * lo1 + g1 * lo1 + g2 * lo)
        psi_hi = (0.5 * kii * hi1 * hi1 + 0.5 * kjj * hi * hi
                  + s * kij * hi * hi1 + g1 * hi1 + g2 * hi)
        if psi_lo < psi_hi - eps:
            aj_new = lo
        elif psi_hi < psi_lo - eps:
            aj_new = hi
        else:
            return False
    # snap to the box bounds so bound detection can compare exactly
    if aj_new < eps:
        aj_new = 0.0
    elif aj_new > c - eps:
        aj_new = c
    daj = aj_new - aj
    if daj < eps and daj > -eps:
        return False
    ai_new = ai + s * (aj - aj_new)
    if ai_new < eps:
        ai_new = 0.0
    elif ai_new > c - eps:
        ai_new = c
    dai = ai_new - ai
    b1 = b[0] - ei - yi * dai * kii - yj * daj * kij
    b2 = b[0] - ej - yi * dai * kij - yj * daj * kjj
    if 0.0 < ai_new < c:
        b[0] = b1
    elif 0.0 < aj_new < c:
        b[0] = b2
    else:
        b[0] = (b1 + b2) / 2.0
    dwi = yi * dai
    for p in range(indptr[i], indptr[i + 1]):
        w[indices[p]] += dwi * data[p]
    dwj = yj * daj
    for p in range(indptr[j], indptr[j + 1]):
        w[indices[p]] += dwj * data[p]
    alphas[i] = ai_new
    alphas[j] = aj_new
    return True


cdef bint _examine(int[::1] indptr, int[::1] indices, double[::1] data,
                   double[::1] y, double[::1] alphas, double[::1] w,
                   double* b, double c, double eps, Py_ssize_t n,
                   Py_ssize_t i):
    cdef double ei, gap, best_gap
    cdef Py_ssize_t j, best_j
    ei = _row_dot_w(indptr, indices, data, w, i) + b[0] - y[i]
    best_j = -1
    best_gap = -1.0
    for j in range(n):
        if j == i or alphas[j] <= 0.0 or alphas[j] >= c:
            continue
        gap = ei - (_row_dot_w(indptr, indices, data, w, j) + b[0] - y[j])
        if gap < 0.0:
            gap = -gap
        if gap > best_gap:
            best_gap = gap
            best_j = j
    if best_j >= 0 and _take_step(indptr, indices, data, y, alphas, w,
                                  b, c, eps, i, best_j):
        return True
    for j in range(n):
        if j != i and j != best_j and _take_step(indptr, indices, data, y,
                                                 alphas, w, b, c, eps, i, j):
            return True
    return False


def solve(indptr_obj, indices_obj, data_obj, y_obj, n_features,
          c_in, tol_in, eps_in, max_passes):
    """Run SMO; returns (alphas, w, running_b, converged)."""
    cdef int[::1] indptr = indptr_obj
    cdef int[::1] indices = indices_obj
    cdef double[::1] data = data_obj
    cdef double[::1] y = y_obj
    cdef double c = c_in
    cdef double tol = tol_in
    cdef double eps = eps_in
    cdef Py_ssize_t n = len(y_obj)
    cdef Py_ssize_t i
    cdef int changed, violators, accel, passes_left, streak
    cdef double b = 0.0
    cdef bint converged = False

    alphas_arr = array("d", bytes(8 * n))
    w_arr = array("d", bytes(8 * int(n_features)))
    cdef double[::1] alphas = alphas_arr
    cdef double[::1] w = w_arr

    streak = 0
    while streak < max_passes:
        changed = 0
        violators = 0
        for i in range(n):
            if _violates(indptr, indices, data, y, alphas, w, b, c, tol, i):
                violators += 1
                if _examine(indptr, indices, data, y, alphas, w,
                            &b, c, eps, n, i):
                    changed += 1
        if violators == 0:
            converged = True
            break
        if changed == 0:
            streak += 1
            continue
        streak = 0
        for passes_left in range(_MAX_ACCEL_PASSES):
            accel = 0
            for i in range(n):
                if 0.0 < alphas[i] < c and _violates(indptr, indices, data, y,
                                                     alphas, w, b, c, tol, i):
                    if _examine(indptr, indices, data, y, alphas, w,
                                &b, c, eps, n, i):
                        accel += 1
            if accel == 0:
                break
    return alphas_arr, w_arr, b, converged
