"""Pure-Python SMO kernel for the soft-margin linear SVM dual.

This is the fallback for the compiled twin in ``_smo_cy.pyx``; both
implement the identical arithmetic in the identical order so trained
models are bit-for-bit equal across backends.

Training data arrives in CSR form (indptr/indices/data arrays) plus a
label array of +-1.  Pair selection is deterministic: a first-violator
scan over all examples, with the partner chosen to maximize |E_i - E_j|
over the non-bound alphas (ties by lowest index) and an index-ordered
fallback.  Platt-style non-bound accelerator passes run between full
sweeps; they only speed convergence, every exit decision is made by a
full sweep.
"""

from array import array

# accelerator passes between full sweeps are bounded; full sweeps decide
_MAX_ACCEL_PASSES = 50


def solve(indptr, indices, data, y, n_features, c, tol, eps, max_passes):
    """Run SMO; returns (alphas, w, running_b, converged).

    tol is the violation threshold used by the sweeps (the caller may
    tighten it below the reported KKT tolerance); eps is the minimum
    useful alpha change; max_passes bounds consecutive no-change full
    sweeps.
    """
    n = len(y)
    alphas = array("d", bytes(8 * n))
    w = array("d", bytes(8 * n_features))
    b = 0.0

    def row_dot_w(i):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += w[indices[p]] * data[p]
        return s

    def kdot(i, j):
        pi, pe = indptr[i], indptr[i + 1]
        qi, qe = indptr[j], indptr[j + 1]
        s = 0.0
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

    def violates(i):
        r = y[i] * (row_dot_w(i) + b - y[i])
        return (r < -tol and alphas[i] < c) or (r > tol and alphas[i] > 0.0)

    def take_step(i, j):
        nonlocal b
        if i == j:
            return False
        ai = alphas[i]
        aj = alphas[j]
        yi = y[i]
        yj = y[j]
        ei = row_dot_w(i) + b - yi
        ej = row_dot_w(j) + b - yj
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
        kii = kdot(i, i)
        kjj = kdot(j, j)
        kij = kdot(i, j)
        eta = kii + kjj - 2.0 * kij
        if eta > 0.0:
            aj_new = aj + yj * (ei - ej) / eta
            if aj_new < lo:
                aj_new = lo
            elif aj_new > hi:
                aj_new = hi
        else:
            # flat pair objective (identical rows): evaluate the endpoints
            g1 = yi * (ei - b) - ai * kii - s * aj * kij
            g2 = yj * (ej - b) - s * ai * kij - aj * kjj
            lo1 = ai + s * (aj - lo)
            hi1 = ai + s * (aj - hi)
            psi_lo = (
                0.5 * kii * lo1 * lo1
                + 0.5 * kjj * lo * lo
                + s * kij * lo * lo1
                + g1 * lo1
                + g2 * lo
            )
            psi_hi = (
                0.5 * kii * hi1 * hi1
                + 0.5 * kjj * hi * hi
                + s * kij * hi * hi1
                + g1 * hi1
                + g2 * hi
            )
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
        b1 = b - ei - yi * dai * kii - yj * daj * kij
        b2 = b - ej - yi * dai * kij - yj * daj * kjj
        if 0.0 < ai_new < c:
            b = b1
        elif 0.0 < aj_new < c:
            b = b2
        else:
            b = (b1 + b2) / 2.0
        dwi = yi * dai
        for p in range(indptr[i], indptr[i + 1]):
            w[indices[p]] += dwi * data[p]
        dwj = yj * daj
        for p in range(indptr[j], indptr[j + 1]):
            w[indices[p]] += dwj * data[p]
        alphas[i] = ai_new
        alphas[j] = aj_new
        return True

    def examine(i):
        ei = row_dot_w(i) + b - y[i]
        best_j = -1
        best_gap = -1.0
        for j in range(n):
            if j == i or alphas[j] <= 0.0 or alphas[j] >= c:
                continue
            gap = ei - (row_dot_w(j) + b - y[j])
            if gap < 0.0:
                gap = -gap
            if gap > best_gap:
                best_gap = gap
                best_j = j
        if best_j >= 0 and take_step(i, best_j):
            return True
        for j in range(n):
            if j != i and j != best_j and take_step(i, j):
                return True
        return False

    converged = False
    streak = 0
    while streak < max_passes:
        changed = 0
        violators = 0
        for i in range(n):
            if violates(i):
                violators += 1
                if examine(i):
                    changed += 1
        if violators == 0:
            converged = True
            break
        if changed == 0:
            streak += 1
            continue
        streak = 0
        for _ in range(_MAX_ACCEL_PASSES):
            accel = 0
            for i in range(n):
                if 0.0 < alphas[i] < c and violates(i):
                    if examine(i):
                        accel += 1
            if accel == 0:
                break
    return alphas, w, b, converged
