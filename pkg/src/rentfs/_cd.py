"""Compiled coordinate-descent kernels for elastic-net GLMs.

All kernels minimise

    1/2 * sum_i v_i (z_i - b0 - x_i . beta)^2 + gamma * (alpha*|beta|_1 + (1-alpha)/2*|beta|_2^2)

with observation weights ``v`` (the 1/I scaling is folded into ``v``). The
logistic kernel wraps the weighted kernel in an outer reweighting loop.
"""

import numpy as np
from numba import njit

_W_MIN = 1e-6


@njit(cache=True, nogil=True)
def _soft(z, g):
    if z > g:
        return z - g
    if z < -g:
        return z + g
    return 0.0


@njit(cache=True, nogil=True)
def _penalty(beta, gamma, alpha):
    l1 = 0.0
    l2 = 0.0
    for j in range(beta.shape[0]):
        l1 += abs(beta[j])
        l2 += beta[j] * beta[j]
    return gamma * (alpha * l1 + 0.5 * (1.0 - alpha) * l2)


@njit(cache=True, nogil=True)
def _sweep(x, v, r, beta, b0, col_ss, gamma, alpha, active_only):
    """One cyclic pass; updates r, beta in place. Returns (b0, max change)."""
    n_obj, n_feat = x.shape
    sv = 0.0
    sr = 0.0
    for i in range(n_obj):
        sv += v[i]
        sr += v[i] * r[i]
    d0 = sr / sv
    if d0 != 0.0:
        b0 += d0
        for i in range(n_obj):
            r[i] -= d0
    maxd = abs(d0)
    l1 = gamma * alpha
    denom_l2 = gamma * (1.0 - alpha)
    for j in range(n_feat):
        old = beta[j]
        if active_only and old == 0.0:
            continue
        a = col_ss[j]
        den = a + denom_l2
        if den <= 0.0:
            continue
        g = 0.0
        for i in range(n_obj):
            g += v[i] * x[i, j] * r[i]
        new = _soft(g + a * old, l1) / den
        d = new - old
        if d != 0.0:
            beta[j] = new
            for i in range(n_obj):
                r[i] -= x[i, j] * d
            if abs(d) > maxd:
                maxd = abs(d)
    return b0, maxd


@njit(cache=True, nogil=True)
def weighted_enet(x, z, v, beta, b0, gamma, alpha, tol, max_sweeps, trace):
    """Weighted elastic-net least squares by cyclic coordinate descent.

    ``beta`` is updated in place. Full sweeps alternate with sweeps restricted
    to the active set; convergence is declared only after a full sweep with
    maximum coordinate change below ``tol``. When ``trace`` has length >=
    ``max_sweeps`` the penalised objective after every sweep is stored there.

    Returns (b0, n_sweeps, converged).
    """
    n_obj, n_feat = x.shape
    r = np.empty(n_obj)
    for i in range(n_obj):
        s = z[i] - b0
        for j in range(n_feat):
            s -= x[i, j] * beta[j]
        r[i] = s
    col_ss = np.zeros(n_feat)
    for j in range(n_feat):
        s = 0.0
        for i in range(n_obj):
            s += v[i] * x[i, j] * x[i, j]
        col_ss[j] = s
    record = trace.shape[0] >= max_sweeps
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        b0, maxd = _sweep(x, v, r, beta, b0, col_ss, gamma, alpha, False)
        if record:
            trace[sweeps] = _objective(v, r, beta, gamma, alpha)
        sweeps += 1
        if maxd < tol:
            converged = True
            break
        while sweeps < max_sweeps:
            b0, maxd = _sweep(x, v, r, beta, b0, col_ss, gamma, alpha, True)
            if record:
                trace[sweeps] = _objective(v, r, beta, gamma, alpha)
            sweeps += 1
            if maxd < tol:
                break
    return b0, sweeps, converged


@njit(cache=True, nogil=True)
def _objective(v, r, beta, gamma, alpha):
    s = 0.0
    for i in range(r.shape[0]):
        s += v[i] * r[i] * r[i]
    return 0.5 * s + _penalty(beta, gamma, alpha)


@njit(cache=True, nogil=True)
def _logistic_loss(x, y, beta, b0):
    n_obj, n_feat = x.shape
    s = 0.0
    for i in range(n_obj):
        eta = b0
        for j in range(n_feat):
            eta += x[i, j] * beta[j]
        # log(1 + exp(eta)) - y*eta, evaluated stably
        if eta > 0:
            s += eta + np.log1p(np.exp(-eta)) - y[i] * eta
        else:
            s += np.log1p(np.exp(eta)) - y[i] * eta
    return s / n_obj


@njit(cache=True, nogil=True)
def logistic_enet(x, y, beta, b0, gamma, alpha, tol, max_outer, max_inner, trace):
    """Penalised logistic regression by iteratively reweighted least squares.

    Each outer step solves the weighted quadratic approximation with
    :func:`weighted_enet`; if the penalised objective does not decrease the
    step is halved up to 30 times. ``trace`` (length >= max_outer) receives
    the objective after every outer step.

    Returns (b0, n_outer, converged).
    """
    n_obj, n_feat = x.shape
    inv_n = 1.0 / n_obj
    z = np.empty(n_obj)
    v = np.empty(n_obj)
    new_beta = np.empty(n_feat)
    dummy = np.empty(0)
    record = trace.shape[0] >= max_outer
    obj = _logistic_loss(x, y, beta, b0) + _penalty(beta, gamma, alpha)
    converged = False
    it = 0
    while it < max_outer:
        for i in range(n_obj):
            e = b0
            for j in range(n_feat):
                e += x[i, j] * beta[j]
            p = 1.0 / (1.0 + np.exp(-e))
            w = p * (1.0 - p)
            if w < _W_MIN:
                w = _W_MIN
            z[i] = e + (y[i] - p) / w
            v[i] = w * inv_n
        for j in range(n_feat):
            new_beta[j] = beta[j]
        new_b0, _, _ = weighted_enet(x, z, v, new_beta, b0, gamma, alpha,
                                     tol, max_inner, dummy)
        new_obj = _logistic_loss(x, y, new_beta, new_b0) + _penalty(new_beta, gamma, alpha)
        halvings = 0
        while new_obj > obj + 1e-12 * abs(obj) and halvings < 30:
            halvings += 1
            for j in range(n_feat):
                new_beta[j] = beta[j] + 0.5 * (new_beta[j] - beta[j])
            new_b0 = b0 + 0.5 * (new_b0 - b0)
            new_obj = _logistic_loss(x, y, new_beta, new_b0) + _penalty(new_beta, gamma, alpha)
        if new_obj > obj + 1e-12 * abs(obj):
            # no descent along the reweighted direction: numerically optimal
            converged = True
            break
        maxd = abs(new_b0 - b0)
        for j in range(n_feat):
            d = abs(new_beta[j] - beta[j])
            if d > maxd:
                maxd = d
            beta[j] = new_beta[j]
        b0 = new_b0
        obj = new_obj
        if record:
            trace[it] = obj
        it += 1
        if maxd < tol:
            converged = True
            break
    return b0, it, converged
