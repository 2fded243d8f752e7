"""Pure-numpy kernels for the Mittag-Leffler evaluator.

The compiled lane (_mlcore) implements the same three entry points with
identical semantics; mittag.py selects whichever is importable. All kernels
take plain float64 arrays plus per-alpha tables prepared by mittag.py and
return values (and, for the series kernels, per-point convergence flags).
"""
import math

import numpy as np

LANE = "pure"


def taylor_batch(x, glog, tol):
    """Alternating power series sum_k (-x)^k / Gamma(1 + alpha k).

    Parameters
    ----------
    x : float64 array, x >= 0
    glog : float64 array, glog[k] = gammaln(1 + alpha*k), k = 0..K-1
    tol : relative tolerance for truncation

    Returns (values, converged). Terms are evaluated in log form, so the
    per-term rounding stays ~eps * (k|ln x| + |glog|) with no error
    compounding across the recurrence; accumulation is compensated.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    vals = np.ones(n)
    conv = np.zeros(n, dtype=bool)

    zero = x == 0.0
    conv[zero] = True
    idx = np.flatnonzero(~zero)
    if idx.size == 0:
        return vals, conv

    lx = np.log(x[idx])
    s = np.ones(idx.size)      # k = 0 term
    comp = np.zeros(idx.size)
    prev = np.full(idx.size, np.inf)
    kmax = glog.shape[0]
    for k in range(1, kmax):
        mag = np.exp(k * lx - glog[k])
        term = -mag if (k % 2) else mag
        # Kahan step
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
        done = (mag < tol * np.maximum(np.abs(s), 1e-300)) & (mag <= prev) & (k > 3)
        if np.any(done):
            sub = np.flatnonzero(done)
            tgt = idx[sub]
            vals[tgt] = s[sub]
            conv[tgt] = True
            keep = np.flatnonzero(~done)
            idx = idx[keep]
            if idx.size == 0:
                return vals, conv
            lx, s, comp, prev = lx[keep], s[keep], comp[keep], mag[keep]
        else:
            prev = mag
    vals[idx] = s
    return vals, conv


def mid_batch(x, A, W, c, s):
    """Trapezoid sum in log-radius of the spectral integral.

    E_alpha(-x) = (sin(a pi)/pi) x * sum_j W_j / ((A_j + x c)^2 + (x s)^2)
    with A_j = exp(alpha theta_j), W_j = A_j exp(-exp(theta_j)) h,
    c = cos(a pi), s = sin(a pi).
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(x.shape[0])
    block = max(1, int(6_000_000 // max(A.shape[0], 1)))
    for i in range(0, x.shape[0], block):
        xb = x[i:i + block, None]
        den = (A[None, :] + xb * c) ** 2 + (xb * s) ** 2
        out[i:i + block] = (W[None, :] / den).sum(axis=1)
    return (s / math.pi) * x * out


def asym_batch(x, lenv, sterm, tol):
    """Negative-axis asymptotic series with envelope-driven truncation.

    term_k = sterm[k] * env_k,  env_k = Gamma(alpha k) x^-k / pi,
    lenv[k-1] = ln(Gamma(alpha k)/pi),  sterm[k-1] = (-1)^(k+1) sin(pi a k).

    env is log-convex in k (hence unimodal); truncation stops on env, never
    on the sin-modulated term, whose exact zeros at rational alpha would
    otherwise end the sum early. Returns (values, converged); a point is
    unconverged if env hits its minimum while still above tol*|sum|.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    vals = np.zeros(n)
    conv = np.zeros(n, dtype=bool)
    idx = np.arange(n)
    lx = np.log(x)
    s = np.zeros(n)
    comp = np.zeros(n)
    prev = np.full(n, np.inf)
    kmax = lenv.shape[0]
    for k in range(kmax):
        le = lenv[k] - (k + 1) * lx
        env = np.where(le > -745.0, np.exp(np.minimum(le, 700.0)), 0.0)
        grew = env > prev
        small = (env < tol * np.maximum(np.abs(s), 1e-300)) & ~grew
        term = np.where(grew, 0.0, sterm[k] * env)
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
        done = grew | small
        if np.any(done):
            sub = np.flatnonzero(done)
            tgt = idx[sub]
            vals[tgt] = s[sub]
            # on growth-stop the truncation error is ~ the smallest env
            conv[tgt] = np.where(grew[sub],
                                 prev[sub] < tol * np.maximum(np.abs(s[sub]), 1e-300),
                                 True)
            keep = np.flatnonzero(~done)
            idx = idx[keep]
            if idx.size == 0:
                return vals, conv
            lx, s, comp, prev = lx[keep], s[keep], comp[keep], env[keep]
        else:
            prev = env
    vals[idx] = s
    return vals, conv
