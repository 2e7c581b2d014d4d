"""Float64 lattice-sum kernels for the truncated Poincare series.

The numba-jitted path streams over the (c, d, t) enumeration box in its
deterministic order, accumulating per-point sums with Neumaier
compensation; sample points are processed in a parallel outer loop, so
thread count never affects the bits of any result.  A pure-numpy
fallback with identical semantics covers environments without a working
JIT.

The negative-weight summand needs the incomplete beta function at
Z = 4*eta*y/|lam|^2; the closed (1-Z)-form cancels catastrophically for
the far lattice terms (Z -> 0), so the kernels switch to the power
series in Z below Z = 1/2.
"""

from __future__ import annotations

import numpy as np

from .special import beta_closed_coefficients

try:  # pragma: no cover - exercised indirectly
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range  # type: ignore


def set_threads(n: int) -> None:
    """Cap kernel parallelism; 0 restores the automatic thread count."""
    if HAVE_NUMBA:
        if n <= 0:
            numba.set_num_threads(numba.config.NUMBA_NUM_THREADS)
        else:
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def beta_float_tables(k: int, n: int):
    """Float64 coefficient tables for beta(Z; 2k-1, -n) used by the kernels.

    Returns (C, exps, coefs, log_coef) for the closed (1-Z)-form, where
    beta = C + sum coefs * q**exps + log_coef*log(q) with q = 1 - Z.
    """
    C, terms, log_coef = beta_closed_coefficients(2 * k - 1, -n)
    exps = np.array([e for e, _ in terms], dtype=np.int64)
    coefs = np.array([float(c) for _, c in terms], dtype=np.float64)
    return float(C), exps, coefs, float(log_coef)


@njit(cache=True, inline="always", error_model="numpy")
def _cpow_int(z, e):
    """z**e for (possibly negative) integer e by repeated multiplication.

    The reciprocal is taken componentwise so a zero base yields inf/nan
    instead of raising inside parallel regions (poles are detected and
    reported by the caller).
    """
    if e == 0:
        return complex(1.0, 0.0)
    inv = e < 0
    if inv:
        e = -e
    out = complex(1.0, 0.0)
    base = z
    while e > 0:
        if e & 1:
            out = out * base
        base = base * base
        e >>= 1
    if inv:
        d = out.real * out.real + out.imag * out.imag
        return complex(out.real / d, -out.imag / d)
    return out


@njit(cache=True, inline="always", error_model="numpy")
def _beta_small_Z(Z, a, b):
    """Power series sum_i binom(b-1,i)(-1)^i Z^(a+i)/(a+i), Z < 1/2."""
    acc = 0.0
    coef = 1.0
    zpow = Z**a
    for i in range(220):
        term = coef * zpow / (a + i)
        acc += term
        if i > 2 and abs(term) <= 1e-18 * abs(acc):
            break
        coef = coef * (i + 1.0 - b) / (i + 1.0)
        zpow *= Z
    return acc


@njit(cache=True, inline="always", error_model="numpy")
def _beta_closed(q, C, exps, coefs, log_coef):
    """Closed form C + sum coefs*q**exps + log_coef*log(q), stable for q <= 1/2."""
    acc = C
    for j in range(exps.shape[0]):
        acc += coefs[j] * q ** exps[j]
    if log_coef != 0.0:
        acc += log_coef * np.log(q)
    return acc


@njit(cache=True, parallel=True, error_model="numpy")
def _eval_kernel(
    rows,  # (m, 4) int64: c, d, a0, b0
    shell,  # (m,) bool
    n_t,
    zs,  # (p,) complex128
    base,  # complex128
    k,
    n,
    is_phi,  # bool
    C,
    exps,
    coefs,
    log_coef,
):
    p = zs.shape[0]
    out = np.zeros(p, dtype=np.complex128)
    tails = np.zeros(p, dtype=np.float64)
    min_pd = np.empty(p, dtype=np.float64)
    zb = np.conj(base)
    eta = base.imag
    a_beta = 2 * k - 1
    b_beta = -n
    for pi in prange(p):
        z = zs[pi]
        y = z.imag
        sr = 0.0
        sc_r = 0.0
        si = 0.0
        sc_i = 0.0
        shr = 0.0
        shc_r = 0.0
        shi = 0.0
        shc_i = 0.0
        edge = 0.0
        best_pd = 1e300
        for ri in range(rows.shape[0]):
            c = rows[ri, 0]
            d = rows[ri, 1]
            a0 = rows[ri, 2]
            b0 = rows[ri, 3]
            w = c * z + d
            aw = np.abs(w)
            lam0 = (a0 - c * zb) * z + (b0 - d * zb)
            nu0 = (a0 - c * base) * z + (b0 - d * base)
            row_r = 0.0
            row_i = 0.0
            for t in range(-n_t, n_t + 1):
                lam = lam0 + t * w
                nu = nu0 + t * w
                anu = np.abs(nu)
                pd = anu / aw
                if pd < best_pd:
                    best_pd = pd
                X = nu / lam
                if is_phi:
                    al2 = lam.real * lam.real + lam.imag * lam.imag
                    Z = 4.0 * eta * y / al2
                    if Z >= 0.5:
                        q = (nu.real * nu.real + nu.imag * nu.imag) / al2
                        beta = _beta_closed(q, C, exps, coefs, log_coef)
                    else:
                        beta = _beta_small_Z(Z, a_beta, b_beta)
                    val = _cpow_int(lam, 2 * k - 2) * beta * _cpow_int(X, n)
                else:
                    val = _cpow_int(lam, -2 * k) * _cpow_int(X, n)
                row_r += val.real
                row_i += val.imag
                if t == -n_t or t == n_t:
                    edge += np.sqrt(val.real * val.real + val.imag * val.imag)
            # Neumaier merge of the row into the point accumulators
            tr = sr + row_r
            if abs(sr) >= abs(row_r):
                sc_r += (sr - tr) + row_r
            else:
                sc_r += (row_r - tr) + sr
            sr = tr
            ti = si + row_i
            if abs(si) >= abs(row_i):
                sc_i += (si - ti) + row_i
            else:
                sc_i += (row_i - ti) + si
            si = ti
            if shell[ri]:
                tshr = shr + row_r
                if abs(shr) >= abs(row_r):
                    shc_r += (shr - tshr) + row_r
                else:
                    shc_r += (row_r - tshr) + shr
                shr = tshr
                tshi = shi + row_i
                if abs(shi) >= abs(row_i):
                    shc_i += (shi - tshi) + row_i
                else:
                    shc_i += (row_i - tshi) + shi
                shi = tshi
        out[pi] = 2.0 * complex(sr + sc_r, si + sc_i)
        tr_ = shr + shc_r
        ti_ = shi + shc_i
        # outer (c,d) shell plus the integrated |t| = n_t boundary estimate
        t_tail = edge * n_t / (2 * k - 1) if n_t > 0 else 0.0
        tails[pi] = 2.0 * (np.sqrt(tr_ * tr_ + ti_ * ti_) + t_tail)
        min_pd[pi] = best_pd
    return out, tails, min_pd


def _eval_numpy(rows, shell, n_t, zs, base, k, n, is_phi, C, exps, coefs, log_coef):
    """Vectorized fallback with the same enumeration order and row-block merge."""
    out = np.zeros(len(zs), dtype=np.complex128)
    tails = np.zeros(len(zs), dtype=np.float64)
    min_pd = np.full(len(zs), np.inf)
    zb = np.conj(base)
    eta = base.imag
    ts = np.arange(-n_t, n_t + 1, dtype=np.float64)
    a_beta, b_beta = 2 * k - 1, -n
    block = max(1, (1 << 21) // (2 * n_t + 1))  # bound temporaries to a few MB
    np_err = np.seterr(all="ignore")
    for pi, z in enumerate(zs):
        y = z.imag
        total = 0.0 + 0.0j
        tail_total = 0.0 + 0.0j
        edge_acc = 0.0
        for lo in range(0, rows.shape[0], block):
            rr = rows[lo : lo + block]
            sh = shell[lo : lo + block]
            c = rr[:, 0].astype(np.float64)
            d = rr[:, 1].astype(np.float64)
            a0 = rr[:, 2].astype(np.float64)
            b0 = rr[:, 3].astype(np.float64)
            w = c * z + d
            lam = ((a0 - c * zb) * z + (b0 - d * zb))[:, None] + ts[None, :] * w[:, None]
            nu = ((a0 - c * base) * z + (b0 - d * base))[:, None] + ts[None, :] * w[:, None]
            X = nu / lam
            pd = np.abs(nu) / np.abs(w)[:, None]
            min_pd[pi] = min(min_pd[pi], pd.min())
            edge_cols = [0, lam.shape[1] - 1] if n_t > 0 else []
            if is_phi:
                al2 = np.abs(lam) ** 2
                Z = 4.0 * eta * y / al2
                q = np.abs(X) ** 2
                beta = np.full(Z.shape, C)
                for e, s in zip(exps, coefs):
                    beta += s * q ** float(e)
                if log_coef != 0.0:
                    beta += log_coef * np.log(q)
                small = Z < 0.5
                if small.any():
                    Zs = Z[small]
                    acc = np.zeros_like(Zs)
                    coef = 1.0
                    zpow = Zs**a_beta
                    for i in range(220):
                        term = coef * zpow / (a_beta + i)
                        acc += term
                        if i > 2 and np.all(np.abs(term) <= 1e-18 * np.abs(acc)):
                            break
                        coef = coef * (i + 1.0 - b_beta) / (i + 1.0)
                        zpow = zpow * Zs
                    beta[small] = acc
                vals = lam ** (2 * k - 2) * beta * X**n
            else:
                vals = lam ** (-2 * k) * X**n
            row_sums = vals.sum(axis=1)
            total += row_sums.sum()
            tail_total += row_sums[sh].sum()
            if edge_cols:
                edge_acc += float(np.abs(vals[:, edge_cols]).sum())
        out[pi] = 2.0 * total
        t_tail = edge_acc * n_t / (2 * k - 1) if n_t > 0 else 0.0
        tails[pi] = 2.0 * (abs(tail_total) + t_tail)
    np.seterr(**np_err)
    return out, tails, min_pd


def eval_float64(rows, shell, n_t, zs, base, k, n, is_phi):
    """Evaluate the truncated series at float64 for an array of points."""
    if is_phi:
        C, exps, coefs, log_coef = beta_float_tables(k, n)
    else:
        C, exps, coefs, log_coef = 0.0, np.zeros(0, dtype=np.int64), np.zeros(0), 0.0
    zs = np.asarray(zs, dtype=np.complex128)
    if HAVE_NUMBA:
        return _eval_kernel(
            rows, shell, n_t, zs, complex(base), k, n, is_phi, C, exps, coefs, log_coef
        )
    return _eval_numpy(
        rows, shell, n_t, zs, complex(base), k, n, is_phi, C, exps, coefs, log_coef
    )
