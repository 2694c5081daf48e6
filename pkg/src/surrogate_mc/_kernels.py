"""
Compiled inner loops shared by :mod:`features` and :mod:`anneal`.

Layout conventions
------------------
``V`` is a ``(3, N)`` array of transforms of the mean-removed series:
row 0 centered values, row 1 absolute values, row 2 squares. In
deterministic-target mode only row 0 is used and holds the raw series.
Feature entries are flattened term by term; entry ``offsets[k] + tau - 1``
is lag ``tau`` of term ``k``.
"""
import numba as nb
import numpy as np

STATUS_RUNNING = 0
STATUS_GOAL = 1
STATUS_MAX_ITER = 2
STATUS_FROZEN = 3

# float parameter slots for anneal_chunk
P_T, P_DELTA, P_GOAL, P_COOL, P_REMELT, P_BEST = range(6)
# integer counter slots for anneal_chunk
(I_ITER, I_ACCEPTED, I_STAGE_SUCC, I_STAGE_TOT, I_FREEZES, I_SINCE_RECOMP,
 I_STATUS, I_MAX_SUCC, I_MAX_TOT, I_MAX_ITER, I_RECOMP_EVERY, I_LOG_EVERY,
 I_NOUT) = range(13)

_jit = nb.njit(cache=True, nogil=True)


@_jit
def lag_sums(V, fk, gk, lags, offsets, circular, out):
    n = V.shape[1]
    for k in range(fk.shape[0]):
        f = V[fk[k]]
        g = V[gk[k]]
        for tau in range(1, lags[k] + 1):
            s = 0.0
            if circular:
                for t in range(n):
                    s += f[t] * g[(t - tau + n) % n]
            else:
                for t in range(tau, n):
                    s += f[t] * g[t - tau]
            out[offsets[k] + tau - 1] = s


@_jit
def swap_lag_deltas(V, fk, gk, lags, offsets, circular, i, j, dS):
    """Change of every lag sum if positions ``i`` and ``j`` were exchanged.

    Only products whose index pair contains ``i`` or ``j`` change: those
    ending at ``i`` or ``j`` and those starting there, four per lag.
    """
    n = V.shape[1]
    for k in range(fk.shape[0]):
        f = V[fk[k]]
        g = V[gk[k]]
        fi = f[i]
        fj = f[j]
        gi = g[i]
        gj = g[j]
        dg = gj - gi
        base = offsets[k] - 1
        for tau in range(1, lags[k] + 1):
            d = 0.0
            # products f[t] g[t - tau] with t = i or t = j
            s = i - tau
            if s < 0 and circular:
                s += n
            if s >= 0:
                d += fj * (gi if s == j else g[s]) - fi * g[s]
            s = j - tau
            if s < 0 and circular:
                s += n
            if s >= 0:
                d += fi * (gj if s == i else g[s]) - fj * g[s]
            # products whose lagged partner is i or j
            t = i + tau
            if t >= n and circular:
                t -= n
            if t < n and t != j:
                d += f[t] * dg
            t = j + tau
            if t >= n and circular:
                t -= n
            if t < n and t != i:
                d -= f[t] * dg
            dS[base + tau] = d


@_jit
def evaluate(S, dS, use_dS, scale, target, weight, tol, literal):
    """Objective and the number of entries whose discrepancy exceeds ``tol``."""
    acc = 0.0
    st = 0.0
    sc = 0.0
    nout = 0
    for e in range(S.shape[0]):
        s = S[e]
        if use_dS:
            s += dS[e]
        c = s * scale[e]
        d = target[e] - c
        if literal:
            st += weight[e] * target[e]
            sc += weight[e] * c
        else:
            acc += weight[e] * abs(d)
        if abs(d) > tol[e]:
            nout += 1
    if literal:
        return abs(st - sc), nout
    return acc, nout


@_jit
def mse(z, y):
    acc = 0.0
    for t in range(z.shape[0]):
        d = z[t] - y[t]
        acc += d * d
    return acc / z.shape[0]


@_jit
def mse_swap(z, y, i, j):
    """Change in mean squared error if ``z[i]`` and ``z[j]`` were exchanged."""
    a = z[j] - y[i]
    b = z[i] - y[j]
    c = z[i] - y[i]
    e = z[j] - y[j]
    return (a * a + b * b - c * c - e * e) / z.shape[0]


@_jit
def swap_columns(V, raw, i, j):
    for r in range(V.shape[0]):
        tmp = V[r, i]
        V[r, i] = V[r, j]
        V[r, j] = tmp
    tmp = raw[i]
    raw[i] = raw[j]
    raw[j] = tmp


@_jit
def anneal_chunk(V, raw, fk, gk, lags, offsets, circular, S, scale, target,
                 weight, tol, literal, target_mode, yt, ii, jj, uu,
                 fpar, ipar, traj):
    """Run proposals ``ii, jj, uu`` until one is exhausted or the run stops.

    State lives in ``fpar``/``ipar`` so consecutive chunks continue the same
    chain. Returns the number of trajectory rows written.
    """
    dS = np.zeros(S.shape[0])
    nrec = 0
    T = fpar[P_T]
    delta = fpar[P_DELTA]
    goal = fpar[P_GOAL]
    best = fpar[P_BEST]
    it = ipar[I_ITER]
    for p in range(ii.shape[0]):
        if it >= ipar[I_MAX_ITER]:
            ipar[I_STATUS] = STATUS_MAX_ITER
            break
        i = ii[p]
        j = jj[p]
        it += 1
        if target_mode:
            new = delta + mse_swap(raw, yt, i, j)
            nout = 1
        else:
            swap_lag_deltas(V, fk, gk, lags, offsets, circular, i, j, dS)
            new, nout = evaluate(S, dS, True, scale, target, weight, tol, literal)
        cost = new - delta
        if cost <= 0.0:
            accept = True
        elif T > 0.0:
            accept = uu[p] < np.exp(-cost / T)
        else:
            accept = False
        if accept:
            swap_columns(V, raw, i, j)
            if not target_mode:
                for e in range(S.shape[0]):
                    S[e] += dS[e]
            delta = new
            ipar[I_NOUT] = nout
            ipar[I_ACCEPTED] += 1
            ipar[I_STAGE_SUCC] += 1
            ipar[I_SINCE_RECOMP] += 1
            if ipar[I_SINCE_RECOMP] >= ipar[I_RECOMP_EVERY]:
                ipar[I_SINCE_RECOMP] = 0
                if target_mode:
                    delta = mse(raw, yt)
                else:
                    lag_sums(V, fk, gk, lags, offsets, circular, S)
                    delta, nout = evaluate(S, dS, False, scale, target, weight, tol, literal)
                    ipar[I_NOUT] = nout
            if delta < best:
                best = delta
        ipar[I_STAGE_TOT] += 1
        if it % ipar[I_LOG_EVERY] == 0 and nrec < traj.shape[0]:
            traj[nrec, 0] = it
            traj[nrec, 1] = delta
            traj[nrec, 2] = T
            nrec += 1
        if accept and (delta <= goal or ipar[I_NOUT] == 0):
            ipar[I_STATUS] = STATUS_GOAL
            break
        if ipar[I_STAGE_SUCC] >= ipar[I_MAX_SUCC] or ipar[I_STAGE_TOT] >= ipar[I_MAX_TOT]:
            if ipar[I_STAGE_SUCC] == 0:
                ipar[I_FREEZES] += 1
                if ipar[I_FREEZES] >= 2:
                    ipar[I_STATUS] = STATUS_FROZEN
                    ipar[I_STAGE_SUCC] = 0
                    ipar[I_STAGE_TOT] = 0
                    break
                T *= fpar[P_REMELT]
            else:
                ipar[I_FREEZES] = 0
                T *= fpar[P_COOL]
            ipar[I_STAGE_SUCC] = 0
            ipar[I_STAGE_TOT] = 0
    ipar[I_ITER] = it
    fpar[P_T] = T
    fpar[P_DELTA] = delta
    fpar[P_BEST] = best
    return nrec
