"""Hot numerical kernels.

Each kernel has a loop implementation compiled with numba and a vectorized
numpy implementation. The public name points at the numba version unless
numba is unavailable or disabled through ``EXPENERGY_DISABLE_NUMBA``. Both
versions stay importable (``*_loops`` and ``*_numpy``) so tests and the
benchmark can compare them directly.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

# ----------------------------------------------------------- single mode
#
# Two-dimensional recurrences over (m, n) lose all accuracy at cutoffs of a
# few hundred: their error growth is combinatorial while the true entries
# stay bounded by 1. The single-mode kernels instead run a three-term
# recurrence along each diagonal m - n = const (Jacobi polynomials for
# squeezing, Laguerre functions for displacement). Along a diagonal the
# sequence only moves from its growing regime into its oscillating one, where
# forward recursion is stable. Starting values are formed in log space and a
# running scale keeps deep-tail entries from underflowing prematurely.

_RESCALE = 1e200
_LOG_RESCALE = 200 * math.log(10.0)
_LOG_FLOOR = -600.0


@njit
def squeezing_matrix_loops(r, box):
    """``<m|S(r)|n>`` for ``m, n <= box`` with ``S(r) = exp(r(a^2 - a^dag^2)/2)``.

    On each parity sector ``<2u+d+p|S|2u+p>`` (``d`` pairs above the
    diagonal) is ``(-1)^(u+d) t^d ch^(-k) N_u P_u^(k-1, d)(2t^2 - 1)`` with
    ``t = tanh r``, ``ch = cosh r``, ``k = p + 1/2`` and ``N_u`` the
    normalization ``sqrt(u! G(u+d+k)/((u+d)! G(u+k)))``. Entries above the
    diagonal follow from ``S(r)^T = S(-r)``.
    """
    ch = math.cosh(r)
    t = math.tanh(r)
    y = 2.0 * t * t
    out = np.zeros((box + 1, box + 1))
    for p in range(2):
        k2 = p + 0.5
        al = p - 0.5
        umax = (box - p) // 2
        for d in range(umax + 1):
            be = float(d)
            if t == 0.0:
                if d > 0:
                    continue
                lg = -k2 * math.log(ch)
            else:
                lg = d * math.log(t) - k2 * math.log(ch) + 0.5 * (math.lgamma(d + k2) - math.lgamma(d + 1.0) - math.lgamma(k2))
            off = 0.0
            if lg < _LOG_FLOOR:
                off = _LOG_FLOOR - lg
            q_prev = 0.0
            q = math.exp(lg + off)
            for u in range(umax - d + 1):
                v = q * math.exp(-off) if off != 0.0 else q
                if (u + d) % 2 == 1:
                    v = -v
                m = 2 * (u + d) + p
                n = 2 * u + p
                out[m, n] = v
                if d > 0:
                    out[n, m] = -v if d % 2 == 1 else v
                r1 = math.sqrt((u + 1) * (u + d + k2) / ((u + d + 1) * (u + k2)))
                if u == 0:
                    q_new = r1 * ((al + 1.0) - (al + be + 2.0) * (1.0 - 0.5 * y)) * q
                else:
                    s = 2.0 * u + al + be
                    A = (s + 1.0) * ((s + 2.0) * s * y - ((s + 2.0) * s - al * al + be * be))
                    B = 2.0 * (u + al) * (u + be) * (s + 2.0)
                    D = 2.0 * (u + 1.0) * (u + al + be + 1.0) * s
                    r0 = math.sqrt(u * (u + d + k2 - 1.0) / ((u + d) * (u + k2 - 1.0)))
                    q_new = r1 * (A * q - B * r0 * q_prev) / D
                q_prev = q
                q = q_new
                if abs(q) > _RESCALE:
                    q_prev /= _RESCALE
                    q /= _RESCALE
                    off -= _LOG_RESCALE
    return out


def _diag_start(lg):
    """Scaled starting values and the log offsets that undo the scaling."""
    off = np.where(lg < _LOG_FLOOR, _LOG_FLOOR - lg, 0.0)
    return np.exp(lg + off), off


def squeezing_matrix_numpy(r, box):
    from math import lgamma

    ch, t = math.cosh(r), math.tanh(r)
    y = 2.0 * t * t
    out = np.zeros((box + 1, box + 1))
    for p in range(2):
        k2, al = p + 0.5, p - 0.5
        umax = (box - p) // 2
        if umax < 0:
            continue
        d = np.arange(umax + 1, dtype=np.float64)
        if t == 0.0:
            d = d[:1]
            lg = np.array([-k2 * math.log(ch)])
        else:
            lgam = np.array([lgamma(x + k2) - lgamma(x + 1.0) for x in d])
            lg = d * math.log(t) - k2 * math.log(ch) + 0.5 * (lgam - lgamma(k2))
        q, off = _diag_start(lg)
        q_prev = np.zeros_like(q)
        di = d.astype(np.int64)
        be = d
        for u in range(umax + 1):
            live = di <= umax - u
            if not live.any():
                break
            dl = di[live]
            v = q[live] * np.exp(-off[live])
            v = np.where((u + dl) % 2 == 1, -v, v)
            m = 2 * (u + dl) + p
            n = 2 * u + p
            out[m, n] = v
            up = dl > 0
            out[n, m[up]] = np.where(dl[up] % 2 == 1, -v[up], v[up])
            r1 = np.sqrt((u + 1) * (u + d + k2) / ((u + d + 1) * (u + k2)))
            if u == 0:
                q_new = r1 * ((al + 1.0) - (al + be + 2.0) * (1.0 - 0.5 * y)) * q
            else:
                s = 2.0 * u + al + be
                A = (s + 1.0) * ((s + 2.0) * s * y - ((s + 2.0) * s - al * al + be * be))
                B = 2.0 * (u + al) * (u + be) * (s + 2.0)
                D = 2.0 * (u + 1.0) * (u + al + be + 1.0) * s
                r0 = np.sqrt(u * (u + d + k2 - 1.0) / ((u + d) * (u + k2 - 1.0)))
                q_new = r1 * (A * q - B * r0 * q_prev) / D
            q_prev, q = q, q_new
            big = np.abs(q) > _RESCALE
            q_prev[big] /= _RESCALE
            q[big] /= _RESCALE
            off[big] -= _LOG_RESCALE
    return out


@njit
def displacement_matrix_loops(alpha, box):
    """``<m|D(alpha)|n>`` for ``m, n <= box`` with ``D = exp(alpha a^dag - conj(alpha) a)``.

    Along the diagonal ``m = j + k`` the magnitude is the normalized Laguerre
    function ``sqrt(j!/(j+k)!) x^(k/2) e^(-x/2) L_j^(k)(x)``, ``x = |alpha|^2``,
    and the phase is ``e^(i k arg alpha)``; entries above the diagonal carry
    ``(-1)^k e^(-i k arg alpha)``.
    """
    x = abs(alpha) ** 2
    th = math.atan2(alpha.imag, alpha.real)
    out = np.zeros((box + 1, box + 1), dtype=np.complex128)
    for k in range(box + 1):
        if x == 0.0:
            if k > 0:
                continue
            lg = 0.0
        else:
            lg = 0.5 * k * math.log(x) - 0.5 * x - 0.5 * math.lgamma(k + 1.0)
        off = 0.0
        if lg < _LOG_FLOOR:
            off = _LOG_FLOOR - lg
        ph = complex(math.cos(k * th), math.sin(k * th))
        phu = ph.conjugate()
        if k % 2 == 1:
            phu = -phu
        g_prev = 0.0
        g = math.exp(lg + off)
        for j in range(box - k + 1):
            v = g * math.exp(-off) if off != 0.0 else g
            out[j + k, j] = ph * v
            if k > 0:
                out[j, j + k] = phu * v
            g_new = ((2 * j + 1 + k - x) * g - math.sqrt(j * (j + k)) * g_prev) / math.sqrt((j + 1) * (j + 1 + k))
            g_prev = g
            g = g_new
            if abs(g) > _RESCALE:
                g_prev /= _RESCALE
                g /= _RESCALE
                off -= _LOG_RESCALE
    return out


def displacement_matrix_numpy(alpha, box):
    from math import lgamma

    alpha = complex(alpha)
    x = abs(alpha) ** 2
    th = math.atan2(alpha.imag, alpha.real)
    out = np.zeros((box + 1, box + 1), dtype=np.complex128)
    k = np.arange(box + 1, dtype=np.float64)
    if x == 0.0:
        k = k[:1]
        lg = np.zeros(1)
    else:
        lg = 0.5 * k * math.log(x) - 0.5 * x - 0.5 * np.array([lgamma(v + 1.0) for v in k])
    g, off = _diag_start(lg)
    g_prev = np.zeros_like(g)
    ki = k.astype(np.int64)
    ph = np.exp(1j * ki * th)
    phu = np.where(ki % 2 == 1, -1.0, 1.0) * ph.conj()
    for j in range(box + 1):
        live = ki <= box - j
        if not live.any():
            break
        kl = ki[live]
        v = g[live] * np.exp(-off[live])
        out[j + kl, j] = ph[live] * v
        up = kl > 0
        out[j, j + kl[up]] = phu[live][up] * v[up]
        g_new = ((2 * j + 1 + k - x) * g - np.sqrt(j * (j + k)) * g_prev) / np.sqrt((j + 1) * (j + 1 + k))
        g_prev, g = g, g_new
        big = np.abs(g) > _RESCALE
        g_prev[big] /= _RESCALE
        g[big] /= _RESCALE
        off[big] -= _LOG_RESCALE
    return out


# ------------------------------------------------------------- two mode


@njit
def beamsplitter_sectors_loops(t00, t01, t10, t11, box):
    """Fixed-total blocks of a two-mode passive gate.

    The gate maps ``a^dag -> t00 a^dag + t10 b^dag`` and
    ``b^dag -> t01 a^dag + t11 b^dag``. ``out[N, a, i]`` is the amplitude
    ``<a, N-a| U |i, N-i>``. Sector ``N`` is built from sector ``N-1`` by
    writing ``N |i, N-i>`` as ``a^dag a + b^dag b`` applied to it; weighting
    both ladder paths this way keeps every sector unitary to rounding.
    """
    out = np.zeros((box + 1, box + 1, box + 1), dtype=np.complex128)
    out[0, 0, 0] = 1.0
    for N in range(1, box + 1):
        for i in range(N + 1):
            si = math.sqrt(i)
            sj = math.sqrt(N - i)
            for a in range(N + 1):
                sa = math.sqrt(a)
                sb = math.sqrt(N - a)
                v = 0j
                if i > 0:
                    if a > 0:
                        v += si * t00 * sa * out[N - 1, a - 1, i - 1]
                    if a < N:
                        v += si * t10 * sb * out[N - 1, a, i - 1]
                if i < N:
                    if a > 0:
                        v += sj * t01 * sa * out[N - 1, a - 1, i]
                    if a < N:
                        v += sj * t11 * sb * out[N - 1, a, i]
                out[N, a, i] = v / N
    return out


def beamsplitter_sectors_numpy(t00, t01, t10, t11, box):
    out = np.zeros((box + 1, box + 1, box + 1), dtype=np.complex128)
    out[0, 0, 0] = 1.0
    sq = np.sqrt(np.arange(box + 2))
    for N in range(1, box + 1):
        P = np.zeros((N + 1, N + 1), dtype=np.complex128)
        P[:N, :N] = out[N - 1, :N, :N]  # P[a, i] = <a, N-1-a|U|i, N-1-i>
        Pa = np.zeros_like(P)
        Pa[1:] = P[:-1]  # row a-1
        idx = np.arange(N + 1)
        sa, sb = sq[idx][:, None], sq[N - idx][:, None]
        si, sj = sq[idx][None, :], sq[N - idx][None, :]
        Pai = np.zeros_like(P)
        Pai[:, 1:] = Pa[:, :-1]  # row a-1, column i-1
        Pi = np.zeros_like(P)
        Pi[:, 1:] = P[:, :-1]  # column i-1
        out[N, : N + 1, : N + 1] = (si * (t00 * sa * Pai + t10 * sb * Pi) + sj * (t01 * sa * Pa + t11 * sb * P)) / N
    return out


@njit
def apply_sectors_loops(psi, sect, box):
    """Apply fixed-total blocks to ``psi`` of shape ``(box+1, box+1, R)``."""
    R = psi.shape[2]
    out = np.zeros_like(psi)
    for N in range(box + 1):
        for a in range(N + 1):
            for i in range(N + 1):
                w = sect[N, a, i]
                if w == 0:
                    continue
                for r in range(R):
                    out[a, N - a, r] += w * psi[i, N - i, r]
    return out


def apply_sectors_numpy(psi, sect, box):
    out = np.zeros_like(psi)
    for N in range(box + 1):
        a = np.arange(N + 1)
        out[a, N - a] = sect[N, : N + 1, : N + 1] @ psi[a, N - a]
    return out


# ------------------------------------------------- Gaussian Fock expansion


@njit
def gaussian_fock_loops(A, b, c, box):
    """Fock amplitudes of ``exp(xi^T A xi/2 + b^T xi + c)`` up to total ``box``.

    Returns a flat array in row-major order of the ``(box+1,)*m`` tensor;
    entries with total above ``box`` are zero.
    """
    m = b.shape[0]
    dim = (box + 1) ** m
    out = np.zeros(dim, dtype=np.complex128)
    stride = np.ones(m, dtype=np.int64)
    for k in range(m - 2, -1, -1):
        stride[k] = stride[k + 1] * (box + 1)
    n = np.zeros(m, dtype=np.int64)
    out[0] = np.exp(c)
    for flat in range(1, dim):
        # increment the multi-index
        k = m - 1
        while True:
            n[k] += 1
            if n[k] <= box:
                break
            n[k] = 0
            k -= 1
        tot = 0
        for k in range(m):
            tot += n[k]
        if tot > box:
            continue
        i = m - 1
        while n[i] == 0:
            i -= 1
        prev = flat - stride[i]
        v = b[i] * out[prev]
        for j in range(m):
            nj = n[j] - (1 if j == i else 0)
            if nj > 0:
                v += A[i, j] * math.sqrt(nj) * out[prev - stride[j]]
        out[flat] = v / math.sqrt(n[i])
    return out


def gaussian_fock_numpy(A, b, c, box):
    m = len(b)
    psi = _gaussian_fock_rec(np.asarray(A), np.asarray(b), complex(c), box)
    return psi.reshape(-1)


def _gaussian_fock_rec(A, b, c, box):
    """Recursive on the last mode: its ``n = 0`` slice is the same problem on
    one fewer mode, and higher slices follow a three-term recurrence."""
    m = len(b)
    if m == 0:
        return np.array(np.exp(c), dtype=np.complex128)
    base = _gaussian_fock_rec(A[:-1, :-1], b[:-1], c, box)
    psi = np.zeros((box + 1,) * m, dtype=np.complex128)
    psi[..., 0] = base
    sq = np.sqrt(np.arange(box + 1))
    l = m - 1
    for n in range(box):
        cur = psi[..., n]
        nxt = b[l] * cur
        if n > 0:
            nxt = nxt + A[l, l] * sq[n] * psi[..., n - 1]
        for j in range(l):
            sh = np.zeros_like(cur)
            idx = [slice(None)] * l
            idx[j] = slice(1, None)
            src = [slice(None)] * l
            src[j] = slice(None, -1)
            wshape = [1] * l
            wshape[j] = box
            sh[tuple(idx)] = cur[tuple(src)] * sq[1:].reshape(wshape)
            nxt = nxt + A[l, j] * sh
        psi[..., n + 1] = nxt / sq[n + 1]
    if m > 1:
        tot = np.zeros((box + 1,) * m, dtype=np.int64)
        ar = np.arange(box + 1)
        for ax in range(m):
            shape = [1] * m
            shape[ax] = box + 1
            tot = tot + ar.reshape(shape)
        psi[tot > box] = 0
    return psi


# --------------------------------------------- superposition pair sums


@njit
def _inv_sqrt_det(M):
    r = M.shape[0]
    if r == 1:
        return 1.0 / np.sqrt(M[0, 0])
    ev = np.linalg.eigvals(M)
    out = 1.0 + 0j
    for k in range(r):
        out /= np.sqrt(ev[k])
    return out


@njit
def _pair_term_small(r, AJ, BJp, u, v):
    """``(log-free) det(M)^(-1/2)`` and ``u.x + v.y`` for ``r <= 2`` in closed form.

    With all eigenvalues of ``M = I - B A`` in the right half plane their
    arguments sum to less than ``pi`` in magnitude for ``r <= 2``, so the
    principal square root of ``det M`` picks the same branch as the product
    of per-eigenvalue roots.
    """
    if r == 1:
        M = 1.0 - BJp[0, 0] * AJ[0, 0]
        x0 = (v[0] + BJp[0, 0] * u[0]) / M
        y0 = u[0] + AJ[0, 0] * x0
        return 1.0 / np.sqrt(M), u[0] * x0 + v[0] * y0
    m00 = 1.0 - (BJp[0, 0] * AJ[0, 0] + BJp[0, 1] * AJ[1, 0])
    m01 = -(BJp[0, 0] * AJ[0, 1] + BJp[0, 1] * AJ[1, 1])
    m10 = -(BJp[1, 0] * AJ[0, 0] + BJp[1, 1] * AJ[1, 0])
    m11 = 1.0 - (BJp[1, 0] * AJ[0, 1] + BJp[1, 1] * AJ[1, 1])
    det = m00 * m11 - m01 * m10
    r0 = v[0] + BJp[0, 0] * u[0] + BJp[0, 1] * u[1]
    r1 = v[1] + BJp[1, 0] * u[0] + BJp[1, 1] * u[1]
    x0 = (m11 * r0 - m01 * r1) / det
    x1 = (m00 * r1 - m10 * r0) / det
    y0 = u[0] + AJ[0, 0] * x0 + AJ[0, 1] * x1
    y1 = u[1] + AJ[1, 0] * x0 + AJ[1, 1] * x1
    return 1.0 / np.sqrt(det), u[0] * x0 + u[1] * x1 + v[0] * y0 + v[1] * y1


@njit
def pair_sum_loops(coefs, Ar, br, cr, rows):
    """Double sum ``sum_{J, J'} c_J conj(c_J') <G_J'|G_J>`` over reduced states.

    Args:
        coefs: ``(T,)`` branch coefficients.
        Ar: ``(T, r, r)`` reduced Bargmann matrices (shared by all points).
        br: ``(G, T, r)`` reduced linear terms, one set per evaluation point.
        cr: ``(G, T)`` reduced constants.
        rows: indices ``J`` handled by this call (lets callers split work).

    Returns:
        ``(G,)`` complex partial sums over ``J in rows`` and all ``J'``.
    """
    G = br.shape[0]
    T = coefs.shape[0]
    r = Ar.shape[1]
    out = np.zeros(G, dtype=np.complex128)
    eye = np.eye(r, dtype=np.complex128)
    Bc = np.conj(Ar)
    bc = np.conj(br)
    cc = np.conj(cr)
    for jj in range(rows.shape[0]):
        J = rows[jj]
        AJ = Ar[J]
        for Jp in range(T):
            w = coefs[J] * np.conj(coefs[Jp])
            if w == 0:
                continue
            B = Bc[Jp]
            if r == 0:
                for g in range(G):
                    out[g] += w * np.exp(cr[g, J] + cc[g, Jp])
            elif r <= 2:
                for g in range(G):
                    df, q = _pair_term_small(r, AJ, B, br[g, J], bc[g, Jp])
                    out[g] += w * df * np.exp(cr[g, J] + cc[g, Jp] + 0.5 * q)
            else:
                M = eye - B @ AJ
                P = np.ascontiguousarray(np.linalg.inv(M))
                df = _inv_sqrt_det(M)
                for g in range(G):
                    u = np.ascontiguousarray(br[g, J])
                    v = np.ascontiguousarray(bc[g, Jp])
                    x = P @ (v + B @ u)
                    y = u + AJ @ x
                    q = 0j
                    for k in range(r):
                        q += u[k] * x[k] + v[k] * y[k]
                    out[g] += w * df * np.exp(cr[g, J] + cc[g, Jp] + 0.5 * q)
    return out


def pair_sum_numpy(coefs, Ar, br, cr, rows):
    G = br.shape[0]
    r = Ar.shape[1]
    out = np.zeros(G, dtype=np.complex128)
    B = np.conj(Ar)  # (T, r, r)
    eye = np.eye(r)
    for J in rows:
        w = coefs[J] * np.conj(coefs)  # (T,)
        expo = cr[:, J][:, None] + np.conj(cr)  # (G, T)
        if r > 0:
            M = eye - B @ Ar[J]  # (T, r, r)
            P = np.linalg.inv(M)
            ev = np.linalg.eigvals(M)
            df = np.prod(1.0 / np.sqrt(ev), axis=-1)
            u = br[:, J, :]  # (G, r)
            v = np.conj(br)  # (G, T, r)
            rhs = v + np.einsum("tab,gb->gta", B, u)
            x = np.einsum("tab,gtb->gta", P, rhs)
            y = u[:, None, :] + np.einsum("ab,gtb->gta", Ar[J], x)
            q = np.einsum("ga,gta->gt", u, x) + np.einsum("gta,gta->gt", v, y)
            expo = expo + 0.5 * q
        else:
            df = np.ones(len(coefs))
        out += np.sum(w * df * np.exp(expo), axis=1)
    return out


# ------------------------------------------------------------- dispatch

if HAVE_NUMBA:
    squeezing_matrix = squeezing_matrix_loops
    displacement_matrix = displacement_matrix_loops
    beamsplitter_sectors = beamsplitter_sectors_loops
    apply_sectors = apply_sectors_loops
    gaussian_fock = gaussian_fock_loops
    pair_sum = pair_sum_loops
else:
    squeezing_matrix = squeezing_matrix_numpy
    displacement_matrix = displacement_matrix_numpy
    beamsplitter_sectors = beamsplitter_sectors_numpy
    apply_sectors = apply_sectors_numpy
    gaussian_fock = gaussian_fock_numpy
    pair_sum = pair_sum_numpy
