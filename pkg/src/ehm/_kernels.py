"""Hot numerical loops, compiled with numba when available.

Every kernel is a plain scalar loop over transfer-matrix recurrences so that
the same source runs (slowly) without numba.  Phases are passed as arrays and
iterated sequentially inside the kernel; results are deterministic for a fixed
argument order.
"""

import cmath
import math

import numpy as np

try:
    import numba

    def _jit(fn):
        return numba.njit(cache=True, nogil=True)(fn)

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    def _jit(fn):
        return fn

    HAVE_NUMBA = False

TWO_PI = 2.0 * math.pi

# variant codes shared with ehm.operator
VARIANT_A = 0
VARIANT_ABAR = 1
VARIANT_M = 2


@_jit
def abs_c_sq(x, alpha, l1, l2, l3):
    # |c|^2(x) = l1^2+l2^2+l3^2 + 2 l2 (l1+l3) cos(phi) + 2 l1 l3 cos(2 phi)
    phi = TWO_PI * (x + 0.5 * alpha)
    return (l1 * l1 + l2 * l2 + l3 * l3
            + 2.0 * l2 * (l1 + l3) * math.cos(phi)
            + 2.0 * l1 * l3 * math.cos(2.0 * phi))


@_jit
def lyapunov_abar(x0s, alpha, energy, l1, l2, l3, n_iter):
    """Per-phase (1/N) log-norm of the renormalized transfer product."""
    n_ph = x0s.shape[0]
    out = np.empty(n_ph)
    for p in range(n_ph):
        x = x0s[p] % 1.0
        m11 = 1.0
        m12 = 0.0
        m21 = 0.0
        m22 = 1.0
        acc = 0.0
        c_here = math.sqrt(abs_c_sq(x, alpha, l1, l2, l3))
        c_prev = math.sqrt(abs_c_sq(x - alpha, alpha, l1, l2, l3))
        for k in range(n_iter):
            s = 1.0 / math.sqrt(c_here * c_prev)
            a11 = (energy - 2.0 * math.cos(TWO_PI * x)) * s
            a12 = -c_prev * s
            a21 = c_here * s
            n11 = a11 * m11 + a12 * m21
            n12 = a11 * m12 + a12 * m22
            n21 = a21 * m11
            n22 = a21 * m12
            m11 = n11
            m12 = n12
            m21 = n21
            m22 = n22
            if k % 32 == 31:
                sc = abs(m11) + abs(m12) + abs(m21) + abs(m22)
                acc += math.log(sc)
                m11 /= sc
                m12 /= sc
                m21 /= sc
                m22 /= sc
            x += alpha
            if x >= 1.0:
                x -= 1.0
            c_prev = c_here
            c_here = math.sqrt(abs_c_sq(x, alpha, l1, l2, l3))
        nrm = math.sqrt(m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22)
        out[p] = (acc + math.log(nrm)) / n_iter
    return out


@_jit
def _step_complex(z, alpha, energy, l1, l2, l3, variant):
    """One cocycle matrix at complex phase z.  Returns four complex entries."""
    phi = TWO_PI * (z + 0.5 * alpha)
    ep = cmath.exp(1j * phi)
    em = 1.0 / ep
    c_here = l1 * em + l2 + l3 * ep
    phi2 = phi - TWO_PI * alpha
    ep2 = cmath.exp(1j * phi2)
    em2 = 1.0 / ep2
    cbar_prev = l1 * ep2 + l2 + l3 * em2
    diag = energy - 2.0 * cmath.cos(TWO_PI * z)
    if variant == 0:      # A = (1/c) [[E-2cos, -cbar(x-a)],[c, 0]]
        return diag / c_here, -cbar_prev / c_here, 1.0 + 0.0j, 0.0j
    elif variant == 2:    # M = c * A
        return diag, -cbar_prev, c_here, 0.0j
    else:                 # ABAR with |c| extended analytically
        ccb_here = c_here * (l1 * ep + l2 + l3 * em)
        c_prev = l1 * em2 + l2 + l3 * ep2
        ccb_prev = c_prev * cbar_prev
        s = 1.0 / cmath.sqrt(cmath.sqrt(ccb_here) * cmath.sqrt(ccb_prev))
        return diag * s, -cmath.sqrt(ccb_prev) * s, cmath.sqrt(ccb_here) * s, 0.0j


@_jit
def lyapunov_complex(x0s, alpha, energy, l1, l2, l3, eps_im, variant, n_iter):
    n_ph = x0s.shape[0]
    out = np.empty(n_ph)
    for p in range(n_ph):
        x = x0s[p] % 1.0
        m11 = 1.0 + 0.0j
        m12 = 0.0j
        m21 = 0.0j
        m22 = 1.0 + 0.0j
        acc = 0.0
        for k in range(n_iter):
            z = x + 1j * eps_im
            a11, a12, a21, a22 = _step_complex(z, alpha, energy, l1, l2, l3, variant)
            n11 = a11 * m11 + a12 * m21
            n12 = a11 * m12 + a12 * m22
            n21 = a21 * m11 + a22 * m21
            n22 = a21 * m12 + a22 * m22
            m11 = n11
            m12 = n12
            m21 = n21
            m22 = n22
            if k % 32 == 31:
                sc = abs(m11) + abs(m12) + abs(m21) + abs(m22)
                acc += math.log(sc)
                m11 /= sc
                m12 /= sc
                m21 /= sc
                m22 /= sc
            x += alpha
            if x >= 1.0:
                x -= 1.0
        nrm = math.sqrt(abs(m11) ** 2 + abs(m12) ** 2 + abs(m21) ** 2 + abs(m22) ** 2)
        out[p] = (acc + math.log(nrm)) / n_iter
    return out


@_jit
def transfer_abar(x0, alpha, energy, l1, l2, l3, n_iter):
    """Transfer product at one phase: (m11,m12,m21,m22, log_scale)."""
    x = x0 % 1.0
    m11 = 1.0
    m12 = 0.0
    m21 = 0.0
    m22 = 1.0
    acc = 0.0
    for k in range(n_iter):
        c_here = math.sqrt(abs_c_sq(x, alpha, l1, l2, l3))
        c_prev = math.sqrt(abs_c_sq(x - alpha, alpha, l1, l2, l3))
        s = 1.0 / math.sqrt(c_here * c_prev)
        a11 = (energy - 2.0 * math.cos(TWO_PI * x)) * s
        a12 = -c_prev * s
        a21 = c_here * s
        n11 = a11 * m11 + a12 * m21
        n12 = a11 * m12 + a12 * m22
        n21 = a21 * m11
        n22 = a21 * m12
        m11 = n11
        m12 = n12
        m21 = n21
        m22 = n22
        if k % 32 == 31:
            sc = abs(m11) + abs(m12) + abs(m21) + abs(m22)
            acc += math.log(sc)
            m11 /= sc
            m12 /= sc
            m21 /= sc
            m22 /= sc
        x += alpha
        if x >= 1.0:
            x -= 1.0
    return m11, m12, m21, m22, acc


@_jit
def rho_track_abar(x0s, alpha, energy, l1, l2, l3, n_iter, center):
    """Angle tracking for the renormalized cocycle.

    Projective increments are unwrapped into (center - pi/2, center + pi/2];
    recentering on the circular mean of the increments removes the fold bias
    when the per-step rotation concentrates near +-pi/2.  Returns per-phase
    (projective sum, full-angle sum, max |full step|, sum of e^{2i delta},
    count of steps far from the branch center).
    """
    n_ph = x0s.shape[0]
    proj = np.empty(n_ph)
    full = np.empty(n_ph)
    peak = np.empty(n_ph)
    circ = np.empty(n_ph, dtype=np.complex128)
    stray = np.empty(n_ph, dtype=np.int64)
    for p in range(n_ph):
        x = x0s[p] % 1.0
        v1 = 1.0
        v2 = 0.0
        sp = 0.0
        sf = 0.0
        mx = 0.0
        cc = 0.0 + 0.0j
        far = 0
        for k in range(n_iter):
            c_here = math.sqrt(abs_c_sq(x, alpha, l1, l2, l3))
            c_prev = math.sqrt(abs_c_sq(x - alpha, alpha, l1, l2, l3))
            s = 1.0 / math.sqrt(c_here * c_prev)
            a11 = (energy - 2.0 * math.cos(TWO_PI * x)) * s
            a12 = -c_prev * s
            a21 = c_here * s
            w1 = a11 * v1 + a12 * v2
            w2 = a21 * v1
            cr = v1 * w2 - v2 * w1
            dt = v1 * w1 + v2 * w2
            d_full = math.atan2(cr, dt)
            d_proj = d_full - center
            d_proj -= math.pi * math.floor(d_proj / math.pi + 0.5)
            d_proj += center
            sp += d_proj
            sf += d_full
            cc += cmath.exp(2j * d_proj)
            if abs(d_proj - center) > 0.45 * math.pi:
                far += 1
            if abs(d_full) > mx:
                mx = abs(d_full)
            nw = math.hypot(w1, w2)
            v1 = w1 / nw
            v2 = w2 / nw
            x += alpha
            if x >= 1.0:
                x -= 1.0
        proj[p] = sp
        full[p] = sf
        peak[p] = mx
        circ[p] = cc
        stray[p] = far
    return proj, full, peak, circ, stray


@_jit
def rho_track_generic(mats, center):
    """Angle tracking over precomputed matrices, shape (N, P, 2, 2) real."""
    n_iter = mats.shape[0]
    n_ph = mats.shape[1]
    proj = np.empty(n_ph)
    full = np.empty(n_ph)
    peak = np.empty(n_ph)
    circ = np.empty(n_ph, dtype=np.complex128)
    stray = np.empty(n_ph, dtype=np.int64)
    for p in range(n_ph):
        v1 = 1.0
        v2 = 0.0
        sp = 0.0
        sf = 0.0
        mx = 0.0
        cc = 0.0 + 0.0j
        far = 0
        for k in range(n_iter):
            w1 = mats[k, p, 0, 0] * v1 + mats[k, p, 0, 1] * v2
            w2 = mats[k, p, 1, 0] * v1 + mats[k, p, 1, 1] * v2
            cr = v1 * w2 - v2 * w1
            dt = v1 * w1 + v2 * w2
            d_full = math.atan2(cr, dt)
            d_proj = d_full - center
            d_proj -= math.pi * math.floor(d_proj / math.pi + 0.5)
            d_proj += center
            sp += d_proj
            sf += d_full
            cc += cmath.exp(2j * d_proj)
            if abs(d_proj - center) > 0.45 * math.pi:
                far += 1
            if abs(d_full) > mx:
                mx = abs(d_full)
            nw = math.hypot(w1, w2)
            v1 = w1 / nw
            v2 = w2 / nw
        proj[p] = sp
        full[p] = sf
        peak[p] = mx
        circ[p] = cc
        stray[p] = far
    return proj, full, peak, circ, stray


@_jit
def sturm_count(diag, off_sq, energy):
    """Number of eigenvalues strictly below `energy` (Sturm sign count)."""
    n = diag.shape[0]
    cnt = 0
    q = 1.0
    for i in range(n):
        if i == 0:
            q = diag[0] - energy
        else:
            q = diag[i] - energy - off_sq[i - 1] / q
        if q == 0.0:
            q = -1e-300
        if q < 0.0:
            cnt += 1
    return cnt


@_jit
def pk_log(theta, alpha, energy, l1, l2, l3, k_steps):
    """log|P_k| and sign for the determinant three-term recurrence.

    P_0 = 1, P_j = (2 cos 2pi(theta+(j-1)a) - E) P_{j-1} - |c|^2(theta+(j-2)a) P_{j-2}.
    """
    if k_steps == 0:
        return 0.0, 1.0
    a = 1.0   # P_{j-1} / scale
    b = 0.0   # P_{j-2} / scale
    acc = 0.0
    x = theta % 1.0
    for j in range(1, k_steps + 1):
        d = 2.0 * math.cos(TWO_PI * x) - energy
        if j == 1:
            new = d * a
        else:
            o2 = abs_c_sq(x - 2.0 * alpha, alpha, l1, l2, l3)
            new = d * a - o2 * b
        m = abs(new)
        if m < 1e-300:
            m = 1e-300
            new = math.copysign(m, new)
        acc += math.log(m)
        b = a / m
        a = new / m
        x += alpha
        if x >= 1.0:
            x -= 1.0
    return acc, math.copysign(1.0, a)


@_jit
def hyperbolic_products(xs, alpha, energy, l1, l2, l3, k_max, log_target, check_every):
    """Right-accumulated products P_k(x) = Abar(x-a) ... Abar(x-ka) on a grid.

    Stops once every grid point has accumulated `log_target` of norm growth
    (then column directions approximate the unstable section).  Returns
    (converged flag, steps done, normalized products (G,4), per-point log norms).
    """
    g = xs.shape[0]
    mats = np.empty((g, 4))
    logs = np.zeros(g)
    for i in range(g):
        mats[i, 0] = 1.0
        mats[i, 1] = 0.0
        mats[i, 2] = 0.0
        mats[i, 3] = 1.0
    shift = 0.0
    done = 0
    converged = 0
    for k in range(1, k_max + 1):
        shift -= alpha
        if shift < 0.0:
            shift += 1.0
        for i in range(g):
            y = xs[i] + shift
            if y >= 1.0:
                y -= 1.0
            c_here = math.sqrt(abs_c_sq(y, alpha, l1, l2, l3))
            c_prev = math.sqrt(abs_c_sq(y - alpha, alpha, l1, l2, l3))
            s = 1.0 / math.sqrt(c_here * c_prev)
            a11 = (energy - 2.0 * math.cos(TWO_PI * y)) * s
            a12 = -c_prev * s
            a21 = c_here * s
            m11 = mats[i, 0]
            m12 = mats[i, 1]
            m21 = mats[i, 2]
            m22 = mats[i, 3]
            n11 = m11 * a11 + m12 * a21
            n12 = m11 * a12
            n21 = m21 * a11 + m22 * a21
            n22 = m21 * a12
            sc = abs(n11) + abs(n12) + abs(n21) + abs(n22)
            mats[i, 0] = n11 / sc
            mats[i, 1] = n12 / sc
            mats[i, 2] = n21 / sc
            mats[i, 3] = n22 / sc
            logs[i] += math.log(sc)
        done = k
        if k % check_every == 0:
            mn = logs[0]
            for i in range(1, g):
                if logs[i] < mn:
                    mn = logs[i]
            if mn >= log_target:
                converged = 1
                break
    return converged, done, mats, logs
