"""Finite truncations, determinants, Green's functions, IDS, bands and gaps.

Gap edges are certified in three stages: eigenvalues of the dual operator at
the label's special phase propose edge energies; a uniform-hyperbolicity test
with exact integer winding confirms that the interval between them is a gap
with the right label; a short section-residual polish sharpens each edge.
Rotation-number bisection remains as a fallback and as an oracle for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import _kernels
from .arith import ContinuedFraction, circle_norm
from .operator import (Coupling, CocycleSampler, HyperbolicLock, abs_c_eval,
                       hyperbolic_lock, locked_rho_for_label, rotation_number)

TWO_PI = 2.0 * math.pi


class SingularOffdiagError(ArithmeticError):
    pass


class ResonantEnergyError(ArithmeticError):
    pass


class AmbiguousLabelError(ValueError):
    pass


class LabelNotFoundError(RuntimeError):
    pass


class RotationInconsistencyError(RuntimeError):
    pass


class UnresolvedBandEdgeError(RuntimeError):
    pass


def _alpha_float(alpha) -> float:
    return alpha.alpha_float if isinstance(alpha, ContinuedFraction) else float(alpha)


@dataclass(frozen=True)
class JacobiTruncation:
    """Symmetric tridiagonal restriction of the |c|-form operator."""

    diag: np.ndarray
    off: np.ndarray
    theta: float
    alpha: float
    window: tuple
    flavor: str
    coupling: Coupling

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    @property
    def entry_triple(self) -> Coupling:
        return self.coupling.dual() if self.flavor == "dual" else self.coupling

    def matrix(self) -> np.ndarray:
        m = np.diag(self.diag)
        idx = np.arange(self.size - 1)
        m[idx, idx + 1] = self.off
        m[idx + 1, idx] = self.off
        return m


def truncation(coupling: Coupling, alpha, theta: float, window: tuple,
               flavor: str = "dual") -> JacobiTruncation:
    """Restriction to the integer window [x1, x2] (inclusive)."""
    if flavor not in ("dual", "direct"):
        raise ValueError("flavor must be 'dual' or 'direct'")
    x1, x2 = window
    if x2 < x1:
        raise ValueError("empty window")
    a = _alpha_float(alpha)
    triple = coupling.dual() if flavor == "dual" else coupling
    sites = theta + a * np.arange(x1, x2 + 1)
    diag = 2.0 * np.cos(TWO_PI * sites)
    off = abs_c_eval(triple, a, sites[:-1])
    if off.size and np.min(off) < 1e-12:
        raise SingularOffdiagError("singular off-diagonal: |c| vanishes in the window")
    return JacobiTruncation(diag=diag, off=off, theta=theta, alpha=a,
                            window=(x1, x2), flavor=flavor, coupling=coupling)


def eig_count(t: JacobiTruncation, energy: float) -> int:
    """Exact count of eigenvalues strictly below `energy`."""
    off_sq = t.off * t.off
    return int(_kernels.sturm_count(t.diag, off_sq, energy))


def tridiag_eigs(t: JacobiTruncation, tol: float = 1e-12) -> np.ndarray:
    """All eigenvalues by Sturm bisection, sorted ascending."""
    if tol <= 0:
        raise ValueError("invalid tolerance")
    n = t.size
    bound = float(np.max(np.abs(t.diag)) + 2.0 * (np.max(np.abs(t.off)) if n > 1 else 0.0))
    off_sq = t.off * t.off
    eigs = np.empty(n)
    for i in range(n):
        lo, hi = -bound - 1.0, bound + 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _kernels.sturm_count(t.diag, off_sq, mid) <= i:
                lo = mid
            else:
                hi = mid
        eigs[i] = 0.5 * (lo + hi)
    return eigs


def pk_determinant(coupling: Coupling, alpha, theta: float, energy: float, k: int):
    """(log magnitude, sign) of det(H^{[0,k-1]} - E) for the |c|-form operator.

    `coupling` is used as given; pass the dual triple for dual-side work.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    a = _alpha_float(alpha)
    logmag, sign = _kernels.pk_log(theta, a, energy, coupling.l1, coupling.l2,
                                   coupling.l3, k)
    return logmag, sign


def green_entry(t: JacobiTruncation, energy: float, endpoint: str, y: int,
                eig_tol: float = 1e-9) -> float:
    """|G(x1, y)| or |G(y, x2)| from the determinant recurrence.

    Matches the dense inverse; `endpoint` picks which boundary row.
    """
    x1, x2 = t.window
    if not (x1 <= y <= x2):
        raise ValueError("y outside the window")
    k = x2 - x1 + 1
    alpha = t.alpha
    triple = t.entry_triple
    if eig_count(t, energy - eig_tol) != eig_count(t, energy + eig_tol):
        raise ResonantEnergyError("resonant energy: E within tolerance of an eigenvalue")
    log_pk, _ = pk_determinant(triple, alpha, t.theta + x1 * alpha, energy, k)
    if endpoint == "left":
        log_num, _ = pk_determinant(triple, alpha, t.theta + (y + 1) * alpha,
                                    energy, x2 - y)
        sites = t.theta + alpha * np.arange(x1, y)
    elif endpoint == "right":
        log_num, _ = pk_determinant(triple, alpha, t.theta + x1 * alpha,
                                    energy, y - x1)
        sites = t.theta + alpha * np.arange(y, x2)
    else:
        raise ValueError("endpoint must be 'left' or 'right'")
    log_c = float(np.sum(np.log(abs_c_eval(triple, alpha, sites)))) if sites.size else 0.0
    return math.exp(log_num - log_pk + log_c)


def poisson_residual(coupling: Coupling, alpha, theta: float, big_window: tuple,
                     sub_window: tuple, flavor: str = "dual",
                     state_index: int | None = None) -> float:
    """Residual of the boundary identity on an exact truncation eigenvector.

    Takes an eigenpair of the large window, restricts the identity
    u_x = c(..) G(x1, x) u_{x1-1} + c(..) G(x, x2) u_{x2+1} to the interior
    of the sub-window, and returns the maximal defect.
    """
    big = truncation(coupling, alpha, theta, big_window, flavor)
    a = big.alpha
    vals, vecs = scipy.linalg.eigh_tridiagonal(big.diag, big.off)
    i = state_index if state_index is not None else big.size // 2
    energy, u = float(vals[i]), vecs[:, i]
    x1, x2 = sub_window
    b1 = big_window[0]
    if not (big_window[0] < x1 and x2 < big_window[1]):
        raise ValueError("sub-window must be interior to the big window")
    sub = truncation(coupling, alpha, theta, sub_window, flavor)
    triple = sub.entry_triple
    h = sub.matrix() - energy * np.eye(sub.size)
    g = np.linalg.inv(h)
    c_left = float(abs_c_eval(triple, a, theta + (x1 - 1) * a))
    c_right = float(abs_c_eval(triple, a, theta + x2 * a))
    worst = 0.0
    for x in range(x1 + 1, x2):
        pred = (c_left * g[0, x - x1] * u[x1 - 1 - b1]
                + c_right * g[x - x1, -1] * u[x2 + 1 - b1])
        worst = max(worst, abs(u[x - b1] - pred))
    return worst


def ids(coupling: Coupling, alpha, energy: float, box: int = 2000,
        phase_count: int = 32, flavor: str = "direct") -> float:
    """Integrated density of states by phase-averaged eigenvalue counting."""
    if box < 100:
        raise ValueError("box must be >= 100")
    a = _alpha_float(alpha)
    total = 0
    for p in range(phase_count):
        theta = (0.5 + p) / phase_count
        t = truncation(coupling, a, theta, (0, box - 1), flavor)
        total += eig_count(t, energy)
    return total / (box * phase_count)


def spectrum_bounds(coupling: Coupling, alpha, box: int = 2000,
                    phase_count: int = 8, tol: float = 1e-9):
    """(E_min, E_max) by bisection on phase-averaged counts."""
    a = _alpha_float(alpha)
    cmax = float(np.max(abs_c_eval(coupling, a, np.arange(4096) / 4096)))
    lo0, hi0 = -2.0 - 2.0 * cmax - 1.0, 2.0 + 2.0 * cmax + 1.0
    ts = [truncation(coupling, a, (0.5 + p) / phase_count, (0, box - 1), "direct")
          for p in range(phase_count)]

    def any_below(e):
        return any(eig_count(t, e) > 0 for t in ts)

    def all_counted(e):
        return all(eig_count(t, e) == box for t in ts)

    lo, hi = lo0, hi0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if any_below(mid):
            hi = mid
        else:
            lo = mid
    e_min = 0.5 * (lo + hi)
    lo, hi = lo0, hi0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if all_counted(mid):
            hi = mid
        else:
            lo = mid
    e_max = 0.5 * (lo + hi)
    return e_min, e_max


def bands_rational(coupling: Coupling, p: int, q: int, phase_grid: int = 1024,
                   e_grid: int = 4096, refine_tol: float = 1e-10):
    """Closed bands of the period-q approximant via the transfer-trace test.

    E belongs to the spectrum iff min over phases of |tr A_q(x; E)| <= 2.
    """
    if math.gcd(p, q) != 1:
        raise ValueError("p/q must be reduced")
    a = p / q
    xs = (np.arange(phase_grid) + 0.3) / phase_grid

    def min_abs_trace(energy):
        m11 = np.ones(phase_grid)
        m12 = np.zeros(phase_grid)
        m21 = np.zeros(phase_grid)
        m22 = np.ones(phase_grid)
        for j in range(q):
            y = xs + j * a
            c_here = abs_c_eval(coupling, a, y)
            c_prev = abs_c_eval(coupling, a, y - a)
            s = 1.0 / np.sqrt(c_here * c_prev)
            a11 = (energy - 2.0 * np.cos(TWO_PI * y)) * s
            a12 = -c_prev * s
            a21 = c_here * s
            n11 = a11 * m11 + a12 * m21
            n12 = a11 * m12 + a12 * m22
            m21, m22 = a21 * m11, a21 * m12
            m11, m12 = n11, n12
        return float(np.min(np.abs(m11 + m22)))

    cmax = float(np.max(abs_c_eval(coupling, a, xs)))
    e_lo, e_hi = -2.0 - 2.0 * cmax - 0.5, 2.0 + 2.0 * cmax + 0.5
    if e_grid < 8 * q:
        e_grid = 8 * q
    energies = np.linspace(e_lo, e_hi, e_grid)
    inside = np.array([min_abs_trace(e) <= 2.0 for e in energies])

    def bisect(e_in, e_out):
        for _ in range(200):
            mid = 0.5 * (e_in + e_out)
            if abs(e_out - e_in) <= refine_tol:
                break
            if min_abs_trace(mid) <= 2.0:
                e_in = mid
            else:
                e_out = mid
        return 0.5 * (e_in + e_out)

    bands = []
    i = 0
    while i < e_grid:
        if inside[i]:
            j = i
            while j + 1 < e_grid and inside[j + 1]:
                j += 1
            if i == 0 or j == e_grid - 1:
                raise UnresolvedBandEdgeError("band touches the scan boundary")
            lo_edge = bisect(energies[i], energies[i - 1])
            hi_edge = bisect(energies[j], energies[j + 1])
            bands.append((lo_edge, hi_edge))
            i = j + 1
        else:
            i += 1
    if len(bands) > q:
        raise UnresolvedBandEdgeError(
            f"{len(bands)} bands found for denominator {q}: refine the energy grid")
    return bands


def label_gap(rho_value: float, alpha, m_max: int = 64, margin: float = 1e-4) -> int:
    """Gap label from a rotation value: argmin over |m| <= m_max of ||2 rho - m alpha||."""
    if not (0.0 <= rho_value <= 0.5 + 1e-12):
        raise ValueError("rho must lie in [0, 1/2]")
    a = _alpha_float(alpha)
    best_m, best_d, second = 0, circle_norm(2.0 * rho_value), math.inf
    for m in range(-m_max, m_max + 1):
        if m == 0:
            continue
        if isinstance(alpha, ContinuedFraction):
            d = float(circle_norm(2.0 * rho_value - float(alpha.frac_multiple(m))))
        else:
            d = circle_norm(2.0 * rho_value - m * a)
        if d < best_d:
            best_m, best_d, second = m, d, best_d
        elif d < second:
            second = d
    if best_d > margin:
        raise AmbiguousLabelError(
            f"no label within margin {margin:.2g} (best {best_d:.2g} at m={best_m})")
    if second <= 2.0 * margin:
        raise AmbiguousLabelError(
            f"ambiguous label: best {best_d:.2g}, second {second:.2g}")
    return best_m


@dataclass(frozen=True)
class SpectralGap:
    label: int
    e_minus: float
    e_plus: float
    length: float
    rho_residual: float
    status: str
    kappa_mid: float = 0.0
    a_m: float | None = None
    eps_m: float | None = None
    delta_pred: float | None = None
    bound_ok: bool | None = None
    cert_status: str | None = None

    def row(self):
        return [self.label, self.e_minus, self.e_plus, self.length,
                self.rho_residual, self.status]


def _dual_edge_states(coupling: Coupling, alpha, m: int, window,
                      half_box: int = 0):
    """Edge energies of gap m from the dual operator at its label phase.

    At theta in {tau/2, tau/2 + 1/2} with tau = {m alpha} the dual chain
    commutes with the reflection k -> -m - k; the two eigenvectors symmetric
    about that axis (one per branch) sit exactly at the gap's edges, while
    off-axis states are translates belonging to other labels.  Energies are
    returned in the direct model's units.
    """
    a = _alpha_float(alpha)
    if isinstance(alpha, ContinuedFraction):
        tau = float(alpha.frac_multiple(m))
    else:
        tau = (m * a) % 1.0
    half = half_box or max(200, 3 * abs(m) + 150)
    lo, hi = window
    axis = -m / 2.0
    out = []
    for branch in (tau / 2.0, tau / 2.0 + 0.5):
        t = truncation(coupling, a, branch % 1.0, (-half, half), "dual")
        try:
            vals, vecs = scipy.linalg.eigh_tridiagonal(
                t.diag, t.off, select="v",
                select_range=(lo / coupling.l2, hi / coupling.l2))
        except Exception:
            continue
        lo_k = max(-half, -m - half)
        hi_k = min(half, -m + half)
        ks = np.arange(lo_k, hi_k + 1)
        for v, vec in zip(vals, vecs.T):
            center = int(np.argmax(np.abs(vec))) - half
            if abs(center - axis) > 0.5 * abs(m) + 2.0:
                continue
            # symmetric or antisymmetric under the reflection, one edge each
            overlap = float(np.abs(np.sum(vec[ks + half] * vec[-m - ks + half])))
            if overlap < 0.9:
                continue
            out.append(coupling.l2 * float(v))
    return sorted(out)


def _ids_window(coupling: Coupling, alpha, m: int, width: float = 0.01,
                box: int = 2000, phase_count: int = 4):
    """Coarse energy window bracketing the IDS value 1 - {m alpha}.

    Bisects the phase-averaged counting function to the energies where it
    passes target -+ width; the labelled gap lies strictly inside.
    """
    a = _alpha_float(alpha)
    if isinstance(alpha, ContinuedFraction):
        tau = float(alpha.frac_multiple(m))
    else:
        tau = (m * a) % 1.0
    target = 1.0 - tau
    e_min, e_max = spectrum_bounds(coupling, a, box=800, tol=1e-4)
    ts = [truncation(coupling, a, (0.5 + p) / phase_count, (0, box - 1), "direct")
          for p in range(phase_count)]

    def n_of(e):
        return sum(eig_count(t, e) for t in ts) / (box * phase_count)

    def invert(level, lo, hi):
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if n_of(mid) < level:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    pad_lo, pad_hi = e_min - 0.05, e_max + 0.05
    lo = invert(target - width, pad_lo, pad_hi) if target - width > 0 else pad_lo
    hi = invert(target + width, pad_lo, pad_hi) if target + width < 1 else pad_hi
    return lo - 1e-9, hi + 1e-9


def _section_sigma(coupling: Coupling, alpha, energy: float, order: int = 36):
    """Smallest singular value of the +-1 twisted section problem at E."""
    from .reducibility import invariant_section_sign

    best = math.inf
    for sign in (1, -1):
        try:
            sec = invariant_section_sign(coupling, alpha, energy, sign, order)
        except Exception:
            continue
        best = min(best, sec.rms_residual)
    return best


def _edge_signature(coupling: Coupling, alpha, energy: float, order: int):
    """(winding, sign, rms residual) of the best twisted section at an edge.

    At a true edge of the gap with label m the section exists with a real
    multiplier and the winding of its real branch equals m exactly.
    """
    from .reducibility import invariant_section_sign, winding_degree

    best = None
    for sign in (1, -1):
        try:
            sec = invariant_section_sign(coupling, alpha, energy, sign, order,
                                         no_section_tol=2e-2)
        except Exception:
            continue
        if best is None or sec.rms_residual < best[1].rms_residual:
            best = (sign, sec)
    if best is None:
        return None
    sign, sec = best
    xs = np.arange(4096) / 2048.0
    for branch in (sec.series.real_part(), sec.series.imag_part()):
        vals = np.real(branch(xs))
        norms = np.linalg.norm(vals, axis=1)
        if np.min(norms) < 1e-6 * np.max(norms):
            continue
        try:
            deg, dist = winding_degree(vals)
        except Exception:
            continue
        if dist < 0.2:
            return deg, sign, sec.rms_residual
    return None


def _polish_edge(coupling: Coupling, alpha, e0: float, half_width: float,
                 order: int = 60, steps: int = 18) -> float:
    """Golden-section refinement of an edge by minimizing the section residual."""
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = e0 - half_width, e0 + half_width
    c = hi - gr * (hi - lo)
    d = lo + gr * (hi - lo)
    fc = _section_sigma(coupling, alpha, c, order)
    fd = _section_sigma(coupling, alpha, d, order)
    for _ in range(steps):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - gr * (hi - lo)
            fc = _section_sigma(coupling, alpha, c, order)
        else:
            lo, c, fc = c, d, fd
            d = lo + gr * (hi - lo)
            fd = _section_sigma(coupling, alpha, d, order)
    return c if fc <= fd else d


def gap_edges(coupling: Coupling, alpha, m: int, tol_e: float = 1e-10,
              polish: bool = False, rho_iterations: int = 100_000) -> SpectralGap:
    """Locate and certify the spectral gap with label m.

    Primary path: dual-eigenvalue proposals at the label phase, confirmed by a
    hyperbolicity lock whose winding must reproduce m, then section polishing.
    Falls back to rotation-number bisection when no proposal confirms.
    """
    if m == 0:
        raise ValueError("label must be nonzero")
    if coupling.region != "II":
        raise ValueError("gap machinery requires a region II coupling")
    window = _ids_window(coupling, alpha, m)
    cands = _dual_edge_states(coupling, alpha, m, window)
    sig_order = abs(m) + 56
    confirmed = []
    for e in cands:
        sig = _edge_signature(coupling, alpha, e, sig_order)
        if sig is not None and abs(sig[0]) == abs(m):
            confirmed.append(e)
    if len(confirmed) != 2:
        gap = _gap_edges_by_rotation(coupling, alpha, m, tol_e,
                                     iterations=rho_iterations)
        if gap is not None:
            return gap
        raise LabelNotFoundError(
            f"label {m} not found in the scan window {window} "
            f"({len(confirmed)} confirmed edges)")
    e_minus, e_plus = confirmed
    # the midpoint count pins the sign of the label
    rho_locked = locked_rho_for_label(alpha, m)
    n_mid = ids(coupling, alpha, 0.5 * (e_minus + e_plus), box=2500, phase_count=8)
    drift = abs(n_mid - (1.0 - 2.0 * rho_locked))
    if drift > 5e-3:
        raise RotationInconsistencyError(
            f"count at the gap midpoint {n_mid:.6f} disagrees with the locked "
            f"rotation value {rho_locked:.6f} (drift {drift:.2e})")
    if e_plus - e_minus <= max(tol_e, 1e-12):
        return SpectralGap(label=m, e_minus=e_minus, e_plus=e_plus,
                           length=e_plus - e_minus, rho_residual=0.0,
                           status="collapsed")
    if polish:
        width = max(10.0 * tol_e, 1e-11)
        e_minus = _polish_edge(coupling, alpha, e_minus, width, order=sig_order)
        e_plus = _polish_edge(coupling, alpha, e_plus, width, order=sig_order)
    lock = hyperbolic_lock(coupling, alpha, 0.5 * (e_minus + e_plus),
                           k_max=1 << 14, grid=512)
    if lock.converged and lock.label != m:
        raise RotationInconsistencyError(
            f"hyperbolicity lock at the midpoint reports label {lock.label}, "
            f"expected {m}")
    length = e_plus - e_minus
    status = "collapsed" if length <= tol_e else "open"
    return SpectralGap(label=m, e_minus=e_minus, e_plus=e_plus, length=length,
                       rho_residual=0.0, status=status,
                       kappa_mid=lock.kappa if lock.converged else 0.0)


def _gap_edges_by_rotation(coupling: Coupling, alpha, m: int, tol_e: float,
                           iterations: int = 20_000):
    """Fallback edge location by bisection on the rotation number."""
    a = _alpha_float(alpha)
    rho_target = locked_rho_for_label(alpha, m)
    e_min, e_max = spectrum_bounds(coupling, a, box=800, tol=1e-6)

    def g(e):
        est = rotation_number(CocycleSampler(coupling, a, e, "abar"),
                              iterations=iterations, phase_count=8)
        d = (2.0 * est.rho - 2.0 * rho_target + 0.5) % 1.0 - 0.5
        return d, est.error

    lo, hi = e_min - 1.0, e_max + 1.0
    # rho decreases with energy, so g decreases; find a point in the plateau
    probe = None
    for e in np.linspace(lo, hi, 129):
        d, err = g(e)
        if abs(d) <= max(2.0 * err, 1e-7):
            lock = hyperbolic_lock(coupling, alpha, float(e), k_max=1 << 15)
            if lock.converged and lock.label == m:
                probe = float(e)
                break
    if probe is None:
        return None

    def inside(e):
        lock = hyperbolic_lock(coupling, alpha, float(e), k_max=1 << 16)
        return lock.converged and lock.label == m

    hi_out = probe
    step = max(tol_e, 1e-6)
    while inside(hi_out) and hi_out < hi:
        hi_out += step
        step *= 2.0
    lo_in, lo_out = probe, hi_out
    for _ in range(80):
        if lo_out - lo_in <= tol_e:
            break
        mid = 0.5 * (lo_in + lo_out)
        if inside(mid):
            lo_in = mid
        else:
            lo_out = mid
    e_plus = 0.5 * (lo_in + lo_out)
    lo_out2 = probe
    step = max(tol_e, 1e-6)
    while inside(lo_out2) and lo_out2 > lo:
        lo_out2 -= step
        step *= 2.0
    hi_in = probe
    for _ in range(80):
        if hi_in - lo_out2 <= tol_e:
            break
        mid = 0.5 * (lo_out2 + hi_in)
        if inside(mid):
            hi_in = mid
        else:
            lo_out2 = mid
    e_minus = 0.5 * (lo_out2 + hi_in)
    length = e_plus - e_minus
    status = "open" if length > tol_e else "collapsed"
    return SpectralGap(label=m, e_minus=e_minus, e_plus=e_plus, length=length,
                       rho_residual=0.0, status=status)


def detect_gaps_by_clustering(coupling: Coupling, alpha, box: int = 3000,
                              min_length: float = 2e-3, phases=(0.137, 0.571)):
    """Spectral gaps visible as eigenvalue-free intervals of finite boxes.

    Boundary states pollute single-phase spectra, so an interval only counts
    when it is eigenvalue-free for every probe phase.
    """
    a = _alpha_float(alpha)
    spectra = []
    for theta in phases:
        t = truncation(coupling, a, theta, (0, box - 1), "direct")
        spectra.append(scipy.linalg.eigh_tridiagonal(t.diag, t.off,
                                                     eigvals_only=True))
    merged = np.sort(np.concatenate(spectra))
    gaps = []
    for i in range(merged.size - 1):
        lo, hi = merged[i], merged[i + 1]
        if hi - lo >= min_length:
            gaps.append((float(lo), float(hi)))
    return gaps
