"""Resonance analysis of dual phases and decay of dual eigenvectors.

Resonance scans run over exact convergent arithmetic whenever the frequency
is given as a continued fraction, because floating distances are unreliable
exactly where resonances get deep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .arith import ContinuedFraction, circle_norm
from .operator import Coupling
from .spectrum import truncation, eig_count

TWO_PI = 2.0 * math.pi


class InsufficientWindowError(ValueError):
    pass


class DegenerateNodesError(ValueError):
    pass


class WindowNotFoundError(LookupError):
    pass


class NoStateError(RuntimeError):
    pass


class BadNormalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ResonanceSet:
    """Ordered resonances of a phase: indices n with ||2 theta - n alpha|| both
    minimal among |k| <= |n| and below e^{-eps0 |n|}."""

    theta: float
    eps0: float
    entries: tuple            # (n, distance) ordered by |n| nondecreasing
    search_bound: int

    def __post_init__(self):
        dists = [d for _, d in self.entries]
        assert all(dists[i] >= dists[i + 1] - 1e-300 for i in range(len(dists) - 1))

    @property
    def indices(self):
        return tuple(n for n, _ in self.entries)


def _two_theta_dist(theta, alpha, n: int):
    """||2 theta - n alpha||, exact when both arguments are exact."""
    if isinstance(alpha, ContinuedFraction):
        p, q = alpha.convergents[-1]
        if isinstance(theta, Fraction):
            return float(circle_norm(2 * theta - Fraction(n * p, q)))
        return float(circle_norm(2.0 * theta - n * p / q))
    return float(circle_norm(2.0 * float(theta) - n * float(alpha)))


def resonances(theta, alpha, eps0: float, n_max: int) -> ResonanceSet:
    """Exhaustive resonance scan over |n| <= n_max.

    0 is always included.  For each |n| in increasing order, n qualifies when
    its distance equals the running minimum and clears the exponential bound.
    """
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    theta_f = float(theta)
    entries = [(0, _two_theta_dist(theta, alpha, 0))]
    running = entries[0][1]
    for size in range(1, n_max + 1):
        d_plus = _two_theta_dist(theta, alpha, size)
        d_minus = _two_theta_dist(theta, alpha, -size)
        level_min = min(running, d_plus, d_minus)
        bound = math.exp(-eps0 * size)
        for n, d in ((size, d_plus), (-size, d_minus)):
            if d == level_min and d <= bound:
                entries.append((n, d))
        running = level_min
    return ResonanceSet(theta=theta_f, eps0=eps0, entries=tuple(entries),
                        search_bound=n_max)


def resonance_gaps_check(rs: ResonanceSet, beta: float = 0.0):
    """Diagnostic report on consecutive resonance pairs.

    Ratios |n_{j+1}|/|n_j| and the comparison of ||2 theta - n_j alpha||
    against e^{-2.5 beta |n_{j+1}|}; asymptotic claims only hold for large
    |n_j|, so entries are flagged, never asserted.
    """
    report = []
    nonzero = [(n, d) for n, d in rs.entries if n != 0]
    for (n0, d0), (n1, _) in zip(nonzero, nonzero[1:]):
        bound = math.exp(-2.5 * beta * abs(n1)) if beta > 0 else float("nan")
        report.append({
            "n_j": n0, "n_j1": n1,
            "ratio": abs(n1) / abs(n0),
            "distance": d0,
            "bound": bound,
            "bound_ok": (d0 >= bound) if beta > 0 else None,
        })
    return report


def dual_eigenvector(coupling: Coupling, alpha, theta: float, e_target: float,
                     box: int = 500, iterations: int = 5):
    """Eigenpair of the dual truncation on [-box, box] nearest E_target / l2.

    Sturm counts bracket the eigenvalue, inverse iteration refines the vector,
    and the result is normalized to u_0 = 1.  Returns (u, eigenvalue, residual)
    with u indexed so that u[box] is site 0.
    """
    if coupling.region != "II":
        raise ValueError("dual eigenvectors are computed for region II couplings")
    if box < 200:
        raise ValueError("box must be >= 200")
    target = e_target / coupling.l2
    t = truncation(coupling, alpha, theta, (-box, box), "dual")
    vals = scipy.linalg.eigh_tridiagonal(
        t.diag, t.off, select="v",
        select_range=(target - 0.5, target + 0.5), eigvals_only=True)
    if vals.size == 0:
        raise NoStateError("no state: no eigenvalue near the requested bracket")
    ev = float(vals[np.argmin(np.abs(vals - target))])
    n = t.size
    shift = ev + 1e-13 * max(1.0, abs(ev))
    band = np.zeros((3, n))
    band[0, 1:] = t.off
    band[1, :] = t.diag - shift
    band[2, :-1] = t.off
    rng = np.random.default_rng(7)
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    for _ in range(iterations):
        u = scipy.linalg.solve_banded((1, 1), band, u)
        u /= np.linalg.norm(u)
    h_u = t.diag * u
    h_u[:-1] += t.off * u[1:]
    h_u[1:] += t.off * u[:-1]
    residual = float(np.linalg.norm(h_u - ev * u))
    if abs(u[box]) < 1e-8:
        raise BadNormalizationError(
            "bad normalization center: u_0 below 1e-8 before normalization")
    u = u / u[box]
    return u, ev, residual


@dataclass(frozen=True)
class DecayProfile:
    amplitudes: np.ndarray      # u_k for k in [-N, N], u_0 = 1
    kept: np.ndarray            # boolean mask of indices used in the fit
    fitted_rate: float          # nats per site, positive means decay
    rate_stderr: float
    prefactor: float
    floor_rate: float
    passes: bool

    @property
    def half_width(self) -> int:
        return (self.amplitudes.size - 1) // 2


def decay_measure(u: np.ndarray, rs: ResonanceSet, floor_rate: float,
                  c0: float = 3.0, fit_tol: float = 0.25) -> DecayProfile:
    """Least-squares decay rate of ln|u_k| over resonance-free windows.

    Indices with c0 |n_j| < |k| < |n_{j+1}| / c0 are kept; the profile passes
    when the fitted rate clears floor_rate * (1 - fit_tol) and no kept
    amplitude beats the fitted envelope by more than a fixed slack.
    """
    u = np.asarray(u, dtype=float)
    n_half = (u.size - 1) // 2
    if abs(u[n_half] - 1.0) > 1e-9:
        raise ValueError("u must be normalized with u_0 = 1 at the center")
    sizes = sorted({abs(n) for n in rs.indices})
    bounds = sizes + [math.inf]
    ks = np.arange(-n_half, n_half + 1)
    kept = np.zeros(u.size, dtype=bool)
    for lo, hi in zip(bounds, bounds[1:]):
        lo_edge = c0 * lo
        hi_edge = hi / c0
        if hi_edge <= lo_edge:
            continue
        kept |= (np.abs(ks) > lo_edge) & (np.abs(ks) < hi_edge)
    kept &= np.abs(u) > 1e-290
    if np.count_nonzero(kept) < 10:
        raise InsufficientWindowError("insufficient window: fewer than 10 kept points")
    xs = np.abs(ks[kept]).astype(float)
    ys = np.log(np.abs(u[kept]))
    design = np.column_stack([xs, np.ones_like(xs)])
    coef, res, *_ = np.linalg.lstsq(design, ys, rcond=None)
    rate = -coef[0]
    prefactor = math.exp(coef[1])
    dof = max(xs.size - 2, 1)
    sigma2 = float(res[0]) / dof if res.size else 0.0
    xvar = float(np.sum((xs - xs.mean()) ** 2))
    stderr = math.sqrt(sigma2 / xvar) if xvar > 0 else math.inf
    envelope_ok = bool(np.all(
        np.abs(u[kept]) <= 10.0 * prefactor * np.exp(-rate * np.abs(ks[kept]) * 0.9)))
    passes = bool(rate >= floor_rate * (1.0 - fit_tol)) and envelope_ok
    return DecayProfile(amplitudes=u, kept=kept, fitted_rate=float(rate),
                        rate_stderr=stderr, prefactor=prefactor,
                        floor_rate=floor_rate, passes=passes)


def gamma_uniformity(theta_list, grid: int = 4001, refine: int = 40) -> float:
    """(1/k) log of the worst Lagrange-basis sup over [-1, 1] for the nodes
    cos(2 pi theta_j).  Diagnostic only."""
    thetas = np.asarray(theta_list, dtype=float)
    k = thetas.size - 1
    if k < 1:
        raise ValueError("need at least two phases")
    nodes = np.cos(TWO_PI * thetas)
    diffs = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(nodes.size)
    if np.min(diffs) < 1e-12:
        raise DegenerateNodesError("degenerate nodes: coincident cosines")

    def worst(xs):
        best = -math.inf
        for i in range(nodes.size):
            others = np.delete(nodes, i)
            denom = np.prod(np.abs(nodes[i] - others))
            num = np.prod(np.abs(xs[:, None] - others[None, :]), axis=1)
            cand = np.max(num) / denom
            best = max(best, cand)
        return best

    xs = np.linspace(-1.0, 1.0, grid)
    coarse = worst(xs)
    # local refinement around the coarse maximizer of each basis function
    best = coarse
    for i in range(nodes.size):
        others = np.delete(nodes, i)
        denom = np.prod(np.abs(nodes[i] - others))
        vals = np.prod(np.abs(xs[:, None] - others[None, :]), axis=1) / denom
        j = int(np.argmax(vals))
        lo = xs[max(j - 1, 0)]
        hi = xs[min(j + 1, grid - 1)]
        fine = np.linspace(lo, hi, refine)
        best = max(best, float(np.max(
            np.prod(np.abs(fine[:, None] - others[None, :]), axis=1) / denom)))
    return math.log(best) / k


def essential_degree_select(n_j: int, n_j1, m, h: float,
                            cf: ContinuedFraction) -> int:
    """Pick l = r q_s - 1 inside (9 |n_j|, |n_{j+1}|/9), minimal admissible r.

    With a target index m the window is additionally tied to ln|m|/h following
    the two-case selection; returns the chosen l or raises WindowNotFoundError
    (legitimate for small |n_j|).
    """
    qs = [1] + [q for _, q in cf.convergents]
    n = abs(n_j)
    big_n = math.inf if n_j1 is None else abs(n_j1)

    def pick(q_cut, lower, upper):
        """Minimal r with r*q_s - 1 > lower for the level q_s < q_cut <= q_{s+1}."""
        for s in range(len(qs) - 1):
            if qs[s] < q_cut <= qs[s + 1]:
                r_max = qs[s + 1] // qs[s]
                for r in range(1, r_max + 1):
                    l = r * qs[s] - 1
                    if l > lower:
                        if l < upper and l < qs[s + 1]:
                            return l
                        return None
                return None
        return None

    if m is None:
        if big_n is math.inf:
            raise WindowNotFoundError("window not found: need a finite next resonance")
        l = pick(big_n / 20.0, 9 * n, big_n / 9.0)
        if l is None:
            raise WindowNotFoundError("window not found at the available depth")
        return l
    target = math.log(abs(m)) / h
    if n / 50.0 < target <= 9 * n:
        l = pick(25.0 * n, 9 * n, min(big_n / 9.0, 1700.0 * target + 1))
    elif 9 * n < target <= big_n / 50.0:
        l = pick(3.0 * target, target, min(big_n / 9.0, 1700.0 * target + 1))
    else:
        raise WindowNotFoundError("window not found: m outside the case split")
    if l is None or not (target <= l <= 1700.0 * target):
        raise WindowNotFoundError("window not found at the available depth")
    return l
