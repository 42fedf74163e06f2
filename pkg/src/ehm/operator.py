"""Couplings, cocycle evaluation, Lyapunov exponents, rotation numbers.

The model is the quasi-periodic Jacobi operator with off-diagonal symbol
c(x) = l1 e^{-2pi i(x+a/2)} + l2 + l3 e^{2pi i(x+a/2)} and diagonal 2cos(2pi x).
Everything here works at a fixed coupling triple, frequency and energy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .arith import ContinuedFraction, circle_norm

TWO_PI = 2.0 * math.pi


class InvalidCouplingError(ValueError):
    pass


class SingularCocycleError(ArithmeticError):
    pass


class ComplexBranchError(ArithmeticError):
    """The closed-form rate formula left the real branch (l2^2 < 4 l1 l3)."""


class LiftFailureError(ArithmeticError):
    """Projective angle stepping jumped too far to unwrap reliably."""


def classify_region(l1: float, l2: float, l3: float) -> str:
    if min(l1, l2, l3) <= 0:
        raise InvalidCouplingError("invalid coupling: all entries must be positive")
    edge = l1 + l3
    if max(edge, l2) < 1.0:
        return "I"
    if max(edge, 1.0) < l2:
        return "II"
    if max(l2, 1.0) < edge:
        return "III"
    return "boundary"


@dataclass(frozen=True)
class Coupling:
    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        classify_region(self.l1, self.l2, self.l3)

    @property
    def region(self) -> str:
        return classify_region(self.l1, self.l2, self.l3)

    def dual(self) -> "Coupling":
        return Coupling(self.l3 / self.l2, 1.0 / self.l2, self.l1 / self.l2)

    @property
    def triple(self):
        return (self.l1, self.l2, self.l3)


def dual_coupling(c: Coupling) -> Coupling:
    return c.dual()


def c_eval(coupling: Coupling, alpha: float, z):
    """The symbol c at (complex) phase z."""
    phi = TWO_PI * (np.asarray(z) + 0.5 * alpha)
    return (coupling.l1 * np.exp(-1j * phi) + coupling.l2
            + coupling.l3 * np.exp(1j * phi))


def c_bar_eval(coupling: Coupling, alpha: float, z):
    """Analytic extension of the conjugate symbol."""
    phi = TWO_PI * (np.asarray(z) + 0.5 * alpha)
    return (coupling.l1 * np.exp(1j * phi) + coupling.l2
            + coupling.l3 * np.exp(-1j * phi))


def abs_c_eval(coupling: Coupling, alpha: float, x):
    """|c|(x) = sqrt(c cbar) on real phases (positive)."""
    l1, l2, l3 = coupling.triple
    phi = TWO_PI * (np.asarray(x, dtype=float) + 0.5 * alpha)
    sq = (l1 * l1 + l2 * l2 + l3 * l3
          + 2.0 * l2 * (l1 + l3) * np.cos(phi)
          + 2.0 * l1 * l3 * np.cos(2.0 * phi))
    return np.sqrt(np.maximum(sq, 0.0))


@dataclass(frozen=True)
class ClosedFormRates:
    """Closed-form growth rates attached to a region-II coupling.

    `lyap` is the Lyapunov exponent of the dual-side renormalized cocycle on
    its spectrum; `c_mean` is the phase average of ln|c| for the dual symbol
    (equivalently the per-step log of the determinant cocycle's scaling), so
    the dual determinant recurrence grows at `lyap + c_mean`.
    """

    lyap: float
    c_mean: float

    @property
    def det_growth(self) -> float:
        return self.lyap + self.c_mean


def closed_form_constants(coupling: Coupling) -> ClosedFormRates:
    l1, l2, l3 = coupling.triple
    disc = l2 * l2 - 4.0 * l1 * l3
    if disc < 0:
        raise ComplexBranchError("complex branch: l2^2 < 4 l1 l3")
    m = max(l1 + l3, 1.0)
    denom = m + math.sqrt(m * m - 4.0 * l1 * l3)
    lyap = math.log((l2 + math.sqrt(disc)) / denom)
    c_mean = math.log(denom / (2.0 * l2))
    return ClosedFormRates(lyap=lyap, c_mean=c_mean)


@dataclass(frozen=True)
class ParameterSet:
    """Derived rate constants for a region-II coupling and frequency."""

    lyap_closed: float
    c_const: float
    eps0: float
    h: float
    eta: float
    delta: float

    @classmethod
    def from_coupling(cls, coupling: Coupling, beta_tail: float = 0.0) -> "ParameterSet":
        rates = closed_form_constants(coupling)
        lyap = rates.lyap
        h = lyap / (200.0 * math.pi)
        return cls(lyap_closed=lyap, c_const=rates.c_mean,
                   eps0=lyap / 1e5, h=h, eta=h / 20.0, delta=5.0 * beta_tail)


VARIANTS = {"a": _kernels.VARIANT_A, "abar": _kernels.VARIANT_ABAR, "m": _kernels.VARIANT_M}


@dataclass(frozen=True)
class CocycleSampler:
    """Matrix family for one (coupling, frequency, energy) triple.

    Immutable; safe to share.  `variant` picks A, the renormalized Abar, or
    the determinant cocycle M = c * A; `eps_im` complexifies the phase.
    """

    coupling: Coupling
    alpha: float
    energy: float
    variant: str = "abar"
    eps_im: float = 0.0
    alpha_cf: ContinuedFraction | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def is_real(self) -> bool:
        return self.variant == "abar" and self.eps_im == 0.0

    def matrices(self, xs) -> np.ndarray:
        """Cocycle matrices at phases xs, shape (..., 2, 2)."""
        xs = np.asarray(xs, dtype=float)
        z = xs + 1j * self.eps_im if self.eps_im else xs
        cp = self.coupling
        diag = self.energy - 2.0 * np.cos(TWO_PI * z)
        out = np.zeros(xs.shape + (2, 2), dtype=complex)
        if self.variant == "a":
            c_here = c_eval(cp, self.alpha, z)
            if np.min(np.abs(c_here)) < 1e-13:
                raise SingularCocycleError("singular cocycle: c vanishes at a phase")
            out[..., 0, 0] = diag / c_here
            out[..., 0, 1] = -c_bar_eval(cp, self.alpha, z - self.alpha) / c_here
            out[..., 1, 0] = 1.0
        elif self.variant == "m":
            out[..., 0, 0] = diag
            out[..., 0, 1] = -c_bar_eval(cp, self.alpha, z - self.alpha)
            out[..., 1, 0] = c_eval(cp, self.alpha, z)
        else:
            cc_here = c_eval(cp, self.alpha, z) * c_bar_eval(cp, self.alpha, z)
            cc_prev = (c_eval(cp, self.alpha, z - self.alpha)
                       * c_bar_eval(cp, self.alpha, z - self.alpha))
            if min(np.min(np.abs(cc_here)), np.min(np.abs(cc_prev))) < 1e-26:
                raise SingularCocycleError("singular cocycle: |c| vanishes at a phase")
            abs_here = np.sqrt(cc_here)
            abs_prev = np.sqrt(cc_prev)
            s = 1.0 / np.sqrt(abs_here * abs_prev)
            out[..., 0, 0] = diag * s
            out[..., 0, 1] = -abs_prev * s
            out[..., 1, 0] = abs_here * s
        if self.is_real:
            return out.real
        return out

    def matrix(self, x: float) -> np.ndarray:
        return self.matrices(np.array([x]))[0]


def cocycle_step(sampler: CocycleSampler, x: float) -> np.ndarray:
    return sampler.matrix(x)


def transfer_product(sampler: CocycleSampler, x: float, k: int):
    """(normalized product over k steps, accumulated log scale)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return np.eye(2), 0.0
    cp = sampler.coupling
    if sampler.is_real:
        m11, m12, m21, m22, acc = _kernels.transfer_abar(
            x, sampler.alpha, sampler.energy, cp.l1, cp.l2, cp.l3, k)
        return np.array([[m11, m12], [m21, m22]]), acc
    mats = sampler.matrices(x + sampler.alpha * np.arange(k))
    prod = np.eye(2, dtype=complex)
    acc = 0.0
    for j in range(k):
        prod = mats[j] @ prod
        if j % 32 == 31:
            s = np.abs(prod).sum()
            acc += math.log(s)
            prod /= s
    return prod, acc


@dataclass(frozen=True)
class LyapunovEstimate:
    estimate: float
    stderr: float
    per_phase: tuple

    def to_dict(self):
        return {"estimate": self.estimate, "stderr": self.stderr,
                "finite_scale_surrogate": True}


def lyapunov_numeric(sampler: CocycleSampler, iterations: int = 100_000,
                     phase_count: int = 32, x0: float = 0.0) -> LyapunovEstimate:
    """Furstenberg estimate averaged over equidistributed phases."""
    if iterations < 1_000:
        raise ValueError("iterations must be >= 1000")
    cp = sampler.coupling
    phases = (x0 + np.arange(phase_count) / phase_count) % 1.0
    if sampler.is_real:
        vals = _kernels.lyapunov_abar(phases, sampler.alpha, sampler.energy,
                                      cp.l1, cp.l2, cp.l3, iterations)
    else:
        vals = _kernels.lyapunov_complex(phases, sampler.alpha, sampler.energy,
                                         cp.l1, cp.l2, cp.l3, sampler.eps_im,
                                         VARIANTS[sampler.variant], iterations)
    est = float(np.mean(vals))
    err = float(np.std(vals) / math.sqrt(max(phase_count - 1, 1)))
    return LyapunovEstimate(estimate=est, stderr=err, per_phase=tuple(vals))


def _fold_half(t: float) -> float:
    t = t % 1.0
    return min(t, 1.0 - t)


@dataclass(frozen=True)
class RotationEstimate:
    rho: float
    error: float
    method: str
    rho_mod_half: float

    def to_dict(self):
        return {"estimate": self.rho, "stderr": self.error, "method": self.method,
                "convention": "ids = 1 - 2*rho", "finite_scale_surrogate": True}


def _ids_coarse(coupling: Coupling, alpha: float, energy: float,
                box: int = 1200, phase_count: int = 8) -> float:
    from .spectrum import ids

    return ids(coupling, alpha, energy, box=box, phase_count=phase_count)


def rotation_number(sampler, iterations: int = 100_000, phase_count: int = 32,
                    x0: float = 0.0, parity_box: int = 1200) -> RotationEstimate:
    """Fibered rotation number in [0, 1/2] by continuous-angle lifting.

    The projective lift pins rho mod 1/2 with nearest-branch unwrapping; the
    remaining fold is resolved by a full-angle lift when every step stays
    below pi/2, otherwise by a coarse eigenvalue-count parity when the
    sampler is backed by the renormalized operator.  A projective step above
    pi/2 signals too-coarse stepping and raises LiftFailureError.
    """
    phases = (x0 + np.arange(phase_count) / phase_count) % 1.0

    def track(center):
        if isinstance(sampler, CocycleSampler) and sampler.is_real:
            cp = sampler.coupling
            return _kernels.rho_track_abar(
                phases, sampler.alpha, sampler.energy, cp.l1, cp.l2, cp.l3,
                iterations, center)
        mats = sampler.matrices(
            phases[None, :] + sampler.alpha * np.arange(iterations)[:, None])
        if np.iscomplexobj(mats):
            raise ValueError("rotation number needs a real, homotopy-trivial cocycle")
        return _kernels.rho_track_generic(np.ascontiguousarray(mats), center)

    operator_backed = isinstance(sampler, CocycleSampler) and sampler.is_real
    proj, full, peak, circ, stray = track(0.0)
    # recenter the projective branch on the circular mean of the increments
    center = 0.5 * cmath.phase(complex(np.sum(circ)))
    if abs(center) > 1e-3:
        proj, full, peak, circ, stray = track(center)
    per_phase_half = (proj / (TWO_PI * iterations)) % 0.5
    r = float(np.mean(proj) / (TWO_PI * iterations))
    spread = float(np.ptp(per_phase_half))
    spread = min(spread, abs(0.5 - spread))
    stray_frac = float(np.sum(stray)) / (iterations * phase_count)
    err = max(1.0 / iterations, spread, 0.5 * stray_frac)

    # the full-angle nearest branch is sound while true steps stay below pi
    if float(np.max(peak)) <= 0.9 * math.pi:
        s1 = float(np.mean(full) / (TWO_PI * iterations)) % 1.0
        rho = min(s1, 1.0 - s1)
        return RotationEstimate(rho=rho, error=err, method="full-lift",
                                rho_mod_half=r % 0.5)
    cand_a = _fold_half(r)
    cand_b = 0.5 - cand_a
    if not operator_backed:
        raise LiftFailureError(
            "lift failure: angle steps above pi/2 and no operator to fix parity")
    n_coarse = _ids_coarse(sampler.coupling, sampler.alpha, sampler.energy,
                           box=parity_box)
    rho = cand_a if abs(1 - 2 * cand_a - n_coarse) <= abs(1 - 2 * cand_b - n_coarse) \
        else cand_b
    return RotationEstimate(rho=rho, error=err, method="projective+parity",
                            rho_mod_half=r % 0.5)


@dataclass(frozen=True)
class HyperbolicLock:
    """Certificate that an energy sits in a gap, with the locked label."""

    converged: bool
    winding: int
    label: int
    rho_locked: float
    kappa: float
    steps: int
    grid: int

    @property
    def rho_residual(self) -> float:
        return 0.0 if self.converged else math.inf


def _section_angles(mats: np.ndarray) -> np.ndarray:
    col0 = np.hypot(mats[:, 0], mats[:, 2])
    col1 = np.hypot(mats[:, 1], mats[:, 3])
    use0 = col0 >= col1
    u1 = np.where(use0, mats[:, 0], mats[:, 1])
    u2 = np.where(use0, mats[:, 2], mats[:, 3])
    return np.arctan2(u2, u1)


def hyperbolic_lock(coupling: Coupling, alpha, energy: float, grid: int = 1024,
                    k_max: int = 131072, log_target: float = 14.0,
                    ids_box: int = 3000) -> HyperbolicLock:
    """Detect uniform hyperbolicity and the integer winding of its section.

    Inside a spectral gap the products grow exponentially and the unstable
    direction field is analytic; its winding w over one period satisfies
    2 rho = w alpha mod 1 exactly, which pins the gap label.  The sign of the
    label is fixed against a coarse eigenvalue count.
    """
    alpha_f = alpha.alpha_float if isinstance(alpha, ContinuedFraction) else float(alpha)
    xs = np.arange(grid) / grid
    for g in (grid, 2 * grid):
        conv, steps, mats, logs = _kernels.hyperbolic_products(
            np.arange(g) / g, alpha_f, energy, coupling.l1, coupling.l2, coupling.l3,
            k_max, log_target, 64)
        if not conv:
            return HyperbolicLock(False, 0, 0, math.nan, 0.0, steps, g)
        ang = _section_angles(mats)
        diffs = np.diff(np.concatenate([ang, ang[:1]]))
        diffs -= np.pi * np.round(diffs / np.pi)
        if np.max(np.abs(diffs)) < 0.45 * np.pi:
            break
    else:  # pragma: no cover
        return HyperbolicLock(False, 0, 0, math.nan, 0.0, steps, g)
    total = float(np.sum(diffs))
    w = int(round(total / np.pi))
    if abs(total / np.pi - w) > 0.2:
        return HyperbolicLock(False, 0, 0, math.nan, 0.0, steps, g)
    kappa = float(np.min(logs)) / max(steps, 1)
    if isinstance(alpha, ContinuedFraction):
        tau = float(alpha.frac_multiple(w))
    else:
        tau = (w * alpha_f) % 1.0
    n_plus = 1.0 - tau          # ids value if the label is +w
    n_minus = tau               # ids value if the label is -w
    if w == 0:
        label = 0
        rho = 0.0 if energy > 0 else 0.5
        return HyperbolicLock(True, 0, label, rho, kappa, steps, g)
    n_obs = _ids_coarse(coupling, alpha_f, energy, box=ids_box, phase_count=8)
    if abs(n_obs - n_plus) <= abs(n_obs - n_minus):
        label, two_rho = w, tau
    else:
        label, two_rho = -w, (1.0 - tau) % 1.0
    return HyperbolicLock(True, abs(w), label, two_rho / 2.0, kappa, steps, g)


def locked_rho_for_label(alpha, m: int) -> float:
    """The exact in-gap rotation number for label m: rho = {m alpha}/2."""
    if isinstance(alpha, ContinuedFraction):
        return float(alpha.frac_multiple(m)) / 2.0
    return ((m * float(alpha)) % 1.0) / 2.0


class ConstantRotationSampler:
    """Rigid rotation by a fixed angle; test helper for angle tracking."""

    def __init__(self, theta: float):
        self.theta = theta
        self.alpha = 0.0

    def matrices(self, xs):
        xs = np.asarray(xs, dtype=float)
        c, s = math.cos(TWO_PI * self.theta), math.sin(TWO_PI * self.theta)
        out = np.empty(xs.shape + (2, 2))
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
        return out
