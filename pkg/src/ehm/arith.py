"""Exact continued-fraction and Diophantine arithmetic.

Frequencies are carried as partial-quotient lists with unbounded-integer
convergents; the real value is materialized on demand.  The decay-rate
surrogate for ln q_{n+1} / q_n is always reported as a finite-depth quantity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

LN2 = math.log(2.0)

# Fixed all-ones warm-up before the fast-growth rule kicks in; the rule's
# double-exponential growth makes more than two fast levels physically
# impossible to store, hence the digit budget below.
LIOUVILLE_WARMUP = 6
DEFAULT_DIGIT_BUDGET = 1_000_000


class RationalInputError(ValueError):
    """Gauss remainder vanished: the input is rational."""


class PrecisionExhaustedError(ArithmeticError):
    """The certified error interval of a Gauss remainder contains 0."""


class InsufficientDepthError(ValueError):
    pass


class BudgetExceededError(OverflowError):
    pass


class ZeroIndexError(ValueError):
    pass


def ln_big(n: int) -> float:
    """Natural log of a positive integer of arbitrary size."""
    if n <= 0:
        raise ValueError("ln_big needs a positive integer")
    try:
        return math.log(n)
    except OverflowError:
        bits = n.bit_length() - 64
        return math.log(n >> bits) + bits * LN2


def circle_norm(x):
    """Distance from x to the nearest integer; works for float and Fraction."""
    t = x - math.floor(x)
    return min(t, 1 - t)


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: tuple

    def __post_init__(self):
        if not self.quotients:
            raise ValueError("empty quotient list")
        if any(int(a) < 1 for a in self.quotients):
            raise ValueError("partial quotients must be >= 1")
        object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))

    @property
    def depth(self) -> int:
        return len(self.quotients)

    @property
    def convergents(self):
        """List of (p_n, q_n), seeded by (p_0, q_0) = (0, 1)."""
        out = []
        p_prev, q_prev = 1, 0
        p, q = 0, 1
        for a in self.quotients:
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            out.append((p, q))
        return out

    def value_fraction(self) -> Fraction:
        p, q = self.convergents[-1]
        return Fraction(p, q)

    @property
    def alpha_float(self) -> float:
        return float(self.value_fraction())

    def frac_multiple(self, k: int) -> Fraction:
        """{k * alpha} as an exact fraction of the deepest convergent."""
        p, q = self.convergents[-1]
        return Fraction((k * p) % q, q)

    def check_invariants(self):
        conv = self.convergents
        p_prev, q_prev = 0, 1
        for n, (p, q) in enumerate(conv):
            det = p * q_prev - p_prev * q
            if det not in (1, -1):
                raise AssertionError(f"determinant identity broken at level {n + 1}")
            if math.gcd(p, q) != 1:
                raise AssertionError(f"convergent {p}/{q} not reduced")
            if n >= 2 and q <= q_prev:
                raise AssertionError("q_n not increasing")
            p_prev, q_prev = p, q

    def to_json(self) -> str:
        return json.dumps({"quotients": list(self.quotients), "depth": self.depth})

    @classmethod
    def from_json(cls, text: str) -> "ContinuedFraction":
        data = json.loads(text)
        return cls(tuple(data["quotients"]))


def _input_interval(x, precision_bits: int):
    """Certified [lo, hi] Fraction interval for a real input."""
    if isinstance(x, Fraction):
        return x, x
    if isinstance(x, int):
        return Fraction(x), Fraction(x)
    if isinstance(x, str):
        v = Fraction(x)
        if "." in x:
            digits = len(x.split(".")[1])
            u = Fraction(1, 2 * 10 ** digits)
        else:
            u = Fraction(0)
        return v - u, v + u
    v = Fraction(float(x))
    u = Fraction(abs(float(x)) or 1.0) * Fraction(1, 2 ** 53)
    return v - u, v + u


def cf_from_real(x, depth: int, precision: int = 256) -> ContinuedFraction:
    """Partial quotients of x in (0,1) by an interval-certified Gauss map.

    A quotient is only emitted when the whole error interval agrees on it.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    lo, hi = _input_interval(x, precision)
    if not (0 < lo and hi < 1):
        raise ValueError("x must lie strictly in (0, 1)")
    floor_eps = Fraction(1, 2 ** precision)
    quotients = []
    for _ in range(depth):
        inv_lo, inv_hi = 1 / hi, 1 / lo
        a_lo = inv_lo.numerator // inv_lo.denominator
        a_hi = inv_hi.numerator // inv_hi.denominator
        if a_lo != a_hi:
            raise PrecisionExhaustedError(
                f"precision exhausted after {len(quotients)} quotients")
        quotients.append(int(a_lo))
        lo, hi = inv_lo - a_lo, inv_hi - a_lo
        if lo <= 0:
            if hi < floor_eps:
                raise RationalInputError(
                    f"rational input (terminates after {len(quotients)} quotients)")
            if len(quotients) < depth:
                raise PrecisionExhaustedError(
                    f"precision exhausted after {len(quotients)} quotients")
    return ContinuedFraction(tuple(quotients))


def convergents(cf: ContinuedFraction):
    return cf.convergents


@dataclass(frozen=True)
class BetaEstimate:
    """Finite-depth surrogate of the limsup of ln q_{n+1} / q_n."""

    samples: tuple
    tail_start: int
    tail_sup: float
    note: str = field(default="finite-depth tail supremum, not the limsup")

    def __post_init__(self):
        assert self.tail_sup >= 0.0
        assert self.tail_sup <= max(self.samples) + 1e-15


def beta_estimate(cf: ContinuedFraction, tail_start: int | None = None) -> BetaEstimate:
    """Tail supremum of ln q_{n+1} / q_n over levels n >= tail_start."""
    conv = cf.convergents
    samples = tuple(ln_big(conv[n + 1][1]) / conv[n][1] for n in range(len(conv) - 1))
    if tail_start is None:
        tail_start = len(samples) // 2
    if cf.depth < tail_start + 2 or tail_start >= len(samples):
        raise InsufficientDepthError("insufficient depth for the requested tail window")
    return BetaEstimate(samples=samples, tail_start=tail_start,
                        tail_sup=max(samples[tail_start:]))


def liouville_build(target_beta: float, depth: int,
                    digit_budget: int = DEFAULT_DIGIT_BUDGET) -> ContinuedFraction:
    """Frequency with prescribed approximation rate: a_{n+1} = ceil(e^{b q_n}/q_n)."""
    if target_beta <= 0:
        raise ValueError("target_beta must be positive")
    if depth < 4:
        raise ValueError("depth must be >= 4")
    import mpmath

    quotients = [1] * min(LIOUVILLE_WARMUP, depth)
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    for a in quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    while len(quotients) < depth:
        exponent = target_beta * q
        digits_needed = exponent / math.log(10.0) + 30
        if digits_needed > digit_budget:
            raise BudgetExceededError(
                f"budget exceeded: level {len(quotients) + 1} needs "
                f"~{digits_needed:.3g} digits")
        with mpmath.workdps(int(digits_needed) + 20):
            a = int(mpmath.ceil(mpmath.exp(mpmath.mpf(target_beta) * q) / q))
        a = max(a, 1)
        quotients.append(a)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    return ContinuedFraction(tuple(quotients))


def best_approx_distance(cf: ContinuedFraction, k: int, precision: int = 256):
    """||k alpha|| for the materialized convergent value, as an exact Fraction."""
    if k == 0:
        raise ZeroIndexError("zero index")
    conv = cf.convergents
    p, q = conv[-1]
    if abs(k) >= q:
        raise ValueError(f"|k| must be below the largest available q = {q}")
    r = (k * p) % q
    return Fraction(min(r, q - r), q)


def alpha_from_spec(spec: dict) -> ContinuedFraction:
    """Build a frequency from one of the three CLI/config forms."""
    kinds = [key for key in ("cf", "real", "liouville") if key in spec]
    if len(kinds) != 1:
        raise ValueError("frequency required: exactly one of cf/real/liouville")
    kind = kinds[0]
    if kind == "cf":
        return ContinuedFraction(tuple(int(a) for a in spec["cf"]))
    if kind == "real":
        return cf_from_real(spec["real"], int(spec.get("depth", 40)))
    params = spec["liouville"]
    return liouville_build(float(params["beta"]), int(params["depth"]))
