"""Finitely supported trigonometric polynomials over period 1 or 2.

Index k of a period-p series multiplies e^{2 pi i k x / p}; period-2 series
therefore carry half-integer frequencies in period-1 units.  Coefficient data
may have trailing dimensions (vector- or matrix-valued series).
"""

from __future__ import annotations

import numpy as np


class FourierSeries:
    def __init__(self, coeffs, period: int = 1):
        if period not in (1, 2):
            raise ValueError("period must be 1 or 2")
        data = np.asarray(coeffs, dtype=complex)
        if data.shape[0] % 2 != 1:
            raise ValueError("coefficient count must be odd (indices -K..K)")
        self.data = data
        self.period = period

    @property
    def order(self) -> int:
        return self.data.shape[0] // 2

    @property
    def shape(self):
        return self.data.shape[1:]

    def coeff(self, k: int):
        if abs(k) > self.order:
            return np.zeros(self.shape, dtype=complex) if self.shape else 0j
        return self.data[k + self.order]

    def indices(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    def __call__(self, x):
        x = np.asarray(x)
        freq = 2.0j * np.pi * self.indices() / self.period
        phases = np.exp(np.multiply.outer(x, freq))
        return np.tensordot(phases, self.data, axes=(x.ndim, 0))

    def shifted(self, dx: float) -> "FourierSeries":
        tw = np.exp(2.0j * np.pi * self.indices() * dx / self.period)
        return FourierSeries(self.data * tw.reshape((-1,) + (1,) * len(self.shape)),
                             self.period)

    def truncate(self, new_order: int) -> "FourierSeries":
        if new_order >= self.order:
            return FourierSeries(self.data.copy(), self.period)
        k = self.order - new_order
        return FourierSeries(self.data[k:-k], self.period)

    def pad(self, new_order: int) -> "FourierSeries":
        if new_order <= self.order:
            return self.truncate(new_order)
        extra = new_order - self.order
        pads = [(extra, extra)] + [(0, 0)] * len(self.shape)
        return FourierSeries(np.pad(self.data, pads), self.period)

    def mean(self):
        return self.coeff(0)

    def compress(self, rel_tol: float = 1e-15) -> "FourierSeries":
        """Drop a negligible symmetric tail of coefficients."""
        mags = np.abs(self.data).reshape(self.data.shape[0], -1).max(axis=1)
        floor = rel_tol * max(float(mags.max()), 1e-300)
        keep = np.nonzero(mags > floor)[0]
        if keep.size == 0:
            return self.truncate(0)
        reach = max(abs(int(keep[0]) - self.order), abs(int(keep[-1]) - self.order))
        return self.truncate(reach)

    def real_part(self) -> "FourierSeries":
        flipped = np.conj(self.data[::-1])
        return FourierSeries(0.5 * (self.data + flipped), self.period)

    def imag_part(self) -> "FourierSeries":
        flipped = np.conj(self.data[::-1])
        return FourierSeries((self.data - flipped) / 2j, self.period)

    def is_real(self, tol: float = 1e-10) -> bool:
        flipped = np.conj(self.data[::-1])
        scale = max(np.max(np.abs(self.data)), 1e-300)
        return bool(np.max(np.abs(self.data - flipped)) <= tol * scale)

    def coeff_l1(self) -> float:
        return float(np.sum(np.abs(self.data).reshape(self.data.shape[0], -1).sum(axis=1)))

    def sup_norm(self, grid: int = 0) -> float:
        n = grid or max(8 * self.order + 8, 64)
        xs = np.arange(n) / n * self.period
        vals = self(xs)
        return float(np.max(np.abs(vals)))

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        if self.period != other.period:
            raise ValueError("period mismatch")
        k = max(self.order, other.order)
        return FourierSeries(self.pad(k).data + other.pad(k).data, self.period)

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        if self.period != other.period:
            raise ValueError("period mismatch")
        k = max(self.order, other.order)
        return FourierSeries(self.pad(k).data - other.pad(k).data, self.period)

    def __mul__(self, scalar) -> "FourierSeries":
        return FourierSeries(self.data * scalar, self.period)

    __rmul__ = __mul__


def fourier_truncate(f: FourierSeries, new_order: int) -> FourierSeries:
    """Drop coefficients above `new_order`; idempotent and linear."""
    if new_order > f.order:
        raise ValueError("truncation order exceeds the stored order")
    return f.truncate(new_order)


def series_from_grid(values, order: int, period: int = 1) -> FourierSeries:
    """Least-aliasing Fourier coefficients of grid samples on [0, period)."""
    values = np.asarray(values, dtype=complex)
    n = values.shape[0]
    if 2 * order + 1 > n:
        raise ValueError("grid too coarse for the requested order")
    hat = np.fft.fft(values, axis=0) / n
    idx = [(k % n) for k in range(-order, order + 1)]
    return FourierSeries(hat[idx], period)
