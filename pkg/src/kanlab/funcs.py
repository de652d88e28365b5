"""Trigonometric polynomials on the circle and ordinary polynomials on [0,1].

These are the only function classes the laboratory accepts for base
perturbations, fiber couplings and potentials: they have exact derivatives,
serialize to plain coefficient lists, and reflected/derived coefficient
arrays can be computed once, exactly, so that kernel evaluations near both
ends of the fiber keep full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrigPoly:
    """constant + sum_j cos_coeffs[j-1]*cos(2*pi*j*theta) + sin_coeffs[j-1]*sin(2*pi*j*theta).

    Coefficient arrays are padded to a common length; harmonic j runs from 1.
    An empty TrigPoly is the zero function.
    """

    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()
    constant: float = 0.0

    @staticmethod
    def make(cos_coeffs=(), sin_coeffs=(), constant: float = 0.0) -> "TrigPoly":
        n = max(len(cos_coeffs), len(sin_coeffs))
        ac = tuple(float(c) for c in cos_coeffs) + (0.0,) * (n - len(cos_coeffs))
        as_ = tuple(float(c) for c in sin_coeffs) + (0.0,) * (n - len(sin_coeffs))
        return TrigPoly(ac, as_, float(constant))

    @property
    def n_harmonics(self) -> int:
        return len(self.cos_coeffs)

    @property
    def is_zero(self) -> bool:
        return self.constant == 0.0 and not any(self.cos_coeffs) and not any(self.sin_coeffs)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.constant)
        for j in range(1, self.n_harmonics + 1):
            x = TWO_PI * j * theta
            out = out + self.cos_coeffs[j - 1] * np.cos(x) + self.sin_coeffs[j - 1] * np.sin(x)
        return out if out.shape else float(out)

    def derivative(self) -> "TrigPoly":
        """d/dtheta: cos(2pi j t) -> -2pi j sin, sin -> 2pi j cos."""
        ac = tuple(TWO_PI * j * self.sin_coeffs[j - 1] for j in range(1, self.n_harmonics + 1))
        as_ = tuple(-TWO_PI * j * self.cos_coeffs[j - 1] for j in range(1, self.n_harmonics + 1))
        return TrigPoly(ac, as_)

    def sup_bound(self) -> float:
        """Upper bound for sup |f| (triangle inequality on coefficients)."""
        return float(abs(self.constant) + sum(abs(a) + abs(b) for a, b in zip(self.cos_coeffs, self.sin_coeffs)))

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Kernel layout: index 0 is the constant term, index j >= 1 the
        j-th harmonic (the parity flip under theta -> theta + 1/2 only
        applies to odd harmonics, never to the constant slot)."""
        return (
            np.asarray((self.constant,) + self.cos_coeffs, dtype=np.float64),
            np.asarray((0.0,) + self.sin_coeffs, dtype=np.float64),
        )

    def to_config(self) -> dict:
        return {"cos": list(self.cos_coeffs), "sin": list(self.sin_coeffs), "constant": self.constant}


@dataclass(frozen=True)
class Poly:
    """Ordinary polynomial sum_i coeffs[i] * t**i, evaluated by Horner."""

    coeffs: tuple[float, ...]
    reflected: tuple[float, ...] = field(default=None, compare=False)  # coeffs of p(1-t)

    @staticmethod
    def make(coeffs) -> "Poly":
        c = tuple(float(x) for x in coeffs)
        if not c:
            c = (0.0,)
        return Poly(c, _reflect_coeffs(c))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            out = out * t + c
        return out if out.shape else float(out)

    def derivative(self) -> "Poly":
        if len(self.coeffs) == 1:
            return Poly.make((0.0,))
        return Poly.make(tuple(i * self.coeffs[i] for i in range(1, len(self.coeffs))))

    def value_at_one(self) -> float:
        return float(sum(self.coeffs))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=np.float64)

    def reflected_array(self) -> np.ndarray:
        return np.asarray(self.reflected, dtype=np.float64)

    def to_config(self) -> list:
        return list(self.coeffs)


def _reflect_coeffs(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    """Coefficients of p(1-t) as a polynomial in t, computed exactly.

    The binomial transform is done in rational arithmetic so the reflected
    array is the correctly rounded exact result; this is what lets the fiber
    kernels evaluate near t=1 with full relative precision in m = 1-t.
    """
    n = len(coeffs)
    out = [Fraction(0)] * n
    for i, c in enumerate(coeffs):
        fc = Fraction(c)
        # (1-t)^i = sum_j C(i,j) (-1)^j t^j
        for j in range(i + 1):
            out[j] += fc * math.comb(i, j) * (-1) ** j
    return tuple(float(x) for x in out)


def horner(coeffs, t: float) -> float:
    """Scalar Horner evaluation; reference for the kernel backends."""
    v = coeffs[-1]
    for c in coeffs[-2::-1]:
        v = v * t + c
    return v
