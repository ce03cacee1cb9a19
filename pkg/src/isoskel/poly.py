"""Dense bivariate polynomials with exact coefficient arithmetic.

Everything downstream (level tracing, curvature fields, the tangency
systems) evaluates polynomials and their derivatives, so this is the one
place where coefficient bookkeeping lives.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npp


def _conv2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """2-D full convolution = product of coefficient matrices."""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[0]):
        row = a[i]
        for j in range(a.shape[1]):
            if row[j] != 0.0:
                out[i:i + b.shape[0], j:j + b.shape[1]] += row[j] * b
    return out


class PolyXY:
    """Polynomial in (x, y); ``coeffs[i, j]`` multiplies x**i * y**j."""

    __slots__ = ("coeffs", "_deriv_cache")

    def __init__(self, coeffs):
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float)).copy()
        self._deriv_cache: dict[tuple[int, int], "PolyXY"] = {}

    @classmethod
    def from_terms(cls, terms) -> "PolyXY":
        """Build from an iterable of (i, j, value) monomial triples."""
        terms = list(terms)
        di = max((int(i) for i, _, _ in terms), default=0)
        dj = max((int(j) for _, j, _ in terms), default=0)
        c = np.zeros((di + 1, dj + 1))
        for i, j, v in terms:
            c[int(i), int(j)] += float(v)
        return cls(c)

    @classmethod
    def zero(cls) -> "PolyXY":
        return cls(np.zeros((1, 1)))

    def terms(self, tol: float = 0.0):
        """Yield (i, j, value) for coefficients with |value| > tol."""
        for i in range(self.coeffs.shape[0]):
            for j in range(self.coeffs.shape[1]):
                v = self.coeffs[i, j]
                if abs(v) > tol:
                    yield i, j, v

    def coeff(self, i: int, j: int) -> float:
        if i < self.coeffs.shape[0] and j < self.coeffs.shape[1]:
            return float(self.coeffs[i, j])
        return 0.0

    def total_degree(self, tol: float = 0.0) -> int:
        deg = 0
        for i, j, _ in self.terms(tol):
            deg = max(deg, i + j)
        return deg

    def __call__(self, x, y):
        return npp.polyval2d(np.asarray(x, dtype=float),
                             np.asarray(y, dtype=float), self.coeffs)

    def derivative(self, px: int = 0, py: int = 0) -> "PolyXY":
        """d^(px+py) / dx^px dy^py, cached."""
        key = (px, py)
        cached = self._deriv_cache.get(key)
        if cached is not None:
            return cached
        c = self.coeffs
        for _ in range(px):
            if c.shape[0] == 1:
                c = np.zeros((1, 1))
                break
            c = c[1:, :] * np.arange(1, c.shape[0])[:, None]
        for _ in range(py):
            if c.shape[1] == 1:
                c = np.zeros((c.shape[0], 1))
                break
            c = c[:, 1:] * np.arange(1, c.shape[1])[None, :]
        out = PolyXY(c)
        self._deriv_cache[key] = out
        return out

    def grad(self, x, y):
        return (self.derivative(1, 0)(x, y), self.derivative(0, 1)(x, y))

    # -- coefficient arithmetic ------------------------------------------

    def _binop(self, other, sign: float) -> "PolyXY":
        a, b = self.coeffs, other.coeffs
        ni = max(a.shape[0], b.shape[0])
        nj = max(a.shape[1], b.shape[1])
        out = np.zeros((ni, nj))
        out[:a.shape[0], :a.shape[1]] += a
        out[:b.shape[0], :b.shape[1]] += sign * b
        return PolyXY(out)

    def __add__(self, other: "PolyXY") -> "PolyXY":
        return self._binop(other, 1.0)

    def __sub__(self, other: "PolyXY") -> "PolyXY":
        return self._binop(other, -1.0)

    def __mul__(self, other):
        if isinstance(other, PolyXY):
            return PolyXY(_conv2(self.coeffs, other.coeffs))
        return PolyXY(self.coeffs * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "PolyXY":
        return PolyXY(-self.coeffs)

    def rotated(self, theta: float) -> "PolyXY":
        """Coefficients of (x, y) -> f(x cos t - y sin t, x sin t + y cos t).

        Total degree is preserved, so no truncation happens.
        """
        ct, st = np.cos(theta), np.sin(theta)
        mx = np.array([[0.0, -st], [ct, 0.0]])   # x cos t - y sin t
        my = np.array([[0.0, ct], [st, 0.0]])    # x sin t + y cos t
        di, dj = self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1
        xpow = [np.ones((1, 1))]
        for _ in range(di):
            xpow.append(_conv2(xpow[-1], mx))
        ypow = [np.ones((1, 1))]
        for _ in range(dj):
            ypow.append(_conv2(ypow[-1], my))
        out = np.zeros((di + dj + 1, di + dj + 1))
        for i, j, v in self.terms():
            term = _conv2(xpow[i], ypow[j]) if (i or j) else np.ones((1, 1))
            out[:term.shape[0], :term.shape[1]] += v * term
        return PolyXY(out).trimmed()

    def trimmed(self, tol: float = 0.0) -> "PolyXY":
        """Drop all-(near-)zero trailing rows/columns."""
        c = self.coeffs
        ni, nj = c.shape
        while ni > 1 and np.all(np.abs(c[ni - 1]) <= tol):
            ni -= 1
        while nj > 1 and np.all(np.abs(c[:ni, nj - 1]) <= tol):
            nj -= 1
        return PolyXY(c[:ni, :nj])

    def __repr__(self):
        parts = [f"{v:g}*x^{i}*y^{j}" for i, j, v in self.terms()]
        return "PolyXY(" + (" + ".join(parts) if parts else "0") + ")"
