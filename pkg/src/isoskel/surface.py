"""Surfaces z = f(x, y) in Monge form and the tangency classification.

The origin is a tangency point: f and both first derivatives vanish there.
All local computations live on the disc |(x, y)| <= neighbourhood_radius.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateContact, NotUmbilic
from .poly import PolyXY

DEFAULT_MAX_DEGREE = 6

#: absolute tolerance on coefficient expressions in degeneracy tests
CLASS_TOL = 1e-9


class ContactClass(enum.Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC_CUSP_OF_GAUSS = "elliptic_cusp_of_gauss"
    HYPERBOLIC_CUSP_OF_GAUSS = "hyperbolic_cusp_of_gauss"


@dataclass(frozen=True)
class PointClass:
    """Tangency type of the origin; umbilic is meaningful only for elliptic."""
    tag: ContactClass
    umbilic: bool = False

    def __post_init__(self):
        if self.umbilic and self.tag is not ContactClass.ELLIPTIC:
            raise ValueError("umbilic flag only applies to elliptic points")


@dataclass(frozen=True)
class MongeSurface:
    """Polynomial surface in Monge form plus its working neighbourhood.

    ``field`` holds the coefficients; the constant and linear coefficients
    must be exactly zero.  The cubic coefficients (3,0),(2,1),(1,2),(0,3)
    are referred to as b0..b3 below (lowest y-power first) and the quartic
    ones (4,0)..(0,4) as c0..c4.
    """
    field: PolyXY
    neighbourhood_radius: float = 1.0
    max_degree: int = DEFAULT_MAX_DEGREE

    def __post_init__(self):
        if self.neighbourhood_radius <= 0:
            raise ValueError("neighbourhood_radius must be positive")
        for i, j in ((0, 0), (1, 0), (0, 1)):
            if self.field.coeff(i, j) != 0.0:
                raise ValueError(
                    f"not in Monge form: coefficient of x^{i} y^{j} is "
                    f"{self.field.coeff(i, j)!r}, expected exactly 0")
        if self.field.total_degree() > self.max_degree:
            raise ValueError(
                f"total degree {self.field.total_degree()} exceeds "
                f"max_degree={self.max_degree}")

    @classmethod
    def from_coeffs(cls, coeffs, radius: float = 1.0,
                    max_degree: int = DEFAULT_MAX_DEGREE) -> "MongeSurface":
        """coeffs: {(i, j): value} mapping or (i, j, value) triples."""
        if isinstance(coeffs, dict):
            terms = [(i, j, v) for (i, j), v in sorted(coeffs.items())]
        else:
            terms = list(coeffs)
        return cls(PolyXY.from_terms(terms), radius, max_degree)

    @property
    def radius(self) -> float:
        return self.neighbourhood_radius

    def coefficients(self) -> dict[tuple[int, int], float]:
        return {(i, j): v for i, j, v in self.field.terms()}

    def cubic(self) -> tuple[float, float, float, float]:
        """(b0, b1, b2, b3) = coefficients of x^3, x^2 y, x y^2, y^3."""
        f = self.field
        return (f.coeff(3, 0), f.coeff(2, 1), f.coeff(1, 2), f.coeff(0, 3))

    def quartic(self) -> tuple[float, float, float, float, float]:
        """(c0..c4) = coefficients of x^4, x^3 y, x^2 y^2, x y^3, y^4."""
        f = self.field
        return (f.coeff(4, 0), f.coeff(3, 1), f.coeff(2, 2),
                f.coeff(1, 3), f.coeff(0, 4))

    def rotated(self, theta: float) -> "MongeSurface":
        """Surface g with g(p) = f(R_theta p); stays in Monge form."""
        return MongeSurface(self.field.rotated(theta).trimmed(0.0),
                            self.neighbourhood_radius, self.max_degree)


def evaluate(surface: MongeSurface, point, derivative_order=(0, 0)) -> float:
    """Partial derivative d^(i+j) f / dx^i dy^j at a point."""
    px, py = derivative_order
    if px < 0 or py < 0:
        raise ValueError("derivative orders must be non-negative")
    if px + py > surface.max_degree:
        raise ValueError("derivative order exceeds surface degree bound")
    return float(surface.field.derivative(px, py)(point[0], point[1]))


def hessian_origin(surface: MongeSurface) -> np.ndarray:
    f = surface.field
    return np.array([[2.0 * f.coeff(2, 0), f.coeff(1, 1)],
                     [f.coeff(1, 1), 2.0 * f.coeff(0, 2)]])


def classify_origin(surface: MongeSurface, tol: float = CLASS_TOL) -> PointClass:
    """Contact type of the tangent plane at the origin.

    Sign of det(Hessian) separates elliptic/hyperbolic; the degenerate case
    is pushed through a rotation (kernel onto the y-axis) and, when the y^3
    term also dies, a shear that exposes the y^4 coefficient whose sign
    relative to the surviving quadratic decides between the two kinds of
    cusp of Gauss (isolated point vs a pair of tangential arcs).
    """
    H = hessian_origin(surface)
    det = H[0, 0] * H[1, 1] - H[0, 1] ** 2
    scale = max(1.0, np.abs(H).max() ** 2)
    if det > tol * scale:
        umb = (abs(H[0, 0] - H[1, 1]) <= tol * max(1.0, np.abs(H).max())
               and abs(H[0, 1]) <= tol * max(1.0, np.abs(H).max()))
        return PointClass(ContactClass.ELLIPTIC, umbilic=umb)
    if det < -tol * scale:
        return PointClass(ContactClass.HYPERBOLIC)

    # rank <= 1 Hessian
    evals, evecs = np.linalg.eigh(H)
    idx = int(np.argmax(np.abs(evals)))
    lam = evals[idx] / 2.0  # so quadratic part is lam * x^2 after rotation
    if abs(lam) <= tol:
        raise DegenerateContact("Hessian is identically zero at the origin")
    v = evecs[:, idx]
    theta = float(np.arctan2(v[1], v[0]))
    g = surface.rotated(theta).field
    b2p, b3p = g.coeff(1, 2), g.coeff(0, 3)
    if abs(b3p) > tol:
        return PointClass(ContactClass.PARABOLIC)
    # cusp of Gauss: shear x -> x - b2'/(2 lam) y^2 leaves y^4 coefficient
    c4res = g.coeff(0, 4) - b2p ** 2 / (4.0 * lam)
    if abs(c4res) <= tol:
        raise DegenerateContact("quartic test of the cusp of Gauss vanishes")
    if c4res * lam > 0:
        return PointClass(ContactClass.ELLIPTIC_CUSP_OF_GAUSS)
    return PointClass(ContactClass.HYPERBOLIC_CUSP_OF_GAUSS)


@dataclass(frozen=True)
class UmbilicNormalisation:
    surface: MongeSurface
    rotation_angle: float
    generic: bool  # b1 != b3 after rotation
    b_coeffs: tuple[float, float, float, float] = field(default=None)


def normalize_umbilic(surface: MongeSurface, tol: float = CLASS_TOL
                      ) -> UmbilicNormalisation:
    """Rotate so the cubic satisfies b0 == b2; quadratic part is untouched.

    b0(theta) - b2(theta) = 4 Re(A e^{3 i theta}) for the z^3 component A of
    the cubic, so a root always exists; we take the one of smallest |theta|.
    Flags (does not raise) when the b1 != b3 genericity fails afterwards.
    """
    pc = classify_origin(surface, tol)
    if pc.tag is not ContactClass.ELLIPTIC or not pc.umbilic:
        raise NotUmbilic(f"origin classifies as {pc.tag.value}, umbilic={pc.umbilic}")

    def gap(theta: float) -> float:
        b0, _, b2, _ = surface.rotated(theta).cubic()
        return b0 - b2

    b0, b1, b2, b3 = surface.cubic()
    re_a, im_a = (b0 - b2) / 4.0, (b3 - b1) / 4.0
    if abs(re_a) <= tol and abs(im_a) <= tol:
        # cubic has no z^3 part: b0 == b2 already, but b1 == b3 too
        return UmbilicNormalisation(surface, 0.0, generic=False,
                                    b_coeffs=surface.cubic())
    if abs(re_a) <= tol:
        theta = 0.0
    else:
        # zeros of cos(3 theta + phase): pick the root closest to 0
        phase = np.arctan2(im_a, re_a)
        kk = np.arange(-3, 4)
        cands = (np.pi / 2.0 - phase + kk * np.pi) / 3.0
        theta = float(cands[np.argmin(np.abs(cands))])
        lo, hi = theta - 0.02, theta + 0.02
        if gap(lo) * gap(hi) < 0:
            theta = brentq(gap, lo, hi, xtol=1e-15)
    rot = surface.rotated(theta)
    nb0, nb1, nb2, nb3 = rot.cubic()
    if abs(nb0 - nb2) > 1e-12:
        raise DegenerateContact("umbilic normalisation failed to close b0-b2 gap")
    return UmbilicNormalisation(rot, theta, generic=abs(nb1 - nb3) > tol,
                                b_coeffs=(nb0, nb1, nb2, nb3))
