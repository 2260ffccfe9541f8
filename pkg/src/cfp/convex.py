"""Closed convex sets with closed-form projections and convex inequality oracles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import DimensionMismatch, InvalidParams


def _vec(v, name):
    a = np.array(v, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise InvalidParams(f"{name} must be finite")
    a.setflags(write=False)
    return a


def _check_dim(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DimensionMismatch(f"expected a vector of length {dim}, got shape {x.shape}")
    return x


class ConvexSet:
    """A nonempty closed convex set that knows its Euclidean projection."""

    kind: ClassVar[int]
    dim: int

    def project(self, x):
        raise NotImplementedError

    def distance(self, x) -> float:
        x = _check_dim(x, self.dim)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol: float = 1e-12) -> bool:
        return self.distance(x) <= tol


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    dim: int
    kind: ClassVar[int] = 0

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParams("dimension must be positive")

    def project(self, x):
        return _check_dim(x, self.dim).copy()


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray
    kind: ClassVar[int] = 1

    def __post_init__(self):
        lo, hi = _vec(self.lower, "lower"), _vec(self.upper, "upper")
        if lo.shape != hi.shape or lo.size == 0:
            raise InvalidParams("box bounds must be nonempty vectors of equal length")
        if np.any(lo > hi):
            raise InvalidParams("box needs lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    def project(self, x):
        return np.clip(_check_dim(x, self.dim), self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """``{x : a @ x <= b}``."""

    a: np.ndarray
    b: float
    kind: ClassVar[int] = 2

    def __post_init__(self):
        a = _vec(self.a, "a")
        if not np.linalg.norm(a) > 0:
            raise InvalidParams("halfspace normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return self.a.size

    def project(self, x):
        x = _check_dim(x, self.dim)
        excess = self.a @ x - self.b
        if excess <= 0:
            return x.copy()
        return x - (excess / (self.a @ self.a)) * self.a


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    kind: ClassVar[int] = 3

    def __post_init__(self):
        c = _vec(self.center, "center")
        if c.size == 0:
            raise InvalidParams("ball center must be nonempty")
        if not self.radius > 0:
            raise InvalidParams("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    def project(self, x):
        x = _check_dim(x, self.dim)
        d = x - self.center
        r = np.linalg.norm(d)
        if r <= self.radius:
            return x.copy()
        return self.center + (self.radius / r) * d


@dataclass(frozen=True, eq=False)
class Hyperplane(ConvexSet):
    """Solution set of the linear equation ``a @ x = b``."""

    a: np.ndarray
    b: float
    kind: ClassVar[int] = 4

    def __post_init__(self):
        a = _vec(self.a, "a")
        if not np.linalg.norm(a) > 0:
            raise InvalidParams("hyperplane normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return self.a.size

    def project(self, x):
        # (I - a a^T/|a|^2) x + b a/|a|^2
        x = _check_dim(x, self.dim)
        return x - ((self.a @ x - self.b) / (self.a @ self.a)) * self.a


def AffineFromEquation(a, b) -> Hyperplane:
    """The affine set ``{x : a @ x - b = 0}`` of a single linear equation."""
    return Hyperplane(a, b)


class ConvexInequality:
    """Convex ``g`` with the constraint ``g(x) <= 0``.

    ``subgradient_bound`` is an optional bound on the squared norm of the
    plus-function subgradient, used by the discrete Lyapunov checks.
    """

    kind: ClassVar[int]
    dim: int
    subgradient_bound: float | None

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def plus_value(self, x) -> float:
        return max(self.value(x), 0.0)

    def subgradient_plus(self, x):
        x = _check_dim(x, self.dim)
        if self.value(x) <= 0:
            return np.zeros(self.dim)
        return self.gradient(x)


@dataclass(frozen=True, eq=False)
class Linear(ConvexInequality):
    """``g(x) = a @ x - b``."""

    a: np.ndarray
    b: float
    subgradient_bound: float | None = None
    kind: ClassVar[int] = 1

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a, "a"))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return self.a.size

    def value(self, x):
        return float(self.a @ _check_dim(x, self.dim) - self.b)

    def gradient(self, x):
        return self.a.copy()


def always_satisfied(dim: int) -> Linear:
    """The constant inequality ``-1 <= 0`` for agents that only hold a set."""
    return Linear(np.zeros(dim), 1.0, subgradient_bound=0.0)


@dataclass(frozen=True, eq=False)
class Quadratic(ConvexInequality):
    """``g(x) = x @ Q @ x + c @ x + d`` with ``Q`` symmetric PSD."""

    Q: np.ndarray
    c: np.ndarray
    d: float
    subgradient_bound: float | None = None
    kind: ClassVar[int] = 2

    def __post_init__(self):
        q = np.array(self.Q, dtype=float, copy=True)
        c = _vec(self.c, "c")
        if q.shape != (c.size, c.size):
            raise InvalidParams(f"Q must be {c.size}x{c.size}, got {q.shape}")
        scale = max(1.0, float(np.abs(q).max()))
        if np.abs(q - q.T).max() > 1e-12 * scale:
            raise InvalidParams("Q must be symmetric")
        if np.linalg.eigvalsh(q).min() < -1e-12 * scale:
            raise InvalidParams("Q must be positive semidefinite")
        q.setflags(write=False)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", float(self.d))

    @property
    def dim(self):
        return self.c.size

    def value(self, x):
        x = _check_dim(x, self.dim)
        return float(x @ self.Q @ x + self.c @ x + self.d)

    def gradient(self, x):
        return 2.0 * (self.Q @ _check_dim(x, self.dim)) + self.c


@dataclass(frozen=True, eq=False)
class LinearBlock(ConvexInequality):
    """Stacked linear inequalities ``A x <= b`` seen through ``g = ||(A x - b)^+||^2``."""

    A: np.ndarray
    b: np.ndarray
    subgradient_bound: float | None = None
    kind: ClassVar[int] = 3

    def __post_init__(self):
        A = np.array(self.A, dtype=float, copy=True)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        b = _vec(self.b, "b")
        if A.ndim != 2 or A.shape[0] != b.size or A.size == 0:
            raise InvalidParams(f"A must be {b.size}xr, got shape {A.shape}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.A.shape[1]

    def value(self, x):
        return psi_value_and_grad(self.A, self.b, x)[0]

    def gradient(self, x):
        return psi_value_and_grad(self.A, self.b, x)[1]

    def penalty_direction(self, x):
        """``A^T (A x - b)^+``, the unscaled direction of the linear-block flow."""
        return psi_value_and_grad(self.A, self.b, x, half=True)[1]


def project(s: ConvexSet, x) -> np.ndarray:
    return s.project(x)


def distance(s: ConvexSet, x) -> float:
    return s.distance(x)


def plus_value(g: ConvexInequality, x) -> float:
    return g.plus_value(x)


def subgradient_plus(g: ConvexInequality, x) -> np.ndarray:
    """Subgradient of ``max(g, 0)``; zero whenever ``g(x) <= 0``."""
    return g.subgradient_plus(x)


def psi_value_and_grad(A, b, x, half: bool = False):
    """``psi = ||(A x - b)^+||^2`` and its gradient ``2 A^T (A x - b)^+``.

    With ``half=True`` the returned direction is ``A^T (A x - b)^+``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float)
    if A.shape[0] != b.size or x.shape != (A.shape[1],):
        raise DimensionMismatch(f"A {A.shape}, b {b.shape} and x {x.shape} are incompatible")
    y = np.maximum(A @ x - b, 0.0)
    grad = A.T @ y
    return float(y @ y), (grad if half else 2.0 * grad)
