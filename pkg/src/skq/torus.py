"""Classical phase space: points of the torus and the three map families.

Points are plain ``numpy`` arrays whose last axis holds the angles, so every
function here accepts a single point of shape ``(m,)`` or a batch of shape
``(..., m)``.  Angles are always returned in the canonical range [0, 2*pi).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NonDiagonalizable

TWO_PI = 2.0 * np.pi

CYCLIC_CAT_MATRIX = np.array([[-1, 1], [-1, 0]])
ARNOLD_CAT_MATRIX = np.array([[1, 1], [1, 2]])


class MapKind(enum.Enum):
    CyclicCat = "CyclicCat"
    ArnoldCat = "ArnoldCat"
    Standard = "Standard"


@dataclass(frozen=True)
class MapSpec:
    """A torus map. ``K`` is only read by the standard map."""

    kind: MapKind
    K: float = 0.0

    def __post_init__(self):
        kind = MapKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is MapKind.Standard and not self.K >= 0:
            raise ValueError(f"standard map requires K >= 0, got {self.K}")

    @classmethod
    def cyclic(cls):
        return cls(MapKind.CyclicCat)

    @classmethod
    def arnold(cls):
        return cls(MapKind.ArnoldCat)

    @classmethod
    def standard(cls, K):
        return cls(MapKind.Standard, float(K))


@dataclass(frozen=True)
class JacobianEigen:
    eigenvalues: np.ndarray
    log_eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are the eigendirections


def canonical(theta):
    """Reduce angles to [0, 2*pi) by floor division."""
    theta = np.asarray(theta, dtype=float)
    out = theta - TWO_PI * np.floor(theta / TWO_PI)
    # subnormal negatives survive the floor (x / 2pi underflows to -0)
    out = np.where(out < 0, out + TWO_PI, out)
    # and tiny negatives round up to exactly 2pi
    return np.where(out >= TWO_PI, 0.0, out)


def torus_point(*coords):
    return canonical(np.array(coords, dtype=float))


def circular_difference(a, b):
    """Signed difference a - b folded into [-pi, pi)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return (d + np.pi) % TWO_PI - np.pi


def torus_distance(a, b):
    """Max over coordinates of the circular distance."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % TWO_PI
    return np.max(np.minimum(d, TWO_PI - d), axis=-1)


def _check_planar(theta):
    if theta.shape[-1] != 2:
        raise ValueError(f"torus maps act on T^2, got points of dimension {theta.shape[-1]}")


def map_step(spec: MapSpec, theta):
    """Apply one step of the map to a point (or batch of points)."""
    theta = np.asarray(theta, dtype=float)
    _check_planar(theta)
    t1, t2 = theta[..., 0], theta[..., 1]
    if spec.kind is MapKind.CyclicCat:
        n1, n2 = -t1 + t2, -t1
    elif spec.kind is MapKind.ArnoldCat:
        n1, n2 = t1 + t2, t1 + 2.0 * t2
    else:
        n1 = canonical(t1 + spec.K * np.sin(t2))
        n2 = t2 + n1
    return canonical(np.stack([n1, n2], axis=-1))


def map_inverse_step(spec: MapSpec, theta):
    """Exact inverse of :func:`map_step`."""
    theta = np.asarray(theta, dtype=float)
    _check_planar(theta)
    t1, t2 = theta[..., 0], theta[..., 1]
    if spec.kind is MapKind.CyclicCat:
        n1, n2 = -t2, t1 - t2
    elif spec.kind is MapKind.ArnoldCat:
        n1, n2 = 2.0 * t1 - t2, -t1 + t2
    else:
        n2 = canonical(t2 - t1)
        n1 = t1 - spec.K * np.sin(n2)
    return canonical(np.stack([n1, n2], axis=-1))


def map_orbit(spec: MapSpec, theta0, n: int):
    """Return ``[theta0, phi(theta0), ..., phi^n(theta0)]`` stacked on axis 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    theta = canonical(theta0)
    orbit = np.empty((n + 1,) + theta.shape)
    orbit[0] = theta
    for k in range(n):
        theta = map_step(spec, theta)
        orbit[k + 1] = theta
    return orbit


def map_power(spec: MapSpec, theta, p: int):
    theta = canonical(theta)
    for _ in range(p):
        theta = map_step(spec, theta)
    return theta


def verify_cycle(spec: MapSpec, theta, p: int, tol: float) -> bool:
    """True iff phi^p(theta) lies within ``tol`` of theta in the torus metric."""
    if p < 1 or tol <= 0:
        raise ValueError("need p >= 1 and tol > 0")
    theta = canonical(theta)
    return bool(torus_distance(map_power(spec, theta, p), theta) < tol)


def jacobian(spec: MapSpec, theta):
    """Analytic 2x2 Jacobian of one map step at theta."""
    theta = np.asarray(theta, dtype=float)
    if spec.kind is MapKind.CyclicCat:
        J = CYCLIC_CAT_MATRIX.astype(float)
        return np.broadcast_to(J, theta.shape[:-1] + (2, 2)).copy()
    if spec.kind is MapKind.ArnoldCat:
        J = ARNOLD_CAT_MATRIX.astype(float)
        return np.broadcast_to(J, theta.shape[:-1] + (2, 2)).copy()
    kc = spec.K * np.cos(theta[..., 1])
    J = np.empty(theta.shape[:-1] + (2, 2))
    J[..., 0, 0] = 1.0
    J[..., 0, 1] = kc
    J[..., 1, 0] = 1.0
    J[..., 1, 1] = 1.0 + kc
    return J


def cycle_jacobian(spec: MapSpec, theta, p: int):
    """Jacobian of phi^p at theta (chain rule along the orbit)."""
    theta = canonical(theta)
    J = np.eye(2)
    for _ in range(p):
        J = jacobian(spec, theta) @ J
        theta = map_step(spec, theta)
    return J


def eigen_of(J, tol: float = 1e-9) -> JacobianEigen:
    """Eigen-decomposition of a real 2x2 matrix, refusing defective ones."""
    w, v = np.linalg.eig(J)
    if abs(w[0] - w[1]) < tol * max(1.0, abs(w[0])):
        if not np.allclose(J, w[0].real * np.eye(2), atol=tol):
            raise NonDiagonalizable(f"defective Jacobian with double eigenvalue {w[0]:.6g}")
    return JacobianEigen(eigenvalues=w, log_eigenvalues=np.log(w.astype(complex)), eigenvectors=v)


def jacobian_eigen(spec: MapSpec, theta) -> JacobianEigen:
    """Eigenvalues, principal logs and eigenvectors of the one-step Jacobian."""
    return eigen_of(jacobian(spec, canonical(theta)))


def finite_difference_jacobian(spec: MapSpec, theta, h: float = 1e-6):
    """Central-difference Jacobian, differences folded on the circle."""
    theta = canonical(theta)
    J = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fwd = map_step(spec, theta + e)
        bwd = map_step(spec, theta - e)
        J[:, k] = circular_difference(fwd, bwd) / (2 * h)
    return J


def unstable_direction(eig: JacobianEigen):
    """Real unit vector along the most expanding eigendirection."""
    a = int(np.argmax(np.abs(eig.eigenvalues)))
    v = np.real(eig.eigenvectors[:, a])
    if np.linalg.norm(v) < 1e-12:
        v = np.imag(eig.eigenvectors[:, a])
    v = v / np.linalg.norm(v)
    return v if v[np.argmax(np.abs(v))] > 0 else -v
