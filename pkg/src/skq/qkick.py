"""The quantum layer: spin-1/2 states, the kicked evolution operator, and
single-qubit density-matrix diagnostics.

Basis convention: index 0 is |up>, index 1 is |down>.  Batched arrays carry
the matrix indices on the last two axes, states on the last axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

LN2 = float(np.log(2.0))
UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)


class ReductionKind(enum.Enum):
    FixTheta3 = "FixTheta3"
    FixTheta2 = "FixTheta2"
    Full3D = "Full3D"


@dataclass(frozen=True)
class Reduction:
    kind: ReductionKind
    value: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ReductionKind(self.kind))

    @property
    def arity(self):
        return 3 if self.kind is ReductionKind.Full3D else 2


@dataclass(frozen=True)
class KickParams:
    """Kick model parameters.

    ``omega_ratio`` is omega_1 / omega_0.  The reduction decides which kick
    angle is frozen when the phase space is the 2-torus.
    """

    omega_ratio: float
    reduction: Reduction = Reduction(ReductionKind.FixTheta3, np.pi / 4)

    def __post_init__(self):
        if not self.omega_ratio > 0:
            raise ValueError(f"omega_ratio must be > 0, got {self.omega_ratio}")


def full_angles(params: KickParams, theta):
    """Expand reduced coordinates to (strength, delay, direction)."""
    theta = np.asarray(theta, dtype=float)
    red = params.reduction
    if theta.shape[-1] != red.arity:
        raise DimensionMismatch(
            f"{red.kind.value} expects points of dimension {red.arity}, got {theta.shape[-1]}"
        )
    if red.kind is ReductionKind.Full3D:
        return theta[..., 0], theta[..., 1], theta[..., 2]
    fixed = np.full(theta.shape[:-1], red.value)
    if red.kind is ReductionKind.FixTheta3:
        return theta[..., 0], theta[..., 1], fixed
    return theta[..., 0], fixed, theta[..., 1]


def kick_projector(theta3):
    """Rank-one projector onto cos(theta3)|up> + sin(theta3)|down>."""
    c, s = np.cos(theta3), np.sin(theta3)
    w = np.stack([c, s], axis=-1).astype(complex)
    return w[..., :, None] * w[..., None, :]


def free_evolution(omega_ratio, s):
    """Diagonal entries of exp(-i H0 s / (hbar omega_0)), H0 = (hbar omega_1/2)|down><down|."""
    return np.exp(-0.5j * omega_ratio * np.asarray(s, dtype=float))


def kick_unitary(params: KickParams, theta):
    """Stroboscopic one-period evolution operator U(theta).

    U = D(2pi - delay) [1 + (exp(-i strength) - 1) W(direction)] D(delay)
    with D(s) = diag(1, exp(-i omega_ratio s / 2)).  Vectorized over leading
    axes of ``theta``.
    """
    strength, delay, direction = full_angles(params, theta)
    r = params.omega_ratio
    kick = np.exp(-1j * strength) - 1.0
    c, s = np.cos(direction), np.sin(direction)
    d_in = free_evolution(r, delay)
    d_out = free_evolution(r, 2 * np.pi - delay)
    U = np.empty(np.shape(strength) + (2, 2), dtype=complex)
    U[..., 0, 0] = 1.0 + kick * c * c
    U[..., 0, 1] = kick * c * s * d_in
    U[..., 1, 0] = d_out * kick * c * s
    U[..., 1, 1] = d_out * (1.0 + kick * s * s) * d_in
    return U


def evolve_state(U, psi):
    """Matrix-vector product U psi, batched."""
    U = np.asarray(U)
    psi = np.asarray(psi)
    out = np.empty(np.broadcast_shapes(U.shape[:-2], psi.shape[:-1]) + (2,), dtype=complex)
    out[..., 0] = U[..., 0, 0] * psi[..., 0] + U[..., 0, 1] * psi[..., 1]
    out[..., 1] = U[..., 1, 0] * psi[..., 0] + U[..., 1, 1] * psi[..., 1]
    return out


def matmul2(A, B):
    """Batched 2x2 product written out entrywise.

    Entry-wise arithmetic keeps every batch element bit-identical no matter
    how the batch is chunked.
    """
    C = np.empty(np.broadcast_shapes(A.shape, B.shape), dtype=complex)
    C[..., 0, 0] = A[..., 0, 0] * B[..., 0, 0] + A[..., 0, 1] * B[..., 1, 0]
    C[..., 0, 1] = A[..., 0, 0] * B[..., 0, 1] + A[..., 0, 1] * B[..., 1, 1]
    C[..., 1, 0] = A[..., 1, 0] * B[..., 0, 0] + A[..., 1, 1] * B[..., 1, 0]
    C[..., 1, 1] = A[..., 1, 0] * B[..., 0, 1] + A[..., 1, 1] * B[..., 1, 1]
    return C


def dagger(A):
    return np.conj(np.swapaxes(A, -1, -2))


def is_unitary(U, atol=1e-10):
    U = np.asarray(U)
    return bool(np.allclose(matmul2(dagger(U), U), np.eye(2), atol=atol, rtol=0))


def fix_phase(psi):
    """Make the largest-magnitude component real and positive."""
    psi = np.asarray(psi, dtype=complex)
    idx = np.argmax(np.abs(psi), axis=-1)
    lead = np.take_along_axis(psi, idx[..., None], axis=-1)
    mag = np.abs(lead)
    phase = np.where(mag > 0, lead / np.where(mag > 0, mag, 1.0), 1.0)
    return psi / phase


def normalize(psi):
    psi = np.asarray(psi, dtype=complex)
    return psi / np.linalg.norm(psi, axis=-1, keepdims=True)


def spin_state(up, down):
    return normalize(np.array([up, down], dtype=complex))


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex)
    return psi[..., :, None] * np.conj(psi[..., None, :])


def check_density(rho, tol=1e-10):
    """Raise ValueError unless rho is Hermitian, unit-trace and PSD within tol."""
    rho = np.asarray(rho)
    if not np.allclose(rho, dagger(rho), atol=tol, rtol=0):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho)} != 1")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise ValueError("density matrix has negative eigenvalues")


def vn_entropy(rho, clip=1e-10):
    """Von Neumann entropy in nats; eigenvalues in [-clip, 0) are set to 0."""
    p = np.linalg.eigvalsh(np.asarray(rho))
    p = np.where((p < 0) & (p >= -clip), 0.0, p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def observables(rho):
    """Population of |up> and coherence |rho_{up,down}|."""
    rho = np.asarray(rho)
    return {"population_up": float(np.real(rho[0, 0])), "coherence": float(np.abs(rho[0, 1]))}
