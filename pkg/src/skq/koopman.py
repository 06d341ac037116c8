"""Koopman-side tools: composition with the map, time averages along orbits,
Monte-Carlo correlations and the exact eigenfunctions of the cyclic CAT map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import torus
from .errors import DegenerateMode
from .rng import uniform_block
from .torus import TWO_PI, MapKind, MapSpec


@dataclass(frozen=True)
class Observable:
    """A function on the torus, vectorized over leading axes of its input."""

    evaluator: Callable
    label: str = ""

    def __call__(self, theta):
        return self.evaluator(np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class KoopmanEigenpair:
    eigenvalue: complex
    mode: Observable


def constant(c, label=None):
    return Observable(lambda th: np.full(th.shape[:-1], c, dtype=complex), label or f"const {c}")


def fourier(k1, k2=0):
    """The character theta -> exp(i (k1 theta^1 + k2 theta^2))."""
    return Observable(
        lambda th: np.exp(1j * (k1 * th[..., 0] + k2 * th[..., 1])), f"exp(i({k1},{k2}).theta)"
    )


def koopman_apply(spec: MapSpec, f: Observable) -> Observable:
    """T f = f o phi."""
    return Observable(lambda th: f(torus.map_step(spec, th)), f"T[{f.label}]")


def harmonic_average(spec: MapSpec, f, theta0, lam: complex, N: int):
    """(1/N) sum_{n<N} exp(-lam n) f(phi^n theta0).

    ``f`` may return scalars or arrays (e.g. the matrix-valued U); the sum
    runs over the orbit of every point in ``theta0``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    theta = torus.canonical(theta0)
    acc = np.asarray(f(theta), dtype=complex).copy()
    if lam == 0:
        for _ in range(1, N):
            theta = torus.map_step(spec, theta)
            acc += f(theta)
        return acc / N
    step = np.exp(-lam)
    weight = 1.0 + 0j
    for _ in range(1, N):
        theta = torus.map_step(spec, theta)
        weight *= step
        acc += weight * np.asarray(f(theta))
    return acc / N


def birkhoff_average(spec: MapSpec, f, theta0, N: int):
    """Time mean (1/N) sum_{n<N} f(phi^n theta0)."""
    return harmonic_average(spec, f, theta0, 0, N)


def correlation(spec: MapSpec, f: Observable, g: Observable, t: int, M: int, seed: int = 0):
    """Monte-Carlo estimate of int conj(g) f o phi^t dmu over M uniform samples.

    Returns ``(estimate, standard_error)`` where the error is the sample
    standard deviation of the complex integrand divided by sqrt(M).
    """
    if M < 1 or t < 0:
        raise ValueError("need M >= 1 and t >= 0")
    theta = TWO_PI * uniform_block(seed, 0, M, 2)
    moved = torus.map_power(spec, theta, t)
    z = np.conj(g(theta)) * f(moved)
    est = complex(np.mean(z))
    se = float(np.sqrt(np.mean(np.abs(z - est) ** 2) / M)) if M > 1 else float("inf")
    return est, se


def cyclic_koopman_modes(g: Observable, root_index: int, probe: int = 16) -> KoopmanEigenpair:
    """Exact Koopman eigenfunction of the cyclic CAT map from the 3-cycle DFT of g."""
    if root_index not in (0, 1, 2):
        raise ValueError("root_index must be 0, 1 or 2")
    spec = MapSpec.cyclic()
    omega = np.exp(2j * np.pi * root_index / 3)

    def mode(th):
        th = torus.canonical(th)
        total = 0.0
        for n in range(3):
            total = total + omega ** (-n) * g(th)
            th = torus.map_step(spec, th)
        return total / 3

    ticks = TWO_PI * (np.arange(probe) + 0.37) / probe
    grid = np.stack(np.meshgrid(ticks, ticks, indexing="ij"), axis=-1)
    if np.max(np.abs(mode(grid))) < 1e-12:
        raise DegenerateMode(f"{g.label} has no component at eigenvalue {omega:.3g}")
    return KoopmanEigenpair(omega, Observable(mode, f"P{root_index}[{g.label}]"))


def space_mean(f: Observable, M: int, seed: int = 0):
    """Monte-Carlo Haar mean of f with its standard error."""
    theta = TWO_PI * uniform_block(seed, 0, M, 2)
    z = f(theta)
    est = complex(np.mean(z))
    return est, float(np.sqrt(np.mean(np.abs(z - est) ** 2) / M))


def is_linear(spec: MapSpec):
    return spec.kind in (MapKind.CyclicCat, MapKind.ArnoldCat)
