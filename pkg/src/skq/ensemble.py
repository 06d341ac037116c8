"""Spin ensembles driven along classical orbits.

An ensemble is a cloud of members (theta_i, psi_i).  Each member is kicked
with U(theta_i) and then its kick parameters move along the map, so the
reduced density matrix (1/N) sum |psi_i><psi_i| tracks the decoherence
induced by the classical flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import torus
from .errors import EmptySupport
from .parallel import map_chunks
from .qkick import LN2, evolve_state, kick_unitary, normalize
from .quasienergy import SampledField
from .rng import uniform_block
from .torus import TWO_PI

MIN_VALID_FRACTION = 0.99
# density-matrix eigenvalues below this are rounding noise of a pure state
PURE_TOL = 1e-12


# -- initial conditions --------------------------------------------------------


@dataclass(frozen=True)
class UniformSquare:
    center: tuple
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("square side must be > 0")


@dataclass(frozen=True)
class UniformTorus:
    pass


@dataclass(frozen=True)
class FieldWeighted:
    field: SampledField


@dataclass(frozen=True)
class FixedState:
    psi: tuple

    def state(self):
        return normalize(np.asarray(self.psi, dtype=complex))


@dataclass(frozen=True)
class FromField:
    field: SampledField


@dataclass(frozen=True)
class InitialCondition:
    spatial: object
    spin: object

    def __post_init__(self):
        for part in (self.spatial, self.spin):
            if isinstance(part, (FieldWeighted, FromField)):
                _check_field(part.field)


def _check_field(f: SampledField):
    if f.valid.mean() < MIN_VALID_FRACTION:
        raise ValueError(
            f"field is valid on {100 * f.valid.mean():.2f}% of cells, need {100 * MIN_VALID_FRACTION:.0f}%"
        )


@dataclass
class EnsembleState:
    theta: np.ndarray
    psi: np.ndarray
    step: int = 0
    seed: int = 0

    def __post_init__(self):
        if len(self.theta) < 1:
            raise ValueError("an ensemble needs at least one member")
        if len(self.theta) != len(self.psi):
            raise ValueError("theta and psi must have the same length")

    @property
    def size(self):
        return len(self.theta)


@dataclass
class TimeSeries:
    n: np.ndarray
    population_up: np.ndarray
    coherence: np.ndarray
    entropy_nats: np.ndarray
    rho: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.n)


def cell_index(theta, G):
    """Binning convention floor(theta G / 2 pi), matching corner anchoring."""
    idx = np.floor(torus.canonical(theta) * G / TWO_PI).astype(int)
    return np.clip(idx, 0, G - 1)


def _sample_field_cells(f: SampledField, N, seed):
    """Inverse-CDF sampling of cells with probability proportional to ||psi||^2.

    Member k uses one uniform from its own counter block, so draws are
    prefix-stable and independent of N.
    """
    w = f.norm2().ravel()
    total = w.sum() if w.size else 0.0
    if not total > 0:
        raise EmptySupport("field weight is zero on every cell")
    cdf = np.cumsum(w) / total
    u = uniform_block(seed, 0, N, 1, round_=1)[:, 0]
    # side="right" skips zero-weight cells; the clip guards against cdf[-1] < 1
    return np.minimum(np.searchsorted(cdf, u, side="right"), np.flatnonzero(w)[-1])


def sample_ensemble(ic: InitialCondition, N: int, seed: int) -> EnsembleState:
    """Draw N members; member k uses only the counter blocks (seed, round, k)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    sp = ic.spatial
    if isinstance(sp, UniformSquare):
        u = uniform_block(seed, 0, N, 2)
        theta = torus.canonical(np.asarray(sp.center, dtype=float) + sp.side * (u - 0.5))
    elif isinstance(sp, UniformTorus):
        theta = torus.canonical(TWO_PI * uniform_block(seed, 0, N, 2))
    elif isinstance(sp, FieldWeighted):
        G = sp.field.resolution
        cells = _sample_field_cells(sp.field, N, seed)
        # members sit on the cell anchors where the field is known
        theta = TWO_PI * np.stack([cells // G, cells % G], axis=-1) / G
    else:
        raise TypeError(f"unknown spatial law {sp!r}")

    spin = ic.spin
    if isinstance(spin, FixedState):
        psi = np.broadcast_to(spin.state(), (N, 2)).copy()
    elif isinstance(spin, FromField):
        f = spin.field
        G = f.resolution
        idx = cell_index(theta, G)
        if not np.all(f.valid[idx[:, 0], idx[:, 1]]):
            raise ValueError("some members fall on invalid field cells")
        psi = normalize(f.cells[idx[:, 0], idx[:, 1]])
    else:
        raise TypeError(f"unknown spin law {spin!r}")
    return EnsembleState(theta, psi, 0, seed)


# -- dynamics ------------------------------------------------------------------


def _step(params, spec):
    def advance(block):
        theta, psi = block[:, :2].real, block[:, 2:]
        psi = evolve_state(kick_unitary(params, theta), psi)
        return np.concatenate([torus.map_step(spec, theta), psi], axis=1)

    return advance


def _advance(theta, psi, params, spec, threads):
    """One kick and one map step for every member, chunked over members."""
    if threads <= 1:
        return torus.map_step(spec, theta), evolve_state(kick_unitary(params, theta), psi)
    out = map_chunks(_step(params, spec), np.concatenate([theta, psi], axis=1), threads=threads)
    return out[:, :2].real.copy(), out[:, 2:].copy()


def evolve(ens: EnsembleState, params, spec, steps: int, threads: int = 1) -> EnsembleState:
    """psi_i <- U(theta_i) psi_i, then theta_i <- phi(theta_i), ``steps`` times."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    theta, psi = ens.theta.copy(), ens.psi.copy()
    for _ in range(steps):
        theta, psi = _advance(theta, psi, params, spec, threads)
    return EnsembleState(theta, psi, ens.step + steps, ens.seed)


def density_matrix(ens: EnsembleState):
    """(1/N) sum_i |psi_i><psi_i| summed in member order."""
    psi = ens.psi
    rho = np.empty((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            rho[a, b] = np.sum(psi[:, a] * np.conj(psi[:, b])) / len(psi)
    rho[1, 0] = np.conj(rho[0, 1])
    rho[0, 0] = rho[0, 0].real
    rho[1, 1] = rho[1, 1].real
    return rho


def entropy_nats(rho):
    """Von Neumann entropy from the closed-form 2x2 eigenvalues, clipped to [0, ln 2]."""
    a, d = rho[0, 0].real, rho[1, 1].real
    gap = np.sqrt(((a - d) / 2) ** 2 + abs(rho[0, 1]) ** 2)
    mean = (a + d) / 2
    if mean - gap <= PURE_TOL:
        return 0.0
    total = 0.0
    for p in (mean + gap, mean - gap):
        if p > 0:
            total -= p * np.log(p)
    return float(min(max(total, 0.0), LN2))


def _record(rho):
    return (
        float(min(max(rho[0, 0].real, 0.0), 1.0)),
        float(min(abs(rho[0, 1]), 0.5)),
        entropy_nats(rho),
    )


def run_experiment(ic, params, spec, N: int, steps: int, seed: int, threads: int = 1) -> TimeSeries:
    """Density matrix, population, coherence and entropy at steps 0..steps.

    ``threads`` splits the members into chunks; the result is bit-identical
    for any value.
    """
    ens = sample_ensemble(ic, N, seed)
    rhos = np.empty((steps + 1, 2, 2), dtype=complex)
    theta, psi = ens.theta, ens.psi
    for n in range(steps + 1):
        rhos[n] = density_matrix(EnsembleState(theta, psi))
        if n < steps:
            theta, psi = _advance(theta, psi, params, spec, threads)
    recs = np.array([_record(r) for r in rhos])
    return TimeSeries(
        n=np.arange(steps + 1),
        population_up=recs[:, 0],
        coherence=recs[:, 1],
        entropy_nats=recs[:, 2],
        rho=rhos,
        meta={"N": N, "seed": seed, "final": EnsembleState(theta, psi, steps, seed)},
    )


def final_field(ens: EnsembleState, G: int) -> SampledField:
    """Per-cell mean occupation |<up|psi>|^2; cells without members are invalid."""
    idx = cell_index(ens.theta, G)
    flat = idx[:, 0] * G + idx[:, 1]
    occ = np.abs(ens.psi[:, 0]) ** 2 / np.sum(np.abs(ens.psi) ** 2, axis=-1)
    counts = np.bincount(flat, minlength=G * G)
    sums = np.bincount(flat, weights=occ, minlength=G * G)
    valid = counts > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(valid, sums / np.maximum(counts, 1), np.nan)
    return SampledField(
        mean.reshape(G, G), valid.reshape(G, G), {"payload": "occupation", "counts": counts.reshape(G, G)}
    )


def late_window_average(series: TimeSeries, start: int, length: int = 50):
    """Mean density matrix over steps start..start+length."""
    return series.rho[start : start + length + 1].mean(axis=0)
