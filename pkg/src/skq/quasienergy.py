"""Fundamental quasienergies, ergodic-average operators and quasienergy states.

The stroboscopic eigen-relation underlying everything here is

    U(theta) |a, theta> = exp(-i chi_a) |a, phi(theta)>

Branches are anchored on fixed or cyclic points where the relation reduces to
an eigenproblem for the monodromy.  Elsewhere states are continued with the
truncated ergodic average

    V(theta) = (1/N) sum_{n<N} exp(i n chi) Pi_n(theta),
    Pi_n(theta) = U(phi^{n-1} theta) ... U(theta),

through |a, theta> = V(theta)^{-1} V(theta* + eps) |a, theta* + eps>.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import torus
from .errors import (
    DegenerateSpectrum,
    LogBranchJump,
    NotCyclic,
    ResonantDenominator,
    SingularV,
)
from .koopman import harmonic_average
from .parallel import map_chunks
from .qkick import KickParams, dagger, evolve_state, fix_phase, kick_unitary, matmul2, normalize
from .torus import TWO_PI, MapKind, MapSpec

COND_LIMIT = 1e8
FD_STEP = 1e-5
DEFAULT_EPS = 1e-3
RESONANCE_TOL = 1e-8
# relative eigen-relation residual above which a cell is read as an SK mode
# rather than a quasienergy state
RESIDUAL_FLAG = 0.3


class BranchLabel(enum.Enum):
    Up = "Up"
    Down = "Down"


@dataclass(frozen=True)
class QuasienergyBranch:
    chi: float
    anchor_point: np.ndarray
    cycle_length: int
    anchor_state: np.ndarray
    label: BranchLabel

    @property
    def phase(self):
        """exp(-i chi), the one-step eigenphase factor."""
        return np.exp(-1j * self.chi)


@dataclass
class SampledField:
    """Payload on the G x G grid, cell (i, j) anchored at (2 pi i / G, 2 pi j / G).

    ``cells`` has shape (G, G) for scalar payloads and (G, G, 2) for spin
    states.  ``residual`` optionally holds the per-cell eigen-relation
    residual of continued states.
    """

    cells: np.ndarray
    valid: np.ndarray
    metadata: dict = field(default_factory=dict)
    residual: np.ndarray | None = None

    @property
    def resolution(self):
        return self.valid.shape[0]

    @property
    def is_state(self):
        return self.cells.ndim == 3

    def occupation(self):
        """|<up|psi>|^2 / ||psi||^2 for state payloads; NaN on invalid cells."""
        if not self.is_state:
            return np.where(self.valid, np.real(self.cells), np.nan)
        psi = self.cells
        with np.errstate(invalid="ignore", divide="ignore"):
            occ = np.abs(psi[..., 0]) ** 2 / np.sum(np.abs(psi) ** 2, axis=-1)
        return np.where(self.valid, occ, np.nan)

    def norm2(self):
        """Per-cell ||psi||^2, zero on invalid cells."""
        w = np.sum(np.abs(np.nan_to_num(self.cells)) ** 2, axis=-1)
        return np.where(self.valid, w, 0.0)

    def flagged(self, threshold=RESIDUAL_FLAG):
        """Cells that are invalid or whose continued state fails the eigen-relation."""
        if self.residual is None:
            return ~self.valid
        return ~self.valid | ~(self.residual <= threshold)


@dataclass
class PhaseLedger:
    dynamical_partial: complex
    geometric_partial: complex
    n: int
    dynamical_series: np.ndarray | None = None
    geometric_series: np.ndarray | None = None

    @property
    def difference(self):
        return self.dynamical_partial - self.geometric_partial


@dataclass(frozen=True)
class LocalExpansion:
    """First-order data of the quasienergy states around a p-cycle point.

    ``coefficients[a, j, i]`` is <Z_j | d/de_a | Z_i>; ``directions`` holds the
    Jacobian eigendirections e_a as columns.
    """

    coefficients: np.ndarray
    directions: np.ndarray
    log_eigenvalues: np.ndarray
    branches: tuple

    def derivative(self, i: int, a: int):
        """d|Z_i>/de_a expressed in the computational basis."""
        anchors = np.stack([b.anchor_state for b in self.branches])
        return self.coefficients[a, :, i] @ anchors

    def first_order_state(self, i: int, theta):
        """anchor_i + sum_a sum_j C[a, j, i] anchor_j vartheta^a at theta."""
        anchor = self.branches[i].anchor_point
        delta = torus.circular_difference(theta, anchor)
        coords = np.linalg.solve(self.directions, delta.astype(complex))
        state = self.branches[i].anchor_state.astype(complex).copy()
        for a in range(2):
            state = state + coords[a] * self.derivative(i, a)
        return state


def grid_points(G):
    ticks = TWO_PI * np.arange(G) / G
    t1, t2 = np.meshgrid(ticks, ticks, indexing="ij")
    return np.stack([t1, t2], axis=-1)


# -- fixed and cyclic points -------------------------------------------------


def monodromy(params: KickParams, spec: MapSpec, theta_star, p: int, check=True):
    """Ordered product U(phi^{p-1} theta*) ... U(theta*), batched over points."""
    theta = torus.canonical(theta_star)
    if check and not np.all(
        torus.torus_distance(torus.map_power(spec, theta, p), theta) < 1e-9
    ):
        raise NotCyclic(f"point {theta} is not {p}-cyclic")
    M = np.broadcast_to(np.eye(2, dtype=complex), theta.shape[:-1] + (2, 2)).copy()
    for _ in range(p):
        M = matmul2(kick_unitary(params, theta), M)
        theta = torus.map_step(spec, theta)
    return M


def monodromy_eigen(M, p):
    """Batched eigen-data of monodromies: (chi, states) with states[..., k, :]."""
    w, v = np.linalg.eig(M)
    chis = np.mod(-np.angle(w), TWO_PI)
    chis = np.where(chis >= TWO_PI, 0.0, chis) / p
    states = fix_phase(normalize(np.swapaxes(v, -1, -2)))
    return w, chis, states


def branches_from_monodromy(M, p, theta_star):
    w, chis, states = monodromy_eigen(M, p)
    if abs(w[0] - w[1]) < 1e-10:
        raise DegenerateSpectrum(f"monodromy eigenvalues coincide: {w[0]:.12g}")
    up_weight = np.abs(states[:, 0])
    if abs(up_weight[0] - up_weight[1]) < 1e-12:
        order = np.argsort(chis, kind="stable")
    else:
        order = np.argsort(-up_weight, kind="stable")
    labels = (BranchLabel.Up, BranchLabel.Down)
    return tuple(
        QuasienergyBranch(
            chi=float(chis[k]),
            anchor_point=torus.canonical(theta_star),
            cycle_length=p,
            anchor_state=states[k],
            label=labels[rank],
        )
        for rank, k in enumerate(order)
    )


def fundamental_branches(params: KickParams, spec: MapSpec, theta_star, p: int = 1):
    """(Up, Down) fundamental quasienergy branches anchored on a p-cycle."""
    M = monodromy(params, spec, theta_star, p)
    return branches_from_monodromy(M, p, theta_star)


def select_branch(branches, label):
    label = BranchLabel(label)
    return next(b for b in branches if b.label is label)


# -- ergodic average operator -----------------------------------------------


def sk_mode_operator(
    params: KickParams, spec: MapSpec, theta, chi: float, N: int, return_product=False
):
    """Truncated ergodic average V^(N)(theta) = (1/N) sum_{n<N} e^{i n chi} Pi_n(theta).

    ``theta`` may be a batch of points.  With ``return_product`` the full
    product Pi_N(theta) is returned as well, which gives V^(N) at phi(theta)
    for free through the exact orbit identity

        V(phi theta) U(theta) = e^{-i chi} [V(theta) + (e^{i N chi} Pi_N - 1) / N].
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    theta = torus.canonical(theta)
    shape = theta.shape[:-1] + (2, 2)
    P = np.broadcast_to(np.eye(2, dtype=complex), shape).copy()
    acc = P.copy()
    step = np.exp(1j * chi)
    weight = 1.0 + 0j
    for _ in range(1, N):
        P = matmul2(kick_unitary(params, theta), P)
        theta = torus.map_step(spec, theta)
        weight *= step
        acc += weight * P
    V = acc / N
    if return_product:
        return V, matmul2(kick_unitary(params, theta), P)
    return V


def shifted_operator(params, theta, chi, N, V, P_N):
    """V^(N)(phi(theta)) from V^(N)(theta) and Pi_N(theta)."""
    eye = np.eye(2, dtype=complex)
    inner = V + (np.exp(1j * N * chi) * P_N - eye) / N
    return np.exp(-1j * chi) * matmul2(inner, dagger(kick_unitary(params, theta)))


def solve2(V, b):
    """Closed-form batched 2x2 solve; returns (x, condition number)."""
    det = V[..., 0, 0] * V[..., 1, 1] - V[..., 0, 1] * V[..., 1, 0]
    x = np.empty(np.broadcast_shapes(V.shape[:-1], b.shape), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        x[..., 0] = (V[..., 1, 1] * b[..., 0] - V[..., 0, 1] * b[..., 1]) / det
        x[..., 1] = (-V[..., 1, 0] * b[..., 0] + V[..., 0, 0] * b[..., 1]) / det
    fro2 = np.sum(np.abs(V) ** 2, axis=(-2, -1))
    adet = np.abs(det)
    # singular values of a 2x2 from its Frobenius norm and |det|
    disc = np.sqrt(np.maximum(fro2**2 - 4 * adet**2, 0.0))
    smax = np.sqrt((fro2 + disc) / 2)
    smin = adet / np.where(smax > 0, smax, 1.0)
    with np.errstate(divide="ignore"):
        cond = np.where(smin > 0, smax / np.where(smin > 0, smin, 1.0), np.inf)
    return x, cond


# -- local expansion ----------------------------------------------------------


def cycle_operator(params, spec, theta, p):
    """V_p(theta) = U(phi^{p-1} theta) ... U(theta) without the cycle check."""
    return monodromy(params, spec, theta, p, check=False)


def local_expansion_matrix(params: KickParams, spec: MapSpec, theta_star, p: int = 1, h=FD_STEP):
    """Derivatives of the anchored quasienergy states along Jacobian eigendirections.

    C[a, j, i] = <Z_j| d_a V_p |Z_i> / (e^{-i p chi_i} Lambda_a - e^{-i p chi_j})

    where Lambda_a are the eigenvalues of the p-step Jacobian and d_a V_p is a
    central difference with step ``h`` along e_a (for complex eigendirections
    the coordinate partials are combined instead).
    """
    theta_star = torus.canonical(theta_star)
    branches = fundamental_branches(params, spec, theta_star, p)
    eig = torus.eigen_of(torus.cycle_jacobian(spec, theta_star, p))
    E = eig.eigenvectors.astype(complex)
    real_dirs = np.allclose(E.imag, 0.0)

    def central(e):
        fwd = cycle_operator(params, spec, theta_star + h * e, p)
        bwd = cycle_operator(params, spec, theta_star - h * e, p)
        return (fwd - bwd) / (2 * h)

    if real_dirs:
        grads = [central(E[:, a].real) for a in range(2)]
    else:
        # complex eigendirections: combine coordinate partials linearly
        partials = [central(np.eye(2)[k]) for k in range(2)]
        grads = [E[0, a] * partials[0] + E[1, a] * partials[1] for a in range(2)]
    phases = np.array([np.exp(-1j * p * b.chi) for b in branches])
    anchors = np.stack([b.anchor_state for b in branches])
    C = np.empty((2, 2, 2), dtype=complex)
    for a in range(2):
        dV = grads[a]
        Lam = eig.eigenvalues[a]
        for i in range(2):
            for j in range(2):
                den = phases[i] * Lam - phases[j]
                if abs(den) < RESONANCE_TOL:
                    raise ResonantDenominator(
                        f"direction {a}, pair ({i},{j}): |denominator| = {abs(den):.3g}"
                    )
                C[a, j, i] = np.vdot(anchors[j], dV @ anchors[i]) / den
    return LocalExpansion(C, E, eig.log_eigenvalues, branches)


def transport_state(branch: QuasienergyBranch, params, spec, theta, direction="unstable", tol=1e-10, max_steps=200):
    """Quasienergy state on the stable or unstable manifold of a fixed point.

    Uses the eigen-relation itself: on the unstable manifold
    |Z, theta> = e^{i n chi} Pi_n(phi^{-n} theta) |Z, phi^{-n} theta>, on the
    stable one |Z, theta> = e^{-i n chi} Pi_n(theta)^dagger |Z, phi^n theta>,
    with n large enough that the far end sits within ``tol`` of the anchor,
    where the anchor state is used.  Serves as an independent oracle for the
    local expansion.
    """
    if branch.cycle_length != 1:
        raise ValueError("transport is implemented for fixed points")
    star = branch.anchor_point
    theta = torus.canonical(theta)
    path = [theta]
    step = torus.map_inverse_step if direction == "unstable" else torus.map_step
    while torus.torus_distance(path[-1], star) > tol:
        if len(path) > max_steps:
            raise ValueError("point does not approach the anchor along the chosen manifold")
        path.append(step(spec, path[-1]))
    state = branch.anchor_state.astype(complex)
    n = len(path) - 1
    if direction == "unstable":
        for pt in reversed(path[1:]):
            state = kick_unitary(params, pt) @ state
        return np.exp(1j * n * branch.chi) * state
    for pt in reversed(path[:-1]):
        state = dagger(kick_unitary(params, pt)) @ state
    return np.exp(-1j * n * branch.chi) * state


# -- continuation ---------------------------------------------------------------


def default_offset(spec: MapSpec, branch: QuasienergyBranch, eps=DEFAULT_EPS):
    eig = torus.eigen_of(torus.cycle_jacobian(spec, branch.anchor_point, branch.cycle_length))
    return eps * torus.unstable_direction(eig)


def _branch_index(expansion: LocalExpansion, branch: QuasienergyBranch):
    return [b.label for b in expansion.branches].index(branch.label)


def offset_state(branch: QuasienergyBranch, params, spec, eps_offset=None):
    """(theta* + eps, |Z, theta* + eps>) from the first-order local expansion."""
    if eps_offset is None:
        eps_offset = default_offset(spec, branch)
    point = torus.canonical(branch.anchor_point + np.asarray(eps_offset, dtype=float))
    expansion = local_expansion_matrix(params, spec, branch.anchor_point, branch.cycle_length)
    return point, expansion.first_order_state(_branch_index(expansion, branch), point)


def continue_states(branch: QuasienergyBranch, params, spec, theta, eps_offset=None, N=10_000, threads=1):
    """Batched continuation over points ``theta`` of shape (M, 2).

    Returns ``(states, cond, residual)``.  ``residual`` is the relative
    eigen-relation residual ||U|a,theta> - e^{-i chi}|a,phi theta>|| / ||a,theta||,
    obtained exactly from the orbit identity.  Points coinciding with the
    anchor return the anchor state.
    """
    theta = torus.canonical(np.asarray(theta, dtype=float).reshape(-1, 2))
    point, z_eps = offset_state(branch, params, spec, eps_offset)
    chi = branch.chi
    V_eps = sk_mode_operator(params, spec, point, chi, N)
    target = V_eps @ z_eps

    def chunk(pts):
        V, P = sk_mode_operator(params, spec, pts, chi, N, return_product=True)
        x, cond = solve2(V, target)
        V1 = shifted_operator(params, pts, chi, N, V, P)
        x1, _ = solve2(V1, target)
        lhs = evolve_state(kick_unitary(params, pts), x)
        with np.errstate(invalid="ignore", divide="ignore"):
            res = np.linalg.norm(lhs - np.exp(-1j * chi) * x1, axis=-1) / np.linalg.norm(x, axis=-1)
        return x, cond, res

    states, cond, res = map_chunks(chunk, theta, threads=threads)
    at_anchor = torus.torus_distance(theta, branch.anchor_point) == 0
    if np.any(at_anchor):
        states[at_anchor] = branch.anchor_state
        cond[at_anchor] = 1.0
        res[at_anchor] = 0.0
    return states, cond, res


def continue_state(branch: QuasienergyBranch, params, spec, theta, eps_offset=None, N=10_000):
    """Unnormalized quasienergy state |a, theta> continued from the anchor.

    Raises SingularV when V^(N)(theta) has condition number above 1e8.
    """
    states, cond, _ = continue_states(branch, params, spec, theta, eps_offset, N)
    if not cond[0] <= COND_LIMIT:
        raise SingularV(f"cond(V) = {cond[0]:.3g} at theta = {torus.canonical(theta)}")
    return states[0]


def quasienergy_field(branch: QuasienergyBranch, params, spec, G: int, N: int, eps_offset=None, threads=1):
    """Continued states on the G x G grid; singular cells are marked invalid."""
    if G < 1:
        raise ValueError("G must be >= 1")
    pts = grid_points(G).reshape(-1, 2)
    states, cond, res = continue_states(branch, params, spec, pts, eps_offset, N, threads)
    valid = cond <= COND_LIMIT
    states = np.where(valid[:, None], states, np.nan)
    meta = {
        "map": spec,
        "kick": params,
        "branch": branch.label.value,
        "chi": branch.chi,
        "N": N,
        "payload": "state",
    }
    return SampledField(
        states.reshape(G, G, 2), valid.reshape(G, G), meta, np.where(valid, res, np.nan).reshape(G, G)
    )


def sk_mode_field(branch: QuasienergyBranch, params, spec, G: int, N: int, threads=1):
    """SK modes V^(N)(theta)|Z, theta*> on the grid."""
    pts = grid_points(G).reshape(-1, 2)

    def chunk(p):
        return evolve_state(sk_mode_operator(params, spec, p, branch.chi, N), branch.anchor_state)

    states = map_chunks(chunk, pts, threads=threads)
    valid = np.linalg.norm(states, axis=-1) > 0
    meta = {"map": spec, "kick": params, "branch": branch.label.value, "N": N, "payload": "state"}
    return SampledField(states.reshape(G, G, 2), valid.reshape(G, G), meta)


def neighbor_correlation(values, valid=None):
    """Pearson correlation between each cell and its +1 neighbours (periodic)."""
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v) if valid is None else (valid & np.isfinite(v))
    xs, ys = [], []
    for axis in (0, 1):
        w = np.roll(v, -1, axis=axis)
        wok = np.roll(ok, -1, axis=axis)
        both = ok & wok
        xs.append(v[both])
        ys.append(w[both])
    x, y = np.concatenate(xs), np.concatenate(ys)
    return float(np.corrcoef(x, y)[0, 1])


# -- cyclic CAT superposition ------------------------------------------------


def cyclic_field_superposition(params: KickParams, spec: MapSpec, G: int, label="Up"):
    """Fundamental quasienergy states of the cyclic CAT map cell by cell.

    Each cell uses the monodromy of its own 3-cycle (p = 1 on fixed points).
    Labels are propagated by breadth-first flood fill from the origin, taking
    in each new cell the eigenvector with the largest overlap with an already
    labelled neighbour; chi is lifted by multiples of 2 pi / p to stay close
    to that neighbour.  ``metadata["chi"]`` holds the chi field.
    """
    if spec.kind is not MapKind.CyclicCat:
        raise ValueError("cyclic_field_superposition needs the cyclic CAT map")
    label = BranchLabel(label)
    pts = grid_points(G).reshape(-1, 2)
    fixed = torus.torus_distance(torus.map_step(spec, pts), pts) < 1e-9
    period = np.where(fixed, 1, 3)
    M = np.empty((len(pts), 2, 2), dtype=complex)
    for p in (1, 3):
        sel = period == p
        if np.any(sel):
            M[sel] = monodromy(params, spec, pts[sel], p, check=False)
    _, chis, states = monodromy_eigen(M, period[:, None])
    origin = branches_from_monodromy(M[0], 1, pts[0])
    start = select_branch(origin, label)

    chosen = np.full((G, G, 2), np.nan, dtype=complex)
    chi_field = np.full((G, G), np.nan)
    chosen[0, 0] = start.anchor_state
    chi_field[0, 0] = start.chi
    queue = deque([(0, 0)])
    seen = np.zeros((G, G), dtype=bool)
    seen[0, 0] = True
    while queue:
        i, j = queue.popleft()
        ref = chosen[i, j]
        for di, dj in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            a, b = (i + di) % G, (j + dj) % G
            if seen[a, b]:
                continue
            k = a * G + b
            overlaps = np.abs(states[k] @ np.conj(ref))
            pick = int(np.argmax(overlaps))
            chosen[a, b] = states[k, pick]
            step = TWO_PI / period[k]
            c = chis[k, pick]
            chi_field[a, b] = c + step * np.round((chi_field[i, j] - c) / step)
            seen[a, b] = True
            queue.append((a, b))
    meta = {"map": spec, "kick": params, "branch": label.value, "chi": chi_field, "payload": "state"}
    return SampledField(chosen, np.ones((G, G), dtype=bool), meta)


# -- perturbative expansion around a fixed point -----------------------------


def perturbative_state(params, spec, theta_star, theta, harmonics, N: int, branch_index: int = 0):
    """First-order state from orbit harmonics of U around a fixed point.

    |Z_i, theta> = |Z_i> + sum_{lam} sum_j <Z_j|h_lam(theta)|Z_i> / (e^{-i chi_i} e^{lam} - e^{-i chi_j}) |Z_j>

    with h_lam = harmonic_average of U along the orbit of theta.  Returns the
    state together with eps_hat, the largest |<Z_j|h_lam|Z_i>|.
    """
    harmonics = [complex(lam) for lam in harmonics]
    if any(lam == 0 for lam in harmonics):
        raise ValueError("harmonics must exclude 0")
    branches = fundamental_branches(params, spec, theta_star, 1)
    anchors = np.stack([b.anchor_state for b in branches])
    phases = np.array([b.phase for b in branches])
    i = branch_index
    state = anchors[i].astype(complex).copy()
    eps_hat = 0.0
    if torus.torus_distance(theta, theta_star) == 0:
        # every orbit harmonic of U vanishes identically at the fixed point
        return state, eps_hat

    def U(th):
        return kick_unitary(params, th)

    for lam in harmonics:
        h = harmonic_average(spec, U, theta, lam, N)
        for j in range(2):
            element = np.vdot(anchors[j], h @ anchors[i])
            eps_hat = max(eps_hat, max(abs(np.vdot(anchors[q], h @ anchors[r])) for q in range(2) for r in range(2)))
            den = phases[i] * np.exp(lam) - phases[j]
            if abs(den) < RESONANCE_TOL:
                raise ResonantDenominator(f"harmonic {lam:.4g}, pair ({i},{j})")
            state = state + element / den * anchors[j]
    return state, eps_hat


# -- phase decomposition -------------------------------------------------------


def _log_terms(z):
    """i * log(z) with the imaginary part of the log in (-pi, pi]."""
    return 1j * np.log(z.astype(complex))


def phase_decomposition(
    branch: QuasienergyBranch, params, spec, theta0, n: int, N_V: int = 10_000, states=None, threads=1
):
    """Dynamical and geometric running averages along the orbit of theta0.

    dynamical = (i/n) sum_{k<n} ln <a_k|U(phi^k theta0)|a_k>
    geometric = (i/n) sum_{k<n} ln <a_k|a_{k+1}>

    with a_k the pointwise-normalized continued state at phi^k theta0.  The
    dynamical logs take the branch matching chi in [0, 2 pi); each geometric
    log is lifted by a multiple of 2 pi so that the per-step difference lies
    within pi of the first step's.  Consecutive differences more than pi apart
    make the lift ambiguous and raise LogBranchJump.  ``states`` may supply
    precomputed states on the n + 1 orbit points.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    orbit = torus.map_orbit(spec, theta0, n)
    if states is None:
        states, cond, _ = continue_states(branch, params, spec, orbit, N=N_V, threads=threads)
        if not np.all(cond <= COND_LIMIT):
            raise SingularV("continued state is singular somewhere along the orbit")
    a = normalize(states)
    Ua = evolve_state(kick_unitary(params, orbit[:-1]), a[:-1])
    dyn_z = np.sum(np.conj(a[:-1]) * Ua, axis=-1)
    geo_z = np.sum(np.conj(a[:-1]) * a[1:], axis=-1)

    dyn = _log_terms(dyn_z)
    # chi convention: -arg in [0, 2 pi)
    dyn = dyn + TWO_PI * (dyn.real < 0)
    geo = _log_terms(geo_z)
    diff = (dyn - geo).real
    ref = diff[0]
    lift = TWO_PI * np.round((ref - diff) / TWO_PI)
    folded = diff + lift
    jumps = np.abs(np.diff(folded))
    if np.any(jumps > np.pi):
        k = int(np.argmax(jumps > np.pi)) + 1
        raise LogBranchJump(f"phase increment {folded[k] - folded[k - 1]:.3f} at step {k}")
    geo = geo - lift
    return PhaseLedger(
        dynamical_partial=complex(np.mean(dyn)),
        geometric_partial=complex(np.mean(geo)),
        n=n,
        dynamical_series=np.cumsum(dyn) / np.arange(1, n + 1),
        geometric_series=np.cumsum(geo) / np.arange(1, n + 1),
    )
