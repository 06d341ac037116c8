"""Acceptance criteria for the skq package.

Each test records a one-line verdict that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import time
from collections import deque
from pathlib import Path

import numpy as np
import pytest

from skq import cli, exports, koopman, torus
from skq import ensemble as en
from skq import quasienergy as qe
from skq.config import load_config
from skq.qkick import LN2, KickParams, Reduction, ReductionKind, normalize
from skq.torus import TWO_PI, MapSpec

P = KickParams(2.5)
P2 = KickParams(2.5, Reduction(ReductionKind.FixTheta2, 0.0))
ARN = MapSpec.arnold()
CYC = MapSpec.cyclic()
ORIGIN = np.zeros(2)
H = (1 / np.sqrt(2), 1 / np.sqrt(2))
E1 = koopman.fourier(1, 0)
GOLDEN = Path(__file__).parent / "golden"


def random_points(n, seed):
    return np.random.default_rng(seed).uniform(0, TWO_PI, (n, 2))


def test_c01_cyclic_cat_is_three_cyclic(record):
    t = time.perf_counter()
    th = random_points(10_000, 1)
    d = torus.torus_distance(torus.map_power(CYC, th, 3), th).max()
    dt = time.perf_counter() - t
    ok = record(1, d < 1e-12 and dt < 1, f"max d(phi^3 theta, theta) = {d:.2e}, {dt:.2f}s")
    assert ok


def test_c02_arnold_origin_quasienergies(record):
    t = time.perf_counter()
    up, down = qe.fundamental_branches(P, ARN, ORIGIN)
    dt = time.perf_counter() - t
    ok = (
        abs(up.chi) < 1e-12
        and abs(down.chi - np.pi / 2) < 1e-12
        and np.allclose(up.anchor_state, [1, 0], atol=1e-12)
        and np.allclose(down.anchor_state, [0, 1], atol=1e-12)
        and dt < 1
    )
    record(2, ok, f"chi_up = {up.chi:.3g}, chi_down - pi/2 = {down.chi - np.pi / 2:.3g}, {dt:.3f}s")
    assert ok


def test_c03_orbital_stability_of_spectrum(record):
    t = time.perf_counter()
    worst = 0.0
    for th in random_points(100, 3):
        orbit = torus.map_orbit(CYC, th, 2)
        spectra = [np.linalg.eigvals(qe.monodromy(P, CYC, pt, 3)) for pt in orbit]
        for other in spectra[1:]:
            # match eigenvalues pairwise in the better of the two orderings
            d = min(np.abs(other - spectra[0]).max(), np.abs(other[::-1] - spectra[0]).max())
            worst = max(worst, d)
    dt = time.perf_counter() - t
    ok = record(3, worst < 1e-10 and dt < 1, f"max spectral mismatch = {worst:.2e}, {dt:.2f}s")
    assert ok


def test_c04_eigen_relation_of_continued_states(record):
    t = time.perf_counter()
    up = qe.fundamental_branches(P, ARN, ORIGIN)[0]
    th = random_points(100, 4)
    med = [np.median(qe.continue_states(up, P, ARN, th, N=N)[2]) for N in (10_000, 40_000)]
    dt = time.perf_counter() - t
    ok = med[0] < 0.05 and med[1] < med[0] and dt < 120
    record(4, ok, f"median residual {med[0]:.4f} (N=1e4), {med[1]:.4f} (N=4e4), {dt:.1f}s")
    assert ok


def test_c05_local_expansion_matches_finite_differences(record):
    # continued states near the fixed point come from stable/unstable transport
    t = time.perf_counter()
    exp = qe.local_expansion_matrix(P, ARN, ORIGIN)
    h = 1e-4
    worst = 0.0
    for i, b in enumerate(exp.branches):
        for a in range(2):
            e = np.real(exp.directions[:, a])
            side = "unstable" if exp.log_eigenvalues[a].real > 0 else "stable"
            zp = qe.transport_state(b, P, ARN, h * e, side)
            zm = qe.transport_state(b, P, ARN, -h * e, side)
            an = exp.derivative(i, a)
            worst = max(worst, np.linalg.norm((zp - zm) / (2 * h) - an) / np.linalg.norm(an))
    dt = time.perf_counter() - t
    ok = record(5, worst < 1e-2 and dt < 60, f"max relative error = {worst:.2e}, {dt:.2f}s")
    assert ok


def perturbative_defect(theta, i):
    harmonics = [2j * np.pi / 3, 4j * np.pi / 3]
    state, _ = qe.perturbative_state(P2, CYC, ORIGIN, theta, harmonics, 3, branch_index=i)
    # exact reference: eigenvectors of the 3-cycle monodromy
    _, v = np.linalg.eig(qe.monodromy(P2, CYC, theta, 3))
    ov = np.abs(v.T.conj() @ normalize(state))
    return np.sqrt(max(2 - 2 * ov.max(), 0.0))


def test_c06_perturbative_defect_is_second_order(record):
    t = time.perf_counter()
    ratios = []
    for ang in (0.3, 1.1, 2.0):
        direction = np.array([np.cos(ang), np.sin(ang)])
        for i in (0, 1):
            d = [perturbative_defect(eps * direction, i) for eps in (0.02, 0.01, 0.005)]
            ratios += [d[0] / d[1], d[1] / d[2]]
    dt = time.perf_counter() - t
    ok = min(ratios) > 3.5 and max(ratios) < 4.5 and dt < 60
    record(6, ok, f"halving ratios in [{min(ratios):.3f}, {max(ratios):.3f}], {dt:.2f}s")
    assert ok


@pytest.mark.xfail(
    strict=False,
    reason="norm^2-weighted sampling of the noisy Arnold Up field has an effective sample size near 20; "
    "step-0 observables sit far from the ergodic averages they relax to",
)
def test_c07_quasienergy_field_is_steady(record):
    t = time.perf_counter()
    up = qe.fundamental_branches(P, ARN, ORIGIN)[0]
    f = qe.quasienergy_field(up, P, ARN, 128, 4000)
    ic = en.InitialCondition(en.FieldWeighted(f), en.FromField(f))
    ts = en.run_experiment(ic, P, ARN, 40_000, 100, seed=7)
    dev = {
        "population": np.abs(ts.population_up - ts.population_up[0]).max(),
        "coherence": np.abs(ts.coherence - ts.coherence[0]).max(),
        "entropy": np.abs(ts.entropy_nats - ts.entropy_nats[0]).max(),
    }
    dt = time.perf_counter() - t
    ok = max(dev.values()) < 0.02 and dt < 120
    detail = ", ".join(f"{k} {v:.3f}" for k, v in dev.items())
    record(7, ok, f"max deviation {detail}, {dt:.1f}s (expected failure, see README)")
    assert ok


def test_c08_microcanonical_decoherence(record):
    t = time.perf_counter()
    ic = en.InitialCondition(en.UniformTorus(), en.FixedState(H))
    ts = en.run_experiment(ic, P, ARN, 40_000, 60, seed=7)
    dist = np.abs(ts.rho[20:] - np.eye(2) / 2).max(axis=(1, 2)).max()
    s_min = ts.entropy_nats[20:].min()
    dt = time.perf_counter() - t
    ok = dist < 0.05 and s_min > 0.95 * LN2 and dt < 60
    record(8, ok, f"n >= 20: max |rho - I/2| = {dist:.4f}, min S / ln2 = {s_min / LN2:.4f}, {dt:.1f}s")
    assert ok


def test_c09_cyclic_flow_keeps_small_ensembles_pure(record):
    t = time.perf_counter()
    ic = en.InitialCondition(en.UniformSquare((1.0, 2.0), 1e-3), en.FixedState(H))
    ts = en.run_experiment(ic, P, CYC, 10_000, 100, seed=7)
    s_max = ts.entropy_nats.max()
    dt = time.perf_counter() - t
    ok = record(9, s_max < 0.05 and dt < 60, f"max entropy = {s_max:.2e} nats, {dt:.1f}s")
    assert ok


def test_c10_phase_decomposition(record):
    t = time.perf_counter()
    up, down = qe.fundamental_branches(P, ARN, ORIGIN)
    exact = True
    for b in (up, down):
        L = qe.phase_decomposition(b, P, ARN, ORIGIN, 10, N_V=100)
        exact &= L.geometric_partial == 0 and abs(L.dynamical_partial - b.chi) < 1e-15
    L = qe.phase_decomposition(up, P, ARN, np.array([1.234, 2.345]), 10_000, N_V=10_000)
    err = abs(L.difference.real - up.chi)
    dt = time.perf_counter() - t
    ok = exact and err < 0.05 and dt < 120
    record(10, ok, f"fixed point exact: {exact}, generic |Re(dyn - geo) - chi| = {err:.4f}, {dt:.1f}s")
    assert ok


def test_c11_mixing_diagnostics(record):
    t = time.perf_counter()
    M = 100_000
    zs = []
    for lag in range(1, 11):
        est, se = koopman.correlation(ARN, E1, E1, lag, M, seed=lag)
        zs.append(abs(est) / se)
    est3, se3 = koopman.correlation(CYC, E1, E1, 3, M, seed=0)
    back = abs(est3 - 1)
    dt = time.perf_counter() - t
    ok = max(zs) < 3 and back <= max(3 * se3, 1e-12) and dt < 60
    record(11, ok, f"Arnold max |C|/SE = {max(zs):.2f}, cyclic |C(3) - 1| = {back:.1e}, {dt:.1f}s")
    assert ok


def ftle(spec, pts, n):
    """Finite-time Lyapunov exponent by tangent-vector renormalization."""
    th = pts.copy()
    v = np.tile([1.0, 0.0], (len(pts), 1))
    acc = np.zeros(len(pts))
    for _ in range(n):
        v = np.einsum("kij,kj->ki", torus.jacobian(spec, th), v)
        nv = np.linalg.norm(v, axis=1)
        acc += np.log(nv)
        v /= nv[:, None]
        th = torus.map_step(spec, th)
    return acc / n


def component(mask, seed):
    """Periodic 4-connected component of ``mask`` containing ``seed``."""
    G = mask.shape[0]
    out = np.zeros_like(mask)
    out[seed] = True
    queue = deque([seed])
    while queue:
        i, j = queue.popleft()
        for a, b in (((i + 1) % G, j), ((i - 1) % G, j), (i, (j + 1) % G), (i, (j - 1) % G)):
            if mask[a, b] and not out[a, b]:
                out[a, b] = True
                queue.append((a, b))
    return out


def read_pgm(text):
    lines = text.splitlines()
    G = int(lines[2].split()[0])
    rows = np.array([[int(v) for v in line.split()] for line in lines[4:]])
    # top row is j = G - 1
    return lines[:4], rows[::-1].T.reshape(G, G)


def test_c12_standard_map_structure(record, tmp_path):
    t = time.perf_counter()
    K097 = MapSpec.standard(0.97)
    cfg = load_config(GOLDEN / "standard_k097.json")
    cli.run(cfg, tmp_path)
    head, px = read_pgm((tmp_path / "mask.pgm").read_text())
    gold_head, gold_px = read_pgm((GOLDEN / "standard_k097_mask.pgm").read_text())
    # chaotic orbits amplify last-bit libm differences, so allow a sliver of pixels
    mismatch = np.mean(px != gold_px)
    flagged = px == 255

    G = cfg.grid
    lyap = ftle(K097, qe.grid_points(G).reshape(-1, 2), 500).reshape(G, G)
    island = component(lyap < 0.03, (0, G // 2))
    sea = lyap > 0.05
    f_island, f_sea = flagged[island].mean(), flagged[sea].mean()

    ic = en.InitialCondition(en.UniformTorus(), en.FixedState(H))
    ts = en.run_experiment(ic, P, MapSpec.standard(2.0), 40_000, 30, seed=7)
    s_max = ts.entropy_nats.max()
    dt = time.perf_counter() - t
    ok = (
        head == gold_head
        and mismatch <= 0.01
        and island.sum() > 100
        and f_island >= 0.8
        and f_sea <= 0.2
        and s_max > 0.9 * LN2
        and dt < 300
    )
    record(
        12,
        ok,
        f"golden mismatch {100 * mismatch:.2f}%, island flagged {f_island:.2f}, sea flagged {f_sea:.2f}, "
        f"K=2 max S / ln2 = {s_max / LN2:.3f}, {dt:.1f}s",
    )
    assert ok


def test_golden_mask_header_carries_config_hash():
    cfg = load_config(GOLDEN / "standard_k097.json")
    head = (GOLDEN / "standard_k097_mask.pgm").read_text().splitlines()[1]
    assert head == exports.header_comment(cfg.sha256)
