"""Maximal Bell-operator mean values.

Two routes:
  * the closed-form route: maximize
        2^n sqrt(lam1 + lam2 + sum_m ||v_m||^2 - <b_m, v_m>^2)
    over the residual unit vectors b_3..b_n, where lam1, lam2 are the two
    greater eigenvalues of M^T M, M the correlation-matrix slice
    contracted with the b vectors, and v_m the level-m subvectors;
  * a brute-force oracle that maximizes |Tr(rho B)| over all 2n
    measurement directions by multi-start coordinate ascent (the mean
    value is linear in each direction separately, so each update is
    exact).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import states
from .bellops import BellOperatorSpec, MeasurementSettings, TermArrays
from .correlation import core_slab, correlation_tensor, subvector
from .linalg import eig_sym3


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    grid_points_per_angle: int = 12
    local_tol: float = 1e-8
    max_iters: int = 300
    seed: int = 42

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.local_tol <= 0:
            raise ValueError("local_tol must be positive")


@dataclass(frozen=True)
class ViolationResult:
    value: float
    method: str  # "formula" or "oracle"
    argmax_b: list = field(default=None, repr=False)
    argmax_settings: MeasurementSettings | None = field(default=None, repr=False)
    evaluations: int = 0
    converged: bool = False


def _b_from_angles(theta, phi):
    return np.array([np.cos(theta) * np.cos(phi),
                     np.cos(theta) * np.sin(phi),
                     np.sin(theta)])


def _formula_slabs(t, perm):
    n = t.n_qubits
    core = core_slab(t, perm)
    vslabs = [subvector(t, perm, m) for m in range(3, n + 1)]
    return core, vslabs


def _objective_from_slabs(core, vslabs, bs, n):
    m = core
    for b in reversed(bs):
        m = m @ b
    gram = m.T @ m
    lam = eig_sym3(gram)
    total = lam[0] + lam[1]
    for lvl, slab in enumerate(vslabs):
        v = slab
        for b in reversed(bs[lvl + 1:]):
            v = v @ b
        total += float(v @ v) - float(bs[lvl] @ v) ** 2
    return 2**n * math.sqrt(max(total, 0.0))


def formula_objective(t, perm, bs):
    """Closed-form mean value for a given choice of b_3..b_n."""
    n = t.n_qubits
    bs = [np.asarray(b, dtype=float) for b in bs]
    if len(bs) != n - 2:
        raise ValueError(f"need {n - 2} unit vectors, got {len(bs)}")
    for b in bs:
        if abs(np.linalg.norm(b) - 1.0) > 1e-9:
            raise ValueError(f"b vector not unit: {b!r}")
    core, vslabs = _formula_slabs(t, perm)
    return _objective_from_slabs(core, vslabs, bs, n)


def _sphere_grid(points_theta):
    thetas = np.linspace(-np.pi / 2, np.pi / 2, points_theta)
    phis = np.linspace(0.0, 2 * np.pi, 2 * points_theta, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    angles = np.column_stack([tt.ravel(), pp.ravel()])
    vecs = np.column_stack([np.cos(angles[:, 0]) * np.cos(angles[:, 1]),
                            np.cos(angles[:, 0]) * np.sin(angles[:, 1]),
                            np.sin(angles[:, 0])])
    return angles, vecs


def _lam12_batch(m_batch):
    """lam1 + lam2 of M^T M for a (..., 3, 3) batch of M."""
    gram = np.einsum("...ij,...ik->...jk", m_batch, m_batch)
    w = np.linalg.eigvalsh(gram.reshape(-1, 3, 3))
    tr = np.einsum("...ii->...", gram).reshape(-1)
    return (tr - w[:, 0]).reshape(m_batch.shape[:-2])


def _grid_candidates(core, vslabs, n, points_theta):
    """Coarse-grid seeds (angle vectors, values), best first."""
    levels = n - 2
    angles, vecs = _sphere_grid(points_theta)
    if levels == 1:
        m = np.einsum("ijk,pk->pij", core, vecs)
        total = _lam12_batch(m)
        v = vslabs[0]
        total += float(v @ v) - (vecs @ v) ** 2
        vals = 2**n * np.sqrt(np.clip(total, 0.0, None))
        order = np.argsort(vals)[::-1]
        return [angles[i] for i in order], vals[order]
    if levels == 2:
        m = np.einsum("ijkl,pk,ql->pqij", core, vecs, vecs)
        total = _lam12_batch(m)
        v3 = np.einsum("kl,ql->qk", vslabs[0], vecs)      # (G, 3) per b4
        total += np.einsum("qk,qk->q", v3, v3)[None, :] - np.einsum("pk,qk->pq", vecs, v3) ** 2
        v4 = vslabs[1]
        total += float(v4 @ v4) - (vecs @ v4)[None, :] ** 2
        vals = 2**n * np.sqrt(np.clip(total, 0.0, None))
        flat = vals.ravel()
        order = np.argsort(flat)[::-1]
        g = vecs.shape[0]
        out_angles = [np.concatenate([angles[i // g], angles[i % g]]) for i in order[:64]]
        return out_angles, flat[order]
    return [], np.array([])


def max_violation_formula(rho, spec, cfg=OptimizerConfig()):
    """Maximize the closed-form objective over the residual b vectors."""
    if spec.kind != "recursive":
        raise ValueError("the closed-form route applies to the recursive family only")
    n = spec.n_qubits
    if rho.n_qubits != n:
        raise ValueError("state qubit count does not match operator")
    perm = spec.perm
    t = correlation_tensor(rho)
    core, vslabs = _formula_slabs(t, perm)
    levels = n - 2
    if levels == 0:
        gram = core.T @ core
        lam = eig_sym3(gram)
        value = 2**n * math.sqrt(max(lam[0] + lam[1], 0.0))
        return ViolationResult(value, "formula", argmax_b=[], evaluations=1, converged=True)

    evaluations = 0

    def objective(x):
        nonlocal evaluations
        evaluations += 1
        bs = [_b_from_angles(x[2 * i], x[2 * i + 1]) for i in range(levels)]
        return -_objective_from_slabs(core, vslabs, bs, n)

    points_theta = cfg.grid_points_per_angle if levels <= 2 else max(
        6, 2 * cfg.grid_points_per_angle // 3)
    seeds, grid_vals = _grid_candidates(core, vslabs, n, points_theta)
    evaluations += (points_theta * 2 * points_theta) ** min(levels, 2)
    rng = np.random.default_rng(cfg.seed)
    starts = list(seeds[:5])
    for _ in range(cfg.restarts):
        theta = np.arcsin(rng.uniform(-1.0, 1.0, size=levels))
        phi = rng.uniform(0.0, 2 * np.pi, size=levels)
        starts.append(np.column_stack([theta, phi]).ravel())

    finals = []
    best_val, best_x = -np.inf, None
    for x0 in starts:
        res = minimize(objective, np.asarray(x0, dtype=float), method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": cfg.local_tol / 10,
                                "maxiter": cfg.max_iters * (2 * levels)})
        finals.append(-res.fun)
        if -res.fun > best_val:
            best_val, best_x = -res.fun, res.x
    if grid_vals.size:
        best_val = max(best_val, float(grid_vals[0]))
    near = sum(1 for v in finals if best_val - v <= max(cfg.local_tol, 1e-9) * 10)
    bs = [_b_from_angles(best_x[2 * i], best_x[2 * i + 1]) for i in range(levels)]
    return ViolationResult(best_val, "formula", argmax_b=bs,
                           evaluations=evaluations, converged=near >= 2)


def optimal_settings_from_b(t, perm, bs):
    """Measurement settings attaining the closed-form value at given b's.

    Reconstructs the (b, b', angle) decompositions used in the formula's
    derivation; returns (settings, predicted value).
    """
    n = t.n_qubits
    core, vslabs = _formula_slabs(t, perm)
    m = core
    for b in reversed(bs):
        m = m @ b
    w, vecs = np.linalg.eigh(m @ m.T)
    b1, b1p = vecs[:, 2], vecs[:, 1]
    lam1, lam2 = max(w[2], 0.0), max(w[1], 0.0)
    x, y = math.sqrt(lam1), math.sqrt(lam2)
    a2 = m.T @ b1
    a2 = a2 / np.linalg.norm(a2) if np.linalg.norm(a2) > 1e-12 else _any_unit()
    a2p = m.T @ b1p
    a2p = a2p / np.linalg.norm(a2p) if np.linalg.norm(a2p) > 1e-12 else a2
    theta = math.atan2(y, x)
    a = np.zeros((n, 3))
    ap = np.zeros((n, 3))
    a[perm[0] - 1] = math.cos(theta) * b1 + math.sin(theta) * b1p
    ap[perm[0] - 1] = math.cos(theta) * b1 - math.sin(theta) * b1p
    a[perm[1] - 1] = a2
    ap[perm[1] - 1] = a2p
    run = math.sqrt(lam1 + lam2)
    for lvl, slab in enumerate(vslabs):
        v = slab
        for b in reversed(bs[lvl + 1:]):
            v = v @ b
        bm = bs[lvl]
        w_perp = v - float(bm @ v) * bm
        z = np.linalg.norm(w_perp)
        bmp = w_perp / z if z > 1e-12 else _unit_perp(bm)
        alpha = math.atan2(z, run)
        run = math.hypot(run, z)
        q = perm[lvl + 2] - 1
        a[q] = math.cos(alpha) * bm + math.sin(alpha) * bmp
        ap[q] = math.cos(alpha) * bm - math.sin(alpha) * bmp
    return MeasurementSettings(a, ap), 2**n * run


def _any_unit():
    return np.array([0.0, 0.0, 1.0])


def _unit_perp(v):
    probe = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    w = probe - float(probe @ v) * v
    return w / np.linalg.norm(w)


# ---------------------------------------------------------------------------
# brute-force oracle


def oracle_max_violation(rho, spec, cfg=OptimizerConfig()):
    """Maximize |Tr(rho B)| over all measurement settings.

    Multi-start coordinate ascent over the 2n direction vectors.  The
    mean value is linear in each vector at fixed others, so the per-
    vector optimum is the normalized gradient; sweeps increase the value
    monotonically.  The result is a lower bound converging in restarts.
    """
    n = spec.n_qubits
    if rho.n_qubits != n:
        raise ValueError("state qubit count does not match operator")
    t = correlation_tensor(rho)
    terms = TermArrays(spec)
    moved = terms.moved_tensors(t.values)
    rng = np.random.default_rng(cfg.seed)
    evaluations = 0

    def ascend(a, ap):
        nonlocal evaluations
        cur = -np.inf
        for _ in range(cfg.max_iters):
            prev = cur
            for q in range(n):
                u = terms.local_vectors(a, ap)
                const, ga, gap = terms.qubit_profile(moved[q], u, q)
                evaluations += 1
                na, nap = np.linalg.norm(ga), np.linalg.norm(gap)
                if na > 1e-13:
                    a[q] = ga / na
                if nap > 1e-13:
                    ap[q] = gap / nap
                cur = const + float(ga @ a[q]) + float(gap @ ap[q])
            if cur - prev <= cfg.local_tol:
                break
        return cur

    finals = []
    best_val = -np.inf
    best_settings = None
    for _ in range(cfg.restarts):
        a = _random_units(rng, n)
        ap = _random_units(rng, n)
        cur = ascend(a, ap)
        # perturbation kicks to escape shallow plateaus
        for scale in (0.7, 0.3):
            a2 = a + scale * rng.standard_normal((n, 3))
            ap2 = ap + scale * rng.standard_normal((n, 3))
            a2 /= np.linalg.norm(a2, axis=1, keepdims=True)
            ap2 /= np.linalg.norm(ap2, axis=1, keepdims=True)
            kicked = ascend(a2, ap2)
            if kicked > cur:
                cur, a, ap = kicked, a2, ap2
        finals.append(abs(cur))
        if abs(cur) > best_val:
            best_val = abs(cur)
            best_settings = MeasurementSettings(a.copy(), ap.copy())
    near = sum(1 for v in finals if best_val - v <= max(cfg.local_tol, 1e-9) * 100)
    return ViolationResult(best_val, "oracle", argmax_settings=best_settings,
                           evaluations=evaluations, converged=near >= min(2, cfg.restarts))


def _random_units(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# parametrized families, sweeps, crossings

FAMILIES = ("w-ghz-mix", "w4-white-noise")


def family_state(family, x):
    """State of a named one-parameter family at parameter x in [0, 1]."""
    if family == "w-ghz-mix":
        return states.mix([(x, states.make_w(3)),
                           (1.0 - x, states.make_generalized_ghz(3, np.pi / 4))])
    if family == "w4-white-noise":
        return states.mix([(x, states.maximally_mixed(4)),
                           (1.0 - x, states.make_w(4))])
    raise ValueError(f"unknown family {family!r}")


def sweep(family, spec, cfg, xs):
    """Closed-form maximal value along a state family."""
    return [(float(x), max_violation_formula(family_state(family, x), spec, cfg).value)
            for x in xs]


def crossings(points, threshold=1.0, refine=None, xtol=1e-3):
    """Abscissae where the swept value crosses the threshold.

    Scans consecutive sweep points for sign changes of f - threshold and
    refines each by bisection when a fresh evaluator `refine` is given
    (otherwise by linear interpolation).
    """
    points = sorted(points)
    out = []
    for (x0, f0), (x1, f1) in zip(points, points[1:]):
        g0, g1 = f0 - threshold, f1 - threshold
        if g0 == 0.0 or g0 * g1 > 0.0:
            continue
        if refine is None:
            out.append(x0 + (x1 - x0) * g0 / (g0 - g1) if g0 != g1 else x0)
            continue
        lo, hi, glo = x0, x1, g0
        while hi - lo > xtol:
            mid = 0.5 * (lo + hi)
            gm = refine(mid) - threshold
            if (gm < 0.0) == (glo < 0.0):
                lo, glo = mid, gm
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out
