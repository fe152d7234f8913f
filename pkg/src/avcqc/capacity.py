"""Holevo quantity and capacity formulas for informed-jammer channels.

The central object is the max-min value

    max over input distributions P of
    min over memoryless jamming kernels Q of  chi(P, averaged channel)

together with the correlation-assisted common-randomness capacities built
on top of it.  The inner minimization is not convex in general, so the
solver combines projected-gradient descent on the kernel, entropic mirror
ascent on the input distribution (the outer objective is concave), many
random restarts, and an independent grid oracle on small alphabets.

All randomness flows from a single seed; identical seeds give identical
results bit for bit.
"""

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .channels import Avcqc, CorrelatedSource, CqChannel, JammerKernel, averaged_channel
from .config import DEFAULT_TOL
from .errors import AlphabetMismatch, ProfileOutOfRange, SolverDiverged
from .geometry import project_simplex_rows
from .operators import entropy_from_eigenvalues, eigvalsh_stack, validate_probability_vector

LN2 = np.log(2.0)
_LOG_FLOOR = 1e-18


# ---------------------------------------------------------------------------
# batched primitives
# ---------------------------------------------------------------------------

def _log2_psd_stack(mats):
    """Matrix log base 2 of a stack of PSD Hermitian matrices (eigenvalue floor)."""
    a = np.asarray(mats, dtype=complex)
    d = a.shape[-1]
    if d == 2:
        lam = eigvalsh_stack(a)
        lam_c = np.clip(lam, _LOG_FLOOR, None)
        l0 = np.log2(lam_c[..., 0])
        l1 = np.log2(lam_c[..., 1])
        gap = lam[..., 1] - lam[..., 0]
        eye = np.eye(2, dtype=complex)
        safe = np.where(gap > 1e-14, gap, 1.0)
        p1 = (a - lam[..., 0, None, None] * eye) / safe[..., None, None]
        out = l1[..., None, None] * p1 + l0[..., None, None] * (eye - p1)
        lm = np.log2(np.clip((lam[..., 0] + lam[..., 1]) / 2.0, _LOG_FLOOR, None))
        degenerate = (gap <= 1e-14)[..., None, None] * np.ones((2, 2), bool)
        return np.where(degenerate, lm[..., None, None] * eye, out)
    w, v = np.linalg.eigh(a)
    lw = np.log2(np.clip(w, _LOG_FLOOR, None))
    return (v * lw[..., None, :]) @ v.conj().swapaxes(-1, -2)


def _entropy_stack(mats):
    return entropy_from_eigenvalues(eigvalsh_stack(mats), floor=1e-9)


def _mixed_states(states, q):
    """states (X,S,d,d), q (...,X,S) -> per-input averaged states (...,X,d,d)."""
    return np.einsum("...xs,xsij->...xij", q, states)


def _chi_given_mixed(p, rho_x):
    rho_bar = np.einsum("...x,...xij->...ij", p, rho_x)
    s_bar = _entropy_stack(rho_bar)
    s_x = _entropy_stack(rho_x)
    return s_bar - np.einsum("...x,...x->...", p, s_x)


def _chi_batch(p, states, q):
    return _chi_given_mixed(p, _mixed_states(states, q))


def _grad_q(p, states, q):
    """Gradient of chi with respect to the kernel entries."""
    rho_x = _mixed_states(states, q)
    rho_bar = np.einsum("...x,...xij->...ij", p, rho_x)
    lx = _log2_psd_stack(rho_x)
    lb = _log2_psd_stack(rho_bar)
    diff = lx - lb[..., None, :, :]
    return p[..., None] * np.real(np.einsum("xsij,...xji->...xs", states, diff))


def _grad_p(p, states, q):
    """Per-letter relative entropy D(rho_x || rho_bar): supergradient of chi in p."""
    rho_x = _mixed_states(states, q)
    rho_bar = np.einsum("...x,...xij->...ij", p, rho_x)
    lb = _log2_psd_stack(rho_bar)
    cross = np.real(np.einsum("...xij,...ji->...x", rho_x, lb))
    return -_entropy_stack(rho_x) - cross


# ---------------------------------------------------------------------------
# Holevo quantity and fixed-channel capacity
# ---------------------------------------------------------------------------

def holevo_chi(p, w, tol=DEFAULT_TOL):
    """chi(p; W) = S(sum_x p(x) W(x)) - sum_x p(x) S(W(x)) in bits."""
    pv = validate_probability_vector(p, tol)
    if pv.size != len(w.x_alphabet):
        raise AlphabetMismatch(
            f"distribution over {pv.size} letters, channel has {len(w.x_alphabet)}"
        )
    rho_bar = np.einsum("x,xij->ij", pv, w.states)
    val = float(_entropy_stack(rho_bar) - pv @ _entropy_stack(w.states))
    return max(val, 0.0)


def holevo_capacity(w, tol=1e-9, max_iter=200_000):
    """Holevo capacity of a fixed cq channel by fixed-point iteration.

    Returns (capacity, optimal input distribution).  The iteration keeps the
    standard sandwich: chi(p) <= C <= max_x D(W(x) || ensemble average), and
    stops when the gap closes below tol.
    """
    nx = len(w.x_alphabet)
    p = np.full(nx, 1.0 / nx)
    s_x = _entropy_stack(w.states)
    for _ in range(max_iter):
        rho_bar = np.einsum("x,xij->ij", p, w.states)
        lb = _log2_psd_stack(rho_bar)
        d_x = -s_x - np.real(np.einsum("xij,ji->x", w.states, lb))
        lower = float(p @ d_x)
        upper = float(d_x.max())
        if upper - lower <= tol:
            break
        logp = np.log(np.clip(p, _LOG_FLOOR, None)) + LN2 * d_x
        logp -= logp.max()
        p = np.exp(logp)
        p /= p.sum()
    return max(lower, 0.0), p


# ---------------------------------------------------------------------------
# inner minimization over jamming kernels
# ---------------------------------------------------------------------------

def _pg_min_kernels(states, p, q, max_iter=300, tol_obj=1e-10, window=20):
    """Batched projected-gradient descent of chi over kernels, one per row.

    p, q carry a leading restart axis.  Monotone by backtracking; returns
    the final objectives and kernels.
    """
    nr = q.shape[0]
    eta = np.full(nr, 1.0)
    f = _chi_batch(p, states, q)
    if not np.all(np.isfinite(f)):
        raise SolverDiverged("non-finite objective at the initial kernels")
    stall = np.zeros(nr, dtype=int)
    for _ in range(max_iter):
        g = _grad_q(p, states, q)
        ok = np.zeros(nr, dtype=bool)
        q_new, f_new = q, f
        for _try in range(30):
            cand = project_simplex_rows(q - eta[:, None, None] * g)
            f_cand = _chi_batch(p, states, cand)
            better = f_cand <= f + 1e-15
            q_new = np.where((better & ~ok)[:, None, None], cand, q_new)
            f_new = np.where(better & ~ok, f_cand, f_new)
            ok |= better
            if ok.all() or eta[~ok].max(initial=0.0) < 1e-14:
                break
            eta = np.where(ok, eta, eta / 2.0)
        progress = f - f_new
        q, f = q_new, f_new
        eta = np.where(ok, np.minimum(eta * 1.25, 1e3), eta)
        stall = np.where(progress > tol_obj, 0, stall + 1)
        if np.all(stall >= window):
            break
    if not np.all(np.isfinite(f)):
        raise SolverDiverged("non-finite objective during kernel descent")
    return f, q


def _kernel_inits(rng, restarts, nx, ns):
    inits = [np.full((nx, ns), 1.0 / ns)]
    for _ in range(restarts - 1):
        inits.append(rng.dirichlet(np.ones(ns), size=nx))
    return np.stack(inits)


def min_chi_over_jammer(w, p, seed=0, restarts=16, max_iter=2000, tol=DEFAULT_TOL):
    """Minimize chi(p, averaged channel) over memoryless jamming kernels.

    Returns (value, JammerKernel).  Restarts are seeded from one generator;
    the best restart wins, ties broken by restart order.
    """
    pv = validate_probability_vector(p, tol)
    if pv.size != len(w.x_alphabet):
        raise AlphabetMismatch(
            f"distribution over {pv.size} letters, channel has {len(w.x_alphabet)}"
        )
    rng = np.random.default_rng(seed)
    nx, ns = len(w.x_alphabet), len(w.s_alphabet)
    q = _kernel_inits(rng, restarts, nx, ns)
    pb = np.broadcast_to(pv, (restarts, nx))
    f, q = _pg_min_kernels(w.states, pb, q, max_iter=max_iter,
                           tol_obj=tol.solver_objective, window=20)
    i = int(np.argmin(f))
    val = float(max(f[i], 0.0))
    return val, JammerKernel(w.x_alphabet, w.s_alphabet, q[i])


# ---------------------------------------------------------------------------
# grid oracles (independent certification path)
# ---------------------------------------------------------------------------

def simplex_grid(k, steps):
    """All length-k distributions with entries that are multiples of 1/steps."""
    pts = []
    def rec(prefix, remaining, slots):
        if slots == 1:
            pts.append(prefix + [remaining])
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v, slots - 1)
    rec([], steps, k)
    return np.array(pts, dtype=float) / steps


def _kernel_grid(nx, ns, steps):
    rows = simplex_grid(ns, steps)
    idx = list(iproduct(range(rows.shape[0]), repeat=nx))
    return rows[np.array(idx)]  # (M, nx, ns)


def _chi_p_rows_vs_kernels(states, p_rows, kernels):
    """chi for every (p, kernel) pair; returns (len(p_rows), len(kernels)).

    Chunked over the input-distribution axis so the transient (chunk,
    kernels, d, d) mixture stack stays within a fixed memory budget.
    """
    out = np.empty((p_rows.shape[0], kernels.shape[0]))
    rho_x = _mixed_states(states, kernels)           # (M, X, d, d)
    s_x = _entropy_stack(rho_x)                      # (M, X)
    chunk = max(1, int(4e6 / max(kernels.shape[0], 1)))
    for lo in range(0, p_rows.shape[0], chunk):
        pr = p_rows[lo : lo + chunk]
        rho_bar = np.einsum("px,mxij->pmij", pr, rho_x)
        s_bar = _entropy_stack(rho_bar)
        out[lo : lo + chunk] = s_bar - pr @ s_x.T
    return out


def _refine_min_kernel(states, p, q0, span0=1.0 / 32, shrink=0.5, floor=1e-6):
    """Derivative-free local refinement of the kernel minimum (pattern search)."""
    nx, ns = q0.shape
    q = q0.copy()
    best = float(_chi_batch(p, states, q[None])[0])
    span = span0
    while span > floor:
        moves = [q]
        for x in range(nx):
            for i in range(ns):
                for j in range(ns):
                    if i == j:
                        continue
                    for t in (span, span / 2):
                        cand = q.copy()
                        cand[x] = cand[x] + t * (np.eye(ns)[i] - np.eye(ns)[j])
                        moves.append(project_simplex_rows(cand))
        batch = np.stack(moves)
        vals = _chi_batch(np.broadcast_to(p, (batch.shape[0], nx)), states, batch)
        k = int(np.argmin(vals))
        if vals[k] < best - 1e-14:
            best, q = float(vals[k]), batch[k]
        else:
            span *= shrink
    return best, q


def _refined_inner_min(states, p, kernels, chi_row=None):
    if chi_row is None:
        chi_row = _chi_p_rows_vs_kernels(states, p[None], kernels)[0]
    k = int(np.argmin(chi_row))
    return _refine_min_kernel(states, p, kernels[k].copy())


def maxmin_grid_oracle(w, steps=32, eval_budget=int(2.2e7)):
    """Independent grid + local-zoom evaluation of the max-min value.

    Returns None when the alphabets are too large to certify.  Grid sizes
    are checked combinatorially before any grid is materialized.  The full
    step-1/32 grid covers every alphabet pair with |X|, |S| <= 3 except
    (3, 3), which is out of reach; expect roughly a minute for the
    three-letter cases.
    """
    from math import comb

    nx, ns = len(w.x_alphabet), len(w.s_alphabet)
    if nx > 3 or ns > 3:
        return None
    n_p = comb(steps + nx - 1, nx - 1)
    n_kernels = comb(steps + ns - 1, ns - 1) ** nx
    if n_p * n_kernels > eval_budget:
        return None
    p_rows = simplex_grid(nx, steps)
    kernels = _kernel_grid(nx, ns, steps)
    table = _chi_p_rows_vs_kernels(w.states, p_rows, kernels)
    inner = table.min(axis=1)
    ip = int(np.argmax(inner))
    p = p_rows[ip].copy()
    best, _ = _refined_inner_min(w.states, p, kernels, table[ip])
    span = 1.0 / steps
    while span > 1e-6:
        improved = False
        for i in range(nx):
            for j in range(nx):
                if i == j:
                    continue
                for t in (span, span / 2):
                    cand = project_simplex_rows(
                        (p + t * (np.eye(nx)[i] - np.eye(nx)[j]))[None]
                    )[0]
                    val, _ = _refined_inner_min(w.states, cand, kernels)
                    if val > best + 1e-12:
                        best, p = val, cand
                        improved = True
        if not improved:
            span *= 0.5
    return float(max(best, 0.0))


# ---------------------------------------------------------------------------
# the max-min capacity solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CapacityResult:
    value: float
    argmax_p: np.ndarray
    argmin_q: JammerKernel
    solver_trace: tuple
    certified_gap: float | None


def capacity_informed_jammer(
    w,
    seed=0,
    restarts=32,
    outer_iter=400,
    inner_iter=120,
    tol=DEFAULT_TOL,
    certify=True,
):
    """Correlation-assisted capacity formula: max over P of min over Q of chi.

    Entropic mirror ascent on P (the outer objective is concave; the ascent
    direction is the per-letter relative entropy at the inner minimizer)
    alternating with projected-gradient descent on Q, batched over random
    restarts.  The certified gap compares against the independent grid
    oracle when the alphabets permit.
    """
    rng = np.random.default_rng(seed)
    nx, ns = len(w.x_alphabet), len(w.s_alphabet)
    states = w.states
    p = np.vstack([np.full(nx, 1.0 / nx)] + [rng.dirichlet(np.ones(nx)) for _ in range(restarts - 1)])
    q = _kernel_inits(rng, restarts, nx, ns)
    f, q = _pg_min_kernels(states, p, q, max_iter=400, tol_obj=tol.solver_objective / 10)
    eta = np.full(restarts, 0.5)
    stall = np.zeros(restarts, dtype=int)
    traces = [f.copy()]
    for _ in range(outer_iter):
        g = _grad_p(p, states, q)
        g = g - g.max(axis=-1, keepdims=True)
        ok = np.zeros(restarts, dtype=bool)
        p_new, q_new, f_new = p, q, f
        for _try in range(20):
            logp = np.log(np.clip(p, _LOG_FLOOR, None)) + eta[:, None] * g
            logp -= logp.max(axis=-1, keepdims=True)
            cand_p = np.exp(logp)
            cand_p /= cand_p.sum(axis=-1, keepdims=True)
            cand_f, cand_q = _pg_min_kernels(
                states, cand_p, q, max_iter=inner_iter, tol_obj=tol.solver_objective / 10, window=10
            )
            better = cand_f >= f - 1e-13
            sel = better & ~ok
            p_new = np.where(sel[:, None], cand_p, p_new)
            q_new = np.where(sel[:, None, None], cand_q, q_new)
            f_new = np.where(sel, cand_f, f_new)
            ok |= better
            if ok.all() or eta[~ok].max(initial=0.0) < 1e-10:
                break
            eta = np.where(ok, eta, eta / 2.0)
        gain = f_new - f
        p, q, f = p_new, q_new, f_new
        eta = np.where(ok, np.minimum(eta * 1.2, 50.0), eta)
        stall = np.where(gain > tol.solver_objective, 0, stall + 1)
        traces.append(f.copy())
        if np.all(stall >= 20):
            break
    i = int(np.argmax(f))
    # polish the winner's inner minimum with fresh restarts
    extra = np.concatenate([q[i][None], _kernel_inits(rng, 8, nx, ns)])
    pf = np.broadcast_to(p[i], (extra.shape[0], nx))
    f_pol, q_pol = _pg_min_kernels(states, pf, extra, max_iter=2000,
                                   tol_obj=tol.solver_objective / 10)
    j = int(np.argmin(f_pol))
    value = float(min(max(f_pol[j], 0.0), np.log2(w.dim)))
    gap = None
    if certify:
        oracle = maxmin_grid_oracle(w)
        if oracle is not None:
            gap = abs(value - oracle)
    return CapacityResult(
        value=value,
        argmax_p=p[i].copy(),
        argmin_q=JammerKernel(w.x_alphabet, w.s_alphabet, q_pol[j]),
        solver_trace=tuple(float(tr[i]) for tr in traces),
        certified_gap=gap,
    )


# ---------------------------------------------------------------------------
# common-randomness capacities
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CrCapacityResult:
    value: float
    case_tag: str                 # "small_correlation" | "large_correlation"
    aux_channel: np.ndarray | None  # rows P(U | V') for the large-correlation witness
    maxmin_value: float
    source_mi: float


def _entropy_rows(p):
    return entropy_from_eigenvalues(p, floor=1e-12)


def _aux_objective(joint_vv, k_rows):
    """I(U;V') and I(U;V) for stacked auxiliary channels k_rows (..., V', U)."""
    pvp = joint_vv.sum(axis=1)
    j_uvp = pvp[:, None] * k_rows  # (..., V', U)
    pu = j_uvp.sum(axis=-2)
    i_uvp = (
        _entropy_rows(pu)
        + _entropy_rows(pvp)
        - _entropy_rows(j_uvp.reshape(*j_uvp.shape[:-2], -1))
    )
    j_uv = np.einsum("vw,...vu->...uw", joint_vv, k_rows)  # (..., U, V)
    pv = joint_vv.sum(axis=0)
    i_uv = (
        _entropy_rows(j_uv.sum(axis=-1))
        + _entropy_rows(pv)
        - _entropy_rows(j_uv.reshape(*j_uv.shape[:-2], -1))
    )
    return i_uvp, i_uv


def _aux_channel_search(src, budget, seed, restarts=64, grid_steps=16, slack=None):
    """Maximize I(U;V') over Markov chains U <- V' -> V subject to the
    leakage constraint I(U;V') - I(U;V) <= budget (+ slack)."""
    if slack is None:
        slack = DEFAULT_TOL.cr_constraint_slack
    joint = src.joint
    nvp = len(src.v_prime_alphabet)
    nu = nvp + 1
    rng = np.random.default_rng(seed)

    def feasible_value(k_rows):
        i_uvp, i_uv = _aux_objective(joint, k_rows)
        feas = i_uvp - i_uv <= budget + slack
        vals = np.where(feas, i_uvp, -1.0)
        return vals

    best_val, best_k = 0.0, np.full((nvp, nu), 1.0 / nu)
    if nvp == 2:
        rows = simplex_grid(nu, grid_steps)
        m = rows.shape[0]
        ia, ib = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        grid = np.stack([rows[ia.ravel()], rows[ib.ravel()]], axis=1)  # (m*m, 2, nu)
        vals = feasible_value(grid)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_k = float(vals[k]), grid[k].copy()

    starts = [best_k] + [rng.dirichlet(np.ones(nu), size=nvp) for _ in range(restarts)]
    eye = np.eye(nu)
    for k0 in starts:
        k_cur = k0.copy()
        val_cur = float(feasible_value(k_cur[None])[0])
        span = 0.25
        while span > 1e-7:
            moves = [k_cur]
            for r in range(nvp):
                for i in range(nu):
                    for j in range(nu):
                        if i == j:
                            continue
                        cand = k_cur.copy()
                        cand[r] = cand[r] + span * (eye[i] - eye[j])
                        moves.append(project_simplex_rows(cand))
            batch = np.stack(moves)
            vals = feasible_value(batch)
            k = int(np.argmax(vals))
            if vals[k] > val_cur + 1e-13:
                val_cur, k_cur = float(vals[k]), batch[k]
            else:
                span *= 0.5
        if val_cur > best_val:
            best_val, best_k = val_cur, k_cur
    return max(best_val, 0.0), best_k


def cr_capacity(w, src, seed=0, restarts=32, aux_restarts=64, tol=DEFAULT_TOL):
    """Correlation-assisted common-randomness capacity with an informed jammer.

    Small-correlation case (source MI within the max-min value): the two
    rates add.  Large-correlation case: maximize I(U;V') over auxiliary
    channels with |U| = |V'| + 1 under the leakage budget given by the
    max-min value.  Ties inside the band resolve to the small case.
    """
    cap = capacity_informed_jammer(w, seed=seed, restarts=restarts)
    c_star = cap.value
    i_vv = src.mutual_information()
    if i_vv <= c_star + tol.case_tie_band:
        return CrCapacityResult(
            value=c_star + i_vv,
            case_tag="small_correlation",
            aux_channel=None,
            maxmin_value=c_star,
            source_mi=i_vv,
        )
    value, aux = _aux_channel_search(src, c_star, seed=seed + 1, restarts=aux_restarts)
    return CrCapacityResult(
        value=value,
        case_tag="large_correlation",
        aux_channel=aux,
        maxmin_value=c_star,
        source_mi=i_vv,
    )


@dataclass(frozen=True)
class CorrelationLengthProfile:
    """Growth profile of the correlation budget (l_n) against log n and n."""

    liminf_log_ratio: float      # liminf l_n / log n
    limsup_log_ratio: float      # limsup l_n / log n
    asymptotic_fraction: float   # lim l_n / n


def cr_rate_limited_lower_bound(w, src, profile, seed=0, restarts=32, grid_resolution=16):
    """Lower bound on the common-randomness rate under a correlation budget.

    Evaluates (1 - f) * maxmin + f * r'' where f is the asymptotic fraction
    of channel uses spent on correlation and r'' = 3 / r comes from the rate
    of the induced binary channel.  When no separating pair exists (r = 0)
    the correlation part contributes nothing and the profile window check
    is moot.
    """
    from .separation import (
        NotSeparable,
        binary_avc_positivity,
        build_g_pair,
        induced_binary_avc,
        separation_test,
    )

    f = profile.asymptotic_fraction
    if not (0.0 <= f <= 1.0):
        raise ProfileOutOfRange(f"asymptotic fraction {f} outside [0, 1]")
    c_star = capacity_informed_jammer(w, seed=seed, restarts=restarts).value
    gp = build_g_pair(src, w.x_alphabet)
    cert = separation_test(w, src, gp, seed=seed + 1)
    rate = 0.0
    if not isinstance(cert, NotSeparable):
        bavc = induced_binary_avc(cert, w, src, gp, grid_resolution=grid_resolution)
        pos = binary_avc_positivity(bavc)
        if pos["positive"]:
            rate = pos["rate_r"]
    if rate <= 0.0:
        return (1.0 - f) * c_star
    r_pp = 3.0 / rate
    if not (r_pp < profile.liminf_log_ratio <= profile.limsup_log_ratio < np.inf):
        raise ProfileOutOfRange(
            f"need r'' = {r_pp:.6g} < liminf ratio {profile.liminf_log_ratio} "
            f"<= limsup ratio {profile.limsup_log_ratio} < inf"
        )
    return (1.0 - f) * c_star + f * r_pp
