"""Reweighted-l1 WMMSE loops for dynamic and static BS clustering.

Beamformers are stored network-wide: ``W[k]`` has one entry per transmit
antenna (``M_t``) and its BS-``l`` block is zero whenever BS ``l`` does not
serve user ``k``. Receivers, MSEs and rates are evaluated for all users at
once from ``HW[k, j] = H_k w_j``.

Powers are in mW/Hz and rates in bps/Hz (log base 2).
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import qcqp
from .clustering import ClusterAssignment

log = logging.getLogger(__name__)

TAU = 1e-10


class EngineError(RuntimeError):
    pass


def dbm_hz_to_mw_hz(dbm_hz: float) -> float:
    return 10.0 ** (dbm_hz / 10.0)


# -- per-slot signal quantities ---------------------------------------------

def received_signals(H, W):
    """``HW[k, j] = H_k w_j``, shape ``(K, K, N)``."""
    return np.einsum("knm,jm->kjn", H, W)


def _covariances(HW, noise_var):
    N = HW.shape[2]
    return np.einsum("kjn,kjp->knp", HW, HW.conj()) + noise_var * np.eye(N)


def _own(HW):
    K = HW.shape[0]
    return HW[np.arange(K), np.arange(K)]


def achievable_rates(H, W, noise_var) -> np.ndarray:
    """Rate of every user with all other users' signals as interference."""
    HW = received_signals(H, W)
    s = _own(HW)
    Q = _covariances(HW, noise_var) - s[:, :, None] * s[:, None, :].conj()
    sinr = np.einsum("kn,kn->k", s.conj(), np.linalg.solve(Q, s[:, :, None])[:, :, 0]).real
    return np.log2(1.0 + np.maximum(sinr, 0.0))


def rate(k, state, channel) -> float:
    return float(achievable_rates(channel.H, state.W, channel.noise_var)[k])


def mmse_receivers(H, W, noise_var) -> np.ndarray:
    """``u_k = (sum_j H_k w_j w_j^H H_k^H + noise I)^{-1} H_k w_k``."""
    HW = received_signals(H, W)
    return np.linalg.solve(_covariances(HW, noise_var), _own(HW)[:, :, None])[:, :, 0]


def mse_values(H, W, U, noise_var) -> np.ndarray:
    """MSE ``e_k`` of every user under arbitrary receivers ``U``."""
    HW = received_signals(H, W)
    C = _covariances(HW, noise_var)
    quad = np.einsum("kn,knp,kp->k", U.conj(), C, U).real
    cross = np.einsum("kn,kn->k", U.conj(), _own(HW)).real
    return quad - 2.0 * cross + 1.0


def mse_weight(e):
    """Optimal MSE weight ``1 / e``; non-positive MSEs indicate corruption."""
    e = np.asarray(e, dtype=float)
    if np.any(~(e > 0)):
        raise ValueError(f"MSE must be positive, got min {np.min(e)!r}")
    return 1.0 / e


def wmmse_objective(H, W, U, rho, alpha, noise_var) -> float:
    """``sum_k alpha_k (rho_k e_k - ln rho_k)``."""
    e = mse_values(H, W, U, noise_var)
    return float(np.sum(alpha * (rho * e - np.log(rho))))


def block_powers(W, antenna_owner, num_bs) -> np.ndarray:
    """``||w_k^l||^2`` as a ``(L, K)`` array."""
    p = np.abs(W) ** 2
    out = np.zeros((num_bs, W.shape[0]))
    np.add.at(out, antenna_owner, p.T)
    return out


def update_beta_dynamic(W, antenna_owner, num_bs, tau=TAU) -> np.ndarray:
    return 1.0 / (block_powers(W, antenna_owner, num_bs) + tau)


def update_beta_static(W, tau=TAU) -> np.ndarray:
    """Per-user weight from the whole cluster power ``||w_k^{L_k}||^2``.

    ``W`` must already be zero outside each user's cluster.
    """
    return 1.0 / ((np.abs(W) ** 2).sum(axis=1) + tau)


# -- state and diagnostics ----------------------------------------------------

@dataclass
class BeamformingState:
    W: np.ndarray           # (K, M_t)
    U: np.ndarray           # (K, N)
    rho: np.ndarray         # (K,)
    beta_dyn: np.ndarray    # (L, K)
    beta_stat: np.ndarray   # (K,)
    rate_hat: np.ndarray    # (K,)
    alpha: np.ndarray       # (K,)
    active: np.ndarray      # (K,) bool, users still in the scheduling pool
    candidate: np.ndarray   # (K, L) bool, candidate (dynamic) or fixed (static) links
    tau: float = TAU
    rates: np.ndarray = None
    repaired_links: int = 0

    @property
    def candidate_links(self) -> list:
        return [set(np.flatnonzero(row).tolist()) for row in self.candidate]

    @property
    def active_users(self) -> list:
        return np.flatnonzero(self.active).tolist()

    def mean_candidate_size(self) -> float:
        if not self.active.any():
            return 0.0
        return float(self.candidate[self.active].sum(axis=1).mean())


@dataclass
class EngineOptions:
    max_iters: int = 100
    rel_tol: float = 1e-3
    tau: float = TAU
    backhaul: bool = True          # impose the weighted-power backhaul surrogate
    prune_links: bool = True
    prune_threshold_dbm_hz: float = -100.0
    shrink_pool: bool = True
    shrink_threshold: float = 0.01
    indicator_threshold_dbm_hz: float = -100.0
    freeze_weights: bool = False   # keep beta and rate_hat at their initial values
    repair: bool = True
    qcqp_tol: float = qcqp.DEFAULT_TOL
    qcqp_max_iters: int = qcqp.DEFAULT_MAX_ITERS
    qcqp_method: str = "newton"


@dataclass
class IterationRecord:
    iteration: int
    objective: float              # weighted sum rate
    wmmse_before: float           # WMMSE objective after steps 1-2 (old w)
    wmmse_after: float            # WMMSE objective after step 3 (new w)
    power: np.ndarray
    surrogate_backhaul: np.ndarray
    actual_backhaul: np.ndarray
    active_users: int
    mean_candidate_size: float
    solver_status: str
    solver_iterations: int
    seconds: float
    solver_seconds: float


@dataclass
class DiagnosticsTrace:
    records: list = field(default_factory=list)
    converged: bool = False
    repaired_links: int = 0

    def __len__(self):
        return len(self.records)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_csv(self, path) -> None:
        """One row per iteration; per-BS vectors expand to one column per BS."""
        if not self.records:
            L = 0
        else:
            L = len(self.records[0].power)
        head = ["iteration", "objective", "wmmse_before", "wmmse_after", "active_users",
                "mean_candidate_size", "solver_status", "solver_iterations", "seconds",
                "solver_seconds"]
        head += [f"power_{l}" for l in range(L)]
        head += [f"surrogate_backhaul_{l}" for l in range(L)]
        head += [f"actual_backhaul_{l}" for l in range(L)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(head)
            for r in self.records:
                w.writerow([r.iteration, r.objective, r.wmmse_before, r.wmmse_after,
                            r.active_users, r.mean_candidate_size, r.solver_status,
                            r.solver_iterations, r.seconds, r.solver_seconds,
                            *r.power, *r.surrogate_backhaul, *r.actual_backhaul])


# -- complexity reduction ---------------------------------------------------

def prune_links(state: BeamformingState, antenna_owner, num_bs, threshold_dbm_hz=-100.0):
    """Drop candidate links whose block power fell below the threshold.

    Removed links stay removed and their blocks are zeroed in place.
    Returns the number of links removed.
    """
    power = block_powers(state.W, antenna_owner, num_bs).T     # (K, L)
    weak = state.candidate & (power < dbm_hz_to_mw_hz(threshold_dbm_hz))
    if weak.any():
        state.candidate &= ~weak
        state.W[~state.candidate[:, antenna_owner]] = 0.0
    return int(weak.sum())


def shrink_user_pool(state: BeamformingState, rates, threshold=0.01):
    """Remove users whose rate fell below ``threshold`` from the pool."""
    drop = state.active & (np.asarray(rates) < threshold)
    if drop.any():
        state.active &= ~drop
        state.W[drop] = 0.0
    return int(drop.sum())


# -- backhaul accounting ------------------------------------------------------

def served_mask(W, antenna_owner, num_bs, threshold_mw_hz, clusters=None) -> np.ndarray:
    """Indicator ``(L, K)`` of BS ``l`` carrying user ``k``'s data."""
    if clusters is None:
        return block_powers(W, antenna_owner, num_bs) >= threshold_mw_hz
    on = (np.abs(W) ** 2).sum(axis=1) > threshold_mw_hz
    return clusters.serving_mask().T & on[None, :]


def actual_backhaul(W, rates, antenna_owner, num_bs, threshold_mw_hz, clusters=None):
    """Per-BS sum of the rates of the users it serves (bps/Hz)."""
    return served_mask(W, antenna_owner, num_bs, threshold_mw_hz, clusters) @ rates


# -- the engine -------------------------------------------------------------------

def initial_beamformers(H, support_links, antenna_owner, power, active):
    """Matched-filter start with each BS's power split evenly over its users.

    The block for (k, l) is the principal right singular vector of the
    ``N x M_l`` channel block.
    """
    K, N, Mt = H.shape
    L = len(power)
    links = support_links & active[:, None]
    load = links.sum(axis=0)
    W = np.zeros((K, Mt), dtype=complex)
    for l in range(L):
        cols = np.flatnonzero(antenna_owner == l)
        users = np.flatnonzero(links[:, l])
        if users.size == 0:
            continue
        _, _, vh = np.linalg.svd(H[np.ix_(users, np.arange(N), cols)])
        W[np.ix_(users, cols)] = vh[:, 0, :].conj() * math.sqrt(power[l] / load[l])
    return W


def run_dynamic(channel, layout, alpha, options: EngineOptions | None = None,
                candidates: np.ndarray | None = None):
    """Joint clustering, scheduling and beamforming with per-BS backhaul limits.

    ``candidates`` is a boolean ``(K, L)`` mask of links each user may use
    (all BSs when omitted). Returns ``(state, trace)``.
    """
    K, L = channel.num_users, layout.num_bs
    if candidates is None:
        candidates = np.ones((K, L), dtype=bool)
    return _run(channel, layout, alpha, options or EngineOptions(),
                np.array(candidates, dtype=bool), clusters=None)


def run_static(channel, layout, clusters: ClusterAssignment, alpha,
               options: EngineOptions | None = None):
    """Joint scheduling and beamforming over fixed user-centric clusters."""
    return _run(channel, layout, alpha, options or EngineOptions(),
                clusters.serving_mask(), clusters=clusters)


def _run(channel, layout, alpha, opt: EngineOptions, links, clusters):
    H, noise = channel.H, channel.noise_var
    K = H.shape[0]
    L = layout.num_bs
    owner = layout.antenna_owner
    power = layout.power_mw_hz
    budget = layout.backhaul_bps_hz if opt.backhaul else np.full(L, math.inf)
    thr_ind = dbm_hz_to_mw_hz(opt.indicator_threshold_dbm_hz)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (K,):
        raise ValueError(f"alpha must have shape ({K},)")

    links = links.copy()
    # a BS with no backhaul at all cannot carry anyone's data
    dead = np.isfinite(budget) & (budget <= 0)
    if clusters is None:
        links[:, dead] = False
        active = (alpha > 0) & links.any(axis=1)
    else:
        active = (alpha > 0) & links.any(axis=1) & ~links[:, dead].any(axis=1)

    W = initial_beamformers(H, links, owner, power, active)
    R = achievable_rates(H, W, noise)
    state = BeamformingState(
        W=W, U=np.zeros(H.shape[:2], dtype=complex), rho=np.ones(K),
        beta_dyn=update_beta_dynamic(W, owner, L, opt.tau),
        beta_stat=update_beta_static(W, opt.tau), rate_hat=R.copy(),
        alpha=alpha, active=active, candidate=links, tau=opt.tau, rates=R)
    trace = DiagnosticsTrace()
    duals = None
    prev = float(alpha @ R)
    for it in range(1, opt.max_iters + 1):
        t0 = time.perf_counter()
        # steps 1-2
        act = state.active
        state.U = np.where(act[:, None], mmse_receivers(H, state.W, noise), 0.0)
        e = mse_values(H, state.W, state.U, noise)
        state.rho = np.where(act, mse_weight(np.where(act, e, 1.0)), 1.0)
        w_alpha = np.where(act, alpha, 0.0)
        before = float(np.sum(w_alpha * (state.rho * e - np.log(state.rho))))
        # step 3
        problem = qcqp.assemble(state, channel, layout, clusters, backhaul=opt.backhaul)
        ts = time.perf_counter()
        try:
            sol = qcqp.solve(problem, tol=opt.qcqp_tol, max_iters=opt.qcqp_max_iters,
                             warm_start=duals, method=opt.qcqp_method, validate=False)
        except (qcqp.SolverError, np.linalg.LinAlgError) as exc:
            raise EngineError(f"beamformer subproblem failed at iteration {it}: {exc}") from exc
        solver_seconds = time.perf_counter() - ts
        duals = sol.duals
        state.W = sol.w
        after = float(np.sum(w_alpha * (state.rho * mse_values(H, state.W, state.U, noise)
                                          - np.log(state.rho))))
        surrogate = sol.constraint_values[L:]
        if opt.prune_links and clusters is None:
            prune_links(state, owner, L, opt.prune_threshold_dbm_hz)
        # step 4
        R = achievable_rates(H, state.W, noise)
        if opt.shrink_pool and shrink_user_pool(state, np.where(state.active, R, np.inf),
                                                opt.shrink_threshold):
            R = achievable_rates(H, state.W, noise)
        state.rates = R
        # step 5
        if not opt.freeze_weights:
            state.rate_hat = R.copy()
            state.beta_dyn = update_beta_dynamic(state.W, owner, L, opt.tau)
            state.beta_stat = update_beta_static(state.W, opt.tau)
        obj = float(alpha @ R)
        trace.records.append(IterationRecord(
            iteration=it, objective=obj, wmmse_before=before, wmmse_after=after,
            power=block_powers(state.W, owner, L).sum(axis=1),
            surrogate_backhaul=surrogate,
            actual_backhaul=actual_backhaul(state.W, R, owner, L, thr_ind, clusters),
            active_users=int(state.active.sum()),
            mean_candidate_size=state.mean_candidate_size(),
            solver_status=sol.status, solver_iterations=sol.iterations,
            seconds=time.perf_counter() - t0, solver_seconds=solver_seconds))
        if abs(obj - prev) <= opt.rel_tol * max(abs(prev), 1e-300):
            trace.converged = True
            break
        prev = obj
    if not trace.converged:
        log.info("WMMSE stopped at max_iters=%d without meeting rel_tol", opt.max_iters)

    _finalize(state, channel, layout, opt, clusters, budget, trace)
    return state, trace


def _rates_without_block(H, W, noise_var, users, cols):
    """Own rate of each listed user if its beamformer lost the ``cols`` entries.

    Interference seen by the user is unchanged, so only its own signal moves.
    """
    HW = received_signals(H[users], W)                 # (n, K, N)
    own = HW[np.arange(users.size), users]
    Q = _covariances(HW, noise_var) - own[:, :, None] * own[:, None, :].conj()
    w = W[users].copy()
    w[:, cols] = 0.0
    s = np.einsum("knm,km->kn", H[users], w)
    sinr = np.einsum("kn,kn->k", s.conj(), np.linalg.solve(Q, s[:, :, None])[:, :, 0]).real
    return np.log2(1.0 + np.maximum(sinr, 0.0))


_MAX_REPAIRS = 4


def _trim_rate(W, k, rate, cut):
    """Scale ``w_k`` so its rate drops by ``cut`` (or to zero if ``cut >= rate``).

    Scaling a user's own beamformer leaves the interference it sees
    unchanged, so its SINR scales with the square of the factor.
    """
    if cut >= rate:
        W[k] = 0.0
        return
    sinr = 2.0 ** rate - 1.0
    W[k] *= math.sqrt(max(2.0 ** (rate - cut) - 1.0, 0.0) / sinr)


def _finalize(state, channel, layout, opt, clusters, budget, trace):
    """Zero sub-threshold links, then repair until the true backhaul fits.

    At the most overloaded BS the repair either drops the link that costs
    the least weighted rate (dynamic clustering only) or backs off the
    power of the user whose weighted rate loss ``alpha_k * min(excess, R_k)``
    is smallest, so that its rate falls by exactly the excess. Each action
    counts as one repaired link in the trace.
    """
    H, noise = channel.H, channel.noise_var
    owner, L = layout.antenna_owner, layout.num_bs
    thr = dbm_hz_to_mw_hz(opt.indicator_threshold_dbm_hz)
    if clusters is None:
        weak = block_powers(state.W, owner, L).T < thr
        state.W[weak[:, owner]] = 0.0
    else:
        state.W[(np.abs(state.W) ** 2).sum(axis=1) <= thr] = 0.0
    R = achievable_rates(H, state.W, noise)
    repaired = 0
    if opt.repair and np.isfinite(budget).any():
        alpha = state.alpha
        for _ in range(_MAX_REPAIRS * max(L, 1) * max(len(R), 1)):
            served = served_mask(state.W, owner, L, thr, clusters)
            load = served @ R
            excess = np.where(np.isfinite(budget), load - budget, -np.inf)
            rel = excess / np.maximum(budget, 1e-300)
            l = int(np.argmax(rel))
            if not excess[l] > 1e-9 * max(budget[l], 1e-300):
                break
            users = np.flatnonzero(served[l])
            cut = excess[l] * (1.0 + 1e-6)
            trim_cost = alpha[users] * np.minimum(cut, R[users])
            if clusters is None:
                drop_cost = alpha[users] * (R[users] - _rates_without_block(
                    H, state.W, noise, users, owner == l))
                j = int(np.argmin(drop_cost))
                if drop_cost[j] <= trim_cost.min():
                    # a link contributing little rate frees its user's whole rate at l
                    state.W[users[j], owner == l] = 0.0
                    repaired += 1
                    R = achievable_rates(H, state.W, noise)
                    continue
            j = int(np.lexsort((alpha[users] * R[users], trim_cost))[0])
            _trim_rate(state.W, users[j], R[users[j]], cut)
            repaired += 1
            R = achievable_rates(H, state.W, noise)
        else:
            log.warning("backhaul repair did not converge")
        if repaired:
            log.debug("backhaul repair took %d steps", repaired)
    state.rates = R
    state.repaired_links = repaired
    trace.repaired_links = repaired
    scheduled = np.abs(state.W).sum(axis=1) > 0
    state.active &= scheduled
