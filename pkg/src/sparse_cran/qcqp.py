"""Convex beamformer subproblem solved through its Lagrangian dual.

The subproblem, for fixed receivers ``u`` and MSE weights ``rho``, is::

    min_w  sum_k w_k^H A w_k - 2 Re(b_k^H w_k)
    s.t.   sum_k ||w_k^l||^2                 <= P_l   (power)
           sum_k coeff[l, k] ||w_k^(l)||^2    <= C_l   (weighted power / backhaul)

where ``w_k^(l)`` is the BS-``l`` block of ``w_k`` (dynamic clustering) or
the whole cluster part of ``w_k`` for users served by ``l`` (static
clustering, ``cluster_wide=True``). For fixed multipliers the Lagrangian
separates over users, ``w_k = (A + D_k)^{-1} b_k`` with ``D_k`` diagonal, so
the dual has only ``2L`` variables however many users there are.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

log = logging.getLogger(__name__)

RIDGE = 1e-12
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 5000
#: Multipliers whose share ``nu_i * budget_i`` of the Lagrangian scale is below
#: this are treated as zero by the slackness test.
SIGNIFICANT = 1e-9


class SolverError(RuntimeError):
    """Raised when the subproblem data are unusable (NaN, negative budgets)."""


@dataclass
class QcqpSubproblem:
    A: np.ndarray                # (M_t, M_t) Hermitian PSD
    b: np.ndarray                # (K, M_t)
    support: np.ndarray          # (K, M_t) bool, entries allowed to be nonzero
    antenna_owner: np.ndarray    # (M_t,) BS index of each antenna
    power_budget: np.ndarray     # (L,)
    backhaul_budget: np.ndarray  # (L,), inf disables the constraint
    backhaul_coeff: np.ndarray   # (L, K) >= 0
    cluster_wide: bool = False

    @property
    def num_bs(self) -> int:
        return len(self.power_budget)

    @property
    def num_users(self) -> int:
        return self.b.shape[0]

    def budgets(self) -> np.ndarray:
        return np.concatenate([self.power_budget, self.backhaul_budget])

    def entry_weights(self) -> np.ndarray:
        """Constraint weights of every ``|w_km|^2``, shape ``(K, M_t, 2L)``.

        The first ``L`` columns are the power constraints, the next ``L`` the
        weighted-power constraints.
        """
        K, Mt = self.b.shape
        L = self.num_bs
        onehot = np.zeros((Mt, L))
        onehot[np.arange(Mt), self.antenna_owner] = 1.0
        power = np.broadcast_to(onehot, (K, Mt, L))
        if self.cluster_wide:
            back = np.broadcast_to(self.backhaul_coeff.T[:, None, :], (K, Mt, L))
        else:
            back = onehot[None, :, :] * self.backhaul_coeff.T[:, None, :]
        out = np.concatenate([power, back], axis=2)
        return out * self.support[:, :, None]

    def constraint_values(self, w: np.ndarray) -> np.ndarray:
        """Left-hand sides of all ``2L`` constraints at ``w``."""
        return np.einsum("km,kmc->c", np.abs(w) ** 2, self.entry_weights())

    def objective(self, w: np.ndarray) -> float:
        quad = np.einsum("km,mn,kn->", w.conj(), self.A, w).real
        return float(quad - 2.0 * np.sum((self.b.conj() * w).real))

    def validate(self) -> None:
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise SolverError("non-finite entries in A or b")
        if np.any(self.power_budget < 0) or np.any(self.backhaul_budget < 0):
            raise SolverError("negative budget")
        if np.any(self.backhaul_coeff < 0) or not np.all(np.isfinite(self.backhaul_coeff)):
            raise SolverError("backhaul coefficients must be finite and >= 0")
        scale = np.abs(self.A).max() if self.A.size else 0.0
        if np.abs(self.A - self.A.conj().T).max(initial=0.0) > 1e-9 * max(scale, 1e-300):
            raise SolverError("A is not Hermitian")


@dataclass
class DualVariables:
    mu: np.ndarray   # power multipliers, (L,)
    lam: np.ndarray  # weighted-power multipliers, (L,)

    @classmethod
    def zeros(cls, num_bs: int) -> "DualVariables":
        return cls(np.zeros(num_bs), np.zeros(num_bs))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.mu, self.lam])

    @classmethod
    def from_stacked(cls, nu: np.ndarray) -> "DualVariables":
        L = len(nu) // 2
        return cls(np.array(nu[:L], dtype=float), np.array(nu[L:], dtype=float))


@dataclass
class QcqpSolution:
    w: np.ndarray
    duals: DualVariables
    status: str                   # "optimal" or "inexact"
    iterations: int
    objective: float
    dual_value: float
    max_violation: float          # max relative constraint violation
    complementary_slackness: float  # max |slack|/budget over positive multipliers
    projected: bool = False
    constraint_values: np.ndarray = field(default=None, repr=False)


class _Reduced:
    """Per-user padded copies of the subproblem restricted to the support.

    Constraints with infinite budget are dropped; entries that a zero-budget
    constraint touches are removed from the support up front (the dual of
    such a constraint is unbounded).
    """

    def __init__(self, p: QcqpSubproblem):
        K, Mt = p.b.shape
        self.K, self.Mt = K, Mt
        budgets = p.budgets()
        weights = p.entry_weights()
        support = p.support.copy()
        zero = np.isfinite(budgets) & (budgets <= 0)
        if zero.any():
            support &= ~(weights[:, :, zero] > 0).any(axis=2)
        keep = np.isfinite(budgets) & ~zero
        self.keep = keep
        self.budgets = budgets[keep]
        self.support = support

        counts = support.sum(axis=1)
        n = int(counts.max()) if K else 0
        self.n = n
        order = np.argsort(~support, axis=1, kind="stable")[:, :n]   # support entries first
        valid = np.arange(n)[None, :] < counts[:, None]
        self.index = order
        self.valid = valid

        diag_scale = float(np.real(np.trace(p.A))) / max(Mt, 1) or 1.0
        Ak = p.A[order[:, :, None], order[:, None, :]]
        Ak = np.where(valid[:, :, None] & valid[:, None, :], Ak, 0.0)
        eye = np.eye(n)
        pad = (~valid)[:, :, None] * eye * diag_scale
        self.A_plain = Ak
        tr = np.einsum("kii->k", Ak).real / np.maximum(counts, 1)
        ridge = RIDGE * np.where(tr > 0, tr, diag_scale)
        self.A_reg = Ak + pad + (valid * ridge[:, None])[:, :, None] * eye
        self.b = np.where(valid, np.take_along_axis(p.b, order, axis=1), 0.0)
        W = np.take_along_axis(weights[:, :, keep], order[:, :, None], axis=1)
        self.W = W * valid[:, :, None]
        self.num_constraints = int(keep.sum())
        self.counts = counts.astype(np.int64)
        self.A_reg = np.ascontiguousarray(self.A_reg, dtype=complex)
        self.b = np.ascontiguousarray(self.b, dtype=complex)
        self.W = np.ascontiguousarray(self.W, dtype=float)
        touched = (self.W > 0).any(axis=1)                      # (K, c)
        self.ncols = touched.sum(axis=1).astype(np.int64)
        width = max(int(self.ncols.max(initial=0)), 1)
        self.cols = np.zeros((K, width), dtype=np.int64)
        for k in range(K):
            idx = np.flatnonzero(touched[k])
            self.cols[k, :idx.size] = idx

    def evaluate(self, nu):
        """Lagrangian minimiser, dual value, constraint values and Cholesky factors."""
        nu = np.ascontiguousarray(nu, dtype=float)
        x = np.zeros((self.K, self.n), dtype=complex)
        f = np.zeros(self.num_constraints)
        factors = np.zeros((self.K, self.n, self.n), dtype=complex)
        total = _kernels.dual_eval(self.A_reg, self.b, self.W, self.cols, self.ncols,
                                   self.counts, nu, x, f, factors)
        return x, -total - float(nu @ self.budgets), f, factors

    def solve_primal(self, nu):
        x, _, _, factors = self.evaluate(np.zeros(self.num_constraints) if nu is None else nu)
        return x, factors

    def hessian(self, x, factors):
        """Dual Hessian ``-2 Re sum_k W_k^T diag(conj x_k) M_k^{-1} diag(x_k) W_k``."""
        c = self.num_constraints
        H = np.zeros((c, c))
        _kernels.dual_hessian(self.W, self.cols, self.ncols, self.counts, x, factors, H)
        return 0.5 * (H + H.T)

    def objective(self, x) -> float:
        quad = np.einsum("kn,knm,km->", x.conj(), self.A_plain, x).real
        return float(quad - 2.0 * np.sum((self.b.conj() * x).real))

    def scatter(self, x) -> np.ndarray:
        w = np.zeros((self.K, self.Mt), dtype=complex)
        rows = np.repeat(np.arange(self.K), self.n).reshape(self.K, self.n)
        w[rows[self.valid], self.index[self.valid]] = x[self.valid]
        return w

    def project(self, x):
        """Uniformly shrink entries touched by violated constraints."""
        f = np.einsum("kn,knc->c", np.abs(x) ** 2, self.W)
        over = f > self.budgets
        if not over.any():
            return x, False
        s = np.ones_like(f)
        s[over] = np.sqrt(self.budgets[over] / f[over]) * (1.0 - 1e-12)
        touched = self.W > 0
        scale = np.where(touched, s[None, None, :], 1.0).min(axis=2)
        return x * scale, True


def primal_from_duals(problem: QcqpSubproblem, duals: DualVariables) -> np.ndarray:
    """Lagrangian minimiser ``w_k = (A + D_k)^{-1} b_k`` for fixed multipliers."""
    red = _Reduced(problem)
    nu = duals.stacked()[red.keep]
    x, _ = red.solve_primal(nu)
    return red.scatter(x)


def dual_function(problem: QcqpSubproblem, duals: DualVariables) -> float:
    red = _Reduced(problem)
    _, value, _, _ = red.evaluate(duals.stacked()[red.keep])
    return value


def dual_grid_oracle(problem: QcqpSubproblem, points: int = 9, levels: int = 40):
    """Brute-force optimum of a small subproblem by zooming grid search on the dual.

    Meant for verification at toy sizes (a handful of multipliers): every
    level evaluates the dual on a full ``points**c`` tensor grid and then
    halves the box around the best node. Shares no code with :func:`solve`.
    Returns ``(value, multipliers)`` with the multipliers in stacked order;
    by strong duality ``value`` is the optimal objective.
    """
    K, Mt = problem.b.shape
    budgets = problem.budgets()
    weights = problem.entry_weights()
    support = problem.support.copy()
    zero = np.isfinite(budgets) & (budgets <= 0)
    support &= ~(weights[:, :, zero] > 0).any(axis=2)
    keep = np.isfinite(budgets) & ~zero
    B = budgets[keep]
    users = []
    for k in range(K):
        idx = np.flatnonzero(support[k])
        if idx.size == 0:
            continue
        Ak = problem.A[np.ix_(idx, idx)]
        ridge = RIDGE * max(float(np.trace(Ak).real) / idx.size, 1e-300)
        users.append((Ak + ridge * np.eye(idx.size), problem.b[k, idx], weights[k][idx][:, keep]))

    def dual(nus):                              # (G, c) -> (G,)
        out = -(nus @ B)
        for Ak, bk, Wk in users:
            M = Ak[None] + np.einsum("nc,gc->gn", Wk, nus)[:, :, None] * np.eye(len(bk))
            x = np.linalg.solve(M, np.broadcast_to(bk, (len(nus), len(bk)))[..., None])[..., 0]
            out = out - np.einsum("n,gn->g", bk.conj(), x).real
        return out

    full = np.zeros(len(budgets))
    c = int(keep.sum())
    unconstrained = float(dual(np.zeros((1, c)))[0])
    if c == 0 or unconstrained >= 0:
        return unconstrained, full
    lo, hi = np.zeros(c), -unconstrained / B     # optimal multipliers obey nu_i * B_i <= -p*
    best_val, best = -math.inf, np.zeros(c)
    for _ in range(levels):
        axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, c)
        vals = dual(grid)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best = float(vals[i]), grid[i]
        step = (hi - lo) / (points - 1)
        lo, hi = np.maximum(best - 2 * step, 0.0), best + 2 * step
    full[keep] = best
    return best_val, full


def _status(red, nu, f, value, tol):
    budgets = red.budgets
    slack = budgets - f
    viol = np.max(np.maximum(-slack, 0.0) / budgets, initial=0.0)
    scale = abs(value) + float(nu @ budgets) + 1e-300
    significant = nu * budgets > SIGNIFICANT * scale
    cs = np.max(np.abs(slack[significant]) / budgets[significant], initial=0.0)
    return viol, cs, significant


def _initial_duals(red, nu0):
    if nu0 is not None:
        return np.maximum(nu0, 0.0)
    c = red.num_constraints
    nu = np.zeros(c)
    x, value, f, _ = red.evaluate(nu)
    if np.all(f <= red.budgets):
        return nu
    b2 = np.abs(red.b) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(red.W > 0, b2[:, :, None] / red.W, 0.0)
    guess = np.sqrt(ratio.sum(axis=(0, 1)) / red.budgets)
    best, best_val = nu, value
    for t in 10.0 ** np.arange(-4.0, 4.5, 1.0):
        cand = t * guess
        _, v, _, _ = red.evaluate(cand)
        if v > best_val:
            best, best_val = cand, v
    return best


def _gradient_step(red, nu, grad, value, scale):
    """Projected ascent along the gradient in objective-share units, with backtracking."""
    unit = scale / red.budgets
    t = 1.0
    for _ in range(80):
        cand = np.maximum(nu + t * unit * grad / red.budgets, 0.0)
        xc, vc, fc, Mc = red.evaluate(cand)
        if vc > value + 1e-4 * float(grad @ (cand - nu)) and vc > value:
            return cand, xc, vc, fc, Mc
        t *= 0.5
    return None, None, None, None, None


def _newton_direction(red, nu, grad, H, eps, scale):
    """Projected Newton step; multipliers within ``eps`` of the bound that the
    gradient pushes down are sent to zero."""
    at_bound = (nu * red.budgets <= eps * scale) & (grad < 0)
    free = ~at_bound
    step = np.zeros(red.num_constraints)
    step[at_bound] = -nu[at_bound]
    if free.any():
        Hf = -H[np.ix_(free, free)]
        dg = np.sqrt(np.maximum(np.diag(Hf), 0.0))
        tiny = dg <= 1e-150
        dg[tiny] = 1.0
        Hs = Hf / dg[:, None] / dg[None, :]
        Hs[np.ix_(tiny, tiny)] = np.eye(int(tiny.sum()))
        Hs += 1e-12 * np.eye(Hs.shape[0])
        try:
            y = np.linalg.solve(Hs, grad[free] / dg)
        except np.linalg.LinAlgError:
            y = grad[free] / dg
        d = y / dg
        # no curvature: the dual is linear in this multiplier
        d[tiny] = np.where(grad[free][tiny] < 0, -nu[free][tiny], 0.0)
        step[free] = d
    return step


def _line_search(red, nu, step, grad, value, residual, tol):
    t = 1.0
    for _ in range(60):
        cand = np.maximum(nu + t * step, 0.0)
        xc, vc, fc, Mc = red.evaluate(cand)
        predicted = float(grad @ (cand - nu))
        if vc >= value + 1e-4 * predicted and vc >= value - 1e-15 * abs(value):
            return cand, xc, vc, fc, Mc
        if abs(predicted) <= 1e-12 * abs(value) and vc >= value - 1e-13 * abs(value):
            # ascent is below roundoff in the dual value; judge by the KKT residual
            if max(_status(red, cand, fc, vc, tol)[:2]) < residual:
                return cand, xc, vc, fc, Mc
        t *= 0.5
    return None, None, None, None, None


def _newton(red, nu, tol, max_iters):
    it = 0
    x, value, f, M = red.evaluate(nu)
    H = red.hessian(x, M)
    for it in range(1, max_iters + 1):
        grad = f - red.budgets
        viol, cs, _ = _status(red, nu, f, value, tol)
        if viol <= tol and cs <= tol:
            return nu, x, value, f, it - 1, True
        scale = abs(value) + float(nu @ red.budgets) + 1e-300
        residual = max(viol, cs)
        step = _newton_direction(red, nu, grad, H, 1e-14, scale)
        cand, xc, vc, fc, Mc = _line_search(red, nu, step, grad, value, residual, tol)
        if cand is None:
            # a flat dual direction can creep towards the bound in ever shorter
            # steps: retry with near-zero multipliers pinned, then plain ascent
            step = _newton_direction(red, nu, grad, H, min(1e-3, residual), scale)
            cand, xc, vc, fc, Mc = _line_search(red, nu, step, grad, value, residual, tol)
        if cand is None:
            cand, xc, vc, fc, Mc = _gradient_step(red, nu, grad, value, scale)
        if cand is None:
            # no further progress at machine precision
            return nu, x, value, f, it, False
        nu, x, value, f = cand, xc, vc, fc
        H = red.hessian(x, Mc)
    viol, cs, _ = _status(red, nu, f, value, tol)
    return nu, x, value, f, max_iters, viol <= tol and cs <= tol


def _subgradient(red, nu, tol, max_iters, step0=1.0):
    """Projected supergradient ascent with ``c/sqrt(t)`` steps and Polyak fallback.

    Multipliers are handled in units of their share of the objective so a
    single step constant works across constraint types.
    """
    x, value, f, _ = red.evaluate(nu)
    unit = (abs(value) + 1e-300) / red.budgets
    theta = nu / unit
    best_val = value
    upper = math.inf
    it = 0
    for it in range(1, max_iters + 1):
        g_theta = (f - red.budgets) * unit
        viol, cs, _ = _status(red, nu, f, value, tol)
        if viol <= tol and cs <= tol:
            return nu, x, value, f, it - 1, True
        xp, _ = red.project(x)
        upper = min(upper, red.objective(xp))
        norm2 = float(g_theta @ g_theta)
        if norm2 == 0.0:
            break
        polyak = (upper - value) / norm2 if math.isfinite(upper) else math.inf
        step = min(step0 / math.sqrt(it), polyak) if polyak > 0 else step0 / math.sqrt(it)
        theta = np.maximum(theta + step * g_theta / math.sqrt(norm2) * (abs(best_val) + 1e-300)
                           / (abs(value) + 1e-300), 0.0)
        nu = theta * unit
        x, value, f, _ = red.evaluate(nu)
        best_val = max(best_val, value)
    viol, cs, _ = _status(red, nu, f, value, tol)
    return nu, x, value, f, it, viol <= tol and cs <= tol


def solve(problem: QcqpSubproblem, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS,
          warm_start: DualVariables | None = None, method: str = "newton",
          validate: bool = True) -> QcqpSolution:
    """Maximise the concave dual and recover the primal beamformers.

    ``method="newton"`` runs projected Newton ascent (exact dual Hessian,
    Armijo backtracking along the projection arc); ``"subgradient"`` runs
    plain projected supergradient ascent. Either way the returned ``w``
    satisfies every constraint to within ``tol`` relative: if the final
    multipliers leave a residual violation, the offending blocks are scaled
    down uniformly and ``projected`` is set.
    """
    if validate:
        problem.validate()
    red = _Reduced(problem)
    L = problem.num_bs
    full_nu = np.zeros(2 * L)
    if red.num_constraints == 0 or red.n == 0:
        x = np.zeros((red.K, red.n), dtype=complex)
        if red.n:
            x, _ = red.solve_primal(None)
        w = red.scatter(x)
        obj = problem.objective(w)
        return QcqpSolution(w=w, duals=DualVariables.zeros(L), status="optimal", iterations=0,
                            objective=obj, dual_value=obj, max_violation=0.0,
                            complementary_slackness=0.0,
                            constraint_values=problem.constraint_values(w))

    nu0 = warm_start.stacked()[red.keep] if warm_start is not None else None
    nu = _initial_duals(red, nu0)
    if method == "newton":
        nu, x, value, f, iters, ok = _newton(red, nu, tol, max_iters)
    elif method == "subgradient":
        nu, x, value, f, iters, ok = _subgradient(red, nu, tol, max_iters)
    else:
        raise ValueError(f"unknown method {method!r}")

    x, projected = red.project(x)
    f = np.einsum("kn,knc->c", np.abs(x) ** 2, red.W)
    viol, cs, _ = _status(red, nu, f, value, tol)
    full_nu[red.keep] = nu
    w = red.scatter(x)
    status = "optimal" if ok and viol <= tol and cs <= tol else "inexact"
    if status != "optimal":
        log.debug("QCQP inexact after %d iterations: violation %.2e, slackness %.2e",
                  iters, viol, cs)
    return QcqpSolution(w=w, duals=DualVariables.from_stacked(full_nu), status=status,
                        iterations=iters, objective=red.objective(x), dual_value=value,
                        max_violation=viol, complementary_slackness=cs, projected=projected,
                        constraint_values=problem.constraint_values(w))


def assemble(state, channel, layout, clusters=None, backhaul: bool = True) -> QcqpSubproblem:
    """Build the subproblem from the current receivers and MSE weights.

    ``state`` needs ``U``, ``rho``, ``alpha``, ``active``, ``candidate``,
    ``beta_dyn``, ``beta_stat`` and ``rate_hat`` (see
    :class:`sparse_cran.wmmse.BeamformingState`). With ``clusters`` given the
    support and weighted-power constraints follow the static form.
    """
    H = channel.H
    weight = np.where(state.active, state.alpha * state.rho, 0.0)
    G = np.einsum("knm,kn->km", H.conj(), state.U)        # H_k^H u_k
    A = (G.T * weight) @ G.conj()
    A = 0.5 * (A + A.conj().T)
    b = weight[:, None] * G
    owner = layout.antenna_owner
    L = layout.num_bs
    if clusters is None:
        support = state.candidate[:, owner] & state.active[:, None]
        coeff = state.beta_dyn * state.rate_hat[None, :]
    else:
        support = clusters.serving_mask()[:, owner] & state.active[:, None]
        coeff = clusters.serving_mask().T * (state.beta_stat * state.rate_hat)[None, :]
    budget = layout.backhaul_bps_hz if backhaul else np.full(L, math.inf)
    return QcqpSubproblem(A=A, b=b, support=support, antenna_owner=owner,
                          power_budget=layout.power_mw_hz.copy(),
                          backhaul_budget=np.asarray(budget, dtype=float).copy(),
                          backhaul_coeff=np.where(np.isfinite(budget)[:, None], coeff, 0.0),
                          cluster_wide=clusters is not None)


def dump_problem(problem: QcqpSubproblem, path) -> None:
    """Write the subproblem as plain text for cross-checking with other solvers.

    Sections are introduced by ``# name rows cols`` lines followed by one
    row per line; complex matrices are written as ``re im`` pairs.
    """
    def block(fh, name, arr):
        arr = np.atleast_2d(arr)
        fh.write(f"# {name} {arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            if np.iscomplexobj(arr):
                fh.write(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row) + "\n")
            else:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")

    with open(path, "w") as fh:
        fh.write(f"# cluster_wide {int(problem.cluster_wide)}\n")
        block(fh, "A", problem.A)
        block(fh, "b", problem.b)
        block(fh, "support", problem.support.astype(int))
        block(fh, "antenna_owner", problem.antenna_owner[None, :])
        block(fh, "power_budget", problem.power_budget[None, :])
        block(fh, "backhaul_budget", problem.backhaul_budget[None, :])
        block(fh, "backhaul_coeff", problem.backhaul_coeff)


def load_problem(path) -> QcqpSubproblem:
    sections, current, cluster_wide = {}, None, False
    with open(path) as fh:
        for line in fh:
            if line.startswith("# cluster_wide"):
                cluster_wide = bool(int(line.split()[-1]))
            elif line.startswith("#"):
                _, name, r, c = line.split()
                current = name
                sections[name] = []
            elif line.strip():
                sections[current].append([float(v) for v in line.split()])

    def real(name):
        return np.array(sections[name])

    def cplx(name):
        a = real(name)
        return a[:, 0::2] + 1j * a[:, 1::2]

    return QcqpSubproblem(
        A=cplx("A"), b=cplx("b"), support=real("support").astype(bool),
        antenna_owner=real("antenna_owner")[0].astype(int),
        power_budget=real("power_budget")[0], backhaul_budget=real("backhaul_budget")[0],
        backhaul_coeff=real("backhaul_coeff"), cluster_wide=cluster_wide)
