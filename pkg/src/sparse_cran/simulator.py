"""Multi-slot proportional-fair campaigns.

A campaign fixes the layout and the shadowing (both drawn from the network
seed), redraws Rayleigh fading every slot, and runs one engine call per slot
with priority weights ``alpha_k = 1 / max(avg_rate_k, floor)``. The average
rate is an exponential moving average with a ``window``-slot memory.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import clustering as cl
from .channel import sample_channel, sample_large_scale
from .topology import NetworkConfig, build_layout
from .wmmse import (EngineError, EngineOptions, actual_backhaul, block_powers,
                    dbm_hz_to_mw_hz, run_dynamic, run_static, served_mask)

log = logging.getLogger(__name__)

DYNAMIC = "dynamic"
SCHEMES = ("dynamic", "static:max_loading", "static:biased",
           "baseline:strongest_s", "baseline:disjoint")
_POLICY_KIND = {"static:max_loading": cl.MAX_LOADING, "static:biased": cl.BIASED,
                "baseline:strongest_s": cl.STRONGEST_S, "baseline:disjoint": cl.DISJOINT_CELL}

RATE_FLOOR = 1e-3     # bps/Hz
AVERAGE_WINDOW = 20   # slots


@dataclass
class CampaignConfig:
    """What to run on top of a :class:`NetworkConfig`.

    ``backhaul`` decides whether the per-BS backhaul constraints are
    imposed; by default they are for dynamic and static schemes and not for
    baselines, which serve as the unconstrained reference.
    ``backhaul_override`` replaces the network's ``(macro, pico)`` budgets
    (Mbps).
    """

    scheme: str = DYNAMIC
    num_slots: int = 200
    pf_mode: str = "inverse_mean"
    backhaul_override: tuple | None = None
    backhaul: bool | None = None
    prune_threshold_dbm_hz: float = -100.0
    shrink_threshold: float = 0.01
    indicator_threshold_dbm_hz: float = -100.0
    S: int = 2
    eta1: float = 14.0
    eta2: float = 12.0
    k_max: tuple = (70, 10)
    bias_db: tuple = (0.0, 6.0)
    rate_floor: float = RATE_FLOOR
    average_window: int = AVERAGE_WINDOW
    average_warmup: bool = True
    max_iters: int = 100
    rel_tol: float = 1e-3

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.num_slots < 1:
            raise ValueError(f"num_slots must be >= 1, got {self.num_slots}")
        if self.pf_mode not in ("inverse_mean", "equal"):
            raise ValueError(f"unknown pf_mode {self.pf_mode!r}")
        if self.average_window < 1 or not self.rate_floor > 0:
            raise ValueError("average_window must be >= 1 and rate_floor > 0")
        if self.backhaul_override is not None:
            self.backhaul_override = tuple(float(c) for c in self.backhaul_override)
            if len(self.backhaul_override) != 2 or min(self.backhaul_override) < 0:
                raise ValueError("backhaul_override must be a (macro, pico) pair of Mbps >= 0")
        self.k_max = tuple(int(k) for k in self.k_max)
        self.bias_db = tuple(float(b) for b in self.bias_db)

    @property
    def constrained(self) -> bool:
        if self.backhaul is not None:
            return bool(self.backhaul)
        return not self.scheme.startswith("baseline")

    def policy(self, is_macro) -> cl.ClusterPolicy | None:
        kind = _POLICY_KIND.get(self.scheme)
        if kind is None:
            return None
        return cl.ClusterPolicy.per_tier(kind, is_macro, k_max=self.k_max, bias_db=self.bias_db,
                                         S=self.S, eta1=self.eta1, eta2=self.eta2)

    def engine_options(self) -> EngineOptions:
        return EngineOptions(max_iters=self.max_iters, rel_tol=self.rel_tol,
                             backhaul=self.constrained,
                             prune_threshold_dbm_hz=self.prune_threshold_dbm_hz,
                             shrink_threshold=self.shrink_threshold,
                             indicator_threshold_dbm_hz=self.indicator_threshold_dbm_hz)


@dataclass
class CampaignResult:
    long_term_rate: np.ndarray    # (K,) Mbps, average after the last slot
    per_slot_rates: np.ndarray    # (T, K) bps/Hz
    per_slot_backhaul: np.ndarray  # (T, L) bps/Hz
    utility_trace: np.ndarray     # (T,) sum_k ln(avg rate in Mbps)
    cluster_size_stats: np.ndarray  # (T,) mean serving-set size of scheduled users
    per_slot_power: np.ndarray    # (T, L) mW/Hz
    is_macro: np.ndarray          # (L,)
    budgets_bps_hz: np.ndarray    # (L,) backhaul budgets used (inf = none)
    power_mw_hz: np.ndarray       # (L,)
    bandwidth_hz: float = 1e7
    iterations: np.ndarray = None   # (T,) engine iterations
    converged: np.ndarray = None    # (T,) bool
    repaired_links: np.ndarray = None  # (T,)
    seconds: np.ndarray = None       # (T,)
    failures: list = field(default_factory=list)  # (slot, message)

    @property
    def num_slots(self) -> int:
        return self.per_slot_rates.shape[0]

    @property
    def num_users(self) -> int:
        return self.per_slot_rates.shape[1]

    def to_mbps(self, bps_hz):
        return np.asarray(bps_hz) * self.bandwidth_hz / 1e6

    def write(self, out_dir, manifest: dict | None = None) -> Path:
        """Write ``rates.csv``, ``backhaul.csv``, ``utility.csv`` and ``slots.csv``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "rates.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["user_id", "long_term_mbps"])
            for k, r in enumerate(self.long_term_rate):
                w.writerow([k, repr(float(r))])
        with open(out / "backhaul.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "bs_id", "tier", "bps_hz", "budget_bps_hz", "power_mw_hz"])
            for t in range(self.num_slots):
                for l in range(len(self.is_macro)):
                    w.writerow([t + 1, l, "macro" if self.is_macro[l] else "pico",
                                repr(float(self.per_slot_backhaul[t, l])),
                                repr(float(self.budgets_bps_hz[l])),
                                repr(float(self.per_slot_power[t, l]))])
        with open(out / "utility.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "value"])
            for t, u in enumerate(self.utility_trace):
                w.writerow([t + 1, repr(float(u))])
        with open(out / "slots.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "iterations", "converged", "repaired_links",
                        "mean_cluster_size", "seconds"] +
                       [f"rate_{k}" for k in range(self.num_users)])
            for t in range(self.num_slots):
                w.writerow([t + 1, int(self.iterations[t]), int(self.converged[t]),
                            int(self.repaired_links[t]), repr(float(self.cluster_size_stats[t])),
                            repr(float(self.seconds[t]))] +
                           [repr(float(r)) for r in self.per_slot_rates[t]])
        if manifest is not None:
            doc = dict(manifest)
            doc["bandwidth_hz"] = self.bandwidth_hz
            doc["power_mw_hz"] = self.power_mw_hz.tolist()
            doc["failures"] = [list(f) for f in self.failures]
            (out / "manifest.json").write_text(json.dumps(doc, indent=2, default=_json_default))
        return out

    @classmethod
    def read(cls, out_dir) -> "CampaignResult":
        """Load a result written by :meth:`write` (the manifest must exist)."""
        out = Path(out_dir)
        manifest = json.loads((out / "manifest.json").read_text())
        with open(out / "rates.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        rate = np.array([float(r["long_term_mbps"]) for r in rows])
        with open(out / "utility.csv", newline="") as fh:
            util = np.array([float(r["value"]) for r in csv.DictReader(fh)])
        T = len(util)
        with open(out / "backhaul.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        L = len(rows) // T if T else 0
        bh = np.array([float(r["bps_hz"]) for r in rows]).reshape(T, L)
        pw = np.array([float(r["power_mw_hz"]) for r in rows]).reshape(T, L)
        budget = np.array([float(r["budget_bps_hz"]) for r in rows[:L]])
        is_macro = np.array([r["tier"] == "macro" for r in rows[:L]])
        with open(out / "slots.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        K = len(rate)
        per_slot = np.array([[float(r[f"rate_{k}"]) for k in range(K)] for r in rows]).reshape(T, K)
        return cls(long_term_rate=rate, per_slot_rates=per_slot, per_slot_backhaul=bh,
                   utility_trace=util,
                   cluster_size_stats=np.array([float(r["mean_cluster_size"]) for r in rows]),
                   per_slot_power=pw, is_macro=is_macro, budgets_bps_hz=budget,
                   power_mw_hz=np.array(manifest["power_mw_hz"]),
                   bandwidth_hz=float(manifest["bandwidth_hz"]),
                   iterations=np.array([int(r["iterations"]) for r in rows]),
                   converged=np.array([r["converged"] == "1" for r in rows]),
                   repaired_links=np.array([int(r["repaired_links"]) for r in rows]),
                   seconds=np.array([float(r["seconds"]) for r in rows]),
                   failures=[tuple(f) for f in manifest.get("failures", [])])


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def update_avg_rate(avg, rate, slot_index, window=AVERAGE_WINDOW, warmup=True):
    """One step of the long-term average rate.

    ``avg <- (1 - 1/T) avg + rate / T`` with ``T = window``. With
    ``warmup`` the memory grows as ``T = min(slot_index, window)``, so the
    first ``window`` slots form a plain running mean and the floor used to
    initialise ``avg`` does not bias the early estimates.

    >>> update_avg_rate(np.array([0.001]), np.array([2.0]), 1, warmup=False)
    array([0.10095])
    >>> update_avg_rate(np.array([0.001]), np.array([2.0]), 1)
    array([2.])
    """
    if slot_index < 1:
        raise ValueError("slot_index starts at 1")
    T = min(slot_index, window) if warmup else window
    return (1.0 - 1.0 / T) * np.asarray(avg, dtype=float) + np.asarray(rate, dtype=float) / T


def backhaul_consumption(state, layout, clusters=None, threshold_dbm_hz=-100.0) -> np.ndarray:
    """Per-BS accumulated rate of the users whose data the BS carries (bps/Hz)."""
    return actual_backhaul(state.W, state.rates, layout.antenna_owner, layout.num_bs,
                           dbm_hz_to_mw_hz(threshold_dbm_hz), clusters)


class _Scenario:
    """Layout, shadowing and clusters shared by every slot of a campaign."""

    def __init__(self, config: CampaignConfig, net: NetworkConfig):
        layout = build_layout(net)
        if config.backhaul_override is not None:
            layout = layout.with_backhaul(*config.backhaul_override)
        self.layout = layout
        self.gains = sample_large_scale(layout)
        self.strengths = self.gains.strengths_dbm(layout)
        self.policy = config.policy(layout.is_macro)
        self.clusters = None
        self.candidates = None
        if self.policy is not None:
            self.clusters = cl.build_clusters(self.strengths, self.policy, layout)
        else:
            self.candidates = cl.strongest_candidates(self.strengths, net.candidate_limit)


def run_campaign(config: CampaignConfig, network_config: NetworkConfig,
                 progress=None) -> CampaignResult:
    """Run ``config.num_slots`` proportional-fair slots; deterministic given the seed.

    A slot whose engine call fails is recorded in ``failures`` with zero
    rates, and the campaign moves on.
    """
    net = network_config
    sc = _Scenario(config, net)
    layout = sc.layout
    K, L, T = layout.num_users, layout.num_bs, config.num_slots
    opt = config.engine_options()
    budgets = layout.backhaul_bps_hz if config.constrained else np.full(L, math.inf)
    thr = dbm_hz_to_mw_hz(config.indicator_threshold_dbm_hz)
    to_mbps = net.bandwidth_hz / 1e6

    avg = np.full(K, config.rate_floor)
    rates = np.zeros((T, K))
    backhaul = np.zeros((T, L))
    power = np.zeros((T, L))
    utility = np.zeros(T)
    sizes = np.zeros(T)
    iters = np.zeros(T, dtype=int)
    conv = np.zeros(T, dtype=bool)
    repaired = np.zeros(T, dtype=int)
    secs = np.zeros(T)
    failures = []
    for t in range(1, T + 1):
        t0 = time.perf_counter()
        channel = sample_channel(layout, sc.gains, slot_index=t)
        if config.pf_mode == "equal":
            alpha = np.ones(K)
        else:
            alpha = 1.0 / np.maximum(avg, config.rate_floor)
        try:
            if sc.clusters is None:
                state, trace = run_dynamic(channel, layout, alpha, opt, candidates=sc.candidates)
            else:
                state, trace = run_static(channel, layout, sc.clusters, alpha, opt)
        except EngineError as exc:
            log.warning("slot %d failed: %s", t, exc)
            failures.append((t, str(exc)))
        else:
            R = state.rates
            rates[t - 1] = R
            served = served_mask(state.W, layout.antenna_owner, L, thr, sc.clusters)
            backhaul[t - 1] = served @ R
            power[t - 1] = block_powers(state.W, layout.antenna_owner, L).sum(axis=1)
            on = served.any(axis=0)
            sizes[t - 1] = served[:, on].sum(axis=0).mean() if on.any() else 0.0
            iters[t - 1] = len(trace)
            conv[t - 1] = trace.converged
            repaired[t - 1] = trace.repaired_links
        avg = update_avg_rate(avg, rates[t - 1], t, config.average_window, config.average_warmup)
        utility[t - 1] = log_utility_value(np.maximum(avg, config.rate_floor) * to_mbps)
        secs[t - 1] = time.perf_counter() - t0
        if progress is not None:
            progress(t, T)
    return CampaignResult(
        long_term_rate=avg * to_mbps, per_slot_rates=rates, per_slot_backhaul=backhaul,
        utility_trace=utility, cluster_size_stats=sizes, per_slot_power=power,
        is_macro=layout.is_macro.copy(), budgets_bps_hz=np.asarray(budgets, dtype=float),
        power_mw_hz=layout.power_mw_hz.copy(), bandwidth_hz=net.bandwidth_hz,
        iterations=iters, converged=conv, repaired_links=repaired, seconds=secs,
        failures=failures)


def log_utility_value(avg_mbps) -> float:
    return float(np.sum(np.log(avg_mbps)))


def tier_mean_backhaul_mbps(result: CampaignResult) -> tuple:
    """Average per-slot backhaul use of macro and pico BSs, in Mbps."""
    if result.num_users == 0 or result.per_slot_backhaul.size == 0:
        return 0.0, 0.0
    bh = result.to_mbps(result.per_slot_backhaul)
    macro = bh[:, result.is_macro]
    pico = bh[:, ~result.is_macro]
    return (float(macro.mean()) if macro.size else 0.0,
            float(pico.mean()) if pico.size else 0.0)


def calibrate_backhaul(baseline_policy, network_config: NetworkConfig, num_slots: int,
                       return_result: bool = False, **campaign_kw):
    """Tier-averaged backhaul use (Mbps) of an unconstrained baseline campaign.

    ``baseline_policy`` is a :class:`ClusterPolicy` of kind ``strongest_s``
    or ``disjoint_cell``, or the scheme string itself.
    """
    if isinstance(baseline_policy, cl.ClusterPolicy):
        if baseline_policy.kind == cl.STRONGEST_S:
            scheme = "baseline:strongest_s"
            campaign_kw.setdefault("S", baseline_policy.S)
        elif baseline_policy.kind == cl.DISJOINT_CELL:
            scheme = "baseline:disjoint"
        else:
            raise ValueError(f"{baseline_policy.kind!r} is not a baseline policy")
    else:
        scheme = str(baseline_policy)
        if not scheme.startswith("baseline:"):
            raise ValueError(f"{scheme!r} is not a baseline scheme")
    config = CampaignConfig(scheme=scheme, num_slots=num_slots, backhaul=False, **campaign_kw)
    result = run_campaign(config, network_config)
    pair = tier_mean_backhaul_mbps(result)
    return (pair, result) if return_result else pair


def manifest_for(config: CampaignConfig, network_config: NetworkConfig, **extra) -> dict:
    """Everything needed to re-run a campaign."""
    doc = {"campaign": asdict(config), "network": asdict(network_config),
           "seed": network_config.rng_seed, "scheme": config.scheme}
    doc.update(extra)
    return doc
