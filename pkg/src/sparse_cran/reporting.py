"""Percentiles, CDFs, backhaul histograms and utility traces of campaigns.

Everything here is a pure function of :class:`CampaignResult` objects.
Percentiles use linear interpolation between order statistics (numpy's
default), so the median of ``[1, 2, 3, 4]`` is 2.5.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

PERCENTILES = (10, 50, 90)


def rate_percentile(result, p: float) -> float:
    """Empirical ``p``-th percentile (Mbps) of the users' long-term rates.

    >>> from types import SimpleNamespace
    >>> rate_percentile(SimpleNamespace(long_term_rate=np.array([1.0, 2, 3, 4])), 50)
    2.5
    """
    if not 0 < p < 100:
        raise ValueError(f"percentile must lie in (0, 100), got {p}")
    rates = np.asarray(result.long_term_rate, dtype=float)
    if rates.size == 0:
        raise ValueError("result has no users")
    return float(np.percentile(rates, p))


def rate_cdf(result) -> np.ndarray:
    """``(rate_mbps, cumulative_fraction)`` pairs of the long-term rates."""
    r = np.sort(np.asarray(result.long_term_rate, dtype=float))
    return np.column_stack([r, np.arange(1, r.size + 1) / max(r.size, 1)])


@dataclass
class Histogram:
    edges: np.ndarray    # (bins + 1,)
    density: np.ndarray  # (bins,), integrates to 1

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def area(self) -> float:
        return float(np.sum(self.density * np.diff(self.edges)))

    def mode(self) -> tuple:
        """``(low, high)`` edges of the most populated bin (first on ties)."""
        i = int(np.argmax(self.density))
        return float(self.edges[i]), float(self.edges[i + 1])

    def mass_between(self, lo: float, hi: float) -> float:
        """Probability mass of bins lying entirely inside ``[lo, hi]``."""
        inside = (self.edges[:-1] >= lo - 1e-12) & (self.edges[1:] <= hi + 1e-12)
        return float(np.sum((self.density * np.diff(self.edges))[inside]))


def backhaul_histogram(result, bins=20, tier: str = "macro", range_=None) -> Histogram:
    """Normalised histogram of per-slot, per-BS backhaul use (bps/Hz) of one tier.

    All BSs of the tier are pooled. A constant sample lands in a single bin
    of width 1 centred on it.
    """
    if result.num_slots < 1:
        raise ValueError("result has no slots")
    mask = result.is_macro if tier == "macro" else ~np.asarray(result.is_macro)
    x = np.asarray(result.per_slot_backhaul)[:, mask].ravel()
    if x.size == 0:
        raise ValueError(f"no {tier} BSs in result")
    if range_ is None:
        lo, hi = float(x.min()), float(x.max())
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        range_ = (lo, hi)
    density, edges = np.histogram(x, bins=bins, range=range_, density=True)
    return Histogram(edges=edges, density=density)


def log_utility(result) -> np.ndarray:
    """Per-slot ``sum_k ln(avg_rate_k)`` with average rates in Mbps."""
    return np.asarray(result.utility_trace, dtype=float)


def utility_change(trace, last: int = 10) -> float:
    """Relative change of a utility trace over its last ``last`` slots."""
    trace = np.asarray(trace, dtype=float)
    if trace.size <= last:
        raise ValueError(f"trace needs more than {last} slots")
    ref = trace[-last - 1]
    return float(abs(trace[-1] - ref) / max(abs(ref), 1e-300))


@dataclass
class SchemeSummary:
    name: str
    percentiles: dict                 # percentile -> Mbps
    gains: dict = field(default_factory=dict)   # percentile -> % vs baseline
    backhaul_mean_mbps: tuple = (0.0, 0.0)      # (macro, pico)
    histograms: dict = field(default_factory=dict)  # tier -> {"edges", "density"}
    utility: list = field(default_factory=list)
    cdf: list = field(default_factory=list)


@dataclass
class ComparisonReport:
    baseline: str
    schemes: list

    def scheme(self, name) -> SchemeSummary:
        for s in self.schemes:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2))

    def to_csv(self, path) -> None:
        """One row per (scheme, percentile): rate and gain vs the baseline."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scheme", "percentile", "rate_mbps", "gain_pct",
                        "macro_backhaul_mbps", "pico_backhaul_mbps"])
            for s in self.schemes:
                for p, v in s.percentiles.items():
                    w.writerow([s.name, p, repr(v), repr(s.gains.get(p, 0.0)),
                                repr(s.backhaul_mean_mbps[0]), repr(s.backhaul_mean_mbps[1])])

    def write_cdfs(self, out_dir) -> None:
        out = Path(out_dir)
        for s in self.schemes:
            with open(out / f"cdf_{_slug(s.name)}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["rate_mbps", "cumulative_fraction"])
                w.writerows(s.cdf)


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name)


def percentile_gain(value: float, reference: float) -> float:
    """Gain in percent; 0 when both are 0."""
    if reference == 0:
        return 0.0 if value == 0 else float("inf")
    return 100.0 * (value / reference - 1.0)


def compare(results: dict, baseline: str, percentiles=PERCENTILES, bins: int = 20) -> ComparisonReport:
    """Summarise ``{name: CampaignResult}`` against ``results[baseline]``."""
    if baseline not in results:
        raise KeyError(f"baseline {baseline!r} not among the results")
    users = {name: r.num_users for name, r in results.items()}
    if len(set(users.values())) > 1:
        raise ValueError(f"results disagree on the number of users: {users}")
    ref = {p: rate_percentile(results[baseline], p) for p in percentiles}
    summaries = []
    for name, r in results.items():
        pct = {p: rate_percentile(r, p) for p in percentiles}
        bh = np.asarray(r.per_slot_backhaul) * r.bandwidth_hz / 1e6
        macro = bh[:, r.is_macro]
        pico = bh[:, ~np.asarray(r.is_macro)]
        hists = {}
        for tier, part in (("macro", macro), ("pico", pico)):
            if part.size:
                h = backhaul_histogram(r, bins=bins, tier=tier)
                hists[tier] = {"edges_bps_hz": h.edges.tolist(), "density": h.density.tolist()}
        summaries.append(SchemeSummary(
            name=name, percentiles=pct,
            gains={p: percentile_gain(pct[p], ref[p]) for p in percentiles},
            backhaul_mean_mbps=(float(macro.mean()) if macro.size else 0.0,
                                float(pico.mean()) if pico.size else 0.0),
            histograms=hists, utility=log_utility(r).tolist(),
            cdf=rate_cdf(r).tolist()))
    return ComparisonReport(baseline=baseline, schemes=summaries)
