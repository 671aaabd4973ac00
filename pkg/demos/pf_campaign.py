"""
A proportional-fair campaign
============================

Calibrate backhaul budgets from an unconstrained strongest-2 baseline,
then run dynamic clustering at those budgets and compare the long-term
rate distributions. Pass a slot count on the command line (default 30);
the acceptance suite uses 200 slots over 5 seeds.
"""

import sys

import numpy as np

from sparse_cran.reporting import backhaul_histogram, compare, utility_change
from sparse_cran.simulator import CampaignConfig, calibrate_backhaul, run_campaign
from sparse_cran.topology import NetworkConfig

slots = int(sys.argv[1]) if len(sys.argv) > 1 else 30
net = NetworkConfig.desk(rng_seed=1)

# the baseline runs without backhaul limits; its average per-tier use becomes the budget
(macro, pico), baseline = calibrate_backhaul("baseline:strongest_s", net, slots, return_result=True)
print(f"calibrated budgets: macro {macro:.0f} Mbps, pico {pico:.1f} Mbps")

dynamic = run_campaign(CampaignConfig(num_slots=slots, backhaul_override=(macro, pico)), net)

report = compare({"strongest-2": baseline, "dynamic": dynamic}, baseline="strongest-2")
for s in report.schemes:
    cells = ", ".join(f"p{p} {v:.2f} Mbps ({s.gains[p]:+.1f}%)" for p, v in s.percentiles.items())
    print(f"{s.name:12s} {cells}")

# where the macro BSs sit relative to their budget
h = backhaul_histogram(dynamic, bins=10, tier="macro", range_=(0, dynamic.budgets_bps_hz.max()))
print("\nmacro backhaul use, share of slots per tenth of the budget:")
print(np.round(h.density * np.diff(h.edges), 2))

last = min(10, slots - 1)
if last > 0:
    print(f"\nutility {dynamic.utility_trace[-1]:.2f}, change over the last {last} slots "
          f"{100 * utility_change(dynamic.utility_trace, last):.2f}%")
print(f"repair steps per slot: {dynamic.repaired_links.mean():.1f}")
