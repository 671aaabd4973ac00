"""
Sparse clusters from one slot
=============================

Run the dynamic-clustering engine on a single desk-scale slot and watch
each user's set of serving BSs shrink as the reweighting pushes weak links
to zero.
"""

import numpy as np

from sparse_cran.channel import sample_channel, sample_large_scale
from sparse_cran.clustering import strongest_candidates
from sparse_cran.topology import NetworkConfig, build_layout
from sparse_cran.wmmse import EngineOptions, block_powers, run_dynamic

# 7 cells, 4 BSs each, 8 users per cell; each user may use its 5 strongest BSs
net = NetworkConfig.desk(rng_seed=3)
layout = build_layout(net).with_backhaul(368.0, 19.3)   # Mbps per macro / pico BS
gains = sample_large_scale(layout)
candidates = strongest_candidates(gains.strengths_dbm(layout), net.candidate_limit)
channel = sample_channel(layout, gains, slot_index=1)
print(f"{layout.num_bs} BSs, {layout.num_users} users, {layout.antenna_owner.size} transmit antennas")

# equal priorities: a plain weighted-sum-rate slot
state, trace = run_dynamic(channel, layout, np.ones(layout.num_users),
                           EngineOptions(rel_tol=1e-5, max_iters=200), candidates=candidates)

print("\niteration  sum rate  users in pool  mean candidate set")
rows = trace.records[::5]
if rows[-1] is not trace.records[-1]:
    rows.append(trace.records[-1])
for r in rows:
    print(f"{r.iteration:9d} {r.objective:9.2f} {r.active_users:14d} {r.mean_candidate_size:19.2f}")

# who ended up serving whom
served = block_powers(state.W, layout.antenna_owner, layout.num_bs).T >= 1e-10
scheduled = served.any(axis=1)
sizes = served[scheduled].sum(axis=1)
print(f"\n{scheduled.sum()} of {layout.num_users} users scheduled, "
      f"serving-set sizes {np.bincount(sizes).tolist()} (index = size)")

# backhaul actually used vs the budget, in Mbps
load = (served.T @ state.rates) * 10
for tier, mask in (("macro", layout.is_macro), ("pico", ~layout.is_macro)):
    budget = layout.backhaul_bps_hz[mask][0] * 10
    print(f"{tier:5s} backhaul: mean {load[mask].mean():6.1f} Mbps, "
          f"max {load[mask].max():6.1f} Mbps, budget {budget:.1f} Mbps")
print(f"repair steps after convergence: {trace.repaired_links}")
