"""Large-scale gains and Rayleigh block channels ``H_k`` (N x M_t per user).

Gains follow the sign convention ``received_dBm = tx_dBm + gain_db``, so
``gain_db = antenna_gain - path_loss - shadowing``. Channel entries are in
the same per-Hz units as the noise PSD, i.e. ``E|h|^2 = 10**(gain_db/10)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .topology import MACRO, MIN_DISTANCE_KM, NetworkLayout

# stream tags for np.random.default_rng([seed, tag, ...])
SHADOW_STREAM = 1
FADING_STREAM = 2


def path_loss_db(tier, d_km):
    """Path loss in dB for a BS tier at distance ``d_km`` (km).

    >>> float(path_loss_db("macro", 1.0))
    128.1
    >>> round(float(path_loss_db("pico", 1.0)), 6)
    140.7
    """
    d = np.asarray(d_km, dtype=float)
    tier = np.asarray(tier)
    macro = 128.1 + 37.6 * np.log10(d)
    pico = 140.7 + 36.7 * np.log10(d)
    return np.where(tier == MACRO, macro, pico)


@dataclass
class LargeScaleGains:
    gain_db: np.ndarray    # (L, K)
    shadow_db: np.ndarray  # (L, K)

    def strengths_dbm(self, layout: NetworkLayout) -> np.ndarray:
        """Long-term received strength ``s[l, k]`` (max tx power plus gain)."""
        return layout.power_dbm[:, None] + self.gain_db


def geometric_gain_db(layout: NetworkLayout) -> np.ndarray:
    d = np.maximum(layout.distance_matrix(), MIN_DISTANCE_KM)
    return layout.config.antenna_gain_dbi - path_loss_db(layout.tiers[:, None], d)


def sample_large_scale(layout: NetworkLayout, rng=None) -> LargeScaleGains:
    """Draw i.i.d. log-normal shadowing for every (BS, user) pair."""
    cfg = layout.config
    if rng is None:
        rng = np.random.default_rng([cfg.rng_seed, SHADOW_STREAM])
    shape = (layout.num_bs, layout.num_users)
    shadow = cfg.shadowing_std_db * rng.standard_normal(shape)
    return LargeScaleGains(gain_db=geometric_gain_db(layout) - shadow, shadow_db=shadow)


@dataclass
class ChannelRealization:
    H: np.ndarray  # (K, N, M_t) complex
    slot_index: int
    noise_var: float

    @property
    def num_users(self) -> int:
        return self.H.shape[0]

    @property
    def num_tx(self) -> int:
        return self.H.shape[2]


def sample_channel(layout: NetworkLayout, gains: LargeScaleGains, rng=None,
                   slot_index: int = 0) -> ChannelRealization:
    """Rayleigh fading scaled by the large-scale gain of each (user, BS) block.

    Without an explicit ``rng`` the stream is keyed by
    ``(rng_seed, slot_index)``, so any slot can be regenerated alone.
    Entries of pairs with ``gain_db = -inf`` are exactly zero.
    """
    cfg = layout.config
    if rng is None:
        rng = np.random.default_rng([cfg.rng_seed, FADING_STREAM, slot_index])
    K, N = layout.num_users, cfg.user_antennas
    owner = layout.antenna_owner
    amp = np.sqrt(10.0 ** (gains.gain_db / 10.0))      # (L, K)
    amp = amp[owner, :].T                               # (K, M_t)
    shape = (K, N, owner.size)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelRealization(H=g * amp[:, None, :], slot_index=slot_index,
                              noise_var=cfg.noise_mw_per_hz)


def dump_channel_csv(channel: ChannelRealization, path) -> None:
    """One row per entry: ``slot,user,rx,tx,real,imag``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "user", "rx", "tx", "real", "imag"])
        for (k, n, m), h in np.ndenumerate(channel.H):
            w.writerow([channel.slot_index, k, n, m, repr(float(h.real)), repr(float(h.imag))])


def load_channel_csv(path, num_users, rx, tx, noise_var) -> ChannelRealization:
    H = np.zeros((num_users, rx, tx), dtype=complex)
    slot = 0
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            slot = int(row["slot"])
            H[int(row["user"]), int(row["rx"]), int(row["tx"])] = complex(
                float(row["real"]), float(row["imag"]))
    return ChannelRealization(H=H, slot_index=slot, noise_var=noise_var)
