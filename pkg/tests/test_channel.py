import numpy as np
import pytest

from sparse_cran.channel import (
    LargeScaleGains, dump_channel_csv, load_channel_csv, path_loss_db, sample_channel,
    sample_large_scale)
from sparse_cran.topology import NetworkConfig, build_layout


def test_path_loss_formulas():
    assert float(path_loss_db("macro", 1.0)) == pytest.approx(128.1)
    assert float(path_loss_db("pico", 1.0)) == pytest.approx(140.7)
    assert float(path_loss_db("macro", 0.1)) == pytest.approx(90.5)
    assert np.allclose(path_loss_db(np.array(["macro", "pico"]), 0.1), [90.5, 104.0])


def test_zero_shadowing_is_deterministic():
    lay = build_layout(NetworkConfig.toy(shadowing_std_db=0.0))
    a = sample_large_scale(lay, np.random.default_rng(1))
    b = sample_large_scale(lay, np.random.default_rng(2))
    assert np.array_equal(a.gain_db, b.gain_db)
    assert np.all(a.shadow_db == 0)


def test_shadowing_std():
    lay = build_layout(NetworkConfig(users_per_cell=60))
    draws = np.concatenate([sample_large_scale(lay, np.random.default_rng(s)).shadow_db.ravel()
                            for s in range(2)])
    assert draws.size >= 10_000
    assert 7.6 <= draws.std() <= 8.4


def test_seeded_gains_repeat():
    lay = build_layout(NetworkConfig.desk(rng_seed=3))
    assert np.array_equal(sample_large_scale(lay).gain_db, sample_large_scale(lay).gain_db)


def test_second_moment_matches_gain():
    lay = build_layout(NetworkConfig.toy(rng_seed=1))
    gains = sample_large_scale(lay)
    owner = lay.antenna_owner
    lin = 10 ** (gains.gain_db[owner, :].T / 10)            # (K, M_t)
    H = np.stack([sample_channel(lay, gains, slot_index=t).H for t in range(3000)])
    normalised = np.abs(H) ** 2 / lin[None, :, None, :]      # (T, K, N, M_t)
    for l in range(lay.num_bs):
        block = normalised[..., owner == l]
        assert block.size >= 1e5 / 4
        assert block.mean() == pytest.approx(1.0, rel=0.03)


def test_excluded_pair_gives_zero_block():
    lay = build_layout(NetworkConfig.toy())
    g = sample_large_scale(lay)
    gain = g.gain_db.copy()
    gain[2, 1] = -np.inf
    H = sample_channel(lay, LargeScaleGains(gain, g.shadow_db)).H
    assert np.all(H[1][:, lay.antenna_owner == 2] == 0)
    assert np.all(H[0][:, lay.antenna_owner == 2] != 0)


def test_slots_differ_and_repeat():
    lay = build_layout(NetworkConfig.toy())
    g = sample_large_scale(lay)
    a = sample_channel(lay, g, slot_index=1).H
    assert np.array_equal(a, sample_channel(lay, g, slot_index=1).H)
    assert not np.array_equal(a, sample_channel(lay, g, slot_index=2).H)


def test_entries_uncorrelated():
    lay = build_layout(NetworkConfig.toy(shadowing_std_db=0.0))
    g = sample_large_scale(lay)
    h = np.array([sample_channel(lay, g, slot_index=t).H[0, :, :2].ravel() for t in range(20_000)])
    h = h / np.sqrt(np.mean(np.abs(h) ** 2, axis=0))
    C = (h.conj().T @ h) / len(h)
    off = C - np.diag(np.diag(C))
    assert np.abs(off).max() < 0.05


def test_channel_csv_round_trip(tmp_path):
    lay = build_layout(NetworkConfig.toy())
    ch = sample_channel(lay, sample_large_scale(lay), slot_index=4)
    dump_channel_csv(ch, tmp_path / "h.csv")
    back = load_channel_csv(tmp_path / "h.csv", *ch.H.shape, ch.noise_var)
    assert np.array_equal(back.H, ch.H)
    assert back.slot_index == 4
