"""Two-tier hexagonal network layout with 7-cell wraparound.

Each cell is a regular hexagon with one macro-BS at its centre and three
pico-BSs. Distances are in km, powers are carried both in dBm (total) and
in mW/Hz (spread over the system bandwidth), the latter being the unit of
``||w||^2`` used everywhere in the beamforming code.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MACRO = "macro"
PICO = "pico"

PICOS_PER_CELL = 3
#: Fraction of the hexagon circumradius at which pico-BSs sit.
PICO_RADIUS_FRACTION = 2.0 / 3.0
PICO_AZIMUTHS_DEG = (30.0, 150.0, 270.0)
#: Path-loss distance floor (km).
MIN_DISTANCE_KM = 0.01


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def dbm_per_hz(total_dbm, bandwidth_hz):
    """Spread a total power over ``bandwidth_hz``; returns dBm/Hz."""
    return total_dbm - 10.0 * math.log10(bandwidth_hz)


@dataclass
class NetworkConfig:
    """Physical and geometric parameters of the simulated network.

    Defaults reproduce the full-scale scenario (7 cells, 30 users per
    cell). Backhaul budgets default to ``inf`` (unconstrained).
    """

    num_cells: int = 7
    inter_site_distance_km: float = 0.8
    users_per_cell: int = 30
    macro_antennas: int = 4
    pico_antennas: int = 2
    user_antennas: int = 2
    macro_power_dbm: float = 43.0
    pico_power_dbm: float = 30.0
    antenna_gain_dbi: float = 15.0
    noise_psd_dbm_hz: float = -169.0
    bandwidth_hz: float = 1e7
    macro_backhaul_mbps: float = math.inf
    pico_backhaul_mbps: float = math.inf
    shadowing_std_db: float = 8.0
    candidate_limit: int = 8
    rng_seed: int = 0

    def __post_init__(self):
        self.validate()

    @classmethod
    def desk(cls, **overrides) -> "NetworkConfig":
        """Reduced preset: 8 users per cell and 5 candidate BSs per user."""
        params = dict(users_per_cell=8, candidate_limit=5)
        params.update(overrides)
        return cls(**params)

    @classmethod
    def toy(cls, **overrides) -> "NetworkConfig":
        """Single cell with 4 users; a slot takes well under a second."""
        params = dict(num_cells=1, users_per_cell=4, candidate_limit=4)
        params.update(overrides)
        return cls(**params)

    @property
    def num_bs(self) -> int:
        return self.num_cells * (1 + PICOS_PER_CELL)

    @property
    def num_users(self) -> int:
        return self.num_cells * self.users_per_cell

    @property
    def noise_mw_per_hz(self) -> float:
        return float(dbm_to_mw(self.noise_psd_dbm_hz))

    def backhaul_bps_hz(self, mbps: float) -> float:
        """Convert a backhaul capacity in Mbps to bps/Hz of system bandwidth."""
        return mbps * 1e6 / self.bandwidth_hz

    def validate(self) -> None:
        for name in ("num_cells", "macro_antennas", "pico_antennas", "user_antennas",
                     "candidate_limit"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.users_per_cell < 0:
            raise ValueError(f"users_per_cell must be >= 0, got {self.users_per_cell}")
        if self.num_cells not in (1, 7):
            raise ValueError(f"num_cells must be 1 or 7, got {self.num_cells}")
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if not self.inter_site_distance_km > 0:
            raise ValueError(
                f"inter_site_distance_km must be > 0, got {self.inter_site_distance_km}")
        if self.shadowing_std_db < 0:
            raise ValueError(f"shadowing_std_db must be >= 0, got {self.shadowing_std_db}")
        for name in ("macro_backhaul_mbps", "pico_backhaul_mbps"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.candidate_limit > self.num_bs:
            raise ValueError(
                f"candidate_limit ({self.candidate_limit}) exceeds number of BSs ({self.num_bs})")

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(NetworkConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind in ("int", int):
        return int(raw)
    return float(raw)


def load_config(path, section: str = "network") -> NetworkConfig:
    """Read a :class:`NetworkConfig` from an INI-style ``key = value`` file.

    Only the ``[network]`` section is consulted; unknown keys raise
    ``ValueError`` so typos are not silently ignored.
    """
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section(section):
        return NetworkConfig()
    values = {}
    for key, raw in parser.items(section):
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown [{section}] key: {key}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError:
            raise ValueError(f"[{section}] {key}: cannot parse {raw!r}") from None
    return NetworkConfig(**values)


def dump_config(config: NetworkConfig, path) -> None:
    parser = configparser.ConfigParser()
    parser["network"] = {k: repr(v) if isinstance(v, float) and math.isinf(v) else str(v)
                         for k, v in dataclasses.asdict(config).items()}
    with open(path, "w") as fh:
        parser.write(fh)


@dataclass(frozen=True)
class BaseStation:
    id: int
    tier: str
    position: tuple
    cell: int
    antennas: int
    power_dbm: float
    power_mw_hz: float
    backhaul_bps_hz: float


@dataclass(frozen=True)
class UserTerminal:
    id: int
    position: tuple
    cell: int
    antennas: int


def hex_cell_centers(num_cells: int, isd: float) -> np.ndarray:
    centers = [(0.0, 0.0)]
    if num_cells == 7:
        for i in range(6):
            a = math.radians(60.0 * i)
            centers.append((isd * math.cos(a), isd * math.sin(a)))
    return np.array(centers)


def wraparound_offsets(num_cells: int, isd: float) -> np.ndarray:
    """Translations of the 7-cell cluster onto its six mirror images.

    The first row is the zero shift. A single-cell layout has no mirrors.
    """
    offsets = [(0.0, 0.0)]
    if num_cells == 7:
        # 2*a1 + a2 of the hexagonal lattice, rotated in 60 degree steps
        base = isd * np.array([2.5, math.sqrt(3.0) / 2.0])
        for i in range(6):
            a = math.radians(60.0 * i)
            rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
            offsets.append(tuple(rot @ base))
    return np.array(offsets)


def in_hexagon(points: np.ndarray, center, circumradius: float) -> np.ndarray:
    """Membership test for a hexagon with vertices at 30 + 60 i degrees."""
    p = np.abs(np.atleast_2d(points) - np.asarray(center))
    inradius = circumradius * math.sqrt(3.0) / 2.0
    return (p[:, 0] <= inradius) & (p[:, 0] / math.sqrt(3.0) + p[:, 1] <= circumradius)


@dataclass
class NetworkLayout:
    config: NetworkConfig
    base_stations: list
    users: list
    wraparound_offsets: np.ndarray
    cell_centers: np.ndarray
    bs_positions: np.ndarray = field(repr=False)
    user_positions: np.ndarray = field(repr=False)

    @property
    def num_bs(self) -> int:
        return len(self.base_stations)

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def circumradius(self) -> float:
        return self.config.inter_site_distance_km / math.sqrt(3.0)

    @property
    def tiers(self) -> np.ndarray:
        return np.array([bs.tier for bs in self.base_stations])

    @property
    def is_macro(self) -> np.ndarray:
        return self.tiers == MACRO

    @property
    def bs_antennas(self) -> np.ndarray:
        return np.array([bs.antennas for bs in self.base_stations], dtype=int)

    @property
    def bs_cells(self) -> np.ndarray:
        return np.array([bs.cell for bs in self.base_stations], dtype=int)

    @property
    def user_cells(self) -> np.ndarray:
        return np.array([u.cell for u in self.users], dtype=int)

    @property
    def power_mw_hz(self) -> np.ndarray:
        return np.array([bs.power_mw_hz for bs in self.base_stations])

    @property
    def power_dbm(self) -> np.ndarray:
        return np.array([bs.power_dbm for bs in self.base_stations])

    @property
    def backhaul_bps_hz(self) -> np.ndarray:
        return np.array([bs.backhaul_bps_hz for bs in self.base_stations])

    @property
    def antenna_slices(self) -> list:
        """Column slice of each BS inside the network-wide antenna axis."""
        stops = np.cumsum(self.bs_antennas)
        return [slice(int(s - m), int(s)) for s, m in zip(stops, self.bs_antennas)]

    @property
    def antenna_owner(self) -> np.ndarray:
        """BS index of every transmit antenna, length ``M_t``."""
        return np.repeat(np.arange(self.num_bs), self.bs_antennas)

    def distance_matrix(self) -> np.ndarray:
        """Wraparound distances, shape ``(num_bs, num_users)``, in km."""
        return wrap_distance(self.bs_positions[:, None, :], self.user_positions[None, :, :], self)

    def with_backhaul(self, macro_mbps: float, pico_mbps: float) -> "NetworkLayout":
        """Copy of the layout with new per-tier backhaul budgets."""
        cfg = self.config.replace(macro_backhaul_mbps=macro_mbps, pico_backhaul_mbps=pico_mbps)
        stations = [dataclasses.replace(
            bs, backhaul_bps_hz=cfg.backhaul_bps_hz(macro_mbps if bs.tier == MACRO else pico_mbps))
            for bs in self.base_stations]
        return dataclasses.replace(self, config=cfg, base_stations=stations)


def _drop_users(center, circumradius, count, rng):
    out = np.empty((0, 2))
    inradius = circumradius * math.sqrt(3.0) / 2.0
    while len(out) < count:
        cand = rng.uniform([-inradius, -circumradius], [inradius, circumradius],
                           size=(2 * (count - len(out)) + 4, 2))
        cand = cand[in_hexagon(cand, (0.0, 0.0), circumradius)]
        out = np.vstack([out, cand])
    return out[:count] + np.asarray(center)


def build_layout(config: NetworkConfig, rng=None) -> NetworkLayout:
    """Place BSs and drop users uniformly over every hexagonal cell.

    BS ids run cell by cell: the macro first, then its three picos. Users
    are numbered cell by cell as well. ``rng`` defaults to a generator
    seeded with ``config.rng_seed``.
    """
    config.validate()
    if rng is None:
        rng = np.random.default_rng([config.rng_seed, 0])
    isd = config.inter_site_distance_km
    radius = isd / math.sqrt(3.0)
    centers = hex_cell_centers(config.num_cells, isd)

    stations = []
    for c, center in enumerate(centers):
        power = config.macro_power_dbm
        stations.append(BaseStation(
            id=len(stations), tier=MACRO, position=tuple(center), cell=c,
            antennas=config.macro_antennas, power_dbm=power,
            power_mw_hz=float(dbm_to_mw(dbm_per_hz(power, config.bandwidth_hz))),
            backhaul_bps_hz=config.backhaul_bps_hz(config.macro_backhaul_mbps)))
        for az in PICO_AZIMUTHS_DEG:
            a = math.radians(az)
            pos = center + PICO_RADIUS_FRACTION * radius * np.array([math.cos(a), math.sin(a)])
            power = config.pico_power_dbm
            stations.append(BaseStation(
                id=len(stations), tier=PICO, position=tuple(pos), cell=c,
                antennas=config.pico_antennas, power_dbm=power,
                power_mw_hz=float(dbm_to_mw(dbm_per_hz(power, config.bandwidth_hz))),
                backhaul_bps_hz=config.backhaul_bps_hz(config.pico_backhaul_mbps)))

    users = []
    for c, center in enumerate(centers):
        for pos in _drop_users(center, radius, config.users_per_cell, rng):
            users.append(UserTerminal(id=len(users), position=tuple(pos), cell=c,
                                      antennas=config.user_antennas))

    return NetworkLayout(
        config=config,
        base_stations=stations,
        users=users,
        wraparound_offsets=wraparound_offsets(config.num_cells, isd),
        cell_centers=centers,
        bs_positions=np.array([bs.position for bs in stations]).reshape(-1, 2),
        user_positions=np.array([u.position for u in users]).reshape(-1, 2),
    )


def wrap_distance(a, b, layout: NetworkLayout):
    """Shortest distance between ``a`` and ``b`` over all wraparound images.

    Broadcasts over leading axes; the last axis holds the two coordinates.
    """
    diff = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    shifted = diff[..., None, :] + layout.wraparound_offsets
    return np.sqrt((shifted ** 2).sum(-1)).min(-1)


def signal_strength_dbm(bs: BaseStation, user: UserTerminal, shadow_db: float,
                        layout: NetworkLayout) -> float:
    """Long-term received strength without beamforming gain, in dBm."""
    from .channel import path_loss_db

    d = max(float(wrap_distance(bs.position, user.position, layout)), MIN_DISTANCE_KM)
    return (bs.power_dbm + layout.config.antenna_gain_dbi
            - float(path_loss_db(bs.tier, d)) - shadow_db)


def export_positions_csv(layout: NetworkLayout, path) -> None:
    """Write BS rows (``bs_id,tier,x_km,y_km``) then user rows (``user_id,x_km,y_km``)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bs_id", "tier", "x_km", "y_km"])
        for bs in layout.base_stations:
            w.writerow([bs.id, bs.tier, f"{bs.position[0]:.6f}", f"{bs.position[1]:.6f}"])
        w.writerow(["user_id", "x_km", "y_km"])
        for u in layout.users:
            w.writerow([u.id, f"{u.position[0]:.6f}", f"{u.position[1]:.6f}"])
