"""Configuration validation and derived model quantities.

All durations are integer symbol counts on the 802.15.4 2.4 GHz PHY
(62.5 ksymbol/s, 16 us per symbol by default).  Validation pins the
integer slot grid: every CCA instant produced downstream is a multiple
of the backoff period d_bp, which is what makes exact set arithmetic
possible in the rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import GridMisaligned, MissingKey, OutOfRange

# 802.15.4 2.4 GHz defaults (symbols); chosen so d_cca + d_tat == 1 slot.
DEFAULTS = {
    "n_nodes": None,  # required
    "theta": 0.0,
    "workers": 1,
    "chain_cap": 50_000_000,
    "mac_min_be": 3,
    "mac_max_be": 4,
    "mac_max_csma_backoffs": 2,
    "mac_max_frame_retries": 1,
    "d_bp": 20,
    "d_cca": 8,
    "d_tat": 12,
    "d_tx": 266,  # maximum-size packet: 133 bytes at 2 symbols/byte
    "d_ack": 22,  # 11-byte acknowledgement frame
    "symbol_duration_s": 16e-6,
    "energy.tx_ma": 17.4,  # CC2420 transmit at 0 dBm
    "energy.rx_ma": 18.8,  # CC2420 receive/listen
    "energy.idle_ma": 0.426,  # CC2420 idle, used during backoff
    "energy.off_ma": 0.0,
    "energy.volt": 3.0,
}

_INT_KEYS = {
    "n_nodes", "workers", "chain_cap",
    "mac_min_be", "mac_max_be", "mac_max_csma_backoffs", "mac_max_frame_retries",
    "d_bp", "d_cca", "d_tat", "d_tx", "d_ack",
}
_FLOAT_KEYS = {
    "theta", "symbol_duration_s",
    "energy.tx_ma", "energy.rx_ma", "energy.idle_ma", "energy.off_ma", "energy.volt",
}


@dataclass(frozen=True)
class MacParams:
    """CSMA/CA MAC-layer parameters."""

    mac_min_be: int
    mac_max_be: int
    mac_max_csma_backoffs: int
    mac_max_frame_retries: int


@dataclass(frozen=True)
class TimingParams:
    """Durations in symbols, plus the symbol length for unit conversion.

    d_diff is the gap between the end of a packet transmission and the
    next slot boundary; d_to is the acknowledgement timeout, fixed at
    d_diff + 2*d_bp so that retry CCAs land exactly on
    [finish + 2*d_bp, finish + (2 + W_1 - 1)*d_bp].
    """

    d_bp: int
    d_cca: int
    d_tat: int
    d_tx: int
    d_ack: int
    symbol_duration_s: float
    d_diff: int = field(default=0)
    d_to: int = field(default=0)


@dataclass(frozen=True)
class EnergyParams:
    """Radio current draws (mA) and supply voltage (V)."""

    tx_ma: float
    rx_ma: float
    idle_ma: float
    off_ma: float
    volt: float


@dataclass(frozen=True)
class DerivedModel:
    """Validated configuration plus every derived quantity the engine needs.

    Immutable after validation; safe to share across worker processes.
    Slot-level fields express durations in backoff periods; the slot
    grid is exact because validation enforces (d_cca + d_tat) % d_bp == 0.
    """

    mac: MacParams
    timing: TimingParams
    energy: EnergyParams
    n_nodes: int
    theta: float
    workers: int
    chain_cap: int
    # derived (symbols)
    w: tuple  # backoff window sizes W_1..W_Bmax
    b_max: int
    t_max_attempts: int
    d_rtx: int
    # derived (slots)
    g_slots: int  # (d_cca + d_tat) / d_bp
    success_len_slots: int  # CCA+TAT+TX+TAT+ACK rounded up to the grid
    fail_len_slots: int  # CCA+TAT+TX rounded up to the grid
    rtx_slots: int  # offset from a failed CCA start to the earliest retry CCA
    m_w_success: int  # post-event window (slots) when the last event succeeded
    m_w_fail: int  # post-event window (slots) when the last event collided

    @property
    def w1(self):
        return self.w[0]

    def slots_to_symbols(self, slots):
        return slots * self.timing.d_bp

    def slots_to_seconds(self, slots):
        return slots * self.timing.d_bp * self.timing.symbol_duration_s

    def m_w(self, last_kind):
        """Post-event search window in slots for a given last-event kind."""
        return self.m_w_success if last_kind == "S" else self.m_w_fail

    def event_len_slots(self, kind):
        return self.success_len_slots if kind == "S" else self.fail_len_slots


def _coerce(key, value):
    if key in _INT_KEYS:
        try:
            iv = int(str(value))
        except ValueError:
            raise OutOfRange(key, value, "must be an integer") from None
        return iv
    if key in _FLOAT_KEYS:
        try:
            return float(str(value))
        except ValueError:
            raise OutOfRange(key, value, "must be a number") from None
    raise OutOfRange(key, value, "unknown configuration key")


def _require(cfg, key, low=None, high=None):
    v = cfg[key]
    if low is not None and v < low:
        raise OutOfRange(key, v, f"must be >= {low}")
    if high is not None and v > high:
        raise OutOfRange(key, v, f"must be <= {high}")
    return v


def validate_config(raw_config) -> DerivedModel:
    """Validate a flat key/value mapping and derive the full model.

    Unspecified keys take the package defaults; n_nodes is mandatory.
    Raises MissingKey, OutOfRange or GridMisaligned with the offending key.
    """
    cfg = dict(DEFAULTS)
    for key, value in dict(raw_config).items():
        if key not in DEFAULTS:
            raise OutOfRange(key, value, "unknown configuration key")
        cfg[key] = _coerce(key, value)
    if cfg["n_nodes"] is None:
        raise MissingKey("n_nodes")

    n = _require(cfg, "n_nodes", low=1)
    theta = cfg["theta"]
    if not (0.0 <= theta < 1.0):
        raise OutOfRange("theta", theta, "must lie in [0, 1)")
    workers = _require(cfg, "workers", low=1)
    chain_cap = _require(cfg, "chain_cap", low=1)

    min_be = _require(cfg, "mac_min_be", low=0, high=8)
    max_be = _require(cfg, "mac_max_be", low=0, high=8)
    if min_be > max_be:
        raise OutOfRange("mac_min_be", min_be, "must be <= mac_max_be")
    backoffs = _require(cfg, "mac_max_csma_backoffs", low=0)
    retries = _require(cfg, "mac_max_frame_retries", low=0)

    d_bp = _require(cfg, "d_bp", low=1)
    d_cca = _require(cfg, "d_cca", low=1)
    d_tat = _require(cfg, "d_tat", low=0)
    d_tx = _require(cfg, "d_tx", low=1)
    d_ack = _require(cfg, "d_ack", low=0)
    sym_s = cfg["symbol_duration_s"]
    if sym_s <= 0:
        raise OutOfRange("symbol_duration_s", sym_s, "must be > 0")
    if (d_cca + d_tat) % d_bp != 0:
        raise GridMisaligned(d_cca, d_tat, d_bp)

    for ek in ("energy.tx_ma", "energy.rx_ma", "energy.idle_ma", "energy.off_ma", "energy.volt"):
        if cfg[ek] < 0:
            raise OutOfRange(ek, cfg[ek], "must be >= 0")

    b_max = backoffs + 1
    t_max = retries + 1
    w = tuple(2 ** min(min_be + i, max_be) for i in range(b_max))

    d_diff = (d_bp - (d_tx % d_bp)) % d_bp  # zero when d_tx is grid-aligned
    d_to = d_diff + 2 * d_bp
    d_rtx = d_cca + d_tat + d_tx + d_to

    g = (d_cca + d_tat) // d_bp
    success_len = g + math.ceil((d_tx + d_tat + d_ack) / d_bp)
    fail_len = g + math.ceil(d_tx / d_bp)
    rtx_slots = fail_len + 2
    assert rtx_slots * d_bp == d_rtx, "retry landing must stay on the slot grid"
    m_w_s = g + w[-1] - 2  # deferral from the last busy slot, max backoff draw
    m_w_f = max(m_w_s, 2 + w[0] - 1)

    return DerivedModel(
        mac=MacParams(min_be, max_be, backoffs, retries),
        timing=TimingParams(d_bp, d_cca, d_tat, d_tx, d_ack, sym_s, d_diff, d_to),
        energy=EnergyParams(
            cfg["energy.tx_ma"], cfg["energy.rx_ma"], cfg["energy.idle_ma"],
            cfg["energy.off_ma"], cfg["energy.volt"],
        ),
        n_nodes=n, theta=theta, workers=workers, chain_cap=chain_cap,
        w=w, b_max=b_max, t_max_attempts=t_max, d_rtx=d_rtx,
        g_slots=g, success_len_slots=success_len, fail_len_slots=fail_len,
        rtx_slots=rtx_slots, m_w_success=m_w_s, m_w_fail=m_w_f,
    )


def parse_config_file(path) -> dict:
    """Read a flat key=value configuration file ('#' starts a comment)."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise OutOfRange(f"line {lineno}", line, "expected key=value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
