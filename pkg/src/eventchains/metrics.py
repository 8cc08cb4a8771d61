"""Performance metrics over finalized chain sets.

Coverage is the probability mass the enumeration captured; delivery
ratio, latency PDF/mean and energy are coverage-normalized expectations
over the finalized chains.  A delivered packet's latency is the finish
time of its success event.  All reductions use compensated summation so
exhaustive runs (millions of chains) stay accurate to ~1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .chains import SUCCESS
from .errors import EmptyChainSet
from .params import DerivedModel, EnergyParams


class KahanSum:
    """Compensated streaming sum."""

    __slots__ = ("s", "c")

    def __init__(self, s=0.0, c=0.0):
        self.s = s
        self.c = c

    def add(self, x):
        y = x - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t

    @property
    def value(self):
        return self.s


class ChainAccumulator:
    """Streaming reduction of finalized chains into metric numerators.

    Mergeable, so worker processes can reduce their own subtrees and the
    parent combines them in deterministic task order.
    """

    def __init__(self):
        self.cov = KahanSum()
        self.r_num = KahanSum()  # sum of p * n_success
        self.e_num = KahanSum()  # sum of p * chain energy
        self.pdf = {}  # success finish slot -> [sum, compensation]
        self.count = 0

    def add_slots(self, model, slot_events, prob, energy):
        self.cov.add(prob)
        self.e_num.add(prob * energy)
        n_s = 0
        for kind, s in slot_events:
            if kind == SUCCESS:
                n_s += 1
                f = s + model.success_len_slots
                cell = self.pdf.get(f)
                if cell is None:
                    cell = self.pdf[f] = [0.0, 0.0]
                y = prob - cell[1]
                t = cell[0] + y
                cell[1] = (t - cell[0]) - y
                cell[0] = t
        self.r_num.add(prob * n_s)
        self.count += 1

    def add_chain(self, model, chain):
        d_bp = model.timing.d_bp
        self.add_slots(model, [(e.kind, e.start // d_bp) for e in chain.events],
                       chain.prob, chain.energy)

    def merge(self, other):
        self.cov.add(other.cov.value)
        self.r_num.add(other.r_num.value)
        self.e_num.add(other.e_num.value)
        for slot, cell in other.pdf.items():
            mine = self.pdf.get(slot)
            if mine is None:
                self.pdf[slot] = [cell[0], 0.0]
            else:
                y = cell[0] - mine[1]
                t = mine[0] + y
                mine[1] = (t - mine[0]) - y
                mine[0] = t
        self.count += other.count

    @property
    def coverage(self):
        return self.cov.value

    def pdf_total(self):
        total = KahanSum()
        for cell in self.pdf.values():
            total.add(cell[0])
        return total.value

    def success_mass(self):
        """Independent form of the PDF total: sum of p * n_success."""
        return self.r_num.value

    def finalize(self, model: DerivedModel, wall_time=0.0) -> "MetricsReport":
        if self.count == 0:
            raise EmptyChainSet("no finalized chains to reduce")
        cov = self.cov.value
        d_bp = model.timing.d_bp
        ratio = self.r_num.value / (cov * model.n_nodes)
        pdf = {slot * d_bp: cell[0] for slot, cell in sorted(self.pdf.items())}
        num = KahanSum()
        den = KahanSum()
        sym_s = model.timing.symbol_duration_s
        for t_sym, p in pdf.items():
            num.add(t_sym * sym_s * p)
            den.add(p)
        mean_latency = num.value / den.value if den.value > 0 else 0.0
        return MetricsReport(
            coverage=cov,
            delivery_ratio=ratio,
            latency_pdf=pdf,
            latency_mean=mean_latency,
            energy_total=self.e_num.value / cov,
            chain_count=self.count,
            wall_time=wall_time,
        )


@dataclass
class MetricsReport:
    coverage: float
    delivery_ratio: float  # fraction in [0, 1]
    latency_pdf: dict  # symbols -> probability mass
    latency_mean: float  # seconds
    energy_total: float  # joules
    chain_count: int
    wall_time: float  # seconds

    def as_dict(self, include_pdf=False):
        out = {
            "coverage": self.coverage,
            "chains": self.chain_count,
            "delivery_ratio_pct": 100.0 * self.delivery_ratio,
            "latency_ms": 1e3 * self.latency_mean,
            "energy_mj": 1e3 * self.energy_total,
            "time_s": self.wall_time,
        }
        if include_pdf:
            out["latency_pdf"] = {str(k): v for k, v in self.latency_pdf.items()}
        return out

    def csv_row(self, model):
        return [model.n_nodes, model.theta, f"{self.coverage:.6f}", self.chain_count,
                f"{100.0 * self.delivery_ratio:.4f}", f"{1e3 * self.latency_mean:.4f}",
                f"{1e3 * self.energy_total:.4f}", f"{self.wall_time:.3f}"]


CSV_HEADER = ["n", "theta", "coverage", "chains", "r_pct", "l_ms", "e_mj", "time_s"]


def compute_metrics(model: DerivedModel, chains, wall_time=0.0) -> MetricsReport:
    """Reduce an iterable of finalized chains into a MetricsReport."""
    acc = ChainAccumulator()
    for chain in chains:
        acc.add_chain(model, chain)
    if acc.count == 0:
        raise EmptyChainSet("no finalized chains to reduce")
    return acc.finalize(model, wall_time)


def chain_energy_slots(model: DerivedModel, slot_events, cca_mass) -> float:
    """Average network energy (joules) while the chain's events unfold.

    Accounting (the channel-access cost model used throughout):
      * each success charges its transmitter CCA+TAT at rx, the packet
        at tx, and TAT+ACK at rx;
      * each collision burst charges CCA+TAT at rx, one packet time at
        tx and the ACK timeout at rx (the overlapping transmissions
        occupy the same channel time);
      * residual nodes are charged their expected deferral CCAs at rx
        (cca_mass per node) and idle/backoff current until the chain
        ends; success transmitters idle until their event starts.
    """
    t = model.timing
    e = model.energy
    n_s = sum(1 for k, _ in slot_events if k == SUCCESS)
    n_f = len(slot_events) - n_s
    n_r = model.n_nodes - n_s
    last_kind, last_start = slot_events[-1]
    f_m_sym = (last_start + model.event_len_slots(last_kind)) * t.d_bp

    tx_sym = (n_s + n_f) * t.d_tx
    rx_sym = (n_s * (t.d_cca + 2 * t.d_tat + t.d_ack)
              + n_f * (t.d_cca + t.d_tat + t.d_to)
              + n_r * cca_mass * t.d_cca)
    idle_sym = n_r * f_m_sym + sum(s * t.d_bp for k, s in slot_events if k == SUCCESS)

    charge_ma_sym = e.tx_ma * tx_sym + e.rx_ma * rx_sym + e.idle_ma * idle_sym
    return e.volt * charge_ma_sym * 1e-3 * t.symbol_duration_s


def chain_energy(model: DerivedModel, chain, energy_params: EnergyParams = None,
                 cca_mass=None) -> float:
    """Energy for a finalized chain; recomputes the CCA table if needed."""
    if energy_params is not None and energy_params != model.energy:
        from dataclasses import replace
        model = replace(model, energy=energy_params)
    if cca_mass is None:
        from .engine import ChainExaminer, _slot_events
        res = ChainExaminer(model).examine(_slot_events(model, chain))
        cca_mass = res.cca_mass
    d_bp = model.timing.d_bp
    return chain_energy_slots(model, [(e.kind, e.start // d_bp) for e in chain.events],
                              cca_mass)
