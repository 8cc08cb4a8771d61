import math

import pytest

from eventchains import (
    Chain,
    EmptyChainSet,
    EnergyParams,
    SUCCESS,
    chain_energy,
    compute_metrics,
    make_event,
    run_ecc,
    validate_config,
)
from eventchains.metrics import CSV_HEADER, ChainAccumulator, KahanSum


def test_kahan_sum_tracks_small_terms():
    k = KahanSum()
    k.add(1.0)
    for _ in range(10**5):
        k.add(1e-16)
    assert k.value == pytest.approx(1.0 + 1e-11, rel=1e-9)


def test_single_chain_ratio():
    m = validate_config({"n_nodes": 10})
    chain = Chain((make_event(m, SUCCESS, 0), make_event(m, SUCCESS, 320)), prob=1.0)
    rep = compute_metrics(m, [chain])
    assert rep.delivery_ratio == pytest.approx(0.2)
    assert rep.coverage == pytest.approx(1.0)
    assert rep.chain_count == 1


def test_single_node_closed_form_latency():
    m = validate_config({"n_nodes": 1})
    rep = run_ecc(m).report()
    t_sym = m.timing.symbol_duration_s
    expected = sum((20 * i + 320) * t_sym for i in range(8)) / 8
    assert rep.delivery_ratio == pytest.approx(1.0)
    assert rep.latency_mean == pytest.approx(expected, rel=1e-12)


def test_empty_chain_set_rejected(default_n2):
    with pytest.raises(EmptyChainSet):
        compute_metrics(default_n2, [])


def test_latency_pdf_consistency(default_n3):
    result = run_ecc(default_n3, chain_cap=200_000)
    acc = ChainAccumulator()
    for c in result.chains:
        acc.add_chain(default_n3, c)
    # sum over t of P(t) equals sum over chains of p * n_success
    assert acc.pdf_total() == pytest.approx(acc.success_mass(), abs=1e-9)
    rep = acc.finalize(default_n3)
    assert math.fsum(rep.latency_pdf.values()) == pytest.approx(
        rep.coverage * rep.delivery_ratio * default_n3.n_nodes, abs=1e-9)


def test_latency_pdf_support_on_grid(default_n3):
    m = validate_config({"n_nodes": 3, "theta": 1e-4})
    rep = run_ecc(m).report()
    d = m.timing.d_bp
    offset = m.success_len_slots * d
    for t in rep.latency_pdf:
        assert (t - offset) % d == 0 and t >= offset


def test_zero_current_energy(default_n2):
    m = validate_config({"n_nodes": 2, "theta": 1e-3,
                         "energy.tx_ma": 0, "energy.rx_ma": 0,
                         "energy.idle_ma": 0, "energy.off_ma": 0})
    result = run_ecc(m)
    assert all(c.energy == 0.0 for c in result.chains)
    assert result.report().energy_total == 0.0


def test_chain_energy_recompute_matches_engine(default_n2):
    m = validate_config({"n_nodes": 2, "theta": 1e-3})
    result = run_ecc(m)
    for c in result.chains[:20]:
        assert chain_energy(m, c) == pytest.approx(c.energy, rel=1e-12)


def test_chain_energy_explicit_params_override(default_n2):
    chain = Chain((make_event(default_n2, SUCCESS, 0),), prob=1.0)
    base = chain_energy(default_n2, chain)
    doubled = chain_energy(default_n2, chain,
                           EnergyParams(tx_ma=2 * 17.4, rx_ma=2 * 18.8,
                                        idle_ma=2 * 0.426, off_ma=0.0, volt=3.0))
    assert doubled == pytest.approx(2 * base, rel=1e-12)


def test_report_serialization_shapes(default_n3):
    m = validate_config({"n_nodes": 3, "theta": 1e-3})
    rep = run_ecc(m).report()
    d = rep.as_dict()
    assert set(d) == {"coverage", "chains", "delivery_ratio_pct", "latency_ms",
                      "energy_mj", "time_s"}
    row = rep.csv_row(m)
    assert len(row) == len(CSV_HEADER)
    assert row[0] == 3 and row[1] == 1e-3


def test_accumulator_merge_equivalence(default_n3):
    m = validate_config({"n_nodes": 3, "theta": 1e-4})
    chains = run_ecc(m).chains
    one = ChainAccumulator()
    for c in chains:
        one.add_chain(m, c)
    left, right = ChainAccumulator(), ChainAccumulator()
    for c in chains[: len(chains) // 2]:
        left.add_chain(m, c)
    for c in chains[len(chains) // 2:]:
        right.add_chain(m, c)
    left.merge(right)
    assert left.coverage == pytest.approx(one.coverage, abs=1e-15)
    assert left.pdf_total() == pytest.approx(one.pdf_total(), abs=1e-15)
    assert left.count == one.count
