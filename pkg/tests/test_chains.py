import math

import pytest

from eventchains import FAILURE, SUCCESS, Chain, NodeComposition, make_event, run_ecc, validate_config


def align_up(x, d):
    return math.ceil(x / d) * d


def test_success_finish_includes_ack_exchange(default_n2):
    # CCA + TAT + TX + TAT + ACK, rounded up to the slot grid
    e = make_event(default_n2, SUCCESS, 0)
    assert e.finish == align_up(8 + 12 + 266 + 12 + 22, 20) == 320


def test_failure_finish_excludes_ack(default_n2):
    d = default_n2.timing.d_bp
    e = make_event(default_n2, FAILURE, 2 * d)
    assert e.finish == 2 * d + align_up(8 + 12 + 266, 20) == 2 * d + 300


def test_grid_aligned_payload_needs_no_padding():
    # busy period ending exactly on a boundary keeps that boundary as finish
    m = validate_config({"n_nodes": 2, "d_tx": 260})
    e = make_event(m, FAILURE, 0)
    assert e.finish == 20 + 260
    for kind in (SUCCESS, FAILURE):
        ev = make_event(m, kind, 0)
        assert ev.finish % m.timing.d_bp == 0


def test_make_event_monotone(default_n2):
    d = default_n2.timing.d_bp
    for kind in (SUCCESS, FAILURE):
        evs = [make_event(default_n2, kind, s * d) for s in range(12)]
        lens = {e.finish - e.start for e in evs}
        assert len(lens) == 1  # duration is a constant per kind
        assert all(a.finish < b.finish for a, b in zip(evs, evs[1:]))


def test_make_event_rejects_off_grid(default_n2):
    with pytest.raises(ValueError):
        make_event(default_n2, SUCCESS, 7)
    with pytest.raises(ValueError):
        make_event(default_n2, SUCCESS, -20)
    with pytest.raises(ValueError):
        make_event(default_n2, "X", 0)


def test_chain_event_intervals_disjoint(default_n2):
    result = run_ecc(default_n2, chain_cap=100_000)
    d = default_n2.timing.d_bp
    for chain in result.chains:
        for a, b in zip(chain.events, chain.events[1:]):
            assert b.start >= a.finish
            assert (a.start + d, a.finish) < (b.start + d, b.finish)


def test_chain_counts_and_serialization(default_n2):
    c = Chain((make_event(default_n2, FAILURE, 0), make_event(default_n2, SUCCESS, 340)),
              prob=0.015625)
    assert c.n_success == 1
    assert c.signature() == (("F", 0), ("S", 340))
    assert c.to_line() == "p=0.015625 [F@0 S@340]"


def test_event_validation():
    with pytest.raises(ValueError):
        from eventchains.chains import Event
        Event(SUCCESS, 40, 40)


def test_node_composition_total():
    assert NodeComposition(1, 2, 3).total() == 6
