import dataclasses

import pytest

from eventchains import GridMisaligned, MissingKey, OutOfRange, validate_config
from eventchains.params import parse_config_file


def test_default_mac_derivation():
    # macMinBE=3, macMaxBE=4, 2 backoffs, 1 retry
    m = validate_config({"n_nodes": 10})
    assert m.w == (8, 16, 16)
    assert m.b_max == 3
    assert m.t_max_attempts == 2


def test_degenerate_single_window():
    m = validate_config({"n_nodes": 1, "mac_min_be": 0, "mac_max_be": 0,
                         "mac_max_csma_backoffs": 0, "mac_max_frame_retries": 0})
    assert m.w == (1,)
    assert m.b_max == 1
    assert m.t_max_attempts == 1


def test_cca_turnaround_exactly_one_slot_accepted():
    m = validate_config({"n_nodes": 2, "d_cca": 8, "d_tat": 12, "d_bp": 20})
    assert m.g_slots == 1


def test_grid_misaligned_rejected():
    with pytest.raises(GridMisaligned):
        validate_config({"n_nodes": 2, "d_cca": 8, "d_tat": 11})


def test_missing_nodes_key():
    with pytest.raises(MissingKey):
        validate_config({})


@pytest.mark.parametrize("overrides", [
    {"mac_min_be": 5, "mac_max_be": 3},
    {"mac_min_be": -1},
    {"mac_max_be": 9},
    {"mac_max_csma_backoffs": -1},
    {"theta": 1.0},
    {"theta": -0.1},
    {"workers": 0},
    {"d_bp": 0},
    {"d_tx": 0},
    {"symbol_duration_s": 0},
    {"energy.volt": -1},
    {"nonsense_key": 1},
    {"n_nodes": 0},
])
def test_out_of_range_rejected(overrides):
    cfg = {"n_nodes": 2}
    cfg.update(overrides)
    with pytest.raises(OutOfRange):
        validate_config(cfg)


def test_window_growth_capped():
    for min_be in range(0, 5):
        for max_be in range(min_be, 9):
            m = validate_config({"n_nodes": 1, "mac_min_be": min_be,
                                 "mac_max_be": max_be, "mac_max_csma_backoffs": 4})
            assert all(w2 >= w1 for w1, w2 in zip(m.w, m.w[1:]))
            assert m.w[-1] <= 2 ** max_be
            assert m.w[0] == 2 ** min_be


def test_timeout_pins_retry_window_to_slot_grid():
    # d_rtx must equal a whole number of slots for any packet size
    for d_tx in (1, 19, 20, 133, 266, 267):
        m = validate_config({"n_nodes": 2, "d_tx": d_tx})
        assert m.d_rtx == m.rtx_slots * m.timing.d_bp
        assert m.timing.d_to == m.timing.d_diff + 2 * m.timing.d_bp
        assert (m.timing.d_tx + m.timing.d_diff) % m.timing.d_bp == 0


def test_default_timing_constants():
    m = validate_config({"n_nodes": 2})
    t = m.timing
    assert (t.d_bp, t.d_cca, t.d_tat, t.d_tx, t.d_ack) == (20, 8, 12, 266, 22)
    assert t.d_diff == 14
    assert t.d_to == 54
    assert m.d_rtx == 340
    assert m.success_len_slots == 16
    assert m.fail_len_slots == 15
    assert m.m_w_success == 15 and m.m_w_fail == 15


def test_model_is_immutable():
    m = validate_config({"n_nodes": 2})
    with pytest.raises(dataclasses.FrozenInstanceError):
        m.n_nodes = 3


def test_string_values_coerced():
    m = validate_config({"n_nodes": "4", "theta": "1e-5", "d_tx": "100"})
    assert m.n_nodes == 4 and m.theta == 1e-5 and m.timing.d_tx == 100
    with pytest.raises(OutOfRange):
        validate_config({"n_nodes": "four"})


def test_parse_config_file(tmp_path):
    path = tmp_path / "net.cfg"
    path.write_text(
        "# comment line\n"
        "n_nodes = 7\n"
        "theta=1e-6   # inline comment\n"
        "energy.tx_ma = 20.0\n"
        "\n")
    raw = parse_config_file(path)
    assert raw == {"n_nodes": "7", "theta": "1e-6", "energy.tx_ma": "20.0"}
    m = validate_config(raw)
    assert m.n_nodes == 7 and m.theta == 1e-6 and m.energy.tx_ma == 20.0


def test_parse_config_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("just words\n")
    with pytest.raises(OutOfRange):
        parse_config_file(path)
