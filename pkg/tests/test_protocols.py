from __future__ import annotations

import itertools

import pytest

from seqqec.codes import BASIS_LABELS
from seqqec.ec import initial_state, run_protocol
from seqqec.ft import check_single_faults_exact, check_single_faults_frames
from seqqec.metrics import bloch_average_error, logical_error_bounds
from seqqec.noise import default_params, noiseless_params
from seqqec.protocols import Surface9Protocol, get_protocol
from seqqec.surface_decoder import (format_table, load_round3_table, parse_table,
                                    streaming_table)

EXPECTED_COUNTS = {"513": (55, 100), "steane": (96, 276), "surface9": (144, 144)}


@pytest.mark.parametrize("name", sorted(EXPECTED_COUNTS))
def test_operation_counts(name):
    assert get_protocol(name).op_count_bounds() == EXPECTED_COUNTS[name]


@pytest.mark.parametrize("name", sorted(EXPECTED_COUNTS))
def test_zero_noise_is_identity(name):
    assert bloch_average_error(name, noiseless_params())["mean"] < 1e-10


@pytest.mark.parametrize("name", sorted(EXPECTED_COUNTS))
def test_single_faults_frames(name):
    rep = check_single_faults_frames(name)
    assert rep.ok, [o[0].describe() for o in rep.offenders[:5]]


def test_single_faults_exact_513():
    rep = check_single_faults_exact("513", labels=("0", "+", "+i"))
    assert rep.ok and rep.n_faults > 1000


def test_streaming_surface_decoder_is_also_fault_tolerant(monkeypatch):
    import seqqec.ft as ft

    proto = Surface9Protocol(decoder="streaming")
    monkeypatch.setattr(ft, "get_protocol", lambda name: proto)
    assert ft.check_single_faults_frames("surface9").ok


def test_flag_tables_have_no_conflicts():
    for name in ("513", "steane"):
        proto = get_protocol(name)
        assert proto.flag_table
        assert proto.flag_table_conflicts == {}
        assert proto.flag_table_text().startswith("#")


def test_round3_table_round_trip():
    table = load_round3_table()
    again = parse_table(format_table(table))
    assert again == table
    for g, letter in ((0, "X"), (1, "Z")):
        for corr in table[g].values():
            assert set(corr) <= {"I", letter}


def test_round3_table_rejects_partial_files():
    text = format_table(streaming_table()).splitlines()
    with pytest.raises(ValueError):
        parse_table("\n".join(text[:-1]))


def test_streaming_table_is_the_repeat_rule():
    proto = Surface9Protocol(decoder="streaming")
    table = streaming_table()
    for ref, syn in itertools.product(itertools.product((0, 1), repeat=4), repeat=2):
        corr = table[0][(ref, syn)]
        if syn == ref and any(syn):
            assert corr == proto.code.correction(syn + (0,) * 4).letters
        else:
            assert set(corr) == {"I"}


def test_table_decoder_beats_streaming_rule():
    params = default_params(1e-3)
    eps = {}
    for dec in ("streaming", "table"):
        proto = Surface9Protocol(decoder=dec)
        tot = 0.0
        for label in ("0", "+", "+i"):
            res = run_protocol(proto, initial_state(proto, label), params)
            tot += logical_error_bounds(res.outcomes, label, proto.code).upper
        eps[dec] = tot / 3
    assert eps["table"] < eps["streaming"]


def test_dense_and_stabilizer_backends_agree():
    params = default_params(2e-3, resting_mode="scaled_by_p_tqg", readout_mode="asymmetric")
    for label in ("0", "+i"):
        vals = []
        for backend in ("dense", "stabilizer"):
            r = bloch_average_error("513", params, backend=backend, labels=(label,))
            vals.append(r["mean"])
        assert vals[0] == pytest.approx(vals[1], rel=1e-8, abs=1e-15)


def test_opposite_labels_fail_identically():
    r = bloch_average_error("steane", default_params(2e-3), labels=BASIS_LABELS)
    per = r["per_state"]
    for a, b in (("0", "1"), ("+", "-"), ("+i", "-i")):
        assert per[a] == pytest.approx(per[b], rel=1e-10)
