"""The stabilizer-mixture backend against dense density matrices."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqqec.paulis import PauliString
from seqqec.stabilizer_state import StabilizerMixture, clear_caches
from seqqec.state import basis_state, partial_trace

N = 3

step = st.one_of(
    st.tuples(st.just("g1"), st.sampled_from(["H", "S", "SDG", "X", "Y", "Z"]), st.integers(0, N - 1)),
    st.tuples(st.just("g2"), st.sampled_from(["CNOT", "CZ"]), st.permutations(range(N))),
    st.tuples(st.just("dep1"), st.floats(0, 0.5), st.integers(0, N - 1)),
    st.tuples(st.just("dep2"), st.floats(0, 0.5), st.permutations(range(N))),
    st.tuples(st.just("deph"), st.floats(0, 1), st.integers(0, N - 1)),
    st.tuples(st.just("pauli"), st.text(alphabet="IXYZ", min_size=N, max_size=N), st.just(0)),
    st.tuples(st.just("meas"), st.integers(0, 1), st.integers(0, N - 1)),
)


def _close(s, d):
    assert np.allclose(s.to_density_matrix().matrix, d.matrix, atol=1e-10)


@given(st.lists(step, max_size=25))
def test_random_circuits_match_dense(steps):
    s, d = StabilizerMixture.zero_state(N), basis_state(N, "0" * N)
    for kind, a, b in steps:
        if kind == "g1":
            s, d = s.gate(a, [b]), d.gate(a, [b])
        elif kind == "g2":
            s, d = s.gate(a, list(b[:2])), d.gate(a, list(b[:2]))
        elif kind == "dep1":
            s, d = s.depolarize([b], a), d.depolarize([b], a)
        elif kind == "dep2":
            s, d = s.depolarize(list(b[:2]), a), d.depolarize(list(b[:2]), a)
        elif kind == "deph":
            s, d = s.dephase([b], a), d.dephase([b], a)
        elif kind == "pauli":
            s, d = s.apply_pauli(PauliString(a)), d.apply_pauli(PauliString(a))
        else:
            try:
                sp, sm = s.measure(b)
            except ValueError:  # random ideal outcome: outside this backend's scope
                continue
            dp, dm = d.measure(b)
            _close(sp, dp)
            _close(sm, dm)
            s, d = (sp, dp) if a == 0 else (sm, dm)
        _close(s, d)
    _close(s.canonical(), d)


def test_random_outcome_measurement_is_rejected():
    with pytest.raises(ValueError):
        StabilizerMixture.zero_state(1).gate("H", [0]).measure(0)


def test_reset_and_trace_out_match_dense():
    s = StabilizerMixture.zero_state(3).gate("H", [0]).gate("CNOT", [0, 1]).depolarize([1, 2], 0.2)
    d = basis_state(3, "000").gate("H", [0]).gate("CNOT", [0, 1]).depolarize([1, 2], 0.2)
    sp, sm = s.measure(2)
    dp, dm = d.measure(2)
    _close(sp, dp)
    _close(sm, dm)
    s, d = sp.add(sm).reset(2, 0.1), dp.add(dm).reset(2, 0.1)
    _close(s, d)
    _close(s.trace_out([2]), partial_trace(d, [0, 1]))


def test_canonical_form_merges_equal_states():
    a = StabilizerMixture.zero_state(2).gate("H", [0]).gate("CNOT", [0, 1])
    b = StabilizerMixture.zero_state(2).gate("H", [1]).gate("CNOT", [1, 0])
    assert a.canonical().merge_key() == b.canonical().merge_key()


def test_batched_columns_evolve_independently():
    base = StabilizerMixture.zero_state(2).gate("H", [0])
    w = np.stack([base.w, 0.5 * base.apply_pauli(PauliString("ZI")).w], axis=1)
    batch = StabilizerMixture(base.xs, base.zs, base.rs, w)
    out = batch.depolarize([0, 1], 0.1).gate("CNOT", [0, 1])
    plus, minus = out.gate("CNOT", [0, 1]).measure(1)
    for j, ref in enumerate([base, base.apply_pauli(PauliString("ZI")).scale(0.5)]):
        rp, rm = ref.depolarize([0, 1], 0.1).gate("CNOT", [0, 1]).gate("CNOT", [0, 1]).measure(1)
        _close(plus.column(j), rp.to_density_matrix())
        _close(minus.column(j), rm.to_density_matrix())
    assert batch.trace == pytest.approx(1.0)
    assert np.allclose(batch.column_traces(), [1.0, 0.5])


def test_batched_weights_refuse_dense_conversion():
    base = StabilizerMixture.zero_state(1)
    batch = StabilizerMixture(base.xs, base.zs, base.rs, np.stack([base.w, base.w], axis=1))
    with pytest.raises(ValueError):
        batch.to_density_matrix()


def test_cache_clear_keeps_results():
    s = StabilizerMixture.zero_state(3).gate("H", [0]).gate("CNOT", [0, 2])
    s = s.depolarize([1], 0.2)
    before = s.measure(1)[1].canonical().w.copy()
    clear_caches()
    assert np.allclose(s.measure(1)[1].canonical().w, before)


def test_contains_reports_sign():
    s = StabilizerMixture.zero_state(2).gate("X", [1])
    assert s.contains(PauliString("ZI")) == 1
    assert s.contains(PauliString("IZ")) == -1
    assert s.contains(PauliString("XI")) == 0
