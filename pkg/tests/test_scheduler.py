from __future__ import annotations

import pytest

from seqqec.noise import default_params, noiseless_params
from seqqec.paulis import PauliString
from seqqec.scheduler import (ExecutionContext, ScheduledOp, count_operations, execute_op,
                              execute_sequence, init, inject, readout, resting_qubits, sqg,
                              tqg, trace_lines)
from seqqec.state import basis_state, expectation


def test_op_validation():
    with pytest.raises(ValueError):
        ScheduledOp("tqg", (1, 1), gate="CNOT")
    with pytest.raises(ValueError):
        ScheduledOp("sqg", (0, 1), gate="H")
    with pytest.raises(ValueError):
        ScheduledOp("teleport", (0,))


def test_count_ignores_injections():
    ops = [init(2), sqg("H", 2), tqg("CNOT", 2, 0), readout(2), inject(PauliString("XII"))]
    c = count_operations(ops)
    assert c == {"sqg": 1, "tqg": 1, "init": 1, "readout": 1, "total": 4}


def test_active_set_and_resting():
    params = default_params(1e-3, resting_mode="scaled_by_p_tqg")
    ctx = ExecutionContext.start(3, params, [0, 1])
    assert resting_qubits(tqg("CNOT", 0, 1), ctx) == ()
    ctx = ctx.after(init(2))
    assert resting_qubits(sqg("H", 2), ctx) == (0, 1)
    ctx = ctx.after(readout(2))
    assert 2 not in ctx.active
    assert ctx.total_ops == 2


def test_resting_dephases_idle_qubits():
    params = default_params(1e-2, resting_mode="scaled_by_p_tqg")
    rho = basis_state(2, "00").gate("H", [1])
    ctx = ExecutionContext.start(2, params, [0, 1])
    (out,), _ = execute_op(rho, sqg("X", 0), ctx)
    assert expectation(out, PauliString("IX")) < 1 - 1e-3


def test_noiseless_sequence_is_deterministic():
    ops = [init(2), tqg("CNOT", 0, 2), tqg("CNOT", 1, 2), readout(2, label="zz")]
    rho = basis_state(3, "100")
    tree = execute_sequence(rho, ops, ExecutionContext.start(3, noiseless_params(), [0, 1]))
    probs = {leaf.record: leaf.state.trace for leaf in tree.leaves}
    assert probs[(("zz", 1),)] == pytest.approx(1)
    assert probs[(("zz", 0),)] == pytest.approx(0)
    assert tree.total_trace == pytest.approx(1)


def test_pruning_accounts_mass():
    params = default_params(3e-2)
    ops = [init(1), tqg("CNOT", 0, 1), readout(1)]
    ctx = ExecutionContext.start(2, params, [0])
    tree = execute_sequence(basis_state(2, "00"), ops, ctx, prune_threshold=0.1)
    assert tree.total_trace + tree.pruned_mass == pytest.approx(1)
    assert tree.pruned_mass > 0


def test_trace_format():
    lines = trace_lines([sqg("H", 0), readout(0, label="s")], default_params(1e-3))
    assert lines[0].split("\t")[:3] == ["sqg", "H", "0"]
    assert len(lines[1].split("\t")) == 5
