"""Single-fault tolerance harness.

Every single fault from :func:`seqqec.faults.enumerate_single_faults` is
injected into an otherwise noiseless run. The protocol is fault tolerant
when perfect correction of the output never leaves a logical error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import BASIS_LABELS, LABEL_AXIS
from .ec import initial_state, run_protocol
from .faults import Fault, enumerate_single_faults, to_frame_fault
from .frames import drive
from .metrics import logical_error_bounds
from .noise import noiseless_params
from .protocols import get_protocol


@dataclass
class FtReport:
    code: str
    method: str
    n_faults: int
    worst: float = 0.0
    offenders: list[tuple[Fault, str, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.offenders


def check_single_faults_exact(code_name: str, labels=BASIS_LABELS, *, tol: float = 1e-9,
                              backend: str = "stabilizer") -> FtReport:
    """Inject each fault into the exact engine for every input state."""
    protocol = get_protocol(code_name)
    params = noiseless_params()
    faults = enumerate_single_faults(protocol)
    starts = {lab: initial_state(protocol, lab, backend) for lab in labels}
    rep = FtReport(code_name, "exact", len(faults))
    for f in faults:
        for lab, st in starts.items():
            res = run_protocol(protocol, st, params, fault=f)
            eps = logical_error_bounds(res.outcomes, lab, protocol.code).upper
            rep.worst = max(rep.worst, eps)
            if eps >= tol:
                rep.offenders.append((f, lab, eps))
    return rep


def check_single_faults_frames(code_name: str) -> FtReport:
    """Propagate every fault as a Pauli frame, all faults in one vectorized run.

    Pauli faults in a Clifford circuit give deterministic readouts, so one
    frame per fault is exhaustive. Each Bloch axis is scored separately.
    """
    from .mc import logical_failures

    protocol = get_protocol(code_name)
    n = protocol.n_qubits
    faults = enumerate_single_faults(protocol)
    X = np.zeros((len(faults), n), dtype=bool)
    Z = np.zeros((len(faults), n), dtype=bool)
    drive(protocol, X, Z, noiseless_params(), rng=None,
          faults=[to_frame_fault(f, n) for f in faults])
    nd = protocol.n_data
    rep = FtReport(code_name, "frames", len(faults))
    for lab in ("0", "+", "+i"):
        bad = logical_failures(protocol.code, X[:, :nd], Z[:, :nd], LABEL_AXIS[lab][0])
        for i in np.nonzero(bad)[0]:
            rep.offenders.append((faults[i], lab, 1.0))
    rep.worst = 1.0 if rep.offenders else 0.0
    return rep
