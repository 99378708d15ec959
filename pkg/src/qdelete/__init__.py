"""Two-copy qubit deletion machines: simulate, verify, and optimize.

The machine acts on qubit (x) qubit (x) ancilla(3) and removes the
information from the second copy of a pure input, leaving a blank state
behind.  Subpackage layout:

* `qlinalg`   - states, tensor products, partial traces, distances
* `machine`   - machine parameters, validation, application, file format
* `metrics`   - distortion and fidelity, closed forms plus simulation oracles
* `presets`   - named machines with frozen expected averages
* `optimizer` - derivative-free search over the constraint manifold
* `cli`       - the `qdelete` command
"""

from .machine import (
    BlankState,
    Couplings,
    MachineParams,
    ValidationReport,
    apply,
    apply_basis,
    couplings,
    validate,
)
from .presets import PresetRecord, by_name as preset_by_name

__version__ = "0.1.0"

__all__ = [
    "BlankState",
    "Couplings",
    "MachineParams",
    "PresetRecord",
    "ValidationReport",
    "apply",
    "apply_basis",
    "couplings",
    "preset_by_name",
    "validate",
    "__version__",
]
