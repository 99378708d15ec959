"""The generalized two-copy deletion machine: parameters, validation, application.

The machine is a linear isometry defined on the four inputs |i>|j>|Q> of the
qubit (x) qubit (x) ancilla space.  The diagonal inputs are mapped to product
states carrying a blank state |sigma> and a flag ancilla; the off-diagonal
inputs are mapped into the two-qubit space (ancilla left in |Q>) with eight
complex amplitudes, four per input:

    |0>|0>|Q> -> |0>|sigma>|A0>
    |0>|1>|Q> -> (a0|01> + b0|10> + c0|00> + d0|11>) |Q>
    |1>|0>|Q> -> (a1|01> + b1|10> + c1|00> + d1|11>) |Q>
    |1>|1>|Q> -> |1>|sigma>|A1>

The ancilla basis {|Q>, |A0>, |A1>} is fixed and orthonormal (indices 0, 1, 2
of the third tensor factor).  The map is an isometry exactly when the two
amplitude rows (a_i, b_i, c_i, d_i) are orthonormal in C^4; `validate` reports
how far a parameter set is from satisfying that.

Machine parameter files are JSON objects with keys "a0", "b0", "c0", "d0",
"a1", "b1", "c1", "d1", each a two-element array [re, im], plus "m1p", the
real overlap <sigma|0>.  Parsers reject missing keys and non-finite values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import qlinalg

#: Ancilla basis indices.
ANC_Q, ANC_A0, ANC_A1 = 0, 1, 2

#: Default tolerance for machine validation.
DEFAULT_VALIDATION_TOL = 1e-10

#: Default blank-state overlap <sigma|0>; at m1p^2 = 1/2 the two fidelity
#: conventions of the metrics module coincide.
DEFAULT_M1P = math.sqrt(0.5)

_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)
_ANC_KETS = np.eye(3, dtype=complex)

#: Keys of the machine JSON format, in canonical order.
AMPLITUDE_KEYS = ("a0", "b0", "c0", "d0", "a1", "b1", "c1", "d1")


class MachineFormatError(ValueError):
    """A machine parameter file or dictionary could not be parsed."""


class MachineValidationError(ValueError):
    """An operation that requires a valid machine received an invalid one."""

    def __init__(self, report: "ValidationReport"):
        super().__init__(
            "machine violates the isometry conditions: "
            f"row norm defects ({report.row0_norm_defect:.3e}, "
            f"{report.row1_norm_defect:.3e}), orthogonality defect "
            f"{report.orthogonality_defect:.3e} at tol {report.tol:.1e}"
        )
        self.report = report


@dataclass(frozen=True)
class BlankState:
    """Blank state |sigma> = m1p |0> + sqrt(1 - m1p^2) |1>, m1p real in [-1, 1]."""

    m1p: float

    def __post_init__(self):
        m = self.m1p
        if not (isinstance(m, (int, float)) and math.isfinite(m) and -1.0 <= m <= 1.0):
            raise ValueError(f"m1p must be a finite real in [-1, 1], got {m!r}")

    def ket(self) -> np.ndarray:
        """Amplitude vector of |sigma>, normalized by construction."""
        return np.array([self.m1p, math.sqrt(1.0 - self.m1p * self.m1p)], dtype=complex)


@dataclass(frozen=True)
class MachineParams:
    """The eight machine amplitudes plus the blank state."""

    a0: complex = 0j
    b0: complex = 0j
    c0: complex = 0j
    d0: complex = 0j
    a1: complex = 0j
    b1: complex = 0j
    c1: complex = 0j
    d1: complex = 0j
    sigma: BlankState = field(default_factory=lambda: BlankState(DEFAULT_M1P))

    def row0(self) -> np.ndarray:
        return np.array([self.a0, self.b0, self.c0, self.d0], dtype=complex)

    def row1(self) -> np.ndarray:
        return np.array([self.a1, self.b1, self.c1, self.d1], dtype=complex)

    @classmethod
    def from_rows(cls, row0, row1, sigma: BlankState) -> "MachineParams":
        row0 = np.asarray(row0, dtype=complex)
        row1 = np.asarray(row1, dtype=complex)
        if row0.shape != (4,) or row1.shape != (4,):
            raise ValueError("amplitude rows must have four complex entries each")
        return cls(
            a0=complex(row0[0]), b0=complex(row0[1]), c0=complex(row0[2]), d0=complex(row0[3]),
            a1=complex(row1[0]), b1=complex(row1[1]), c1=complex(row1[2]), d1=complex(row1[3]),
            sigma=sigma,
        )


@dataclass(frozen=True)
class Couplings:
    """Row sums of the machine amplitudes; every output metric depends only on these."""

    g: complex
    h: complex
    e: complex
    f: complex

    def norm_sq_sum(self) -> float:
        """|g|^2 + |h|^2 + |e|^2 + |f|^2; equals 2 for every valid machine."""
        return abs(self.g) ** 2 + abs(self.h) ** 2 + abs(self.e) ** 2 + abs(self.f) ** 2


@dataclass(frozen=True)
class ValidationReport:
    """Defects of the isometry conditions; all are non-negative."""

    row0_norm_defect: float
    row1_norm_defect: float
    orthogonality_defect: float
    gram_defect: float
    tol: float
    is_valid: bool


def couplings(p: MachineParams) -> Couplings:
    """Componentwise row sums g = a0+a1, h = b0+b1, e = c0+c1, f = d0+d1."""
    return Couplings(g=p.a0 + p.a1, h=p.b0 + p.b1, e=p.c0 + p.c1, f=p.d0 + p.d1)


def validate(p: MachineParams, tol: float = DEFAULT_VALIDATION_TOL) -> ValidationReport:
    """Check the isometry conditions and report the defects.

    Row norm defects are ``| ||row_i||^2 - 1 |``, the orthogonality defect is
    the modulus of the row inner product, and the Gram defect is the maximum
    entrywise deviation of the Gram matrix of the four basis images from the
    4x4 identity.  A report is always produced; nothing is raised.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    row0, row1 = p.row0(), p.row1()
    r0 = abs(float(np.vdot(row0, row0).real) - 1.0)
    r1 = abs(float(np.vdot(row1, row1).real) - 1.0)
    orth = abs(complex(np.vdot(row1, row0)))

    images = np.array([apply_basis(p, i, j) for i in (0, 1) for j in (0, 1)])
    gram = images @ images.conj().T
    gram_defect = float(np.max(np.abs(gram - np.eye(4))))

    worst = max(r0, r1, orth, gram_defect)
    return ValidationReport(
        row0_norm_defect=r0,
        row1_norm_defect=r1,
        orthogonality_defect=orth,
        gram_defect=gram_defect,
        tol=tol,
        is_valid=worst <= tol,
    )


def require_valid(p: MachineParams, tol: float = DEFAULT_VALIDATION_TOL) -> ValidationReport:
    """Validate and raise :class:`MachineValidationError` on failure."""
    report = validate(p, tol)
    if not report.is_valid:
        raise MachineValidationError(report)
    return report


def apply_basis(p: MachineParams, i: int, j: int) -> np.ndarray:
    """Image of the basis input |i>|j>|Q> as a flat 12-amplitude vector."""
    if (i, j) == (0, 0):
        return qlinalg.tensor3(_KET0, p.sigma.ket(), _ANC_KETS[ANC_A0])
    if (i, j) == (1, 1):
        return qlinalg.tensor3(_KET1, p.sigma.ket(), _ANC_KETS[ANC_A1])
    if (i, j) == (0, 1):
        a, b, c, d = p.a0, p.b0, p.c0, p.d0
    elif (i, j) == (1, 0):
        a, b, c, d = p.a1, p.b1, p.c1, p.d1
    else:
        raise ValueError(f"basis labels must be bits, got ({i}, {j})")
    out = np.zeros(qlinalg.JOINT_DIM, dtype=complex)
    out[qlinalg.joint_index(0, 1, ANC_Q)] = a
    out[qlinalg.joint_index(1, 0, ANC_Q)] = b
    out[qlinalg.joint_index(0, 0, ANC_Q)] = c
    out[qlinalg.joint_index(1, 1, ANC_Q)] = d
    return out


def apply(p: MachineParams, alpha: float) -> np.ndarray:
    """Output state for the two-copy input (alpha|0> + beta|1>)^{(x)2} |Q>.

    beta is the nonnegative root sqrt(1 - alpha^2).  For a valid machine the
    result is normalized to 1 within 1e-12.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    beta = math.sqrt(1.0 - alpha * alpha)
    return (
        alpha * alpha * apply_basis(p, 0, 0)
        + alpha * beta * (apply_basis(p, 0, 1) + apply_basis(p, 1, 0))
        + beta * beta * apply_basis(p, 1, 1)
    )


def to_dict(p: MachineParams) -> dict:
    """Machine parameters as a JSON-serializable dictionary."""
    out = {}
    for key in AMPLITUDE_KEYS:
        z = complex(getattr(p, key))
        out[key] = [z.real, z.imag]
    out["m1p"] = p.sigma.m1p
    return out


def from_dict(data: dict) -> MachineParams:
    """Parse a machine parameter dictionary, rejecting malformed input.

    Raises :class:`MachineFormatError` naming the offending key on missing
    keys, malformed entries, or non-finite values.
    """
    if not isinstance(data, dict):
        raise MachineFormatError("machine description must be a JSON object")
    amps = {}
    for key in AMPLITUDE_KEYS:
        if key not in data:
            raise MachineFormatError(f"missing key {key!r}")
        value = data[key]
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
        ):
            raise MachineFormatError(f"key {key!r} must be a two-element array [re, im]")
        re, im = float(value[0]), float(value[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise MachineFormatError(f"key {key!r} has non-finite value {value!r}")
        amps[key] = complex(re, im)
    if "m1p" not in data:
        raise MachineFormatError("missing key 'm1p'")
    m1p = data["m1p"]
    if not isinstance(m1p, (int, float)) or isinstance(m1p, bool) or not math.isfinite(m1p):
        raise MachineFormatError(f"key 'm1p' must be a finite real, got {m1p!r}")
    if not -1.0 <= m1p <= 1.0:
        raise MachineFormatError(f"key 'm1p' must lie in [-1, 1], got {m1p!r}")
    return MachineParams(sigma=BlankState(float(m1p)), **amps)


def load(path) -> MachineParams:
    """Load machine parameters from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MachineFormatError(f"invalid JSON in {path}: {exc}") from exc
    return from_dict(data)


def save(p: MachineParams, path) -> None:
    """Write machine parameters to a JSON file (full round-trip precision)."""
    Path(path).write_text(json.dumps(to_dict(p), indent=2) + "\n", encoding="utf-8")
