"""Planar surface code layout and the per-round syndrome extraction circuit.

The code lives on a (2d-1) x (2d-1) grid of qubits.  Sites with even
coordinate parity (i+j even) hold data qubits; the remaining sites hold
measure qubits, split into X-type (i odd, j even) and Z-type (i even, j odd).
Each measure qubit owns one weight-4 (bulk) or weight-3 (boundary) stabilizer
over its grid neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

Coord = tuple[int, int]

DATA = "data"
MEASURE_X = "mx"
MEASURE_Z = "mz"

# Gate kinds appearing in the round circuit.
INIT = "init"
HADAMARD = "h"
CNOT = "cnot"
MEASURE = "measure"
IDENTITY = "id"

# Data-partner visiting order for the four CNOT layers: west, east, north,
# south for both stabilizer types.  Layer compatibility (each data qubit in
# at most one CNOT per layer) forces the two orders to share the same
# horizontal/vertical step pattern, so only one graph can be fully protected
# from mid-cycle measure-qubit ("hook") faults; ending on the two vertical
# steps leaves X-measure hooks as vertical data pairs, which never advance
# an X-error chain toward the left/right boundaries and therefore keep the
# reported logical-X side at full code distance.
_Z_ORDER = ((0, -1), (0, 1), (-1, 0), (1, 0))
_X_ORDER = ((0, -1), (0, 1), (-1, 0), (1, 0))


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[Coord, ...]


@dataclass(frozen=True)
class Stabilizer:
    measure: Coord
    kind: str  # MEASURE_X or MEASURE_Z
    data: tuple[Coord, ...]  # in CNOT visiting order


@dataclass(frozen=True)
class Lattice:
    d: int
    side: int
    qubits: dict[Coord, str]
    stabilizers: tuple[Stabilizer, ...]
    logical_x: tuple[Coord, ...]  # a horizontal row of data qubits
    logical_z: tuple[Coord, ...]  # a vertical column of data qubits
    index: dict[Coord, int] = field(repr=False, default_factory=dict)
    coords: tuple[Coord, ...] = field(repr=False, default=())

    @property
    def n_qubits(self) -> int:
        return self.side * self.side

    def role(self, q: Coord) -> str:
        return self.qubits[q]

    def data_qubits(self):
        return [q for q in self.coords if self.qubits[q] == DATA]

    def measure_qubits(self, kind=None):
        if kind is None:
            return [q for q in self.coords if self.qubits[q] != DATA]
        return [q for q in self.coords if self.qubits[q] == kind]


@dataclass(frozen=True)
class RoundCircuit:
    """One error-detection round: 8 layers, every qubit in every layer."""

    layers: tuple[tuple[Gate, ...], ...]

    def gates(self):
        for li, layer in enumerate(self.layers):
            for g in layer:
                yield li, g


def role_of(i: int, j: int) -> str:
    if (i + j) % 2 == 0:
        return DATA
    return MEASURE_X if i % 2 == 1 else MEASURE_Z


def _neighbors(q: Coord, side: int, order) -> tuple[Coord, ...]:
    out = []
    for di, dj in order:
        ni, nj = q[0] + di, q[1] + dj
        if 0 <= ni < side and 0 <= nj < side:
            out.append((ni, nj))
    return tuple(out)


@lru_cache(maxsize=None)
def build_lattice(d: int) -> Lattice:
    """Construct the distance-d planar layout.  Deterministic in d."""
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"code distance must be an integer >= 2, got {d!r}")
    side = 2 * d - 1
    qubits: dict[Coord, str] = {}
    coords = []
    for i in range(side):
        for j in range(side):
            qubits[(i, j)] = role_of(i, j)
            coords.append((i, j))
    stabs = []
    for q in coords:
        role = qubits[q]
        if role == MEASURE_Z:
            stabs.append(Stabilizer(q, MEASURE_Z, _neighbors(q, side, _Z_ORDER)))
        elif role == MEASURE_X:
            stabs.append(Stabilizer(q, MEASURE_X, _neighbors(q, side, _X_ORDER)))
    logical_x = tuple((0, j) for j in range(0, side, 2))
    logical_z = tuple((i, 0) for i in range(0, side, 2))
    index = {q: k for k, q in enumerate(coords)}
    return Lattice(
        d=d,
        side=side,
        qubits=qubits,
        stabilizers=tuple(stabs),
        logical_x=logical_x,
        logical_z=logical_z,
        index=index,
        coords=tuple(coords),
    )


def schedule_round(lat: Lattice) -> RoundCircuit:
    """Build the 8-layer round for a lattice.

    Layer 0: init all measure qubits.  Layer 1: H on X-measure qubits.
    Layers 2-5: the four CNOT layers (data controls for Z stabilizers,
    measure controls for X stabilizers).  Layer 6: H again.  Layer 7:
    measure all measure qubits.  Idle qubits carry explicit identities.
    Pure function: repeated calls give identical circuits.
    """
    return _schedule_round(lat.d)


@lru_cache(maxsize=None)
def _schedule_round(d: int) -> RoundCircuit:
    lat = build_lattice(d)
    measures = lat.measure_qubits()
    mx = lat.measure_qubits(MEASURE_X)

    def padded(gates: list[Gate]) -> tuple[Gate, ...]:
        busy = {q for g in gates for q in g.qubits}
        idle = [Gate(IDENTITY, (q,)) for q in lat.coords if q not in busy]
        return tuple(gates + idle)

    layers = [
        padded([Gate(INIT, (q,)) for q in measures]),
        padded([Gate(HADAMARD, (q,)) for q in mx]),
    ]
    for step in range(4):
        gates = []
        for st in lat.stabilizers:
            order = _Z_ORDER if st.kind == MEASURE_Z else _X_ORDER
            di, dj = order[step]
            partner = (st.measure[0] + di, st.measure[1] + dj)
            if partner not in lat.qubits:
                continue
            if st.kind == MEASURE_Z:
                gates.append(Gate(CNOT, (partner, st.measure)))  # data controls
            else:
                gates.append(Gate(CNOT, (st.measure, partner)))  # measure controls
        layers.append(padded(gates))
    layers.append(padded([Gate(HADAMARD, (q,)) for q in mx]))
    layers.append(padded([Gate(MEASURE, (q,)) for q in measures]))
    return RoundCircuit(layers=tuple(layers))


def displacement(gate_qubits, q: Coord) -> tuple[int, int]:
    """Componentwise minimum |di|, |dj| from q to any qubit the gate acts on.

    Undefined for q among the gate's own qubits (callers apply the
    direct-gate rule there instead).
    """
    if q in gate_qubits:
        raise ValueError(f"{q} is acted on by the gate")
    di = min(abs(q[0] - g[0]) for g in gate_qubits)
    dj = min(abs(q[1] - g[1]) for g in gate_qubits)
    return di, dj


# --- stabilizer-graph coordinates -------------------------------------------
#
# Detection events live on the measure-qubit sublattices.  Z-measure qubits
# sit at (2r, 2c+1) with r in [0, d-1], c in [0, d-2]; X-measure qubits at
# (2r+1, 2c) with r in [0, d-2], c in [0, d-1].  X-error chains (Z graph)
# terminate on the left/right lattice edges, Z-error chains (X graph) on
# top/bottom.


def stab_rc(q: Coord, kind: str) -> tuple[int, int]:
    if kind == MEASURE_Z:
        return q[0] // 2, (q[1] - 1) // 2
    return (q[0] - 1) // 2, q[1] // 2


def stab_coord(r: int, c: int, kind: str) -> Coord:
    if kind == MEASURE_Z:
        return 2 * r, 2 * c + 1
    return 2 * r + 1, 2 * c
