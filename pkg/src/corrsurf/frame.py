"""Pauli-frame propagation through the round circuit.

Errors are tracked as per-qubit X/Z bits conjugated through the Clifford
gates of the schedule; no quantum state is represented.  A shot runs T noisy
rounds followed by a noiseless readout of all data qubits, from which the
final stabilizer record and the true logical flip parities are computed.

Time conventions
----------------
Errors are attached to *slots*.  Slot 0 is the start of a round (where the
pairwise and column models inject), slot l (1..8) is immediately after layer
l-1 of the 8-layer circuit.  A direct or area error of a gate in layer li
lands in slot li+1, except that direct measurement errors flip the recorded
outcome instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    CNOT,
    HADAMARD,
    IDENTITY,
    INIT,
    MEASURE,
    MEASURE_X,
    MEASURE_Z,
    Coord,
    Gate,
    Lattice,
    RoundCircuit,
    stab_rc,
)

N_LAYERS = 8
N_SLOTS = N_LAYERS + 1  # slot 0 plus one slot after each layer

GRAPH_X = "X"  # X-measure outcomes; decodes logical-Z flips
GRAPH_Z = "Z"  # Z-measure outcomes; decodes logical-X flips


@dataclass
class PauliFrame:
    """Per-qubit error bits; a Y error has both bits set."""

    xbits: np.ndarray
    zbits: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "PauliFrame":
        return cls(np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.xbits.copy(), self.zbits.copy())

    def inject(self, qi: int, pauli: str) -> None:
        if pauli in ("X", "Y"):
            self.xbits[qi] ^= True
        if pauli in ("Z", "Y"):
            self.zbits[qi] ^= True


@dataclass(frozen=True)
class DetectionEvent:
    t: int
    stab: Coord
    graph: str  # GRAPH_X or GRAPH_Z


def apply_gate(frame: PauliFrame, gate: Gate, index: dict) -> int | None:
    """Conjugate the frame through one gate in place.

    Returns the outcome flip bit for a measure gate, else None.
    """
    kind = gate.kind
    if kind == IDENTITY:
        return None
    if kind == CNOT:
        c, t = index[gate.qubits[0]], index[gate.qubits[1]]
        frame.xbits[t] ^= frame.xbits[c]
        frame.zbits[c] ^= frame.zbits[t]
        return None
    q = index[gate.qubits[0]]
    if kind == HADAMARD:
        frame.xbits[q], frame.zbits[q] = frame.zbits[q], frame.xbits[q]
        return None
    if kind == INIT:
        frame.xbits[q] = False
        frame.zbits[q] = False
        return None
    if kind == MEASURE:
        # Z-basis readout: the reported value is flipped by the X component.
        return int(frame.xbits[q])
    raise ValueError(f"unknown gate kind {kind!r}")


class SyndromeRecords:
    """Per-round measure-qubit outcome bits, rounds 0..T-1 plus a final
    perfect record computed from the residual data frame."""

    def __init__(self, lat: Lattice):
        self.lat = lat
        self.measures = lat.measure_qubits()
        self.rows: list[dict[Coord, int]] = []

    def append_round(self, outcomes: dict[Coord, int]) -> None:
        if set(outcomes) != set(self.measures):
            raise ValueError("incomplete syndrome record for round")
        self.rows.append(dict(outcomes))

    def append_final(self, frame: PauliFrame) -> None:
        self.rows.append(perfect_record(self.lat, frame))


def perfect_record(lat: Lattice, frame: PauliFrame) -> dict[Coord, int]:
    """Stabilizer values of a residual frame under noiseless readout."""
    out = {}
    for st in lat.stabilizers:
        if st.kind == MEASURE_Z:
            bits = frame.xbits
        else:
            bits = frame.zbits
        out[st.measure] = int(sum(bits[lat.index[q]] for q in st.data) % 2)
    return out


def detection_events(records: SyndromeRecords) -> list[DetectionEvent]:
    """XOR consecutive same-stabilizer outcomes; round 0 compares against
    the deterministic all-zero reference."""
    if not records.rows:
        raise ValueError("no syndrome records")
    lat = records.lat
    events = []
    prev = {q: 0 for q in records.measures}
    for t, row in enumerate(records.rows):
        for q in records.measures:
            if row[q] != prev[q]:
                graph = GRAPH_Z if lat.qubits[q] == MEASURE_Z else GRAPH_X
                events.append(DetectionEvent(t, q, graph))
        prev = row
    return events


def logical_flips(lat: Lattice, frame: PauliFrame) -> tuple[int, int]:
    """(logical X flip, logical Z flip) parities of a residual frame.

    A residual X component flips the Z-basis memory iff it overlaps the
    logical-Z support an odd number of times, and symmetrically for Z.
    """
    fx = sum(frame.xbits[lat.index[q]] for q in lat.logical_z) % 2
    fz = sum(frame.zbits[lat.index[q]] for q in lat.logical_x) % 2
    return int(fx), int(fz)


@dataclass
class ShotRecord:
    events: list[DetectionEvent]
    flip_x: int
    flip_z: int
    residual: PauliFrame = field(repr=False, default=None)


def run_shot(lat: Lattice, circuit: RoundCircuit, model, T: int, rng) -> ShotRecord:
    """Reference shot runner: explicit per-gate noise sampling and frame
    propagation.  Slow but direct; the production engine in `montecarlo`
    is checked against it.
    """
    from . import noise  # deferred: noise imports lattice types only

    if T < 1:
        raise ValueError("T must be >= 1")
    frame = PauliFrame.zeros(lat.n_qubits)
    records = SyndromeRecords(lat)
    for _ in range(T):
        start_events = noise.sample_round_start_errors(model, lat, rng)
        _apply_pauli_events(frame, lat, start_events)
        carried: list = []  # errors land after the layer that produced them
        outcomes = {}
        for li, layer in enumerate(circuit.layers):
            flips = {}
            for g in layer:
                draw = noise.AreaErrorDraw(x=rng.random(), gate=g)
                r = apply_gate(frame, g, lat.index)
                if r is not None:
                    flips[g.qubits[0]] = r
                for ev in noise.sample_gate_error(g, model, draw, rng):
                    if isinstance(ev, noise.MeasFlip):
                        flips[ev.qubit] ^= 1
                    else:
                        carried.append(ev)
                carried.extend(noise.sample_area_errors(g, model, draw, lat))
            _apply_pauli_events(frame, lat, carried)
            carried = []
            outcomes.update(flips)
        records.append_round(outcomes)
    records.append_final(frame)
    fx, fz = logical_flips(lat, frame)
    return ShotRecord(detection_events(records), fx, fz, residual=frame)


def _apply_pauli_events(frame: PauliFrame, lat: Lattice, events) -> None:
    for ev in events:
        frame.inject(lat.index[ev.qubit], ev.pauli)


# --- precomputed single-error signatures ------------------------------------


@dataclass(frozen=True)
class ErrorSignature:
    """Detector and logical effect of one X or Z flip at one slot.

    events: tuple of (dt, graph, r, c) with dt in {0, 1} relative to the
    round the error occurred in.  By linearity of frame propagation, the
    effect of any error pattern is the XOR of these signatures.
    """

    events: tuple[tuple[int, str, int, int], ...]
    flip_x: int
    flip_z: int


class ErrorTable:
    """Signatures for every (slot, qubit, basis) insertion point.

    Built once per distance by propagating each generator through the
    remainder of its round plus two noiseless rounds; detector activity is
    confined to the first two records because re-initialized measure qubits
    forget, while the persistent data residual contributes the logical
    parity.
    """

    def __init__(self, lat: Lattice, circuit: RoundCircuit):
        self.lat = lat
        self.circuit = circuit
        self.entries: dict[tuple[int, int, str], ErrorSignature] = {}
        for slot in range(N_SLOTS):
            for qi in range(lat.n_qubits):
                for basis in ("X", "Z"):
                    self.entries[(slot, qi, basis)] = self._build(slot, qi, basis)

    def get(self, slot: int, qi: int, basis: str) -> ErrorSignature:
        return self.entries[(slot, qi, basis)]

    def _build(self, slot: int, qi: int, basis: str) -> ErrorSignature:
        lat = self.lat
        frame = PauliFrame.zeros(lat.n_qubits)
        frame.inject(qi, basis)
        rounds = []
        for r in range(3):
            first = slot if r == 0 else 0
            flipped = set()
            for li in range(first, N_LAYERS):
                for g in self.circuit.layers[li]:
                    res = apply_gate(frame, g, lat.index)
                    if res:
                        flipped.add(g.qubits[0])
            if first == N_LAYERS:
                flipped = set()
            rounds.append(flipped)
        if rounds[1] != rounds[2]:
            raise AssertionError("syndrome did not reach steady state")
        events = []
        for stab in sorted(rounds[0] | rounds[1]):
            graph = GRAPH_Z if lat.qubits[stab] == MEASURE_Z else GRAPH_X
            r, c = stab_rc(stab, lat.qubits[stab])
            if stab in rounds[0]:
                events.append((0, graph, r, c))
            if (stab in rounds[0]) != (stab in rounds[1]):
                events.append((1, graph, r, c))
        fx, fz = logical_flips(lat, frame)
        return ErrorSignature(tuple(events), fx, fz)
