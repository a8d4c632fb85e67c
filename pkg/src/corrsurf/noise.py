"""Error samplers: baseline depolarizing gates plus four correlated models.

Every gate application draws a single uniform number x.  x < p triggers the
direct gate error; under the area models the *same* x is compared against a
per-qubit threshold that decays with distance from the gate, so the affected
region is a filled diamond (Manhattan metric, exponential decay) or disk
(Euclidean metric, polynomial decay) whose radius grows as x shrinks.

The pairwise and column models act once per round, before the first layer:
every qubit pair (all pairs, or pairs sharing a column) independently
suffers uniform two-qubit depolarizing noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import CNOT, INIT, MEASURE, Coord, Gate, Lattice, displacement

BASELINE = "baseline"
EXP_AREA = "exp"
POLY_AREA = "poly"
PAIRWISE = "pair"
COLUMN = "column"

_PAULIS = ("I", "X", "Y", "Z")

# The 15 non-identity two-qubit Paulis, in index order 1..15.
TWO_QUBIT_PAULIS = tuple(
    (_PAULIS[k // 4], _PAULIS[k % 4]) for k in range(1, 16)
)


@dataclass(frozen=True)
class NoiseModel:
    p: float
    kind: str = BASELINE
    n: float | None = None  # suppression base (exp) or exponent (poly, pair)
    A: float | None = None  # amplitude (pair, column)
    column_xx_only: bool = False  # sensitivity switch for the column model

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.kind == EXP_AREA and (self.n is None or self.n <= 1):
            raise ValueError("exponential area model needs n > 1")
        if self.kind in (POLY_AREA, PAIRWISE) and (self.n is None or self.n < 2):
            raise ValueError("polynomial models need n >= 2")
        if self.kind in (PAIRWISE, COLUMN) and (self.A is None or self.A <= 0):
            raise ValueError("pair models need A > 0")
        if self.kind not in (BASELINE, EXP_AREA, POLY_AREA, PAIRWISE, COLUMN):
            raise ValueError(f"unknown noise model kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == BASELINE:
            return "none"
        if self.kind == EXP_AREA:
            return f"exp:{_num(self.n)}"
        if self.kind == POLY_AREA:
            return f"poly:{_num(self.n)}"
        if self.kind == PAIRWISE:
            return f"pair:{_num(self.A)},{_num(self.n)}"
        return f"column:{_num(self.A)}"


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)


@dataclass(frozen=True)
class AreaErrorDraw:
    """The single random number shared by a gate's direct and area checks."""

    x: float
    gate: Gate


@dataclass(frozen=True)
class PauliEvent:
    qubit: Coord
    pauli: str  # X, Y or Z; identity outcomes are never stored
    slot: int = 0


@dataclass(frozen=True)
class MeasFlip:
    """Classical flip of a reported measurement outcome."""

    qubit: Coord


def sample_gate_error(gate: Gate, model: NoiseModel, draw: AreaErrorDraw, rng):
    """Direct error of one gate application.

    Unitary single-qubit gates (H, identity) draw uniformly from {X, Y, Z};
    CNOTs draw uniformly from the 15 non-identity two-qubit Paulis.
    Initialization and measurement errors are classical flips of the
    prepared / reported value.
    """
    if draw.x >= model.p:
        return []
    slot = 0  # caller overrides; kept for standalone use
    if gate.kind == MEASURE:
        return [MeasFlip(gate.qubits[0])]
    if gate.kind == INIT:
        return [PauliEvent(gate.qubits[0], "X", slot)]
    if gate.kind == CNOT:
        pa, pb = TWO_QUBIT_PAULIS[rng.integers(15)]
        out = []
        if pa != "I":
            out.append(PauliEvent(gate.qubits[0], pa, slot))
        if pb != "I":
            out.append(PauliEvent(gate.qubits[1], pb, slot))
        return out
    return [PauliEvent(gate.qubits[0], "XYZ"[rng.integers(3)], slot)]


def area_threshold_factor(model: NoiseModel, di: int, dj: int) -> float:
    """Threshold/p for a surrounding qubit at displacement (di, dj)."""
    if model.kind == EXP_AREA:
        return model.n ** -(di + dj)
    if model.kind == POLY_AREA:
        r = math.sqrt(di * di + dj * dj)
        return 0.1 / r**model.n
    return 0.0


@lru_cache(maxsize=None)
def _area_shells(d: int, gate_qubits: tuple, kind: str, n: float):
    """Candidate qubits around a gate, sorted by decreasing threshold factor.

    Returns (factors, qubits) as parallel tuples.
    """
    from .lattice import build_lattice

    lat = build_lattice(d)
    model = NoiseModel(p=0.5, kind=kind, n=n, A=1.0 if kind in (PAIRWISE, COLUMN) else None)
    entries = []
    for q in lat.coords:
        if q in gate_qubits:
            continue
        di, dj = displacement(gate_qubits, q)
        entries.append((area_threshold_factor(model, di, dj), q))
    entries.sort(key=lambda e: (-e[0], e[1]))
    return tuple(e[0] for e in entries), tuple(e[1] for e in entries)


def area_candidates(gate: Gate, model: NoiseModel, draw: AreaErrorDraw, lat: Lattice):
    """Qubits whose area threshold exceeds the gate's draw."""
    if model.kind not in (EXP_AREA, POLY_AREA) or model.p == 0:
        return []
    factors, qubits = _area_shells(lat.d, gate.qubits, model.kind, model.n)
    out = []
    for f, q in zip(factors, qubits):
        if min(1.0, f * model.p) <= draw.x:
            break
        out.append(q)
    return out


def sample_area_errors(gate: Gate, model: NoiseModel, draw: AreaErrorDraw, lat: Lattice, rng=None):
    """Correlated large-area errors around one gate application.

    Each candidate independently draws uniformly from {I, X, Y, Z};
    identities are dropped.  Thresholds decrease monotonically with
    distance, so the candidate set for a smaller x contains that of a
    larger x.
    """
    if model.kind not in (EXP_AREA, POLY_AREA):
        return []
    cands = area_candidates(gate, model, draw, lat)
    if not cands:
        return []
    picks = rng.integers(4, size=len(cands))
    return [
        PauliEvent(q, _PAULIS[k], 0)
        for q, k in zip(cands, picks)
        if k != 0
    ]


@lru_cache(maxsize=64)
def _pair_buckets(d: int, kind: str, n: float | None):
    """All candidate qubit pairs grouped by probability factor.

    For the pairwise model the factor is 1/r^n over every unordered pair;
    for the column model it is 1 over every same-column pair.  Returns a
    tuple of (factor, pairs-array) with pairs as an (m, 2) int array of
    flat qubit indices.
    """
    from .lattice import build_lattice

    lat = build_lattice(d)
    groups: dict[float, list] = {}
    coords = lat.coords
    for a in range(len(coords)):
        ia, ja = coords[a]
        for b in range(a + 1, len(coords)):
            ib, jb = coords[b]
            if kind == COLUMN:
                if ja != jb:
                    continue
                f = 1.0
            else:
                r2 = (ia - ib) ** 2 + (ja - jb) ** 2
                f = r2 ** (-n / 2)
            groups.setdefault(f, []).append((a, b))
    return tuple(
        (f, np.array(pairs, dtype=np.int64))
        for f, pairs in sorted(groups.items(), reverse=True)
    )


def _sample_pair_model(model: NoiseModel, lat: Lattice, rng, kind: str):
    base = model.A * model.p
    if base == 0:
        return []
    buckets = _pair_buckets(lat.d, kind, model.n if kind == PAIRWISE else None)
    events = []
    xx_only = kind == COLUMN and model.column_xx_only
    for f, pairs in buckets:
        prob = min(1.0, base * f)
        k = rng.binomial(len(pairs), prob)
        if k == 0:
            continue
        chosen = rng.choice(len(pairs), size=k, replace=False)
        for idx in chosen:
            a, b = pairs[idx]
            qa, qb = lat.coords[a], lat.coords[b]
            if xx_only:
                pa, pb = "X", "X"
            else:
                pa, pb = TWO_QUBIT_PAULIS[rng.integers(15)]
            if pa != "I":
                events.append(PauliEvent(qa, pa, 0))
            if pb != "I":
                events.append(PauliEvent(qb, pb, 0))
    return events


def sample_pairwise_errors(model: NoiseModel, lat: Lattice, rng):
    """Start-of-round two-qubit depolarizing noise on all qubit pairs with
    probability min(1, A p / r^n); pairs are independent."""
    if model.kind != PAIRWISE:
        return []
    return _sample_pair_model(model, lat, rng, PAIRWISE)


def sample_column_errors(model: NoiseModel, lat: Lattice, rng):
    """Start-of-round two-qubit noise on every same-column pair with
    probability A p, with no suppression in qubit separation."""
    if model.kind != COLUMN:
        return []
    return _sample_pair_model(model, lat, rng, COLUMN)


def sample_round_start_errors(model: NoiseModel, lat: Lattice, rng):
    if model.kind == PAIRWISE:
        return sample_pairwise_errors(model, lat, rng)
    if model.kind == COLUMN:
        return sample_column_errors(model, lat, rng)
    return []


# --- analytic cross-checks ---------------------------------------------------


def expected_injected_rate(model: NoiseModel, lat: Lattice, q: Coord) -> float:
    """Expected number of noise processes touching q per round.

    Counts direct-error triggers of the 8 gates containing q, area-error
    candidate draws at q, and pair events containing q, each weighted by
    its trigger probability.  Exact sum over the model's formulas; used as
    the oracle for the Monte Carlo frequency checks.
    """
    from .frame import N_LAYERS
    from .lattice import schedule_round

    rate = N_LAYERS * model.p  # q sits in exactly one gate per layer
    if model.kind in (EXP_AREA, POLY_AREA):
        for _, gate in schedule_round(lat).gates():
            if q in gate.qubits:
                continue
            di, dj = displacement(gate.qubits, q)
            rate += min(1.0, model.p * area_threshold_factor(model, di, dj))
    elif model.kind == PAIRWISE:
        for other in lat.coords:
            if other == q:
                continue
            r2 = (other[0] - q[0]) ** 2 + (other[1] - q[1]) ** 2
            rate += min(1.0, model.A * model.p * r2 ** (-model.n / 2))
    elif model.kind == COLUMN:
        partners = sum(1 for other in lat.coords if other[1] == q[1] and other != q)
        rate += partners * min(1.0, model.A * model.p)
    return rate


def expected_event_rate(model: NoiseModel, lat: Lattice, q: Coord) -> float:
    """Expected number of stored PauliEvents / outcome flips on q per round.

    Discounts identity outcomes: area candidates are non-identity with
    probability 3/4, members of a uniform two-qubit Pauli with 12/15.
    """
    from .frame import N_LAYERS
    from .lattice import schedule_round

    circuit = schedule_round(lat)
    rate = 0.0
    for _, gate in circuit.gates():
        if q in gate.qubits:
            rate += model.p * (12 / 15 if gate.kind == CNOT else 1.0)
        elif model.kind in (EXP_AREA, POLY_AREA):
            di, dj = displacement(gate.qubits, q)
            rate += 0.75 * min(1.0, model.p * area_threshold_factor(model, di, dj))
    if model.kind == PAIRWISE:
        for other in lat.coords:
            if other == q:
                continue
            r2 = (other[0] - q[0]) ** 2 + (other[1] - q[1]) ** 2
            rate += (12 / 15) * min(1.0, model.A * model.p * r2 ** (-model.n / 2))
    elif model.kind == COLUMN:
        partners = sum(1 for other in lat.coords if other[1] == q[1] and other != q)
        frac = 1.0 if model.column_xx_only else 12 / 15
        rate += partners * frac * min(1.0, model.A * model.p)
    return rate
