"""Shot orchestration and logical error rate estimation.

Each shot owns a private counter-based random stream keyed by (master seed,
shot index), so results are bit-identical across worker counts and shot
scheduling orders.  Shot failure probabilities are converted to per-round
logical error rates through the parity-consistent map
pL = (1 - (1 - 2 pShot)^(1/T)) / 2.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import decoder, noise
from .frame import GRAPH_X, GRAPH_Z, N_LAYERS, ErrorTable
from .lattice import (
    CNOT,
    INIT,
    MEASURE,
    MEASURE_Z,
    Lattice,
    build_lattice,
    schedule_round,
    stab_rc,
)

_Z196 = 1.96  # 95% two-sided normal quantile

# Fixed super-batch size for target-failures mode; independent of worker
# count so adaptive runs stay deterministic.
TARGET_BATCH = 20_000
TARGET_BATCH_MIN = 1_000


@dataclass(frozen=True)
class RunConfig:
    d: int
    p: float
    model: noise.NoiseModel
    shots: int
    T: int | None = None  # defaults to d
    seed: int = 0
    workers: int = 1
    target_failures: int | None = None
    knn: int | None = None

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if self.T is not None and self.T < 1:
            raise ValueError("rounds must be >= 1")

    @property
    def rounds(self) -> int:
        return self.T if self.T is not None else self.d


@dataclass(frozen=True)
class RunStats:
    model: str
    d: int
    p: float
    shots: int
    T: int
    failures_x: int
    p_shot_x: float
    p_l_x: float
    ci_low_x: float
    ci_high_x: float
    failures_z: int
    p_shot_z: float
    p_l_z: float
    ci_low_z: float
    ci_high_z: float
    seed: int
    seconds: float


def wilson_interval(failures: int, shots: int, z: float = _Z196):
    """95% Wilson score interval for a binomial proportion."""
    if shots == 0:
        return 0.0, 1.0
    ps = failures / shots
    denom = 1 + z * z / shots
    center = (ps + z * z / (2 * shots)) / denom
    half = z * math.sqrt(ps * (1 - ps) / shots + z * z / (4 * shots * shots)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def per_round_rate(p_shot: float, T: int) -> float:
    """Convert shot failure probability to logical error per round.

    Accounts for parity accumulation of flips over T rounds; reduces to
    p_shot / T for small values and is clamped to [0, 1/2].
    """
    p_shot = min(max(p_shot, 0.0), 0.5)
    if p_shot == 0.5:
        return 0.5
    return 0.5 * (1.0 - (1.0 - 2.0 * p_shot) ** (1.0 / T))


class ShotEngine:
    """Precomputed machinery for running shots of one configuration fast.

    Error signatures from the frame table are flattened to per-graph
    (dt, stabilizer index) lists; a shot samples errors, XORs signatures
    into the two detector sets, and decodes only when events exist.
    """

    def __init__(self, lat: Lattice, model: noise.NoiseModel, T: int, knn=None):
        self.lat = lat
        self.model = model
        self.T = T
        self.knn = knn
        self.circuit = schedule_round(lat)
        self.table = ErrorTable(lat, self.circuit)
        d = lat.d
        self.nstab = {GRAPH_Z: d * (d - 1), GRAPH_X: d * (d - 1)}
        self.ncols = {GRAPH_Z: d - 1, GRAPH_X: d}
        # flattened gate slots in layer order
        self.slots = [(li, g) for li, layer in enumerate(self.circuit.layers) for g in layer]
        self.n_slots = len(self.slots)
        self.is_area = model.kind in (noise.EXP_AREA, noise.POLY_AREA)
        # compact signatures: (evZ, evX, flip_x, flip_z) per (slot, qi, basis)
        self.sigs = {}
        for (slot, qi, basis), sig in self.table.entries.items():
            evz = tuple((dt, r * self.ncols[GRAPH_Z] + c) for dt, g, r, c in sig.events if g == GRAPH_Z)
            evx = tuple((dt, r * self.ncols[GRAPH_X] + c) for dt, g, r, c in sig.events if g == GRAPH_X)
            self.sigs[(slot, qi, basis)] = (evz, evx, sig.flip_x, sig.flip_z)
        # measurement-flip signatures per measure qubit
        self.meas_sigs = {}
        for st in lat.stabilizers:
            r, c = stab_rc(st.measure, st.kind)
            graph = GRAPH_Z if st.kind == MEASURE_Z else GRAPH_X
            self.meas_sigs[st.measure] = (graph, r * self.ncols[graph] + c)

    def _apply_pauli(self, state, t, slot, q, pauli):
        qi = self.lat.index[q]
        if pauli != "Z":
            self._apply_sig(state, t, self.sigs[(slot, qi, "X")])
        if pauli != "X":
            self._apply_sig(state, t, self.sigs[(slot, qi, "Z")])

    @staticmethod
    def _toggle(s, key):
        if key in s:
            s.remove(key)
        else:
            s.add(key)

    def _apply_sig(self, state, t, sig):
        evz, evx, fx, fz = sig
        detz, detx = state["detz"], state["detx"]
        nz, nx = self.nstab[GRAPH_Z], self.nstab[GRAPH_X]
        for dt, k in evz:
            self._toggle(detz, (t + dt) * nz + k)
        for dt, k in evx:
            self._toggle(detx, (t + dt) * nx + k)
        state["fx"] ^= fx
        state["fz"] ^= fz

    def sample_shot(self, rng):
        """Run T noisy rounds; returns detector sets and true flip parities."""
        model, lat = self.model, self.lat
        p = model.p
        state = {"detz": set(), "detx": set(), "fx": 0, "fz": 0}
        pair_model = model.kind in (noise.PAIRWISE, noise.COLUMN)
        if p > 0:
            xs = rng.random((self.T, self.n_slots))
            hits_t, hits_s = np.nonzero(xs < p)
        else:
            hits_t = hits_s = ()
        hit_at = {}
        for t, si in zip(hits_t, hits_s):
            hit_at.setdefault(int(t), []).append(int(si))
        for t in range(self.T):
            if pair_model:
                for ev in noise.sample_round_start_errors(model, lat, rng):
                    self._apply_pauli(state, t, 0, ev.qubit, ev.pauli)
            for si in hit_at.get(t, ()):
                li, gate = self.slots[si]
                draw = noise.AreaErrorDraw(x=float(xs[t, si]), gate=gate)
                for ev in noise.sample_gate_error(gate, model, draw, rng):
                    if isinstance(ev, noise.MeasFlip):
                        graph, k = self.meas_sigs[ev.qubit]
                        dset = state["detz"] if graph == GRAPH_Z else state["detx"]
                        n = self.nstab[graph]
                        self._toggle(dset, t * n + k)
                        self._toggle(dset, (t + 1) * n + k)
                    else:
                        self._apply_pauli(state, t, li + 1, ev.qubit, ev.pauli)
                if self.is_area:
                    for ev in noise.sample_area_errors(gate, model, draw, lat, rng):
                        self._apply_pauli(state, t, li + 1, ev.qubit, ev.pauli)
        return state

    def _decode(self, keys, graph):
        ncol = self.ncols[graph]
        n = self.nstab[graph]
        triples = []
        for key in keys:
            t, k = divmod(key, n)
            triples.append((t, k // ncol, k % ncol))
        if len(triples) <= 2 and self.knn is None:
            return self._decode_small(triples, graph)
        return decoder.decode_graph(triples, self.lat, self.T, knn=self.knn, graph=graph)

    def _decode_small(self, triples, graph):
        """One or two events: solved in closed form.

        A lone event matches its boundary; its chain crosses the logical
        line iff it exits through the low (left / top) side.  Two events
        pair up iff that is at least as cheap as two boundary exits (the
        tie-break prefers pairing), and the canonical real-real geodesic
        never touches the logical line.
        """
        d = self.lat.d

        def low(tr):
            return decoder._boundary_side(graph, d, tr[1], tr[2]) == "low"

        if len(triples) == 1:
            return int(low(triples[0]))
        a, b = sorted(triples)
        w = abs(a[0] - b[0]) + abs(a[1] - b[1]) + abs(a[2] - b[2])
        ba = decoder.boundary_distance(graph, d, a[1], a[2])
        bb = decoder.boundary_distance(graph, d, b[1], b[2])
        if w <= ba + bb:
            return 0
        return int(low(a)) ^ int(low(b))

    def run_and_decode(self, rng):
        """One shot; returns (logical X failed, logical Z failed)."""
        st = self.sample_shot(rng)
        if st["detz"]:
            fail_x = self._decode(st["detz"], GRAPH_Z) != st["fx"]
        else:
            fail_x = st["fx"] == 1
        if st["detx"]:
            fail_z = self._decode(st["detx"], GRAPH_X) != st["fz"]
        else:
            fail_z = st["fz"] == 1
        return fail_x, fail_z


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Counter-based per-shot stream: Philox keyed by (seed, shot index)."""
    key = ((seed & 0xFFFFFFFFFFFFFFFF) << 64) | (shot & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


_ENGINE_CACHE: dict = {}


def get_engine(cfg: RunConfig) -> ShotEngine:
    key = (cfg.d, cfg.model, cfg.rounds, cfg.knn)
    eng = _ENGINE_CACHE.get(key)
    if eng is None:
        eng = ShotEngine(build_lattice(cfg.d), cfg.model, cfg.rounds, knn=cfg.knn)
        _ENGINE_CACHE[key] = eng
    return eng


def _run_span(cfg: RunConfig, start: int, stop: int):
    eng = get_engine(cfg)
    fx = fz = 0
    # One Philox instance rekeyed per shot; bit-identical to shot_rng but
    # skips the per-shot Generator construction cost.
    bg = np.random.Philox(key=0)
    rng = np.random.Generator(bg)
    st = bg.state
    key = st["state"]["key"]
    counter = st["state"]["counter"]
    key[1] = cfg.seed & 0xFFFFFFFFFFFFFFFF
    for shot in range(start, stop):
        key[0] = shot & 0xFFFFFFFFFFFFFFFF
        counter[:] = 0
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        bg.state = st
        a, b = eng.run_and_decode(rng)
        fx += a
        fz += b
    return fx, fz


def _pool_task(args):
    cfg, start, stop = args
    return _run_span(cfg, start, stop)


def _count_failures(cfg: RunConfig, start: int, stop: int, pool=None):
    if pool is None or stop - start < 2 * (cfg.workers or 1):
        return _run_span(cfg, start, stop)
    w = cfg.workers
    bounds = np.linspace(start, stop, 4 * w + 1, dtype=int)
    tasks = [(cfg, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    fx = fz = 0
    for rfx, rfz in pool.map(_pool_task, tasks):
        fx += rfx
        fz += rfz
    return fx, fz


def estimate(cfg: RunConfig) -> RunStats:
    """Run the configured number of shots and aggregate failure statistics.

    In target-failures mode, doubling super-batches run until the
    logical-X failure count reaches the target or the shot budget is
    spent; the schedule depends only on the configuration, never on the
    worker count.
    """
    t0 = time.perf_counter()
    pool = None
    try:
        if cfg.workers and cfg.workers > 1:
            import multiprocessing as mp

            pool = ProcessPoolExecutor(
                max_workers=cfg.workers, mp_context=mp.get_context("fork")
            )
        fx = fz = 0
        done = 0
        if cfg.target_failures is None:
            fx, fz = _count_failures(cfg, 0, cfg.shots, pool)
            done = cfg.shots
        else:
            # batches double from TARGET_BATCH_MIN so heavy cells stop
            # almost as soon as the target is met; the schedule depends
            # only on the config and the (deterministic) failure counts,
            # never on the worker count
            batch = TARGET_BATCH_MIN
            while done < cfg.shots and fx < cfg.target_failures:
                stop = min(done + batch, cfg.shots)
                bx, bz = _count_failures(cfg, done, stop, pool)
                fx += bx
                fz += bz
                done = stop
                batch = min(2 * batch, TARGET_BATCH)
    finally:
        if pool is not None:
            pool.shutdown()
    seconds = time.perf_counter() - t0
    return _stats(cfg, done, fx, fz, seconds)


def _stats(cfg: RunConfig, shots: int, fx: int, fz: int, seconds: float) -> RunStats:
    T = cfg.rounds

    def block(f):
        ps = f / shots if shots else 0.0
        lo, hi = wilson_interval(f, shots)
        return ps, per_round_rate(ps, T), per_round_rate(lo, T), per_round_rate(hi, T)

    psx, plx, lox, hix = block(fx)
    psz, plz, loz, hiz = block(fz)
    return RunStats(
        model=cfg.model.label(),
        d=cfg.d,
        p=cfg.p,
        shots=shots,
        T=T,
        failures_x=fx,
        p_shot_x=psx,
        p_l_x=plx,
        ci_low_x=lox,
        ci_high_x=hix,
        failures_z=fz,
        p_shot_z=psz,
        p_l_z=plz,
        ci_low_z=loz,
        ci_high_z=hiz,
        seed=cfg.seed,
        seconds=seconds,
    )


def sweep(cfgs, on_row=None):
    """Evaluate configs in order; rows are emitted as they finish."""
    rows = []
    for cfg in cfgs:
        row = estimate(cfg)
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


def fit_slope(rows) -> tuple[float, float]:
    """Least-squares slope of log pL vs log p with its standard error.

    Requires at least 3 rows at a common distance with distinct physical
    rates and at least 100 logical-X failures each.
    """
    usable = [r for r in rows]
    if len(usable) < 3:
        raise ValueError("need at least 3 rows to fit a slope")
    if len({r.d for r in usable}) != 1:
        raise ValueError("slope fit requires rows at a common distance")
    if len({r.p for r in usable}) != len(usable):
        raise ValueError("slope fit requires distinct physical error rates")
    bad = [r for r in usable if r.failures_x < 100]
    if bad:
        raise ValueError(
            f"rows with fewer than 100 failures are statistically unusable: "
            f"{[(r.d, r.p, r.failures_x) for r in bad]}"
        )
    x = np.log([r.p for r in usable])
    y = np.log([r.p_l_x for r in usable])
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    if n > 2:
        stderr = float(math.sqrt(np.sum(resid**2) / (n - 2) / sxx))
    else:
        stderr = 0.0
    return slope, stderr
