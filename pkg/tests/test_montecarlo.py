import math

import numpy as np
import pytest

from corrsurf import montecarlo as mc
from corrsurf.frame import GRAPH_X, GRAPH_Z
from corrsurf.lattice import build_lattice
from corrsurf.montecarlo import (
    RunConfig,
    RunStats,
    ShotEngine,
    estimate,
    fit_slope,
    per_round_rate,
    shot_rng,
    sweep,
    wilson_interval,
)
from corrsurf.noise import NoiseModel


def cfg(d=3, p=1e-3, shots=1000, **kw):
    model = kw.pop("model", NoiseModel(p=p))
    return RunConfig(d=d, p=p, model=model, shots=shots, **kw)


class TestConversion:
    def test_fixed_points(self):
        assert per_round_rate(0.0, 5) == 0.0
        assert per_round_rate(0.5, 1) == 0.5
        assert per_round_rate(0.5, 100) == 0.5
        assert per_round_rate(0.7, 10) == 0.5  # clamped

    def test_small_value_linearization(self):
        for t in (1, 3, 7):
            for ps in (1e-5, 1e-4, 1e-3, 9e-3):
                assert per_round_rate(ps, t) * t == pytest.approx(ps, rel=0.01)

    def test_parity_consistency(self):
        """T rounds at rate pL accumulate back to pShot."""
        pl = per_round_rate(0.2, 5)
        acc = 0.5 * (1 - (1 - 2 * pl) ** 5)
        assert acc == pytest.approx(0.2)


class TestWilson:
    def test_zero_failures(self):
        lo, hi = wilson_interval(0, 10**6)
        assert lo == 0.0
        assert hi == pytest.approx(3.84e-6, rel=0.01)

    def test_contains_point_estimate(self):
        for f, n in [(1, 100), (50, 100), (400, 10**5)]:
            lo, hi = wilson_interval(f, n)
            assert lo <= f / n <= hi

    def test_empty(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)


class TestFitSlope:
    def _rows(self, ps, pl, failures=500, d=3):
        return [
            RunStats(
                model="none", d=d, p=p, shots=10**6, T=d,
                failures_x=failures, p_shot_x=v * d, p_l_x=v,
                ci_low_x=v, ci_high_x=v, failures_z=failures,
                p_shot_z=v * d, p_l_z=v, ci_low_z=v, ci_high_z=v,
                seed=0, seconds=0.0,
            )
            for p, v in zip(ps, pl)
        ]

    def test_exact_power_law(self):
        ps = [1e-3, 2e-3, 4e-3]
        rows = self._rows(ps, [3 * p**2 for p in ps])
        slope, err = fit_slope(rows)
        assert slope == pytest.approx(2.0, abs=1e-9)
        assert err == pytest.approx(0.0, abs=1e-9)

    def test_rejects_few_rows(self):
        ps = [1e-3, 2e-3]
        with pytest.raises(ValueError):
            fit_slope(self._rows(ps, [p**2 for p in ps]))

    def test_rejects_low_failures(self):
        ps = [1e-3, 2e-3, 4e-3]
        with pytest.raises(ValueError, match="100 failures"):
            fit_slope(self._rows(ps, [p**2 for p in ps], failures=50))

    def test_rejects_mixed_distance(self):
        ps = [1e-3, 2e-3, 4e-3]
        rows = self._rows(ps, [p**2 for p in ps])
        rows[1:] = self._rows(ps[1:], [p**2 for p in ps[1:]], d=5)
        with pytest.raises(ValueError, match="common distance"):
            fit_slope(rows)


class TestDeterminism:
    def test_shot_rng_streams_disjoint(self):
        a = shot_rng(1, 0).random(4)
        b = shot_rng(1, 1).random(4)
        c = shot_rng(2, 0).random(4)
        assert not np.allclose(a, b) and not np.allclose(a, c)
        assert np.allclose(a, shot_rng(1, 0).random(4))

    def test_identical_across_worker_counts(self):
        c1 = cfg(shots=4000, p=4e-3, workers=1, seed=9)
        c2 = cfg(shots=4000, p=4e-3, workers=2, seed=9)
        s1, s2 = estimate(c1), estimate(c2)
        assert (s1.failures_x, s1.failures_z) == (s2.failures_x, s2.failures_z)
        assert s1.p_l_x == s2.p_l_x

    def test_merging_associativity(self):
        c = cfg(shots=3000, p=4e-3, seed=5)
        whole = mc._run_span(c, 0, 3000)
        parts = [mc._run_span(c, a, b) for a, b in [(0, 1100), (1100, 1101), (1101, 3000)]]
        merged = tuple(map(sum, zip(*parts)))
        assert whole == merged

    def test_target_failures_schedule_independent_of_workers(self):
        c1 = cfg(shots=60_000, p=8e-3, seed=2, target_failures=50, workers=1)
        c2 = cfg(shots=60_000, p=8e-3, seed=2, target_failures=50, workers=2)
        s1, s2 = estimate(c1), estimate(c2)
        assert s1.shots == s2.shots and s1.failures_x == s2.failures_x


class TestEngine:
    def test_engine_agrees_with_reference_runner(self):
        """The table-driven engine and the explicit frame runner produce
        identical detectors and flips for identical injected errors."""
        from corrsurf import frame as fr
        from corrsurf import noise as ns
        from corrsurf.lattice import schedule_round, stab_rc

        lat = build_lattice(3)
        eng = ShotEngine(lat, NoiseModel(p=0.0), T=3)
        circ = schedule_round(lat)
        rng = np.random.default_rng(0)
        for _ in range(100):
            # random injected pattern: (round, slot, qubit, pauli)
            pattern = []
            for _ in range(int(rng.integers(1, 5))):
                pattern.append(
                    (
                        int(rng.integers(3)),
                        int(rng.integers(fr.N_SLOTS)),
                        int(rng.integers(lat.n_qubits)),
                        "XYZ"[int(rng.integers(3))],
                    )
                )
            # engine path
            state = {"detz": set(), "detx": set(), "fx": 0, "fz": 0}
            for t, slot, qi, pauli in pattern:
                eng._apply_pauli(state, t, slot, lat.coords[qi], pauli)
            # reference path: explicit frame propagation
            pf = fr.PauliFrame.zeros(lat.n_qubits)
            recs = fr.SyndromeRecords(lat)
            for t in range(3):
                for qi2, pauli2 in [
                    (q, pl) for (tt, ss, q, pl) in pattern if tt == t and ss == 0
                ]:
                    pf.inject(qi2, pauli2)
                outcomes = {}
                for li, layer in enumerate(circ.layers):
                    for g in layer:
                        r = fr.apply_gate(pf, g, lat.index)
                        if r is not None:
                            outcomes[g.qubits[0]] = r
                    for qi2, pauli2 in [
                        (q, pl)
                        for (tt, ss, q, pl) in pattern
                        if tt == t and ss == li + 1
                    ]:
                        pf.inject(qi2, pauli2)
                recs.append_round(outcomes)
            recs.append_final(pf)
            fx, fz = fr.logical_flips(lat, pf)
            want_z, want_x = set(), set()
            for ev in fr.detection_events(recs):
                r, c = stab_rc(ev.stab, lat.qubits[ev.stab])
                if ev.graph == GRAPH_Z:
                    want_z.add(ev.t * 6 + r * 2 + c)
                else:
                    want_x.add(ev.t * 6 + r * 3 + c)
            assert state["detz"] == want_z and state["detx"] == want_x
            assert (state["fx"], state["fz"]) == (fx, fz)

    def test_small_decode_fast_path_matches_decoder(self):
        from corrsurf import decoder

        lat = build_lattice(5)
        eng = ShotEngine(lat, NoiseModel(p=1e-3), T=5)
        rng = np.random.default_rng(1)
        for graph, nrow, ncol in ((GRAPH_Z, 5, 4), (GRAPH_X, 4, 5)):
            for _ in range(500):
                k = int(rng.integers(1, 3))
                trips = set()
                while len(trips) < k:
                    trips.add(
                        (int(rng.integers(6)), int(rng.integers(nrow)), int(rng.integers(ncol)))
                    )
                got = eng._decode_small(sorted(trips), graph)
                want = decoder.decode_graph(sorted(trips), lat, 5, graph=graph)
                assert got == want

    def test_every_single_fault_is_corrected(self):
        """No single error process may fail the decoder at d >= 3."""
        for d in (3, 5):
            lat = build_lattice(d)
            eng = ShotEngine(lat, NoiseModel(p=1e-3), T=d)
            for sig in eng.sigs.values():
                for t in range(d):
                    state = {"detz": set(), "detx": set(), "fx": 0, "fz": 0}
                    eng._apply_sig(state, t, sig)
                    pz = (
                        eng._decode(sorted(state["detz"]), GRAPH_Z)
                        if state["detz"]
                        else 0
                    )
                    px = (
                        eng._decode(sorted(state["detx"]), GRAPH_X)
                        if state["detx"]
                        else 0
                    )
                    assert pz == state["fx"] and px == state["fz"]


class TestEstimate:
    def test_stats_invariants(self):
        st = estimate(cfg(shots=3000, p=5e-3, seed=1))
        assert st.shots == 3000 and st.T == 3
        assert 0 <= st.p_l_x <= 0.5
        assert st.ci_low_x <= st.p_l_x <= st.ci_high_x
        assert st.model == "none" and st.seed == 1

    def test_zero_failures_reported_with_ci(self):
        st = estimate(cfg(shots=50, p=1e-5, seed=0))
        assert st.failures_x == 0 and st.p_l_x == 0.0 and st.ci_high_x > 0

    def test_rounds_default_and_override(self):
        assert cfg(d=5, shots=1).rounds == 5
        assert cfg(d=5, shots=1, T=9).rounds == 9
        with pytest.raises(ValueError):
            cfg(shots=1, T=0)

    def test_sweep_streams_rows(self):
        seen = []
        rows = sweep([cfg(shots=500, seed=1), cfg(shots=500, seed=2)], on_row=seen.append)
        assert rows == seen and len(rows) == 2

    def test_monotone_in_p_smoke(self):
        rows = [estimate(cfg(shots=20_000, p=p, seed=4)) for p in (2e-3, 5e-3, 1e-2)]
        assert rows[0].p_l_x < rows[1].p_l_x < rows[2].p_l_x
