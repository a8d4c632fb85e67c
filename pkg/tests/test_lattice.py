import itertools

import pytest

from corrsurf.lattice import (
    CNOT,
    DATA,
    HADAMARD,
    IDENTITY,
    INIT,
    MEASURE,
    MEASURE_X,
    MEASURE_Z,
    Gate,
    build_lattice,
    displacement,
    schedule_round,
    stab_coord,
    stab_rc,
)


def overlap(a, b):
    return len(set(a) & set(b))


class TestBuildLattice:
    @pytest.mark.parametrize(
        "d,total,data,mx,mz",
        [(3, 25, 13, 6, 6), (5, 81, 41, 20, 20), (7, 169, 85, 42, 42)],
    )
    def test_counts(self, d, total, data, mx, mz):
        lat = build_lattice(d)
        assert lat.n_qubits == total
        assert len(lat.data_qubits()) == data
        assert len(lat.measure_qubits(MEASURE_X)) == mx
        assert len(lat.measure_qubits(MEASURE_Z)) == mz

    def test_one_logical_qubit(self):
        lat = build_lattice(3)
        assert len(lat.data_qubits()) - len(lat.stabilizers) == 1

    def test_stabilizer_weights(self):
        for d in (3, 5):
            lat = build_lattice(d)
            for st in lat.stabilizers:
                assert len(st.data) in (3, 4)
                for q in st.data:
                    assert lat.role(q) == DATA

    def test_logical_operators(self):
        for d in (3, 5, 7):
            lat = build_lattice(d)
            assert len(lat.logical_x) == d
            assert len(lat.logical_z) == d
            assert overlap(lat.logical_x, lat.logical_z) == 1

    @pytest.mark.parametrize("d", [3, 5, 7, 9])
    def test_commutation(self, d):
        lat = build_lattice(d)
        for st in lat.stabilizers:
            if st.kind == MEASURE_Z:
                assert overlap(lat.logical_x, st.data) % 2 == 0
            else:
                assert overlap(lat.logical_z, st.data) % 2 == 0

    def test_rejects_bad_distance(self):
        with pytest.raises(ValueError):
            build_lattice(1)
        with pytest.raises(ValueError):
            build_lattice(0)

    def test_deterministic(self):
        assert build_lattice(5) is build_lattice(5)

    def test_min_weight_logical_is_d_exhaustive(self):
        """At d=3 no product of X stabilizers shortens logicalX below 3."""
        lat = build_lattice(3)
        x_stabs = [st for st in lat.stabilizers if st.kind == MEASURE_X]
        base = set(lat.logical_x)
        best = len(base)
        for r in range(len(x_stabs) + 1):
            for combo in itertools.combinations(x_stabs, r):
                support = set(base)
                for st in combo:
                    support ^= set(st.data)
                best = min(best, len(support))
        assert best == 3


class TestSchedule:
    def test_layer_structure(self):
        lat = build_lattice(3)
        circ = schedule_round(lat)
        assert len(circ.layers) == 8
        for layer in circ.layers:
            qubits = [q for g in layer for q in g.qubits]
            assert len(qubits) == len(set(qubits)) == lat.n_qubits

    def test_layer_contents_d3(self):
        lat = build_lattice(3)
        circ = schedule_round(lat)
        kinds0 = [g.kind for g in circ.layers[0]]
        assert kinds0.count(INIT) == 12 and kinds0.count(IDENTITY) == 13
        assert [g.kind for g in circ.layers[1]].count(HADAMARD) == 6
        ncnot = sum(g.kind == CNOT for _, g in circ.gates())
        assert ncnot == 40 == sum(len(st.data) for st in lat.stabilizers)
        assert [g.kind for g in circ.layers[7]].count(MEASURE) == 12

    def test_d5_full_coverage(self):
        circ = schedule_round(build_lattice(5))
        assert len(circ.layers) == 8
        for layer in circ.layers:
            qubits = [q for g in layer for q in g.qubits]
            assert len(qubits) == len(set(qubits)) == 81

    def test_cnot_directions(self):
        lat = build_lattice(3)
        for _, g in schedule_round(lat).gates():
            if g.kind != CNOT:
                continue
            roles = (lat.role(g.qubits[0]), lat.role(g.qubits[1]))
            assert roles in ((DATA, MEASURE_Z), (MEASURE_X, DATA))

    def test_pure_function(self):
        lat = build_lattice(3)
        assert schedule_round(lat) == schedule_round(lat)


class TestDisplacement:
    def test_paper_example(self):
        assert displacement(((1, 1), (2, 1)), (4, 3)) == (2, 2)

    def test_axis_aligned(self):
        assert displacement(((0, 0),), (0, 5)) == (0, 5)

    def test_componentwise_minimum(self):
        assert displacement(((1, 1), (2, 1)), (2, 4)) == (0, 3)

    def test_rejects_gate_qubit(self):
        with pytest.raises(ValueError):
            displacement(((1, 1), (2, 1)), (1, 1))


class TestStabCoords:
    def test_round_trip(self):
        lat = build_lattice(5)
        for st in lat.stabilizers:
            r, c = stab_rc(st.measure, st.kind)
            assert stab_coord(r, c, st.kind) == st.measure

    def test_ranges(self):
        d = 5
        lat = build_lattice(d)
        for st in lat.stabilizers:
            r, c = stab_rc(st.measure, st.kind)
            if st.kind == MEASURE_Z:
                assert 0 <= r <= d - 1 and 0 <= c <= d - 2
            else:
                assert 0 <= r <= d - 2 and 0 <= c <= d - 1
