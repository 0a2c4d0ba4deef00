from fractions import Fraction

import numpy as np
import pytest

from kerrspec.classify import (
    CrossingEvent,
    LevelPair,
    QuasiSpinLabel,
    TwoBosonState,
    degeneracy_groups,
    detect_crossings,
    kerr_exact_levels,
    track_crossing_location,
)
from kerrspec.eigensolve import converged_spectrum
from kerrspec.fock import HamiltonianSpec
from kerrspec.sweep import SweepPlan, run_sweep


class TestKerrExactLevels:
    def test_even_eta_table(self):
        levels = kerr_exact_levels(4)
        assert [lv.energy for lv in levels] == [0, 0, 2, 2, 6, 6]
        assert [(lv.state.n1, lv.state.n2) for lv in levels] == [
            (2, 3), (3, 2), (1, 4), (4, 1), (0, 5), (5, 0)
        ]
        assert [lv.label.m for lv in levels] == [
            Fraction(1, 2), Fraction(-1, 2), Fraction(3, 2),
            Fraction(-3, 2), Fraction(5, 2), Fraction(-5, 2),
        ]
        assert all(lv.label.j == Fraction(5, 2) for lv in levels)

    def test_odd_eta_table(self):
        levels = kerr_exact_levels(3)
        assert [lv.energy for lv in levels] == [0, 1, 1, 4, 4]
        assert [lv.label.m for lv in levels] == [0, 1, -1, 2, -2]
        assert levels[0].label.j == 2

    def test_eta_zero_pair(self):
        levels = kerr_exact_levels(0)
        assert [lv.energy for lv in levels] == [0, 0]
        assert {lv.state.n1 for lv in levels} == {0, 1}

    def test_count_truncates_and_validates(self):
        assert len(kerr_exact_levels(4, count=4)) == 4
        with pytest.raises(ValueError):
            kerr_exact_levels(4, count=7)
        with pytest.raises(ValueError):
            kerr_exact_levels(-1)

    @pytest.mark.parametrize("eta", range(9))
    def test_energy_identities(self, eta):
        levels = kerr_exact_levels(eta)
        eta_prime = eta + 1
        ground = min(n * n - eta_prime * n for n in range(eta + 2))
        for lv in levels:
            n1 = lv.state.n1
            # E = n1^2 - eta' n1, counted from the lowest state
            assert lv.energy == n1 * n1 - eta_prime * n1 - ground
            # two-boson identity m^2 = N^2/4 + n1^2 - N n1, exactly
            m, N = lv.label.m, lv.state.N
            assert m * m == Fraction(N * N, 4) + n1 * n1 - N * n1

    @pytest.mark.parametrize("eta", range(1, 9))
    def test_pair_parity_rule(self, eta):
        levels = kerr_exact_levels(eta)
        by_energy: dict[int, list] = {}
        for lv in levels:
            by_energy.setdefault(lv.energy, []).append(lv)
        for group in by_energy.values():
            if len(group) == 2:
                same = group[0].label.parity == group[1].label.parity
                assert same == (eta % 2 == 1)

    def test_label_invariants_enforced(self):
        with pytest.raises(ValueError):
            QuasiSpinLabel(j=Fraction(1, 2), m=Fraction(3, 2), parity=1)
        with pytest.raises(ValueError):
            QuasiSpinLabel(j=1, m=Fraction(1, 2), parity=1)
        with pytest.raises(ValueError):
            TwoBosonState(-1, 3)


class TestDegeneracyGroups:
    def test_diagonal_kerr_exact_pairs(self):
        cs = converged_spectrum(HamiltonianSpec(eta=4), n_max=20, n_probe=30)
        groups = degeneracy_groups(cs)
        assert [g.multiplicity for g in groups[:3]] == [2, 2, 2]
        assert all(g.max_internal_gap == 0.0 for g in groups[:3])

    def test_odd_eta_multiplicity_pattern(self):
        cs = converged_spectrum(HamiltonianSpec(eta=5), n_max=20, n_probe=30)
        assert [g.multiplicity for g in degeneracy_groups(cs)[:4]] == [1, 2, 2, 2]

    def test_driven_even_eta_pairs_persist(self):
        cs = converged_spectrum(HamiltonianSpec(eta=6, xi=1.0), 300, 360)
        groups = degeneracy_groups(cs, tol_deg=1e-6)
        assert [g.multiplicity for g in groups[:4]] == [2, 2, 2, 2]

    def test_driven_odd_eta_singlet_remains(self):
        cs = converged_spectrum(HamiltonianSpec(eta=5, xi=1.0), 300, 360)
        groups = degeneracy_groups(cs, tol_deg=1e-6)
        assert groups[0].multiplicity == 1
        # nearest neighbour well separated from the former m = 0 level
        assert groups[1].energies[0] - groups[0].energies[0] > 1e-5

    def test_plain_array_input(self):
        groups = degeneracy_groups(np.array([0.0, 0.0, 1.0, 5.0, 5.0 + 1e-9]), 1e-6)
        assert [g.multiplicity for g in groups] == [2, 1, 2]

    def test_relative_tolerance_above_unit_energy(self):
        # at |E| = 1000 a gap of 1e-4 sits inside tol_deg = 1e-6 relative
        groups = degeneracy_groups(np.array([1000.0, 1000.0001, 2000.0]), 1e-6)
        assert [g.multiplicity for g in groups] == [2, 1]


class TestCrossingEvents:
    def test_kind_sector_consistency(self):
        with pytest.raises(ValueError):
            CrossingEvent("true_crossing", 1.0, (0, 0, 0, 1), 0.0)
        with pytest.raises(ValueError):
            CrossingEvent("avoided_crossing", 1.0, (0, 0, 1, 0), 0.1)
        with pytest.raises(ValueError):
            CrossingEvent("saddle", 1.0, (0, 0, 1, 0), 0.1)

    def test_diagonal_sweep_crossings_at_integers(self):
        # level curves of the squeeze-free Hamiltonian cross exactly at integer eta
        plan = SweepPlan(
            varying="eta", grid=tuple(0.08 * i for i in range(40)),
            fixed=HamiltonianSpec(), n_max=10, n_probe=20,
        )
        events = detect_crossings(run_sweep(plan), max_levels=4)
        true_events = [e for e in events if e.kind == "true_crossing"]
        assert true_events
        for e in true_events:
            assert abs(e.param_value - round(e.param_value)) < 1e-9

    def test_driven_sweep_true_and_avoided(self):
        plan = SweepPlan(
            varying="eta", grid=tuple(1.53 + 0.06 * i for i in range(60)),
            fixed=HamiltonianSpec(xi=1.0), n_max=80, n_probe=120,
        )
        grid = run_sweep(plan)
        events = detect_crossings(grid, max_levels=3)
        true_params = [e.param_value for e in events if e.kind == "true_crossing"]
        # persistent inter-parity degeneracies pin to even integers
        assert any(abs(p - 2.0) < 1e-6 for p in true_params)
        assert any(abs(p - 4.0) < 1e-6 for p in true_params)
        avoided = [e for e in events if e.kind == "avoided_crossing"]
        assert avoided
        for e in avoided:
            ra, _, rb, _ = e.level_pair
            assert ra == rb and e.min_gap >= 0
        for e in events:
            if e.kind == "true_crossing":
                assert e.min_gap < 1e-9

    def test_refinement_tightens_gap(self):
        plan = SweepPlan(
            varying="eta", grid=tuple(2.5 + 0.1 * i for i in range(12)),
            fixed=HamiltonianSpec(xi=1.0), n_max=60, n_probe=90,
        )
        grid = run_sweep(plan)
        events = detect_crossings(grid, max_levels=2)
        for e in events:
            if e.kind == "avoided_crossing":
                ra, ia, rb, ib = e.level_pair
                coarse = np.min(np.abs(grid.curves[ra][:, ia] - grid.curves[rb][:, ib]))
                assert e.min_gap <= coarse + 1e-12


class TestTrackCrossing:
    def test_two_photon_drive_pins_even_eta(self):
        points = track_crossing_location(
            LevelPair(0, 3, 1, 3), "P2", [0.5, 1.0, 2.0, 4.0], 6, n_max=300
        )
        assert all(p.found for p in points)
        assert max(abs(p.eta_star - 6.0) for p in points) < 1e-6

    def test_three_photon_drift_small_and_eta_independent(self):
        drifts = {}
        for eta0, pair in ((2, LevelPair(1, 0, 2, 0)), (4, LevelPair(2, 0, 0, 0))):
            pts = track_crossing_location(pair, "P3", [0.05], eta0, n_max=200)
            assert pts[0].found
            drifts[eta0] = abs(pts[0].eta_star - eta0)
        assert 0 < drifts[2] < 0.01 and 0 < drifts[4] < 0.01
        assert drifts[2] == pytest.approx(drifts[4], rel=0.02)  # eta independent

    def test_four_photon_drift_larger_and_eta_dependent(self):
        drifts = {}
        for eta0, pair in ((2, LevelPair(1, 0, 2, 0)), (6, LevelPair(3, 0, 0, 0))):
            pts = track_crossing_location(pair, "P4", [0.05], eta0, n_max=200)
            assert pts[0].found
            drifts[eta0] = abs(pts[0].eta_star - eta0)
        p3 = track_crossing_location(LevelPair(2, 0, 0, 0), "P3", [0.05], 4, n_max=200)
        assert min(drifts.values()) > 5 * abs(p3[0].eta_star - 4)  # well above P3
        assert drifts[6] / drifts[2] == pytest.approx(2.0, rel=0.05)  # grows with eta

    def test_unknown_coupling_rejected(self):
        with pytest.raises(ValueError):
            track_crossing_location(LevelPair(0, 0, 1, 0), "P5", [0.1], 2)

    def test_lost_crossing_reported(self):
        # same-parity pair never changes sign: no root to find
        points = track_crossing_location(
            LevelPair(0, 1, 0, 0), "P2", [1.0], 6, n_max=120, max_expand=0,
            bracket_halfwidth=0.2,
        )
        assert not points[0].found and points[0].eta_star is None
