"""Batch runners that back the CLI subcommands."""

import numpy as np
import pytest

from dicke2p.dynamics import rabi_see_analytic
from dicke2p.protocols import ALL_OUTCOMES
from dicke2p.scans import (
    OUTCOME_SUFFIX,
    bell_ensemble,
    bell_timing,
    fidelity_scan,
    ghz_sweep,
    rabi_curve,
    wigner_panels,
)


def test_outcome_suffixes_cover_all_outcomes():
    assert set(OUTCOME_SUFFIX) == set(ALL_OUTCOMES)
    assert sorted(OUTCOME_SUFFIX.values()) == ["mm", "mp", "pm", "pp"]


class TestRabiCurve:
    def test_columns_and_start(self):
        r = rabi_curve(nbar=4.0, points=9)
        assert r.columns == ("gt_over_pi", "see_numeric", "see_analytic")
        assert r.rows.shape == (9, 3)
        assert r.rows[0, 0] == 0.0
        # both atoms start excited, so the summed population begins at 2
        assert r.rows[0, 1] == pytest.approx(2.0, abs=1e-9)

    def test_analytic_column_matches_closed_form(self):
        r = rabi_curve(nbar=4.0, g=-0.002, points=9)
        t = r.rows[:, 0] * np.pi / 0.002
        np.testing.assert_allclose(
            r.rows[:, 2], rabi_see_analytic(2.0, -0.002, t), atol=1e-12
        )


class TestFidelityScan:
    def test_tiny_run_structure(self):
        r = fidelity_scan(nbars=(4,), ensemble=2, seed=9, time_points=3)
        assert r.columns == (
            "gt_over_pi",
            "mean_FW_nbar4",
            "stderr_FW_nbar4",
            "mean_F_nbar4",
            "stderr_F_nbar4",
        )
        assert r.rows.shape == (3, 5)
        # both channels start at unit fidelity
        np.testing.assert_allclose(r.rows[0, [1, 3]], 1.0, atol=1e-9)
        assert "validity" in r.meta

    def test_seeded_run_is_deterministic(self):
        a = fidelity_scan(nbars=(4,), ensemble=2, seed=9, time_points=3)
        b = fidelity_scan(nbars=(4,), ensemble=2, seed=9, time_points=3)
        np.testing.assert_array_equal(a.rows, b.rows)

    def test_seed_changes_rows(self):
        a = fidelity_scan(nbars=(4,), ensemble=2, seed=9, time_points=3)
        b = fidelity_scan(nbars=(4,), ensemble=2, seed=10, time_points=3)
        assert not np.array_equal(a.rows[1:], b.rows[1:])


class TestGhzSweep:
    def test_analytic_engine_saturates(self):
        r = ghz_sweep(nbars=(4, 6), engine="analytic")
        assert r.columns == ("nbar", "fidelity_ghz")
        np.testing.assert_allclose(r.rows[:, 1], 1.0, atol=1e-12)


class TestBellEnsemble:
    def test_tiny_run_structure(self):
        r = bell_ensemble(nbars=(6,), ensemble=4, seed=2)
        assert r.rows.shape == (1, 13)
        rates = r.rows[0, [3, 6, 9, 12]]
        assert rates.sum() == pytest.approx(1.0, abs=1e-12)
        means = r.rows[0, [1, 4, 7, 10]]
        assert np.all((means >= 0.0) & (means <= 1.0))


class TestBellTiming:
    def test_probabilities_normalized_along_sweep(self):
        r = bell_timing(nbar=6.0, points=7)
        probs = r.rows[:, [2, 4, 6, 8]]
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert r.rows[0, 0] < 0.5 < r.rows[-1, 0]


class TestWignerPanels:
    def test_three_panels_with_metadata(self):
        with pytest.warns(UserWarning, match="fringe"):
            panels = wigner_panels(nbar=4.0, grid_points=41)
        assert sorted(panels) == ["t0", "tr2", "tr4"]
        for res in panels.values():
            assert res.columns == ("beta_re", "beta_im", "wigner")
            assert res.rows.shape == (41 * 41, 3)
            assert res.meta["span"] > 0
        assert panels["t0"].meta["integral"] == pytest.approx(1.0, abs=0.05)
