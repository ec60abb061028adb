"""Bundled benchmark states: integrity, conditioning, labels."""

import hashlib

import numpy as np
import pytest

from qembezzle import load_fixture, reference_initial_state
from qembezzle.errors import FixtureCorrupt
from qembezzle.fixtures import (
    LABEL_KINDS,
    _condition,
    all_fixtures,
    fixture_label,
    fixture_row_count,
)
from qembezzle.teleport import average_fidelity_from_fraction, entanglement_fraction


class TestInventory:
    def test_row_counts(self):
        assert fixture_row_count("I") == 2
        assert fixture_row_count("II") == 15
        assert fixture_row_count("III") == 2
        assert fixture_row_count("reference") == 1

    def test_unknown_table(self):
        with pytest.raises(FixtureCorrupt):
            load_fixture("IV", 0)

    def test_row_out_of_range(self):
        with pytest.raises(FixtureCorrupt):
            load_fixture("I", 5)


class TestConditioning:
    def test_every_fixture_is_valid_state(self):
        for table, row, _, state in all_fixtures():
            assert abs(np.trace(state.mat).real - 1.0) < 1e-10, (table, row)
            assert np.max(np.abs(state.mat - state.mat.conj().T)) < 1e-12
            assert state.min_eigenvalue() >= -1e-10, (table, row)
            assert state.split == (2, 2)

    def test_trace_budget_enforced(self):
        bad = np.eye(4, dtype=complex) / 4 * 1.05
        with pytest.raises(FixtureCorrupt):
            _condition(bad)

    def test_eigenvalue_budget_enforced(self):
        bad = np.diag([0.6, 0.5, 0.0, -0.1]).astype(complex)
        with pytest.raises(FixtureCorrupt):
            _condition(bad)

    def test_rounding_level_negativity_is_repaired(self):
        mat = np.diag([0.6, 0.403, -0.003, 0.0]).astype(complex)
        fixed = _condition(mat)
        assert float(np.linalg.eigvalsh(fixed)[0]) >= -1e-12
        assert abs(np.trace(fixed).real - 1.0) < 1e-12


class TestLabels:
    def test_label_kinds(self):
        assert LABEL_KINDS == {"I": "avg_fidelity", "II": None, "III": "fraction", "reference": None}

    def test_teleport_table_average_fidelities(self):
        for row in range(fixture_row_count("I")):
            label = fixture_label("I", row)
            state = load_fixture("I", row)
            f = average_fidelity_from_fraction(entanglement_fraction(state), 2)
            assert abs(f - label) <= 0.01, row

    def test_distill_table_fractions(self):
        for row in range(fixture_row_count("III")):
            label = fixture_label("III", row)
            state = load_fixture("III", row)
            assert abs(entanglement_fraction(state) - label) <= 0.01, row

    def test_first_rows_reference_windows(self):
        f0 = average_fidelity_from_fraction(entanglement_fraction(load_fixture("I", 0)), 2)
        assert 0.74 <= f0 <= 0.76
        assert 0.69 <= entanglement_fraction(load_fixture("III", 0)) <= 0.71

    def test_separable_table_unlabelled(self):
        assert all(fixture_label("II", r) is None for r in range(fixture_row_count("II")))


class TestReferenceState:
    def test_fixed_values(self):
        rho = reference_initial_state()
        assert abs(entanglement_fraction(rho) - 0.695) < 1e-12
        assert rho.min_eigenvalue() > 0  # full rank as printed

    def test_checksums_pinned(self):
        from importlib import resources

        from qembezzle.fixtures import _CHECKSUMS

        for name, digest in _CHECKSUMS.items():
            blob = resources.files("qembezzle._data").joinpath(f"{name}.json").read_bytes()
            assert hashlib.sha256(blob).hexdigest() == digest, name
