import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhartley.verification import (
    Check,
    hartley_norm,
    hartley_states,
    max_far_overlap,
    overlap_map,
    run_checks,
)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_all_checks_pass(n):
    checks = run_checks(n)
    assert all(c.passed for c in checks), [c.as_dict() for c in checks if not c.passed]
    assert {c.name for c in checks} >= {"qht_dht_block", "qht_involution_ancilla0", "feature_norm"}


def test_corrupted_transform_is_detected():
    failed = {c.name for c in run_checks(3, corrupt_qht=True) if not c.passed}
    assert "qht_dht_block" in failed


def test_check_margin():
    c = Check("x", 1, 1e-12, 1e-10)
    assert c.passed and c.margin == pytest.approx(1e-10 - 1e-12)
    assert not Check("x", 1, 1.0, 1e-10).passed


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 5), x=st.floats(0, 31, allow_nan=False))
def test_branch_probability_is_half_the_squared_norm(n, x):
    _, prob = hartley_states(n, [x])
    assert prob[0] == pytest.approx(0.5 * hartley_norm(n, x) ** 2, abs=1e-12)


def test_overlap_map_is_symmetric_with_unit_diagonal():
    xs, ov = overlap_map(3, 0.25)
    assert xs[0] == 0 and xs[-1] == pytest.approx(7)
    assert np.allclose(np.diag(ov), 1)
    assert np.allclose(ov, ov.T)
    assert ov.max() <= 1 + 1e-12


def test_rz_gate_suppresses_far_overlaps():
    assert max_far_overlap(5, 0.1, gap=1.0) < max_far_overlap(5, 0.1, gap=1.0, x_rotation=False)
