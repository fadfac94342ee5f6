import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psimt.quaternion import I, J, K
from psimt.structural import STANDARD, embed, make_psi_theta, parse_theta, reduce_angle, verify_structural


def test_theta_zero_basis():
    psi = make_psi_theta(0.0)
    np.testing.assert_allclose(psi.psi, np.stack([I, K, J]), atol=1e-16)


def test_theta_half_pi_basis():
    psi = make_psi_theta(math.pi / 2)
    np.testing.assert_allclose(psi.psi, np.stack([I, -J, K]), atol=1e-16)


def test_theta_pi_basis():
    psi = make_psi_theta(math.pi)
    np.testing.assert_allclose(psi.psi, np.stack([I, -K, -J]), atol=1e-15)


def test_periodicity():
    a, b = make_psi_theta(0.7), make_psi_theta(0.7 + 2 * math.pi)
    np.testing.assert_allclose(a.psi, b.psi, atol=1e-14)
    assert reduce_angle(-0.5) == pytest.approx(2 * math.pi - 0.5)
    assert reduce_angle(2 * math.pi) == 0.0


@given(st.floats(-50, 50, allow_nan=False))
def test_structural_condition(theta):
    assert verify_structural(make_psi_theta(theta)) <= 1e-14


def test_standard_and_non_structural():
    assert verify_structural(STANDARD) == 0.0
    assert verify_structural(np.stack([I, I, J])) >= 0.1


def test_embed():
    psi = make_psi_theta(0.0)
    np.testing.assert_allclose(embed(psi, [1.0, 2.0, 3.0]), [0, 1, 3, 2])


@pytest.mark.parametrize("text, value", [("pi/2", math.pi / 2), ("pi", math.pi), ("3pi/2", 1.5 * math.pi), ("0.25", 0.25), (" 3PI/2 ", 1.5 * math.pi)])
def test_parse_theta(text, value):
    assert parse_theta(text) == value


def test_parse_theta_rejects():
    with pytest.raises(ValueError):
        parse_theta("half")
    with pytest.raises(ValueError):
        make_psi_theta(float("nan"))
