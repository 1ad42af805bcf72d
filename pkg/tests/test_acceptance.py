"""One pass/fail line per acceptance criterion.

Each test prints the criterion's report line (visible with ``pytest -s``)
and asserts that it passed. Bounds live in :mod:`mafoliation.acceptance`
and are restated in the test docstrings.
"""

import subprocess
import sys

import pytest

from mafoliation import acceptance
from mafoliation.catalog import CATALOG

SEED = 0


def _check(fn, number):
    c = acceptance._guarded(fn, number, SEED, CATALOG)
    print(c.line())
    assert c.number == number
    assert c.passed, c.line()


def test_01_ad_fd_oracle_agreement():
    """Derivatives of order <= 4 at 20 guarded points per potential, h = 1e-3, 4-point stencil, rel 1e-6."""
    _check(acceptance.c1_oracle, 1)


def test_02_reality_symmetry():
    """coeff(a, b) = conj(coeff(b, a)) within 1e-12 absolute."""
    _check(acceptance.c2_reality, 2)


def test_03_degenerate_ma_rank():
    """Levi rank equals p at >= 95% of guarded samples; never non-plurisubharmonic."""
    _check(acceptance.c3_rank, 3)


def test_04_holomorphic_entries():
    """Twist and S below 1e-9 over 100 samples of each holomorphic entry."""
    _check(acceptance.c4_holomorphic, 4)


def test_05_halfplane_closed_forms():
    """Twist -i/2 at (i, 0) within 1e-9; -i/(2 Im z1) and 1/(4 Im^2 z1) within rel 1e-8 at 50 samples."""
    _check(acceptance.c5_halfplane, 5)


def test_06_twist_ricci_identity():
    """|S^{jj} - |L^j|^2| <= 1e-8 (1 + |S^{jj}|); routes agree to rel 1e-8; Gram form PSD to -1e-10."""
    _check(acceptance.c6_twist_ricci, 6)


def test_07_fourth_derivative_identity():
    """Residual and vanishing clause <= 1e-8 at 20 adapted points per entry."""
    _check(acceptance.c7_fourth, 7)


def test_08_fifth_derivative_identity():
    """Residual <= 1e-7 at 20 points of halfplane and halfplane3."""
    _check(acceptance.c8_fifth, 8)


def test_09_curvature_equality_p1():
    """|[log S]_{jj} - 2S| <= 1e-6 S and first/second S derivatives to rel 1e-7 at 20 halfplane points."""
    _check(acceptance.c9_equality, 9)


def test_10_curvature_inequality_p2():
    """[log S]_{jj} - S >= -1e-8 at 20 halfplane3 points with S > 1e-8."""
    _check(acceptance.c10_inequality, 10)


def test_11_trace_inequality():
    """Margin >= -1e-12 on 1000 random matrices per p in 1..4; |margin| <= 1e-12 on scaled unitaries."""
    _check(acceptance.c11_trace, 11)


def test_12_lambda_relation():
    """(u, 3u) gives lambda = 3 and (u, u + re z1) gives 1; leafwise residual <= 1e-9."""
    _check(acceptance.c12_lambda, 12)


def test_13_frame_path():
    """Slope frame residual <= 1e-10, twist agreement 1e-8 at 10 points; bent frame residual >= 0.5 at 20."""
    _check(acceptance.c13_frames, 13)


@pytest.mark.slow
def test_14_selftest_is_byte_identical():
    """Two ``mafoliation selftest`` runs with the same seed print the same bytes."""
    cmd = [sys.executable, "-m", "mafoliation", "selftest", "--seed", str(SEED)]
    first = subprocess.run(cmd, capture_output=True, check=False)
    second = subprocess.run(cmd, capture_output=True, check=False)
    print(f"[{'PASS' if first.stdout == second.stdout else 'FAIL'}] 14 determinism: "
          f"{len(first.stdout)} bytes, exit codes {first.returncode}/{second.returncode}")
    assert first.returncode == 0, first.stdout.decode()
    assert first.stdout == second.stdout
