"""Re-run the independent oracles and compare with their frozen outputs."""

import pytest

from frozen import FD_EIGENVALUES_P04_OMEGA1, HANKEL_JOST


def test_hankel_oracle_reproduces_frozen_table():
    pytest.importorskip("mpmath")
    from oracles.hankel import SAMPLE_X, jost_reference

    for z, rows in HANKEL_JOST.items():
        assert [r[0] for r in rows] == SAMPLE_X
        for x, f, df in rows:
            g, dg = jost_reference(z, x)
            assert g == pytest.approx(f, rel=1e-14)
            assert dg == pytest.approx(df, rel=1e-12)


def test_fd_oracle_reproduces_frozen_eigenvalues():
    from oracles.fd_eigen import fd_eigenvalues

    fresh = fd_eigenvalues()
    assert fresh == pytest.approx(FD_EIGENVALUES_P04_OMEGA1, rel=1e-10)
