"""Compiled and plain-numpy kernel paths must agree bit-for-bit in results.

The fallback is selected by re-importing the kernels with the JIT decorator
neutralized, so both variants of each function run in one process.
"""

import importlib
import sys

import numpy as np
import pytest

import relaypair._numba
import relaypair.kernels as kernels


@pytest.fixture(scope="module")
def plain():
    saved_njit = relaypair._numba.njit
    saved_flag = relaypair._numba.NUMBA_ENABLED
    relaypair._numba.njit = relaypair._numba._nop_njit
    relaypair._numba.NUMBA_ENABLED = False
    spec = importlib.util.spec_from_file_location(
        "relaypair._kernels_plain", kernels.__file__)
    mod = importlib.util.module_from_spec(spec)
    sys.modules[spec.name] = mod
    try:
        spec.loader.exec_module(mod)
        yield mod
    finally:
        relaypair._numba.njit = saved_njit
        relaypair._numba.NUMBA_ENABLED = saved_flag
        sys.modules.pop(spec.name, None)


def _instance(seed, m=6):
    rng = np.random.default_rng(seed)
    a_sd = rng.uniform(0.01, 2.0, m)
    a_sr = rng.uniform(0.01, 4.0, m)
    a_rd = rng.uniform(0.01, 4.0, m)
    w = rng.uniform(0.5, 2.0, m)
    return w, a_sd, a_sr, a_rd


def test_waterfill_agrees(plain):
    for seed in range(10):
        rng = np.random.default_rng(seed)
        g = rng.uniform(1e-3, 5.0, 12)
        w = rng.uniform(0.2, 2.0, 12)
        p1, m1 = kernels.waterfill_kernel(g, w, 7.0)
        p2, m2 = plain.waterfill_kernel(g, w, 7.0)
        assert np.array_equal(p1, p2)
        assert m1 == m2


def test_total_scores_agree(plain):
    w, a_sd, a_sr, a_rd = _instance(1)
    gains = np.outer(a_sr, a_rd) / (a_sr[:, None] + a_rd[None, :])
    alpha = np.linspace(0.0, 1.0, 6)
    s1, p1 = kernels.total_scores(w, gains, 0.3, alpha)
    s2, p2 = plain.total_scores(w, gains, 0.3, alpha)
    # log1p can differ by an ulp between the compiled and libm paths
    np.testing.assert_allclose(s1, s2, rtol=1e-13, atol=1e-13)
    assert np.array_equal(p1, p2)


def test_ind_tables_and_scores_agree(plain):
    w, a_sd, a_sr, a_rd = _instance(2)
    g1, cs1, cr1 = kernels.ind_tables(a_sd, a_sr, a_rd, 0.2, 0.5)
    g2, cs2, cr2 = plain.ind_tables(a_sd, a_sr, a_rd, 0.2, 0.5)
    assert np.array_equal(g1, g2)
    assert np.array_equal(cs1, cs2)
    assert np.array_equal(cr1, cr2)
    alpha = np.zeros(6)
    s1, p1 = kernels.ind_scores(w, g1, cs1, cr1, 0.2, 0.5, alpha)
    s2, p2 = plain.ind_scores(w, g2, cs2, cr2, 0.2, 0.5, alpha)
    np.testing.assert_allclose(s1, s2, rtol=1e-13, atol=1e-13)
    assert np.array_equal(p1, p2)


def test_nu_solve_agrees(plain):
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        m = 8
        gains = rng.uniform(0.05, 4.0, m)
        w = rng.uniform(0.5, 2.0, m)
        c_r = rng.uniform(0.0, 0.5, m)
        c_s = 1.0 - c_r
        out1 = kernels.nu_solve(gains, w, c_s, c_r, 0.7, 4.0)
        out2 = plain.nu_solve(gains, w, c_s, c_r, 0.7, 4.0)
        for a, b in zip(out1, out2):
            assert np.array_equal(np.asarray(a), np.asarray(b))


def test_phase1_agrees(plain):
    w, a_sd, a_sr, a_rd = _instance(3)
    gains = kernels.ind_tables(a_sd, a_sr, a_rd, 1.0, 1.0)[0]

    def run(mod):
        alpha = np.linspace(0.1, 0.9, 6)
        trace = np.zeros((400, 4))
        return mod.total_phase1(w, gains.copy(), 5.0, 1.3, alpha.copy(),
                                0.05, 0.01, 400, 60, trace)

    r1 = run(kernels)
    r2 = run(plain)
    assert r1[0] == r2[0]
    assert r1[1] == pytest.approx(r2[1], rel=1e-9)
    assert r1[2] == pytest.approx(r2[2], rel=1e-9)
