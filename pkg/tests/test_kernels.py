"""Backend agreement: the compiled kernels must match the numpy fallback."""

import numpy as np
import pytest

from survmatch._kernels import _fallback, available_backends

backends = [_fallback]
if "cython" in available_backends():
    from survmatch._kernels import _speedups

    backends.append(_speedups)


def random_case(rng, n=40, m=25):
    t_hat = rng.exponential(2.0, n)
    y = (rng.random(n) < 0.6).astype(float)
    grid = np.unique(np.round(rng.exponential(2.0, m), 2))
    return t_hat, y, grid


def test_compiled_backend_is_available():
    # the build is expected to produce the extension in this environment
    assert "cython" in available_backends()


@pytest.mark.parametrize("impl", backends, ids=lambda b: b.BACKEND)
def test_product_limit_guards_exhausted_denominator(impl):
    s = impl.product_limit(np.array([1.0, 0.0, 1.0]), np.array([2.0, 0.0, 1.0]))
    assert np.array_equal(s, [0.5, 0.5, 0.0])


def test_pkm_sums_bitwise_agreement():
    rng = np.random.default_rng(0)
    for _ in range(20):
        t_hat, y, grid = random_case(rng)
        results = [impl.pkm_sums(t_hat, y, grid) for impl in backends]
        for num, den in results[1:]:
            assert np.array_equal(num, results[0][0])
            assert np.array_equal(den, results[0][1])


def test_dkm_sums_agreement():
    rng = np.random.default_rng(1)
    for _ in range(20):
        _, y, grid = random_case(rng)
        cdf = np.sort(rng.random((y.size, grid.size)), axis=1)
        results = [impl.dkm_sums(cdf, y, grid) for impl in backends]
        for num, den in results[1:]:
            assert np.allclose(num, results[0][0], rtol=1e-13, atol=1e-13)
            assert np.allclose(den, results[0][1], rtol=1e-13, atol=1e-13)


def test_smooth_forward_and_vjp_agreement():
    rng = np.random.default_rng(2)
    for _ in range(20):
        t_hat, y, grid = random_case(rng)
        tau = float(rng.uniform(0.02, 0.5))
        g = rng.standard_normal(grid.size)
        outs, grads = [], []
        for impl in backends:
            s, cache = impl.smooth_pkm_forward(t_hat, y, grid, tau)
            outs.append(s)
            grads.append(impl.smooth_pkm_vjp(cache, g))
        for s, dt in zip(outs[1:], grads[1:]):
            assert np.allclose(s, outs[0], rtol=1e-12, atol=1e-14)
            assert np.allclose(dt, grads[0], rtol=1e-9, atol=1e-12)


def test_smooth_forward_saturates_to_exact(capsys):
    rng = np.random.default_rng(3)
    for impl in backends:
        t_hat, y, grid = random_case(rng)
        t_hat = t_hat + 1e-3  # off the grid
        s, _ = impl.smooth_pkm_forward(t_hat, y, grid, 1e-9)
        num, den = impl.pkm_sums(t_hat, y, grid)
        assert np.max(np.abs(s - impl.product_limit(num, den))) < 1e-9


def test_forced_fallback_env(monkeypatch):
    import importlib

    import survmatch._kernels as K

    monkeypatch.setenv("SURVMATCH_PURE", "1")
    mod = importlib.reload(K)
    try:
        assert mod.BACKEND == "numpy"
    finally:
        monkeypatch.delenv("SURVMATCH_PURE")
        importlib.reload(K)
