import math

import numpy as np
import pytest

import fbcoord


def test_power_alloc_two_streams():
    a = fbcoord.power_alloc(np.array([4.0, 2.0]), np.array([1.0, 1.0]), 1.0)
    assert a.mu == pytest.approx(1.0 / 7.0)
    assert a.x == pytest.approx([0.625, 0.375])


def test_nh_waterfill_diagonal():
    out = fbcoord.nh_waterfill(np.diag([3.0, 1.0]).astype(complex), np.eye(2, dtype=complex), 2, 1.0)
    assert abs(out.filter[0, 0]) == pytest.approx(math.sqrt(5.0 / 6.0))
    assert abs(out.filter[1, 1]) == pytest.approx(math.sqrt(1.0 / 6.0))
    assert out.active_streams == 2


def test_gmrq_max_is_generalized_eigvec():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q = a @ a.conj().T + 0.5 * np.eye(4)
    h = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    r = h @ h.conj().T
    x = fbcoord.gmrq_max(r, q, 1)
    lam = (x.conj().T @ r @ x).real / (x.conj().T @ q @ x).real
    assert np.linalg.norm(r @ x - lam * (q @ x)) <= 1e-8 * np.linalg.norm(r)


def test_whiten_and_cholesky():
    q = np.array([[4.0, 2.0], [2.0, 3.0]], dtype=complex)
    low = fbcoord.cholesky(q)
    assert np.allclose(low @ low.conj().T, q)
    assert np.allclose(fbcoord.whiten(q, q), np.eye(2))


def test_run_max_dlt_is_monotone():
    cfg = fbcoord.NetworkConfig.uniform(3, 2, 4, 4, 2, 0.01)
    ch = fbcoord.iid_channels(cfg, 11)
    filters, trace = fbcoord.run("MAX_DLT", cfg, ch, 6, seed=5)
    assert len(trace) == 7
    dlt = [e["dlt_fwd"] for e in trace]
    assert all(b >= a - 1e-8 * abs(a) for a, b in zip(dlt, dlt[1:]))
    assert fbcoord.sum_rate(cfg, ch, filters) == pytest.approx(trace[-1]["sum_rate"])


def test_overhead():
    assert fbcoord.overhead("prop", 4, 1, 3, 4, 4, 2) == 48


def test_experiment_roundtrip():
    spec = fbcoord.parse_experiment(
        "[network]\ncells = 2\nusers_per_cell = 1\ntx_antennas = 2\nrx_antennas = 2\nstreams = 1\n"
        "[channel]\nmodel = iid\nsnr_db = 10\n"
        "[run]\nalgos = MAX_DLT, UNCOORDINATED\niterations = 1, 2\nrealizations = 3\n"
    )
    rows, failures = fbcoord.run_experiment(spec)
    assert not failures
    assert len(rows) == 3 * 2 * 2
    assert {r["algo"] for r in rows} == {"MAX_DLT", "UNCOORDINATED"}


def test_errors_are_typed():
    with pytest.raises(fbcoord.NotPositiveDefinite):
        fbcoord.cholesky(np.zeros((2, 2), dtype=complex))
    with pytest.raises(ValueError):
        cfg = fbcoord.NetworkConfig.uniform(1, 1, 1, 1, 1, 1.0)
        fbcoord.run("NOPE", cfg, fbcoord.iid_channels(cfg, 1), 1)
