import math

import numpy as np
import pytest

import sbcpn


def test_dct_two_point():
    y = sbcpn.dct2(np.array([1.0, 1.0]))
    assert y[0] == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert y[1] == pytest.approx(0.0, abs=1e-15)
    x = np.random.default_rng(0).normal(size=9)
    assert np.allclose(sbcpn.idct2(sbcpn.dct2(x)), x, atol=1e-12)


def test_prox_examples():
    assert sbcpn.prox(np.array([3.0, 0.0, -0.5]), 1.0, "l1", 1.0).tolist() == [2.0, 0.0, 0.0]
    g = sbcpn.prox(np.array([3.0, 4.0]), 1.0, "group_l2", 1.0, group_width=2)
    assert np.allclose(g, [2.4, 3.2], atol=1e-14)
    with pytest.raises(ValueError):
        sbcpn.prox(np.array([1.0]), 0.0, "l1", 1.0)
    with pytest.raises(ValueError):
        sbcpn.prox(np.array([1.0]), 1.0, "huber", 1.0)


def test_students_t_instance_and_residual():
    inst = sbcpn.gen_students_t(80, seed=3)
    A, b = inst["A"], inst["b"]
    assert A.shape == (160, 80)
    assert np.allclose(A.T @ A, np.eye(80), atol=1e-12)
    assert np.count_nonzero(inst["x_true"]) == 2
    # residual at 0 against numpy: G = -softthr(-grad, lam)
    r = A @ np.zeros(80) - b
    grad = A.T @ (2 * r / (inst["nu"] + r**2))
    lam = inst["lam"]
    assert lam == pytest.approx(0.1 * np.abs(grad).max(), rel=1e-14)
    want = -np.sign(-grad) * np.maximum(np.abs(grad) - lam, 0.0)
    got = sbcpn.students_t_residual(A, b, inst["nu"], lam, np.zeros(80))
    assert np.allclose(got, want, atol=1e-12)


def test_solve_converges_and_decreases():
    tr = sbcpn.solve("problem = students_t\nn = 80\nstrategy = topk\nrecord_wall_clock = false\n", seed=1)
    assert tr["status"] == "converged"
    phi = tr["records"]["phi"]
    assert all(b <= a * (1 + 1e-10) for a, b in zip(phi, phi[1:]))
    assert tr["records"]["resid_norm"][-1] <= 1e-4
    assert tr["records"]["iter"] == list(range(len(phi)))


def test_bad_config_raises():
    with pytest.raises(ValueError, match="line 1|<python>:1"):
        sbcpn.solve("strategy = sideways\n")


def test_run_experiment_writes_files(tmp_path):
    out = tmp_path / "exp"
    cfg = f"problem = students_t\nn = 80\ntrials = 2\nrecord_wall_clock = false\noutput_dir = {out}\n"
    res = sbcpn.run_experiment(cfg)
    assert res["all_converged"]
    names = sorted(p.name for p in out.iterdir())
    assert names == ["average.csv", "metadata.txt", "reference_distance.csv", "trial_0.csv", "trial_1.csv"]
    header = (out / "trial_0.csv").read_text().splitlines()[0]
    assert header == sbcpn.TRACE_HEADER
