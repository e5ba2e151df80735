import math

import numpy as np
import pytest

from qec_lab.codes import binomial_code, custom_code, sab_code
from qec_lab.errors import ConvergenceFailure, InvalidConfig
from qec_lab.channels import phase_rotation
from qec_lab.optimizer import (OptimizationConfig, biconvex, compress_encoding, derotate_to_real,
                               noise_channel, okb_scan, optimal_encoding_step, random_encoding, refine)
from qec_lab.recovery import solve_optimal_recovery


def test_config_validation():
    with pytest.raises(InvalidConfig):
        OptimizationConfig(nbar=0.0)
    with pytest.raises(InvalidConfig):
        OptimizationConfig(nbar=-1.0)
    with pytest.raises(InvalidConfig):
        OptimizationConfig(restarts=0)
    with pytest.raises(InvalidConfig):
        OptimizationConfig(gamma=1.0)
    assert OptimizationConfig().key() == OptimizationConfig().key()
    assert OptimizationConfig(seed=1).key() != OptimizationConfig().key()


def test_noise_channel_reduces_to_loss():
    from qec_lab.channels import loss_channel
    a = noise_channel(0.1, 0.0, 8).choi().matrix
    b = loss_channel(0.1, 8).choi().matrix
    assert np.abs(a - b).max() < 1e-12


@pytest.mark.parametrize("real", [False, True])
def test_random_encoding_meets_cap(rng, real):
    V = random_encoding(12, 1.0, rng, real=real)
    assert np.allclose(V.conj().T @ V, np.eye(2), atol=1e-12)
    assert 0.5 * np.sum(np.arange(12)[:, None] * np.abs(V) ** 2) <= 1.0 + 1e-12
    if real:
        assert np.abs(V.imag).max() == 0


def test_noiseless_optimum_is_perfect():
    res = biconvex(OptimizationConfig(D=6, gamma=0.0, restarts=2, max_rounds=5))
    assert abs(res.fidelity - 1) < 1e-8
    assert res.converged


def test_encoding_step_improves_binomial():
    D = 12
    ch = noise_channel(0.1, 0.5, D)
    b = binomial_code(2, 2, D)
    opt = solve_optimal_recovery(b, ch)
    X, f = optimal_encoding_step(opt.recovery, ch, nbar=2.0)
    # bin(2,2) has mean photon number 2, hence is feasible
    assert f >= opt.fidelity - 1e-8
    energy = np.trace(0.5 * np.kron(np.diag(np.arange(D)), np.eye(2)) @ X).real
    assert energy <= 2.0 + 1e-7
    with pytest.raises(InvalidConfig):
        optimal_encoding_step(opt.recovery, ch, nbar=0.0)


def test_short_run_slack_and_history():
    cfg = OptimizationConfig(D=10, gamma=0.1, restarts=2, max_rounds=40, f_tol=1e-3)
    res = biconvex(cfg)
    for r in res.per_restart:
        assert r.energy_slack >= -1e-8
        assert all(b >= a - 1e-8 for a, b in zip(r.history, r.history[1:]))
    assert res.fidelity == max(r.fidelity for r in res.per_restart)
    # beats bin(2,2) at the same energy
    fb = solve_optimal_recovery(binomial_code(2, 2, 10), noise_channel(0.1, 0.0, 10)).fidelity
    assert res.fidelity > fb


def test_determinism_and_checkpoint(tmp_path):
    cfg = OptimizationConfig(D=8, gamma=0.1, restarts=2, max_rounds=10, f_tol=1e-2)
    a = biconvex(cfg, checkpoint_dir=tmp_path)
    b = biconvex(cfg)
    assert a.fidelity == b.fidelity
    # a resumed run reads the checkpoints and agrees
    c = biconvex(cfg, checkpoint_dir=tmp_path)
    assert c.fidelity == a.fidelity
    assert len(list(tmp_path.glob("restart-*.json"))) == 2


def test_convergence_failure_reported():
    cfg = OptimizationConfig(D=8, gamma=0.1, restarts=1, max_rounds=2, f_tol=1e-15)
    with pytest.raises(ConvergenceFailure):
        biconvex(cfg)


def test_refine_does_not_lose_fidelity():
    b = binomial_code(2, 2, 10)
    f0 = solve_optimal_recovery(b, noise_channel(0.1, 0.0, 10)).fidelity
    res = refine(b, OptimizationConfig(D=10, gamma=0.1, restarts=1, max_rounds=3, f_tol=1e-12))
    assert res.fidelity >= f0 - 1e-8


def test_compress_encoding_of_isometry():
    b = binomial_code(2, 2, 8)
    K = b.isometry
    X = np.outer(K.reshape(-1), K.reshape(-1).conj())
    V, w = compress_encoding(X, 8)
    assert abs(w - 1) < 1e-12
    assert abs(abs(np.vdot(V[:, 0], K[:, 0])) - 1) < 1e-12


def test_okb_consistency():
    N, S, g = 3, 2, 0.1
    D = 20
    K_sab = 2 * math.pi / (2 * S) ** 2
    best, fids = okb_scan(N, S, g, [0.0, K_sab], D)
    from qec_lab.channels import loss_channel
    ch = loss_channel(g, D)
    f_sab = solve_optimal_recovery(sab_code(N, S, D), ch).fidelity
    f_bin = solve_optimal_recovery(binomial_code(N, S, D), ch).fidelity
    assert abs(fids[1] - f_sab) < 1e-9
    assert abs(fids[0] - f_bin) < 1e-9
    with pytest.raises(InvalidConfig):
        okb_scan(N, S, g, [])


def test_derotation():
    b = sab_code(2, 2)
    theta, res = derotate_to_real(b)
    assert res < 1e-14
    rot = b.transformed(phase_rotation(0.37, b.dim))
    assert np.abs(rot.projector().imag).max() > 1e-2
    theta, res = derotate_to_real(rot)
    assert res < 1e-10
