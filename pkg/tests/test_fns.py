import numpy as np
import pytest

from richlab.data import sample_dataset
from richlab.fns import (FnsLiteModel, FnsTrainConfig, SpectralCorrection,
                         fns_lite_step, sine_basis_eigenvalues, solve_fns,
                         train_fns_lite)
from richlab.problems import AnisotropicProblem, assemble_anisotropic
from richlab.schedules import WeightSchedule
from richlab.transforms import sine_mode


def stencil_problem(n, eps=1.0, theta=0.0):
    return assemble_anisotropic(AnisotropicProblem(epsilon=eps, theta=theta,
                                                   n=n))


def test_zero_correction_equals_pure_smoothing(rng):
    n = 8
    A = stencil_problem(n)
    f = rng.standard_normal((n - 1) ** 2)
    sched = WeightSchedule(omega=np.array([0.1, 0.2]))
    corr = SpectralCorrection(lambda_tilde=np.zeros((n - 1) ** 2), n=n)
    u = fns_lite_step(A, f, np.zeros((n - 1) ** 2), sched, M=4, corr=corr)
    v = np.zeros((n - 1) ** 2)
    for k in range(4):
        v = v + sched.omega[k % 2] * (f - A.matvec(v))
    assert np.allclose(u, v, atol=1e-15)


def test_exact_inverse_correction_one_step(rng):
    n = 32
    A = stencil_problem(n, eps=1.0, theta=0.0)
    lam = sine_basis_eigenvalues(A, n)
    corr = SpectralCorrection(lambda_tilde=1.0 / lam, n=n)
    f = rng.standard_normal((n - 1) ** 2)
    sched = WeightSchedule(omega=np.array([0.1]))
    u = fns_lite_step(A, f, np.zeros((n - 1) ** 2), sched, M=0, corr=corr)
    rel = np.linalg.norm(f - A.matvec(u)) / np.linalg.norm(f)
    assert rel <= 1e-12


def test_step_is_affine_in_inputs(rng):
    n = 8
    A = stencil_problem(n, eps=0.3, theta=0.7)
    size = (n - 1) ** 2
    sched = WeightSchedule(omega=np.array([0.1, 0.15]))
    corr = SpectralCorrection(lambda_tilde=rng.standard_normal(size) * 0.1,
                              n=n)
    u1, f1 = rng.standard_normal(size), rng.standard_normal(size)
    u2, f2 = rng.standard_normal(size), rng.standard_normal(size)
    a, b = 0.3, 0.7

    def step(u, f):
        return fns_lite_step(A, f, u, sched, M=3, corr=corr)

    lhs = step(a * u1 + b * u2, a * f1 + b * f2)
    rhs = a * step(u1, f1) + b * step(u2, f2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_correction_mode_locality():
    n = 8
    A = stencil_problem(n)
    size = (n - 1) ** 2
    sched = WeightSchedule(omega=np.array([0.0]))
    for k in range(size):
        lam = np.zeros(size)
        lam[k] = 1.0
        corr = SpectralCorrection(lambda_tilde=lam, n=n)
        p, q = divmod(k, n - 1)
        mode = sine_mode(n, p + 1, q + 1)
        # correction of a residual orthogonal to mode k leaves u unchanged
        other = sine_mode(n, (p + 1) % (n - 1) + 1, q + 1)
        if abs(other @ mode) > 1e-12:
            continue
        u = corr.apply(other)
        assert np.max(np.abs(u)) <= 1e-12


def test_solve_counts_inner_iterations(rng):
    n = 16
    A = stencil_problem(n)
    lam = 1.0 / sine_basis_eigenvalues(A, n)
    corr = SpectralCorrection(lambda_tilde=lam, n=n)
    f = rng.standard_normal((n - 1) ** 2)
    sched = WeightSchedule(omega=np.array([0.1]))
    u, rep = solve_fns(A, f, sched, corr, M=2, tol=1e-10)
    assert rep.converged and rep.inner_iterations == 2 * rep.iterations


def test_correction_checkpoint_round_trip(tmp_path):
    n = 8
    corr = SpectralCorrection(
        lambda_tilde=np.linspace(0, 1, (n - 1) ** 2), n=n)
    corr.save(tmp_path / "c.ckpt")
    back = SpectralCorrection.load(tmp_path / "c.ckpt")
    assert np.array_equal(back.lambda_tilde, corr.lambda_tilde)
    assert back.n == n


@pytest.fixture(scope="module")
def tiny_dataset():
    return sample_dataset("anisotropic", 4, seed=3, n=8)


def fast_config(**kw):
    base = dict(m=2, smooth_steps=2, unroll=2, cycles=1, n_epochs=3,
                batch_size=2, seed=5, hidden=(6, 6), n_buckets=16)
    base.update(kw)
    return FnsTrainConfig(**base)


def test_zero_cycles_trains_only_correction(tiny_dataset):
    from richlab.fns import _initial_net

    cfg = fast_config(cycles=0)
    init = _initial_net(cfg, input_dim=2)
    model = train_fns_lite(cfg, tiny_dataset)
    # the weight network is the frozen phase-0 smoother, bit-identical
    for a, b in zip(init.parameters(), model.net.parameters()):
        assert np.array_equal(a, b)
    assert [tag for tag, _ in model.training_history] == ["lambda"]
    assert np.any(model.table != 0.0)


def test_initial_weight_is_half(tiny_dataset):
    from richlab.fns import _initial_net

    net = _initial_net(fast_config(), input_dim=2)
    omega = net.schedule_arrays(tiny_dataset[0].mu)[0]
    assert np.allclose(omega, 0.5, atol=0.02)


def test_alternation_freezes_phases(tiny_dataset):
    cfg = fast_config(cycles=1)
    model = train_fns_lite(cfg, tiny_dataset)
    tags = [tag for tag, _ in model.training_history]
    assert tags == ["lambda", "omega", "lambda"]
    # omega phase actually moved the network off its frozen phase-0 state
    from richlab.fns import _initial_net
    init = _initial_net(cfg, input_dim=2)
    moved = any(not np.array_equal(a, b) for a, b in
                zip(init.parameters(), model.net.parameters()))
    assert moved


def test_training_is_deterministic(tiny_dataset):
    cfg = fast_config()
    m1 = train_fns_lite(cfg, tiny_dataset)
    m2 = train_fns_lite(cfg, tiny_dataset)
    assert np.array_equal(m1.table, m2.table)
    for a, b in zip(m1.net.parameters(), m2.net.parameters()):
        assert np.array_equal(a, b)


def test_model_round_trip(tmp_path, tiny_dataset):
    cfg = fast_config(cycles=0, n_epochs=1)
    model = train_fns_lite(cfg, tiny_dataset)
    model.save(tmp_path / "fns")
    back = FnsLiteModel.load(tmp_path / "fns")
    assert np.array_equal(back.table, model.table)
    mu = tiny_dataset[0].mu
    assert back.bucket_of(mu) == model.bucket_of(mu)
    assert np.array_equal(back.correction_for(mu).lambda_tilde,
                          model.correction_for(mu).lambda_tilde)
