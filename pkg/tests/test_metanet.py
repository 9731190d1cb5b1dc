import numpy as np
import pytest

from richlab.metanet import MetaNet, meta_forward
from richlab.tape import Tape


def test_zero_final_layer_gives_constant_positive_map():
    net = MetaNet.create(m=3, variant="plain", seed=0)
    net.weights[-1][:] = 0.0
    net.biases[-1][:] = 0.0
    sched = meta_forward(net, [-2.0, 0.5])
    assert np.allclose(sched.omega, np.log(2.0))  # softplus(0)


def test_determinism_bitwise():
    net = MetaNet.create(m=3, variant="nagex", seed=1)
    a = meta_forward(net, [-3.0, 1.0])
    b = meta_forward(net, [-3.0, 1.0])
    assert np.array_equal(a.omega, b.omega)
    assert np.array_equal(a.alpha, b.alpha)
    assert np.array_equal(a.alpha_tilde, b.alpha_tilde)


def test_output_ranges():
    net = MetaNet.create(m=4, variant="nagex", seed=2)
    for mu in ([-6, 0], [0, np.pi], [-3.3, 1.7]):
        s = meta_forward(net, mu)
        assert np.all(s.omega > 0)
        assert np.all((s.alpha > 0) & (s.alpha < 1))
        assert np.all((s.alpha_tilde > 0) & (s.alpha_tilde < 1))


def test_variant_output_dims():
    assert MetaNet.create(3, "plain").widths[-1] == 3
    assert MetaNet.create(3, "mom").widths[-1] == 6
    assert MetaNet.create(3, "nag").widths[-1] == 6
    assert MetaNet.create(3, "nagex").widths[-1] == 9


def test_log_omega_mode():
    net = MetaNet.create(m=2, variant="plain", learn_log_omega=True, seed=0)
    net.weights[-1][:] = 0.0
    net.biases[-1][:] = 0.0
    s = meta_forward(net, [-1.0, 1.0])
    assert np.allclose(s.omega, 1.0)  # exp(0)


def test_tape_forward_matches_numpy_forward():
    net = MetaNet.create(m=3, variant="nagex", seed=3)
    mu = [-2.5, 2.0]
    omega, alpha, alpha_t = net.schedule_arrays(mu)
    t = Tape()
    pv = [t.var(p) for p in net.parameters()]
    ov, av, atv = net.forward_tape(t, mu, pv)
    assert np.allclose(ov.value, omega, rtol=1e-15)
    assert np.allclose(av.value, alpha, rtol=1e-15)
    assert np.allclose(atv.value, alpha_t, rtol=1e-15)


def test_hidden_weight_perturbation_matches_tape_gradient():
    net = MetaNet.create(m=3, variant="plain", seed=4)
    mu = [-1.5, 0.9]
    t = Tape()
    pv = [t.var(p) for p in net.parameters()]
    omega, _, _ = net.forward_tape(t, mu, pv)
    probe = np.array([1.0, 2.0, -1.0])
    from richlab import tape as tp
    y = tp.dot(omega, probe)
    t.backward(y)
    g = pv[1].grad  # second hidden weight matrix
    h = 1e-6
    i, j = 5, 7
    net2 = net.copy()
    net2.weights[1][i, j] += h
    d = (net2.schedule_arrays(mu)[0] @ probe - net.schedule_arrays(mu)[0] @ probe) / h
    assert abs(d - g[i, j]) <= 1e-4 * max(abs(d), 1e-8)


def test_checkpoint_round_trip_bit_exact(tmp_path):
    net = MetaNet.create(m=3, variant="nag", seed=5)
    path = tmp_path / "net.ckpt"
    net.save(path, extra_metadata={"note": "test"})
    back = MetaNet.load(path)
    for a, b in zip(net.parameters(), back.parameters()):
        assert np.array_equal(a, b)
    assert back.variant == "nag" and back.m == 3
    s1, s2 = meta_forward(net, [-2, 1]), meta_forward(back, [-2, 1])
    assert np.array_equal(s1.omega, s2.omega)
