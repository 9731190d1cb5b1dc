"""Training of weight-schedule networks through the unrolled iteration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tape as tp
from .metanet import MetaNet, meta_forward
from .precond import Preconditioner
from .tape import Tape


class TrainingDiverged(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


class NanLossError(RuntimeError):
    def __init__(self, instance_index):
        super().__init__(f"NaN loss produced by batch instance {instance_index}")
        self.instance_index = instance_index


@dataclass
class TrainConfig:
    m: int = 3
    unroll: int = 50          # K inner iterations differentiated through
    n_epochs: int = 50
    batch_size: int = 20
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    variant: str = "plain"
    precond: str | None = None      # None | "ssor" | "jacobi" | "gs"
    learn_log_omega: bool = False
    hidden: tuple = (64, 64)
    patience: int = 20
    val_fraction: float = 0.2

    def __post_init__(self):
        if self.unroll < 0 or self.batch_size < 1:
            raise ValueError("unroll must be >= 0 and batch_size >= 1")


def make_preconditioner(name, A):
    if name is None or name == "identity":
        return None
    if callable(name):
        return name(A)
    if name == "ssor":
        return Preconditioner.ssor(A, relax=1.0)
    if name == "jacobi":
        return Preconditioner.weighted_jacobi(A)
    if name == "gs":
        return Preconditioner.gauss_seidel(A)
    raise ValueError(f"unknown preconditioner {name!r}")


def unrolled_relative_residual(A, f, omega, alpha, alpha_t, K, variant,
                               P=None):
    """Plain-numpy K-step unroll; the tape-free twin of the training path."""
    m = len(omega)
    n = len(f)
    u = np.zeros(n)
    v = np.zeros(n)
    fnorm = np.linalg.norm(f)
    for k in range(K):
        i = k % m
        if variant in ("plain", "mom"):
            r = f - A.matvec(u)
        else:
            r = f - A.matvec(u + alpha_t[i] * v)
        pr = P.apply(r) if P is not None else r
        v = alpha[i] * v + omega[i] * pr
        u = u + v
    return np.linalg.norm(f - A.matvec(u)) / fnorm


def _unroll_tape(A, f, omega, alpha, alpha_t, K, variant, P=None):
    """Tape-recorded K-step unroll; returns the relative-residual Var."""
    tape = omega.tape
    n = len(f)
    u = tape.var(np.zeros(n))
    v = tape.var(np.zeros(n))
    fnorm = float(np.linalg.norm(f))
    m = omega.shape[0]
    for k in range(K):
        i = k % m
        if variant in ("plain", "mom"):
            r = f - tp.spmv(A, u)
        else:
            r = f - tp.spmv(A, u + alpha_t[i] * v)
        pr = tp.linear_map(P.apply, P.apply_transpose, r) if P is not None else r
        step = omega[i] * pr
        v = alpha[i] * v + step if alpha is not None else step
        u = u + v
    r = f - tp.spmv(A, u)
    return tp.norm2(r) * (1.0 / fnorm)


def loss_relative_residual(batch, net: MetaNet, K, precond=None, tape=None,
                           param_vars=None, precond_cache=None):
    """Mean K-step relative residual over a batch, recorded on a tape.

    Returns (loss Var, tape, param Vars). Each instance starts from a
    zero initial guess.
    """
    if not batch:
        raise ValueError("batch must be nonempty")
    if tape is None:
        tape = Tape()
        param_vars = [tape.var(p) for p in net.parameters()]
    losses = []
    for idx, sample in enumerate(batch):
        omega, alpha, alpha_t = net.forward_tape(tape, sample.mu, param_vars)
        if precond_cache is not None:
            P = precond_cache.setdefault(id(sample),
                                         make_preconditioner(precond, sample.A))
        else:
            P = make_preconditioner(precond, sample.A)
        li = _unroll_tape(sample.A, sample.f, omega, alpha, alpha_t, K,
                          net.variant, P)
        if not np.isfinite(li.value):
            raise NanLossError(idx)
        losses.append(li)
    return tp.mean(losses), tape, param_vars


def gradient(loss, tape, param_vars):
    """Reverse-mode gradients of a recorded scalar loss (single use)."""
    tape.backward(loss)
    return [p.grad for p in param_vars]


def evaluate_loss(samples, net: MetaNet, K, precond=None, precond_cache=None):
    """Tape-free mean loss, numerically identical to the recorded path."""
    total = 0.0
    for sample in samples:
        omega, alpha, alpha_t = net.schedule_arrays(sample.mu)
        if precond_cache is not None:
            P = precond_cache.setdefault(id(sample),
                                         make_preconditioner(precond, sample.A))
        else:
            P = make_preconditioner(precond, sample.A)
        total += unrolled_relative_residual(sample.A, sample.f, omega, alpha,
                                            alpha_t, K, net.variant, P)
    return total / len(samples)


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * g * g
            mh = self.m[i] / (1 - self.b1 ** self.t)
            vh = self.v[i] / (1 - self.b2 ** self.t)
            out.append(p - self.lr * mh / (np.sqrt(vh) + self.eps))
        return out


def train_ns(config: TrainConfig, dataset, net=None):
    """Mini-batch training of the schedule network on the K-step
    relative-residual loss; returns the best-validation checkpoint.

    Deterministic under ``config.seed``.
    """
    if net is None:
        input_dim = len(dataset[0].mu)
        net = MetaNet.create(config.m, variant=config.variant,
                             hidden=config.hidden, input_dim=input_dim,
                             learn_log_omega=config.learn_log_omega,
                             seed=config.seed)
    rng = np.random.default_rng(config.seed)
    n_val = max(1, int(round(config.val_fraction * len(dataset)))) \
        if len(dataset) > 1 else 0
    train = dataset.samples[:len(dataset) - n_val]
    val = dataset.samples[len(dataset) - n_val:]
    if not train:
        train, val = dataset.samples, dataset.samples
    cache = {}

    opt = Adam(net.parameters(), lr=config.learning_rate)
    history = {"train": [], "val": []}
    best = (np.inf, net.copy(), -1)
    bad_epochs = 0
    diverged_streak = 0
    for epoch in range(config.n_epochs):
        order = rng.permutation(len(train))
        epoch_losses = []
        for start in range(0, len(train), config.batch_size):
            batch = [train[j] for j in order[start:start + config.batch_size]]
            loss, tape, pvars = loss_relative_residual(
                batch, net, config.unroll, precond=config.precond,
                precond_cache=cache)
            grads = gradient(loss, tape, pvars)
            net.set_parameters(opt.step(net.parameters(), grads))
            epoch_losses.append(float(loss.value))
        train_loss = float(np.mean(epoch_losses))
        val_loss = evaluate_loss(val or train, net, config.unroll,
                                 precond=config.precond, precond_cache=cache)
        history["train"].append(train_loss)
        history["val"].append(val_loss)
        if val_loss < best[0]:
            best = (val_loss, net.copy(), epoch)
            bad_epochs = 0
        else:
            bad_epochs += 1
        diverged_streak = diverged_streak + 1 if train_loss > 1e3 else 0
        if diverged_streak >= 3:
            raise TrainingDiverged(
                f"loss above 1e3 for 3 consecutive epochs (epoch {epoch})",
                history)
        if bad_epochs >= config.patience:
            break
    result = best[1] if best[2] >= 0 else net
    result.training_history = history
    result.best_epoch = best[2]
    return result
