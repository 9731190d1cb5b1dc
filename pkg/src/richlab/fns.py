"""Hybrid smoother + sine-spectral correction iteration.

One hybrid step applies M inner smoothing updates, then adds a learned
diagonal correction in the orthonormal 2D sine basis:
u <- u + dst2_inv(lambda_tilde * dst2(f - A u)). With homogeneous
Dirichlet boundaries the sine basis diagonalizes the isotropic and
axis-aligned constant-coefficient operators exactly, so the correction
can represent their exact inverse.

Training alternates between the correction table and the smoother
weight network, each phase freezing the other.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tape as tp
from .checkpoint import load_checkpoint, save_checkpoint
from .metanet import ANISOTROPIC_BOUNDS, MetaNet
from .richardson import DivergenceError, SolveReport
from .tape import Tape, Var
from .training import Adam, TrainConfig
from .transforms import dst2, dst2_inv

import time


@dataclass
class SpectralCorrection:
    """Diagonal operator in the sine basis on the (n-1)^2 interior."""
    lambda_tilde: np.ndarray
    n: int

    def __post_init__(self):
        self.lambda_tilde = np.asarray(self.lambda_tilde, dtype=float)
        if self.lambda_tilde.shape != ((self.n - 1) ** 2,):
            raise ValueError("correction length does not match the grid")
        if not np.all(np.isfinite(self.lambda_tilde)):
            raise ValueError("correction entries must be finite")

    def apply(self, r):
        return dst2_inv(self.lambda_tilde * dst2(r))

    def save(self, path, extra_metadata=None):
        meta = {"kind": "spectral-correction", "n": self.n}
        if extra_metadata:
            meta["config"] = extra_metadata
        save_checkpoint(path, meta, {"lambda_tilde": self.lambda_tilde})

    @classmethod
    def load(cls, path):
        meta, arrays = load_checkpoint(path)
        if meta.get("kind") != "spectral-correction":
            raise ValueError("checkpoint does not hold a spectral correction")
        return cls(lambda_tilde=arrays["lambda_tilde"], n=meta["n"])


def sine_basis_eigenvalues(A, n):
    """Diagonal of the operator in the orthonormal sine basis.

    Exact eigenvalues whenever the basis diagonalizes A; otherwise the
    basis-diagonal part.
    """
    size = (n - 1) ** 2
    lam = np.empty(size)
    e = np.zeros(size)
    for k in range(size):
        e[k] = 1.0
        lam[k] = dst2(A.matvec(dst2_inv(e)))[k]
        e[k] = 0.0
    return lam


def fns_lite_step(A, f, u, schedule, M, corr: SpectralCorrection):
    """One hybrid iteration: M inner smoothing updates, one correction."""
    for k in range(M):
        u = u + schedule.omega[k % schedule.m] * (f - A.matvec(u))
    u = u + corr.apply(f - A.matvec(u))
    if not np.all(np.isfinite(u)):
        raise DivergenceError("hybrid step produced a non-finite iterate",
                              inner_iteration=M)
    return u


def solve_fns(A, f, schedule, corr, M, tol=1e-6, max_iters=10_000):
    """Run the hybrid iteration from zero to the relative-residual tol."""
    t0 = time.perf_counter()
    u = np.zeros(A.ncols)
    fnorm = np.linalg.norm(f)
    rel = 1.0
    trace = [rel]
    it = 0
    converged = fnorm == 0.0
    while not converged and it < max_iters:
        u = fns_lite_step(A, f, u, schedule, M, corr)
        it += 1
        rel = float(np.linalg.norm(f - A.matvec(u))) / fnorm
        trace.append(rel)
        converged = rel <= tol
    return u, SolveReport(iterations=it, inner_iterations=it * M,
                          converged=converged, final_relative_residual=rel,
                          wall_time=time.perf_counter() - t0,
                          trace=np.array(trace))


# -- differentiable pieces ----------------------------------------------

def _correction_tape(lam, r):
    """dst2_inv(lam * dst2(r)) with either argument recorded on a tape."""
    if isinstance(lam, Var):
        Fr = dst2(r.value if isinstance(r, Var) else r)
        val = dst2_inv(lam.value * Fr)
        parents = [(lam, lambda g: dst2(g) * Fr)]
        if isinstance(r, Var):
            lam_v = lam.value
            parents.append((r, lambda g: dst2_inv(lam_v * dst2(g))))
        return lam.tape._record(val, tuple(parents))
    return tp.linear_map(lambda x: dst2_inv(lam * dst2(x)),
                         lambda g: dst2_inv(lam * dst2(g)), r)


def _unroll_fns_tape(A, f, omega, lam, n_hybrid, M, m):
    """Tape-recorded hybrid unroll from zero; relative-residual Var.

    ``omega`` is a Var (length m, cycled) or a constant array; ``lam``
    likewise a Var or constant correction array.
    """
    tape = omega.tape if isinstance(omega, Var) else lam.tape
    u = tape.var(np.zeros(len(f)))
    fnorm = float(np.linalg.norm(f))
    for _ in range(n_hybrid):
        for k in range(M):
            u = u + omega[k % m] * (f - tp.spmv(A, u))
        u = u + _correction_tape(lam, f - tp.spmv(A, u))
    return tp.norm2(f - tp.spmv(A, u)) * (1.0 / fnorm)


# -- bucketed model ------------------------------------------------------

@dataclass
class FnsLiteModel:
    """Smoother weight network plus a per-bucket correction table.

    Buckets quantize (lg eps, theta) onto an n_buckets x n_buckets grid;
    lookup is nearest-bucket.
    """
    net: MetaNet
    table: np.ndarray             # (n_buckets, n_buckets, (n-1)^2)
    n: int
    bounds: np.ndarray = field(
        default_factory=lambda: ANISOTROPIC_BOUNDS.copy())

    @property
    def n_buckets(self):
        return self.table.shape[0]

    def bucket_of(self, mu):
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        frac = (np.asarray(mu, dtype=float) - lo) / (hi - lo)
        idx = np.clip((frac * self.n_buckets).astype(int), 0,
                      self.n_buckets - 1)
        return int(idx[0]), int(idx[1])

    def correction_for(self, mu) -> SpectralCorrection:
        i, j = self.bucket_of(mu)
        return SpectralCorrection(lambda_tilde=self.table[i, j], n=self.n)

    def save(self, path_prefix):
        self.net.save(str(path_prefix) + ".net")
        meta = {"kind": "spectral-correction", "n": self.n,
                "n_buckets": self.n_buckets, "bucketed": True}
        save_checkpoint(str(path_prefix) + ".corr", meta,
                        {"lambda_tilde": self.table,
                         "input_bounds": self.bounds})

    @classmethod
    def load(cls, path_prefix):
        net = MetaNet.load(str(path_prefix) + ".net")
        meta, arrays = load_checkpoint(str(path_prefix) + ".corr")
        if meta.get("kind") != "spectral-correction":
            raise ValueError("checkpoint does not hold a spectral correction")
        return cls(net=net, table=arrays["lambda_tilde"], n=meta["n"],
                   bounds=arrays["input_bounds"])


@dataclass
class FnsTrainConfig:
    m: int = 3                 # smoother schedule length
    smooth_steps: int = 10     # M inner smoothing updates per hybrid step
    unroll: int = 3            # hybrid iterations differentiated through
    cycles: int = 3            # alternation cycles after the initial phase
    n_epochs: int = 50         # cap per phase
    plateau_window: int = 5    # phase stops when relative loss decrease
    plateau_tol: float = 0.01  # over this many epochs falls below this
    batch_size: int = 20
    learning_rate: float = 1e-3
    seed: int = 0
    n_buckets: int = 16
    hidden: tuple = (64, 64)
    omega_init: float = 0.5    # initial constant smoother weight


def _initial_net(config, input_dim):
    net = MetaNet.create(config.m, variant="plain", hidden=config.hidden,
                         input_dim=input_dim, seed=config.seed)
    # raw bias placing the initial step weight at omega_init
    net.biases[-1][:] = np.log(np.expm1(config.omega_init))
    return net


def _plateaued(losses, window, tol):
    if len(losses) <= window:
        return False
    ref = losses[-window - 1]
    return (ref - losses[-1]) < tol * abs(ref)


def train_fns_lite(config: FnsTrainConfig, dataset, net=None):
    """Alternating optimization of the correction table and the weights.

    Phase 0 trains the correction under the frozen initial smoother;
    each subsequent cycle retrains the weight network under the frozen
    correction, then the correction under the frozen network.
    ``cycles=0`` returns the phase-0 artifacts. Returns an FnsLiteModel
    with a ``training_history`` list of per-phase loss curves.
    """
    if dataset.kind != "anisotropic":
        raise ValueError("hybrid training expects an anisotropic dataset")
    n = dataset.n
    size = (n - 1) ** 2
    if net is None:
        net = _initial_net(config, input_dim=len(dataset[0].mu))
    model = FnsLiteModel(net=net,
                         table=np.zeros((config.n_buckets, config.n_buckets,
                                         size)), n=n)
    rng = np.random.default_rng(config.seed)
    history = []

    buckets = sorted({model.bucket_of(s.mu) for s in dataset})

    def run_phase(train_lambda):
        losses = []
        if train_lambda:
            params = [model.table[i, j] for (i, j) in buckets]
        else:
            params = model.net.parameters()
        opt = Adam(params, lr=config.learning_rate)
        for _ in range(config.n_epochs):
            order = rng.permutation(len(dataset))
            epoch = []
            for start in range(0, len(dataset), config.batch_size):
                batch = [dataset[int(k)]
                         for k in order[start:start + config.batch_size]]
                tape = Tape()
                if train_lambda:
                    lam_vars = {b: tape.var(p)
                                for b, p in zip(buckets, params)}
                    pvars = [lam_vars[b] for b in buckets]
                else:
                    pvars = [tape.var(p) for p in params]
                terms = []
                for s in batch:
                    b = model.bucket_of(s.mu)
                    if train_lambda:
                        omega = model.net.schedule_arrays(s.mu)[0]
                        lam = lam_vars[b]
                    else:
                        omega = model.net.forward_tape(tape, s.mu, pvars)[0]
                        lam = model.table[b[0], b[1]]
                    terms.append(_unroll_fns_tape(
                        s.A, s.f, omega, lam, config.unroll,
                        config.smooth_steps, config.m))
                loss = tp.mean(terms)
                tape.backward(loss)
                params = opt.step(params, [p.grad for p in pvars])
                if train_lambda:
                    for b, p in zip(buckets, params):
                        model.table[b[0], b[1]] = p
                else:
                    model.net.set_parameters(params)
                    params = model.net.parameters()
                epoch.append(float(loss.value))
            losses.append(float(np.mean(epoch)))
            if _plateaued(losses, config.plateau_window, config.plateau_tol):
                break
        return losses

    history.append(("lambda", run_phase(True)))
    for _ in range(config.cycles):
        history.append(("omega", run_phase(False)))
        history.append(("lambda", run_phase(True)))
    model.training_history = history
    return model
