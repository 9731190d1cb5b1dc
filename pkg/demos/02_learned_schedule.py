"""Learning a weight schedule by differentiating through the iteration.

Trains a small network mapping (lg eps, theta) to three Richardson
weights by unrolling 30 inner iterations and minimizing the mean
relative residual over a seeded dataset, then compares the learned
schedule against the Chebyshev-optimal one on held-out instances. Runs
at a small grid size so it finishes in well under a minute.
"""
import numpy as np

from richlab import (AnisotropicProblem, TrainConfig, assemble_anisotropic,
                     chebyshev_schedule, dense_spectral_bounds, meta_forward,
                     sample_dataset, solve_stationary, train_ns)

N = 16
ds = sample_dataset("anisotropic", 40, seed=1, n=N)
cfg = TrainConfig(m=3, unroll=30, n_epochs=25, batch_size=10, seed=0,
                  variant="plain")
net = train_ns(cfg, ds)
print(f"best validation loss {net.training_history['val'][net.best_epoch]:.4g}"
      f" at epoch {net.best_epoch}")

rng = np.random.default_rng(9)
for eps in (1.0, 1e-2):
    prob = AnisotropicProblem(epsilon=eps, theta=0.0, n=N)
    A = assemble_anisotropic(prob)
    b = dense_spectral_bounds(A)
    f = rng.standard_normal(A.ncols)
    _, rc = solve_stationary(A, f, chebyshev_schedule(b.lambda_max,
                                                      b.lambda_min, 3),
                             tol=1e-6)
    _, rl = solve_stationary(A, f, meta_forward(net, prob.mu), tol=1e-6)
    print(f"eps={eps:g}: chebyshev {rc.inner_iterations} inner, "
          f"learned {rl.inner_iterations} inner")
