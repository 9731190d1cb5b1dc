"""Damped Helmholtz solves with flexible GMRES.

Assembles the complex-shifted 5-point Helmholtz operator with an
absorbing sponge layer and solves it with restarted flexible GMRES,
first unpreconditioned and then right-preconditioned by a V-cycle with a
momentum-accelerated smoother. The flexible variant stores the
preconditioned vectors, so any solver step is a legal preconditioner.
"""
import numpy as np

from richlab import (FgmresConfig, HelmholtzProblem, WeightSchedule,
                     assemble_helmholtz, build_hierarchy, fgmres, v_cycle)

N = 64
freq = 5.0
prob = HelmholtzProblem(angular_frequency=2 * np.pi * freq, n=N)
A = assemble_helmholtz(prob)
rng = np.random.default_rng(5)
f = rng.standard_normal(A.ncols) + 1j * rng.standard_normal(A.ncols)

cfg = FgmresConfig(restart=20, tol=1e-6, max_outer=200)
_, plain = fgmres(A, f, cfg=cfg)

sched = WeightSchedule(omega=np.full(5, 0.8 / (8.0 * N ** 2)),
                       alpha=np.full(5, 0.3), variant="nag")
h = build_hierarchy(A, N, coarsest=16, schedules=sched)
_, pre = fgmres(A, f, precond_apply=lambda r: v_cycle(h, r), cfg=cfg)

print(f"frequency {freq:g}: identity preconditioner "
      f"{plain.iterations} iterations, V-cycle preconditioner "
      f"{pre.iterations} iterations")
