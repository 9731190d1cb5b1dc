"""Seeded train/test dataset generation for the model problems."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .problems import (AnisotropicProblem, HelmholtzProblem, ProblemSpec,
                       assemble_anisotropic, assemble_helmholtz)
from .sparse import SparseMatrix

EPS_RANGE = (1e-6, 1.0)
THETA_RANGE = (0.0, np.pi)


@dataclass
class Sample:
    spec: ProblemSpec
    A: SparseMatrix
    f: np.ndarray

    @property
    def mu(self):
        return self.spec.mu


@dataclass
class Dataset:
    kind: str
    seed: int
    n: int
    samples: list[Sample]

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def __iter__(self):
        return iter(self.samples)

    @property
    def metadata(self):
        return {"kind": self.kind, "count": len(self.samples),
                "seed": self.seed, "n": self.n}


def assemble(spec: ProblemSpec) -> SparseMatrix:
    if spec.kind == "anisotropic":
        return assemble_anisotropic(spec)
    return assemble_helmholtz(spec)


def sample_dataset(kind, count, seed, n) -> Dataset:
    """Draw ``count`` problem instances deterministically under ``seed``.

    Anisotropic: eps ~ U(1e-6, 1), theta ~ U(0, pi). Helmholtz: the
    frequency is drawn so the grid resolves 20 to 40 points per
    wavelength. Right-hand sides are standard normal (real, or complex
    with independent normal parts for Helmholtz).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        if kind == "anisotropic":
            eps = rng.uniform(*EPS_RANGE)
            theta = rng.uniform(*THETA_RANGE)
            spec = AnisotropicProblem(epsilon=eps, theta=theta, n=n)
            A = assemble_anisotropic(spec)
            f = rng.standard_normal(spec.ndof)
        elif kind == "helmholtz":
            omega = 2.0 * np.pi * rng.uniform(n / 40.0, n / 20.0)
            spec = HelmholtzProblem(angular_frequency=omega, n=n)
            A = assemble_helmholtz(spec)
            f = rng.standard_normal(spec.ndof) + 1j * rng.standard_normal(spec.ndof)
        else:
            raise ValueError(f"unsupported dataset kind: {kind!r}")
        samples.append(Sample(spec=spec, A=A, f=f))
    return Dataset(kind=kind, seed=seed, n=n, samples=samples)


def write_manifest(path, ds: Dataset):
    """Persist the dataset manifest; matrices are regenerable, never stored."""
    doc = dict(ds.metadata)
    doc["mu"] = [list(map(float, s.mu)) for s in ds.samples]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def read_manifest(path) -> Dataset:
    """Regenerate a dataset from its manifest (bit-identical rhs)."""
    with open(path) as fh:
        doc = json.load(fh)
    ds = sample_dataset(doc["kind"], doc["count"], doc["seed"], doc["n"])
    stored = np.array(doc["mu"])
    regen = np.array([list(map(float, s.mu)) for s in ds.samples])
    if not np.allclose(stored, regen, rtol=1e-12, atol=1e-12):
        raise ValueError("manifest parameters do not match regenerated dataset")
    return ds
