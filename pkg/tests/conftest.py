"""Shared fixtures: the reference experiment configurations are expensive
(one dense 3600-dim eigendecomposition), so they are computed once per
session and reused across the structural and acceptance tests."""

import math
import time
from dataclasses import dataclass

import pytest

from slepian_kit.eigensolve import Spectrum, full_hermitian_eig
from slepian_kit.geometry import Ball, FOURIER, Grid, Interval, MaskFamily, SPACE
from slepian_kit.operator import ConcentrationMatrix, assemble_dense, kernel_samples
from slepian_kit.varying_masks import RunRecord, VaryingConfig, run


@dataclass
class ReferenceCase:
    name: str
    grid: Grid
    family_s: MaskFamily
    family_f: MaskFamily
    matrix: ConcentrationMatrix
    dense: Spectrum
    config: VaryingConfig
    record: RunRecord
    build_seconds: float


def _build(name, grid, family_s, family_f, config) -> ReferenceCase:
    t0 = time.perf_counter()
    kernel = kernel_samples(family_f.sample(grid, 0.0), grid)
    K = assemble_dense(family_s.sample(grid, 0.0), kernel)
    dense = full_hermitian_eig(K)
    record = run(family_s, family_f, grid, config, dense_reference=dense)
    return ReferenceCase(name=name, grid=grid, family_s=family_s, family_f=family_f,
                         matrix=K, dense=dense, config=config, record=record,
                         build_seconds=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def case_1d_moderate() -> ReferenceCase:
    omega = 0.3 * 2 * math.pi
    return _build(
        "1d-moderate", Grid(1, 150),
        MaskFamily(Interval(0.0, 1.0), SPACE),
        MaskFamily(Interval(0.0, omega), FOURIER),
        VaryingConfig(eps_min=0.1, eps_max=100.0, steps=250, eta=1e-10,
                      n_vectors=16, solver_tol=1e-10),
    )


@pytest.fixture(scope="session")
def case_1d_strong() -> ReferenceCase:
    omega = 0.49 * 2 * math.pi
    return _build(
        "1d-strong", Grid(1, 150),
        MaskFamily(Interval(0.0, 1.0), SPACE),
        MaskFamily(Interval(0.0, omega), FOURIER),
        VaryingConfig(eps_min=0.1, eps_max=100.0, steps=250, eta=1e-10,
                      n_vectors=16, solver_tol=1e-10),
    )


@pytest.fixture(scope="session")
def case_2d_balls() -> ReferenceCase:
    return _build(
        "2d-balls", Grid(2, 60),
        MaskFamily(Ball((0.0, 0.0), 0.8), SPACE),
        MaskFamily(Ball((0.0, 0.0), 0.3 * 2 * math.pi), FOURIER),
        VaryingConfig(eps_min=0.1, eps_max=10.0, steps=250, eta=1e-6,
                      n_vectors=16, solver_tol=1e-8),
    )
