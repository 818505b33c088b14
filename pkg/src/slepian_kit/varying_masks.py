"""The varying-masks sweep: shrink both masks, harvest deflated eigenvectors.

Scanning eps from large to small, the dominant eigenvector of the deflated
shrunk operator K(eps) is computed at every step; a candidate u is accepted
once its concentration ratio nu = u* K(0) u is eta-close to the reference
eigenvalue of K(0) it is meant to approximate.  Accepted vectors deflate all
later searches, so the harvested set is orthonormal by construction.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass

import numpy as np

from .eigensolve import (
    ConvergenceError,
    EigenPair,
    Spectrum,
    concentration_ratio,
    full_hermitian_eig,
    top_eigenpair_deflated,
)
from .geometry import Grid, MaskFamily
from .operator import FastOperator, assemble_dense, kernel_samples


@dataclass(frozen=True)
class VaryingConfig:
    """Knobs of the sweep; defaults follow the 1-d reference experiments."""

    eps_min: float = 0.1
    eps_max: float = 100.0
    steps: int = 250
    schedule: str = "log"
    eta: float = 1e-10
    n_vectors: int = 16
    solver_tol: float = 1e-10
    max_applies: int = 5000
    warm_start: bool = True

    def __post_init__(self) -> None:
        if not (0 < self.eps_min < self.eps_max):
            raise ValueError("need 0 < eps_min < eps_max")
        if self.steps < 2:
            raise ValueError("schedule needs at least 2 points")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.n_vectors < 1:
            raise ValueError("must request at least one vector")


def epsilon_schedule(eps_min: float, eps_max: float, steps: int, kind: str = "log") -> np.ndarray:
    """Strictly decreasing schedule from eps_max to eps_min, endpoints included."""
    if not (0 < eps_min < eps_max):
        raise ValueError("need 0 < eps_min < eps_max")
    if steps < 2:
        raise ValueError("schedule needs at least 2 points")
    if kind == "log":
        return np.geomspace(eps_max, eps_min, steps)
    if kind == "linear":
        return np.linspace(eps_max, eps_min, steps)
    raise ValueError(f"unknown schedule kind {kind!r}")


class ReferenceEigenvalues:
    """Lazy eta-approximations of the eigenvalues of K(0).

    Backed by a dense spectrum when one is supplied, otherwise computed on
    demand by deflated iteration against the previously computed reference
    vectors.
    """

    def __init__(self, operator: FastOperator, eta: float, dense: Spectrum | None = None,
                 tol: float | None = None, max_applies: int = 20000):
        self.operator = operator
        self.eta = eta
        self.dense = dense
        self.tol = tol if tol is not None else min(eta / 10.0, 1e-10)
        self.max_applies = max_applies
        self._values: list[float] = []
        self._vectors: list[np.ndarray] = []

    def get(self, q: int) -> float:
        """Reference value for the (q+1)-th eigenvalue (q zero-based)."""
        if self.dense is not None:
            return float(self.dense.values[q])
        while len(self._values) <= q:
            pair = top_eigenpair_deflated(
                self.operator, self.operator.n, self._vectors,
                tol=self.tol, max_applies=self.max_applies,
            )
            self._values.append(pair.value)
            self._vectors.append(pair.vector)
        return self._values[q]


@dataclass
class StepTrace:
    eps: float
    target: int
    candidate_value: float
    ratio: float
    accepted: bool
    seconds: float
    overshoot: bool = False
    solver_converged: bool = True


@dataclass
class RunRecord:
    """Everything a sweep produces, JSON-serializable."""

    vectors: np.ndarray          # (n, q) accepted columns, orthonormal
    ratios: np.ndarray           # alpha_saved
    acceptance_eps: np.ndarray
    reference_values: np.ndarray
    trace: list
    complete: bool
    config: VaryingConfig
    grid_d: int
    grid_N: int

    @property
    def n_accepted(self) -> int:
        return self.vectors.shape[1]

    def to_json(self, include_timings: bool = False) -> str:
        """Serialize; per-step wall-clock is kept in memory but written only
        on request so identical runs serialize byte-identically."""
        payload = {
            "schema": "slepian-kit/run-record/v1",
            "complete": bool(self.complete),
            "grid": {"d": self.grid_d, "N": self.grid_N},
            "config": {
                "eps_min": self.config.eps_min,
                "eps_max": self.config.eps_max,
                "steps": self.config.steps,
                "schedule": self.config.schedule,
                "eta": self.config.eta,
                "n_vectors": self.config.n_vectors,
                "solver_tol": self.config.solver_tol,
                "max_applies": self.config.max_applies,
                "warm_start": self.config.warm_start,
            },
            "accepted": [
                {
                    "index": q + 1,
                    "ratio": float(self.ratios[q]),
                    "epsilon": float(self.acceptance_eps[q]),
                    "reference_value": float(self.reference_values[q]),
                    "vector_b64": base64.b64encode(
                        np.ascontiguousarray(self.vectors[:, q], dtype="<c16").tobytes()
                    ).decode("ascii"),
                }
                for q in range(self.n_accepted)
            ],
            "trace": [
                {
                    "epsilon": t.eps,
                    "target_index": t.target + 1,
                    "candidate_value": t.candidate_value,
                    "ratio": t.ratio,
                    "accepted": t.accepted,
                    "overshoot": t.overshoot,
                    "solver_converged": t.solver_converged,
                    "seconds": t.seconds if include_timings else 0.0,
                }
                for t in self.trace
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        doc = json.loads(text)
        cfg = VaryingConfig(**doc["config"])
        accepted = doc["accepted"]
        n = doc["grid"]["N"] ** doc["grid"]["d"]
        if accepted:
            cols = [np.frombuffer(base64.b64decode(a["vector_b64"]), dtype="<c16").astype(complex)
                    for a in accepted]
            vectors = np.column_stack(cols)
        else:
            vectors = np.zeros((n, 0), dtype=complex)
        trace = [
            StepTrace(
                eps=t["epsilon"], target=t["target_index"] - 1,
                candidate_value=t["candidate_value"], ratio=t["ratio"],
                accepted=t["accepted"], seconds=t["seconds"],
                overshoot=t.get("overshoot", False),
                solver_converged=t.get("solver_converged", True),
            )
            for t in doc["trace"]
        ]
        return cls(
            vectors=vectors,
            ratios=np.array([a["ratio"] for a in accepted]),
            acceptance_eps=np.array([a["epsilon"] for a in accepted]),
            reference_values=np.array([a["reference_value"] for a in accepted]),
            trace=trace,
            complete=doc["complete"],
            config=cfg,
            grid_d=doc["grid"]["d"],
            grid_N=doc["grid"]["N"],
        )


def reference_eigenvalue(operator: FastOperator, q: int, eta: float,
                         cache: ReferenceEigenvalues | Spectrum | None = None) -> float:
    """eta-approximation of the q-th (1-based) eigenvalue of the operator."""
    if q < 1:
        raise ValueError("eigenvalue index is 1-based")
    if isinstance(cache, Spectrum):
        return float(cache.values[q - 1])
    if isinstance(cache, ReferenceEigenvalues):
        return cache.get(q - 1)
    ref = ReferenceEigenvalues(operator, eta)
    return ref.get(q - 1)


def _start_vector(mask: np.ndarray, excluded: list[np.ndarray]) -> np.ndarray:
    """Deterministic initial iterate: the normalized shrunk space mask."""
    v = mask.astype(complex).copy()
    for b in excluded:
        v -= np.vdot(b, v) * b
    nrm = np.linalg.norm(v)
    if nrm > 1e-12 * max(1.0, np.linalg.norm(mask)):
        return v / nrm
    return None  # fall back to the solver default


def run(family_S: MaskFamily, family_F: MaskFamily, grid: Grid, config: VaryingConfig,
        dense_reference: Spectrum | None = None) -> RunRecord:
    """The varying-masks sweep over the whole schedule.

    ``dense_reference``, when supplied, provides the reference eigenvalues
    of K(0) directly; otherwise they are computed lazily by deflated
    iteration.  A schedule that ends before the requested number of vectors
    is harvested returns a partial record flagged incomplete.
    """
    if config.n_vectors > grid.size:
        raise ValueError(f"cannot harvest {config.n_vectors} vectors from {grid.size} degrees of freedom")
    schedule = epsilon_schedule(config.eps_min, config.eps_max, config.steps, config.schedule)

    mask0 = family_S.sample(grid, 0.0)
    kernel0 = kernel_samples(family_F.sample(grid, 0.0), grid)
    op0 = FastOperator(mask0, kernel0)
    refs = ReferenceEigenvalues(op0, config.eta, dense=dense_reference, tol=config.solver_tol)

    accepted: list[np.ndarray] = []
    ratios: list[float] = []
    acc_eps: list[float] = []
    ref_used: list[float] = []
    trace: list[StepTrace] = []
    warm: np.ndarray | None = None

    for eps in schedule:
        if len(accepted) >= config.n_vectors:
            break
        t0 = time.perf_counter()
        q = len(accepted)
        lam_ref = refs.get(q)

        mask_eps = family_S.sample(grid, eps)
        kernel_eps = kernel_samples(family_F.sample(grid, eps), grid)
        op_eps = FastOperator(mask_eps, kernel_eps)

        start = warm if (config.warm_start and warm is not None) else None
        if start is None:
            start = _start_vector(mask_eps, accepted)
        solver_ok = True
        try:
            pair = top_eigenpair_deflated(
                op_eps, grid.size, accepted,
                tol=config.solver_tol, warm_start=start, max_applies=config.max_applies,
            )
        except ConvergenceError as err:
            # The acceptance test below is a direct measurement, so the best
            # iterate is still a legitimate candidate; only a collapsed one
            # is skipped.
            if err.vector is None or not np.isfinite(err.residual):
                trace.append(StepTrace(eps=float(eps), target=q, candidate_value=np.nan,
                                       ratio=np.nan, accepted=False, solver_converged=False,
                                       seconds=time.perf_counter() - t0))
                continue
            pair = EigenPair(value=float(err.value), vector=err.vector, residual=float(err.residual))
            solver_ok = False

        nu = concentration_ratio(op0, pair.vector)
        ok = abs(nu - lam_ref) <= config.eta
        overshoot = (not ok) and (nu > lam_ref + config.eta)
        trace.append(StepTrace(eps=float(eps), target=q, candidate_value=pair.value,
                               ratio=nu, accepted=ok, overshoot=overshoot,
                               solver_converged=solver_ok,
                               seconds=time.perf_counter() - t0))
        if ok:
            accepted.append(pair.vector)
            ratios.append(nu)
            acc_eps.append(float(eps))
            ref_used.append(lam_ref)
            warm = None
        else:
            warm = pair.vector

    n = grid.size
    vectors = np.column_stack(accepted) if accepted else np.zeros((n, 0), dtype=complex)
    return RunRecord(
        vectors=vectors,
        ratios=np.asarray(ratios),
        acceptance_eps=np.asarray(acc_eps),
        reference_values=np.asarray(ref_used),
        trace=trace,
        complete=len(accepted) >= config.n_vectors,
        config=config,
        grid_d=grid.d,
        grid_N=grid.N,
    )


@dataclass
class DiagnosticReport:
    """Eigenvalue-ordering diagnostic across the schedule."""

    schedule: np.ndarray
    values: np.ndarray          # (steps, n_track) sorted descending per step
    crossings: list             # (step, i, j) swaps among value-resolved pairs
    min_gap: np.ndarray         # per step, min gap among tracked values

    @property
    def order_preserved(self) -> bool:
        return len(self.crossings) == 0


def assumption_diagnostic(family_S: MaskFamily, family_F: MaskFamily, grid: Grid,
                          schedule, n_track: int = 30,
                          resolve_tol: float = 1e-12,
                          match_confidence: float = 0.9) -> DiagnosticReport:
    """Track the top eigenvalues of K(eps) over the schedule and look for
    order swaps between consecutive steps.

    Modes are matched between steps by eigenvector overlap.  A crossing is
    counted only for confident evidence: the matched vectors overlap by at
    least ``match_confidence``, both eigenvalues sit above the numerical
    floor, and the swapped pair is value-resolved at both steps.  Without
    these gates, the arbitrary rotations inside numerically degenerate
    clusters (the top plateau, the zero cluster and barely emerged modes)
    masquerade as crossings.
    """
    schedule = np.asarray(schedule, dtype=float)
    n_buffer = min(grid.size, n_track + 5)
    values_out = np.zeros((len(schedule), n_track))
    min_gap = np.zeros(len(schedule))
    crossings: list[tuple[int, int, int]] = []
    prev_vectors = None
    prev_values = None
    global_scale = 0.0
    records = []
    for step, eps in enumerate(schedule):
        K = assemble_dense(family_S.sample(grid, eps),
                           kernel_samples(family_F.sample(grid, eps), grid))
        sp = full_hermitian_eig(K)
        vals = sp.values[:n_buffer]
        vecs = sp.vectors[:, :n_buffer]
        records.append((vals, vecs))
        global_scale = max(global_scale, abs(float(vals[0])))
        values_out[step] = vals[:n_track]
        gaps = -np.diff(vals[:n_track])
        min_gap[step] = float(np.min(gaps)) if len(gaps) else np.inf
    floor = resolve_tol * max(global_scale, 1e-300)
    for step in range(1, len(schedule)):
        prev_values, prev_vectors = records[step - 1]
        vals, vecs = records[step]
        overlap = np.abs(prev_vectors.conj().T @ vecs)
        match = np.argmax(overlap, axis=1)
        for i in range(n_track):
            j = int(match[i])
            if j == i or j >= n_track:
                continue
            if overlap[i, j] < match_confidence:
                continue
            if min(prev_values[i], prev_values[j], vals[i], vals[j]) <= floor:
                continue
            if abs(prev_values[i] - prev_values[j]) > floor and abs(vals[i] - vals[j]) > floor:
                if (step, j, i) not in crossings:
                    crossings.append((step, i, j))
    return DiagnosticReport(schedule=schedule, values=values_out,
                            crossings=crossings, min_gap=min_gap)
