"""Command-line experiment runner.

    slepian-kit <assemble|eig|varying-masks|oracle-check|plot>
                --config FILE [--out DIR] [--no-timestamp] [--seed N]

Exit codes: 0 success, 2 configuration error, 3 partial varying-masks
completion, 4 oracle failure.  The output directory defaults to ``./out``
and can be overridden by ``--out`` or the SLEPIAN_KIT_OUT environment
variable.  All numeric text is written with 17 significant digits so that
downstream comparisons are exact.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import oracles, plotting
from .config import ConfigError, ExperimentConfig, default_config, load_config
from .eigensolve import full_hermitian_eig
from .geometry import Gaussian, Grid, Interval, MaskFamily
from .operator import (
    FastOperator,
    apply_fast,
    assemble_dense,
    hilbert_schmidt_checks,
    kernel_samples,
    write_kernel_dump,
    write_matrix_dump,
)
from .varying_masks import run as varying_run


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_spectrum_csv(path, values: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,eigenvalue\n")
        for i, v in enumerate(values, start=1):
            fh.write(f"{i},{_fmt(float(v))}\n")


def write_vector_csv(path, grid: Grid, index: int, eigenvalue: float, vector: np.ndarray) -> None:
    """Eigenvector grid as CSV; complex columns appear only when needed."""
    v = np.asarray(vector).reshape(-1)
    complex_out = float(np.max(np.abs(v.imag))) > 1e-12 if np.iscomplexobj(v) else False
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# d={grid.d} N={grid.N} index={index} eigenvalue={_fmt(eigenvalue)}\n")
        if grid.d == 1:
            for z in v:
                if complex_out:
                    fh.write(f"{_fmt(z.real)},{_fmt(z.imag)}\n")
                else:
                    fh.write(f"{_fmt(z.real if np.iscomplexobj(v) else float(z))}\n")
        elif grid.d == 2:
            rows = v.reshape(grid.N, grid.N)
            for row in rows:
                if complex_out:
                    fh.write(",".join(f"{_fmt(z.real)};{_fmt(z.imag)}" for z in row) + "\n")
                else:
                    fh.write(",".join(_fmt(z.real if np.iscomplexobj(v) else float(z)) for z in row) + "\n")
        else:
            raise ConfigError("CSV output supports d in {1, 2}")


def read_vector_csv(path):
    """Inverse of write_vector_csv; returns (meta dict, vector)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise ValueError(f"{path}: missing header line")
        meta = {}
        for tok in header[2:].split():
            key, val = tok.split("=")
            meta[key] = float(val) if key == "eigenvalue" else int(val)
        rows = [line.strip() for line in fh if line.strip()]
    d = meta["d"]
    if d == 1:
        vals = []
        for line in rows:
            parts = line.split(",")
            vals.append(float(parts[0]) + (1j * float(parts[1]) if len(parts) > 1 else 0.0))
        vec = np.asarray(vals)
    else:
        grid_rows = []
        for line in rows:
            entries = []
            for cell in line.split(","):
                if ";" in cell:
                    re_s, im_s = cell.split(";")
                    entries.append(float(re_s) + 1j * float(im_s))
                else:
                    entries.append(float(cell))
            grid_rows.append(entries)
        vec = np.asarray(grid_rows).reshape(-1)
    return meta, vec


def _outdir(args) -> Path:
    out = args.out or os.environ.get("SLEPIAN_KIT_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _dense_allowed(cfg: ExperimentConfig) -> bool:
    return cfg.grid.size <= cfg.values["limits"]["max_dense_dim"]


def cmd_assemble(cfg: ExperimentConfig, out: Path, args) -> int:
    grid = cfg.grid
    mask = cfg.space_family.sample(grid, 0.0)
    kernel = kernel_samples(cfg.fourier_family.sample(grid, 0.0), grid)
    write_kernel_dump(out / "kernel.bin", kernel)

    report = {"grid": {"d": grid.d, "N": grid.N}}
    center = kernel.at([0] * grid.d)
    off = kernel.centered.copy()
    off[(grid.N - 1,) * grid.d] = 0.0
    if abs(center - 1.0) < 1e-12 and np.max(np.abs(off)) < 1e-12:
        report["note"] = "kernel is the discrete delta; the matrix is the identity"

    if not _dense_allowed(cfg):
        raise ConfigError(
            f"dense assembly of dimension {grid.size} exceeds max_dense_dim="
            f"{cfg.values['limits']['max_dense_dim']}; use the iterative path "
            "(varying-masks) or raise [limits] max_dense_dim"
        )
    K = assemble_dense(mask, kernel)
    if cfg.values["outputs"]["dump_matrix"]:
        write_matrix_dump(out / "matrix.bin", K)
    spectrum = full_hermitian_eig(K)
    checks = hilbert_schmidt_checks(K, spectrum)

    rng = np.random.default_rng(args.seed)
    rel = 0.0
    for _ in range(3):
        v = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        rel = max(rel, float(np.linalg.norm(apply_fast(mask, kernel, v) - K.matrix @ v)
                             / np.linalg.norm(v)))
    report["checks"] = {
        "hermitian_max": checks.hermitian_max,
        "frobenius_rel_residual": checks.frobenius_rel_residual,
        "eigenvalue_min": checks.eigenvalue_min,
        "eigenvalue_max": checks.eigenvalue_max,
        "psd_ok": checks.psd_ok,
        "sorted_ok": checks.sorted_ok,
        "fast_vs_dense_rel": rel,
        "ok": checks.ok and rel <= 1e-12,
    }
    (out / "structural_report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    for line in checks.lines():
        print(line)
    print(f"fast-vs-dense matvec rel    : {rel:.3e}")
    return 0 if report["checks"]["ok"] else 1


def cmd_eig(cfg: ExperimentConfig, out: Path, args) -> int:
    grid = cfg.grid
    if not _dense_allowed(cfg):
        raise ConfigError(
            f"dense eigendecomposition of dimension {grid.size} exceeds "
            f"max_dense_dim={cfg.values['limits']['max_dense_dim']}; use varying-masks instead"
        )
    mask = cfg.space_family.sample(grid, 0.0)
    kernel = kernel_samples(cfg.fourier_family.sample(grid, 0.0), grid)
    spectrum = full_hermitian_eig(assemble_dense(mask, kernel))
    if cfg.values["outputs"]["spectrum_csv"]:
        write_spectrum_csv(out / "spectrum.csv", spectrum.values)
    n_plot = min(cfg.values["outputs"]["n_plot_vectors"], grid.size)
    timestamp = not args.no_timestamp
    for q in range(n_plot):
        if cfg.values["outputs"]["vectors_csv"]:
            write_vector_csv(out / f"eigvec_{q + 1:03d}.csv", grid, q + 1,
                             float(spectrum.values[q]), spectrum.vectors[:, q])
        if cfg.values["outputs"]["plots"]:
            plotting.plot_vector(grid, spectrum.vectors[:, q], mask,
                                 out / f"eigvec_{q + 1:03d}.svg", timestamp=timestamp,
                                 title=f"eigvec_{q + 1:03d}, value {spectrum.values[q]:.8f}")
    if cfg.values["outputs"]["plots"]:
        plotting.plot_spectrum(spectrum.values, out / "spectrum.svg", timestamp=timestamp)
    print(f"wrote spectrum ({len(spectrum.values)} values) and {n_plot} eigenvectors to {out}")
    return 0


def cmd_varying_masks(cfg: ExperimentConfig, out: Path, args) -> int:
    grid = cfg.grid
    dense = None
    if _dense_allowed(cfg):
        K0 = assemble_dense(cfg.space_family.sample(grid, 0.0),
                            kernel_samples(cfg.fourier_family.sample(grid, 0.0), grid))
        dense = full_hermitian_eig(K0)
    record = varying_run(cfg.space_family, cfg.fourier_family, grid, cfg.varying,
                         dense_reference=dense)
    (out / "run_record.json").write_text(record.to_json())
    mask0 = cfg.space_family.sample(grid, 0.0)
    timestamp = not args.no_timestamp
    for q in range(record.n_accepted):
        if cfg.values["outputs"]["vectors_csv"]:
            write_vector_csv(out / f"accepted_{q + 1:03d}.csv", grid, q + 1,
                             float(record.ratios[q]), record.vectors[:, q])
        if cfg.values["outputs"]["plots"]:
            plotting.plot_vector(grid, record.vectors[:, q], mask0,
                                 out / f"accepted_{q + 1:03d}.svg", timestamp=timestamp,
                                 title=f"accepted_{q + 1:03d}, value {record.ratios[q]:.8f}")
    if dense is not None:
        with open(out / "comparison.csv", "w", encoding="utf-8") as fh:
            fh.write("index,dense_eigenvalue,ratio,abs_diff,acceptance_eps\n")
            for q in range(record.n_accepted):
                lam = float(dense.values[q])
                diff = abs(record.ratios[q] - lam)
                fh.write(f"{q + 1},{_fmt(lam)},{_fmt(record.ratios[q])},"
                         f"{_fmt(diff)},{_fmt(record.acceptance_eps[q])}\n")
    status = "complete" if record.complete else "PARTIAL"
    print(f"varying-masks: accepted {record.n_accepted}/{cfg.varying.n_vectors} vectors ({status})")
    return 0 if record.complete else 3


def _oracle_suites(cfg: ExperimentConfig):
    """Each suite returns (passed, measurements)."""
    ocfg = cfg.values["oracle"]

    def suite_gaussian():
        N = ocfg["gaussian_N"]
        grid = Grid(1, N)
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fam_s = MaskFamily(Gaussian(ocfg["gamma_space"]), "space")
            fam_f = MaskFamily(Gaussian(ocfg["gamma_fourier"]), "fourier")
        kernel = kernel_samples(fam_f.sample(grid, 0.0), grid)
        spectrum = full_hermitian_eig(assemble_dense(fam_s.sample(grid, 0.0), kernel))
        alpha, beta = oracles.effective_gaussian_parameters(
            ocfg["gamma_space"], ocfg["gamma_fourier"], grid)
        rel_errors, overlaps = [], []
        for n in range(6):
            lam, psi = oracles.gaussian_eigenpairs(alpha, beta, n, grid)
            rel_errors.append(abs(spectrum.values[n] - lam) / lam)
            overlaps.append(abs(np.vdot(spectrum.vectors[:, n], psi)))
        passed = max(rel_errors) <= 1e-3 and min(overlaps) >= 0.999
        return passed, {"max_rel_error": max(rel_errors), "min_overlap": min(overlaps)}

    def suite_splitting():
        grid = Grid(1, 128)
        x = grid.lattice_axis()
        xi = grid.fourier_axis()
        V = 0.02 * x ** 2
        H = 0.8 * xi ** 2
        kernel = kernel_samples(np.exp(-0.5 * H), grid)
        mask = np.exp(-0.5 * V)
        rng = np.random.default_rng(cfg.values["run"]["seed"])
        worst = 0.0
        for _ in range(10):
            f = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
            a = oracles.splitting_apply(V, H, f, grid)
            b = apply_fast(mask, kernel, f)
            worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(f)))
        return worst <= 1e-10, {"max_rel_diff": worst}

    def suite_quasimode():
        grid = Grid(1, ocfg["quasimode_N"])
        slopes = {n: oracles.quasimode_order(n, grid, sigma=ocfg["quasimode_sigma"])
                  for n in (0, 1)}
        passed = all(2.7 <= s <= 3.3 for s in slopes.values())
        return passed, {f"slope_n{n}": s for n, s in slopes.items()}

    def suite_quadric():
        om = 0.3 * 2 * math.pi
        results = {}
        res = {}
        for N in (150, 300):
            grid = Grid(1, N)
            fam_s = MaskFamily(Interval(0.0, 1.0), "space")
            fam_f = MaskFamily(Interval(0.0, om), "fourier")
            K = assemble_dense(fam_s.sample(grid, 0.0),
                               kernel_samples(fam_f.sample(grid, 0.0), grid))
            beta_eff = (om * oracles.effective_fourier_radius_scale(grid)) ** 2
            P = oracles.quadric_commuting_operator(([1.0], 1.0), ([1.0], beta_eff), grid)
            res[N] = oracles.commutation_residual(P, K)
        results["residual_150"] = res[150]
        results["residual_300"] = res[300]
        results["ratio"] = res[300] / res[150]
        passed = results["ratio"] <= 0.6
        return passed, results

    def suite_dpss():
        N, W = 150, 0.1
        grid = Grid(1, N)
        fam_s = MaskFamily(Interval(0.0, 1.0), "space")
        fam_f = MaskFamily(Interval(0.0, 2 * math.pi * W), "fourier")
        K = assemble_dense(fam_s.sample(grid, 0.0),
                           kernel_samples(fam_f.sample(grid, 0.0), grid))
        spectrum = full_hermitian_eig(K)
        vecs = oracles.dpss_vectors(N, W, 16)
        A = K.matrix.real
        ratios = [float(vecs[:, q] @ A @ vecs[:, q]) for q in range(16)]
        lam17 = float(spectrum.values[16])
        passed = all(r > lam17 for r in ratios)
        return passed, {"min_ratio": min(ratios), "lambda_17": lam17}

    def suite_equivalence():
        om = 0.3 * 2 * math.pi
        grid = Grid(1, 150)
        fam_s = MaskFamily(Interval(0.0, 1.0), "space")
        mask = fam_s.sample(grid, 0.0)
        centered = kernel_samples(MaskFamily(Interval(0.0, om), "fourier").sample(grid, 0.0), grid)
        spectrum = full_hermitian_eig(assemble_dense(mask, centered))
        p = 5 * grid.dxi
        shifted = kernel_samples(MaskFamily(Interval(p, om), "fourier").sample(grid, 0.0), grid)
        psi = spectrum.vectors[:, 0]
        mapped = oracles.equivalence_map("fourier-translation", psi, -p, grid)
        op_shift = FastOperator(mask, shifted)
        op_center = FastOperator(mask, centered)
        from .eigensolve import concentration_ratio
        diff = abs(concentration_ratio(op_shift, mapped) - concentration_ratio(op_center, psi))
        return diff <= 1e-6, {"ratio_shift_diff": diff}

    return {
        "gaussian": suite_gaussian,
        "splitting": suite_splitting,
        "quasimode": suite_quasimode,
        "quadric": suite_quadric,
        "dpss": suite_dpss,
        "equivalence": suite_equivalence,
    }


def cmd_oracle_check(cfg: ExperimentConfig, out: Path, args) -> int:
    suites = _oracle_suites(cfg)
    requested = cfg.oracle_suites()
    unknown = [s for s in requested if s not in suites]
    if unknown:
        raise ConfigError(f"unknown oracle suites: {', '.join(unknown)}")
    report = {}
    all_ok = True
    for name in requested:
        passed, measures = suites[name]()
        passed = bool(passed)
        report[name] = {"passed": passed, **{k: float(v) for k, v in measures.items()}}
        all_ok &= passed
        detail = ", ".join(f"{k}={v:.6g}" for k, v in measures.items())
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    (out / "oracle_report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    return 0 if all_ok else 4


def cmd_plot(cfg: ExperimentConfig, out: Path, args) -> int:
    grid = cfg.grid
    mask = cfg.space_family.sample(grid, 0.0)
    timestamp = not args.no_timestamp
    spectrum_csv = out / "spectrum.csv"
    made = 0
    if spectrum_csv.exists():
        rows = spectrum_csv.read_text().strip().splitlines()[1:]
        values = np.array([float(r.split(",")[1]) for r in rows])
        plotting.plot_spectrum(values, out / "spectrum.svg", timestamp=timestamp)
        made += 1
    for csv in sorted(out.glob("*_[0-9][0-9][0-9].csv")):
        meta, vec = read_vector_csv(csv)
        plotting.plot_vector(grid, vec, mask, csv.with_suffix(".svg"), timestamp=timestamp,
                             title=f"{csv.stem}, value {meta['eigenvalue']:.8f}")
        made += 1
    print(f"rendered {made} figures in {out}")
    return 0


COMMANDS = {
    "assemble": cmd_assemble,
    "eig": cmd_eig,
    "varying-masks": cmd_varying_masks,
    "oracle-check": cmd_oracle_check,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="slepian-kit", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="experiment configuration file (INI)")
    parser.add_argument("--out", help="output directory (default ./out or $SLEPIAN_KIT_OUT)")
    parser.add_argument("--no-timestamp", action="store_true",
                        help="strip date metadata from SVG output")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized diagnostics (overrides [run] seed)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is None:
            args.seed = cfg.values["run"]["seed"]
        out = _outdir(args)
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err.filename}: {err.strerror or err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
