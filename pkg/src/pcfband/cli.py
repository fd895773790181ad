"""Command-line front end: ``pcfband <subcommand> --config run.json``.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 solver error.
Every CSV starts with ``#`` comment lines (seed and run metadata), then one
header row naming columns with units in brackets.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, load_config
from .convergence import SweepPlan, band_sweep, detect_gaps, dof, resolution_sweep
from .corners import find_exponents, sigma_epsilon
from .diagnostics import check_garding, check_identity, random_field
from .errors import ConfigError, PcfBandError
from .geometry import extract_corners
from .lattice import fold_to_zone, reciprocal_lattice, sample_kpath
from .medium import eta_fourier_polygon
from .planewave import (
    BlochParams,
    assemble,
    build_basis,
    divergence_bound,
    faraday_residual,
    recover_E,
    reconstruct_H,
    solve_bloch,
)

log = logging.getLogger("pcfband")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
SUBCOMMANDS = ("bands", "exponents", "converge", "validate", "field")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12e}"


class Outputs:
    """Tracks written files so a failed run leaves nothing half-written."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.created_root = not self.root.exists()
        self.paths: list[Path] = []

    def path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        p = self.root / name
        self.paths.append(p)
        return p

    def csv(self, name: str, comments, header, rows) -> Path:
        p = self.path(name)
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            fh.write(",".join(header) + "\n")
            for r in rows:
                if len(r) != len(header):
                    raise ValueError(f"{name}: row has {len(r)} fields, header has {len(header)}")
                fh.write(",".join(_fmt(v) for v in r) + "\n")
        return p

    def text(self, name: str, body: str) -> Path:
        p = self.path(name)
        p.write_text(body, encoding="utf-8")
        return p

    def discard(self):
        for p in self.paths:
            p.unlink(missing_ok=True)
        if self.created_root and self.root.exists() and not any(self.root.iterdir()):
            self.root.rmdir()


def _cutoff(cfg: Config) -> int:
    return cfg.cutoff if cfg.cutoff is not None else cfg.finest_cutoff


def _table(cfg: Config, cutoff: int):
    return eta_fourier_polygon(cfg.medium, cutoff)


def _meta(cfg: Config, cmd: str) -> list[str]:
    return [f"seed={cfg.seed}", f"pcfband {__version__} {cmd}", f"beta={_fmt(cfg.beta)} [1/a]"]


# -- subcommands ------------------------------------------------------------


def cmd_bands(cfg: Config, out: Outputs, threads: int) -> int:
    N = _cutoff(cfg)
    table = _table(cfg, N)
    bt = band_sweep(table, cfg.lattice, cfg.kpath, cfg.beta, N, cfg.bands, cfg.tol, threads)
    rows = [
        (ik, bt.arclength[ik], bt.xi[ik, 0], bt.xi[ik, 1], b, bt.kappa2[ik, b])
        for ik in range(len(bt.xi))
        for b in range(cfg.bands)
    ]
    meta = _meta(cfg, "bands") + [f"cutoff={N}"]
    out.csv(
        "bands.csv",
        meta,
        ["k_index", "arclength[1/a]", "xi_x[1/a]", "xi_y[1/a]", "band", "kappa2[1/a^2]"],
        rows,
    )
    gaps = detect_gaps(bt.kappa2)
    tops = bt.kappa2.max(axis=0)
    gap_rows = []
    for lo, hi in gaps:
        j = int(np.flatnonzero(tops == lo)[0])
        gap_rows.append((j, j + 1, lo, hi, hi - lo))
    out.csv(
        "gaps.csv",
        meta,
        ["band_below", "band_above", "kappa2_low[1/a^2]", "kappa2_high[1/a^2]", "width[1/a^2]"],
        gap_rows,
    )
    ticks = ", ".join(
        f'"{lab}" {_fmt(s)}' for lab, s in zip(bt.labels, bt.arclength) if lab
    )
    script = "\n".join(
        [
            f"# seed={cfg.seed}",
            "set datafile separator ','",
            "set datafile commentschars '#'",
            "set xlabel 'k-path arclength [1/a]'",
            "set ylabel 'kappa^2 [1/a^2]'",
            f"set xtics ({ticks})",
            "set key off",
            f"plot for [b=0:{cfg.bands - 1}] 'bands.csv' every ::1 using 2:($5==b ? $6 : 1/0) with linespoints",
            "",
        ]
    )
    out.text("bands.gp", script)
    log.info("bands: %d k-points x %d bands, %d gaps", len(bt.xi), cfg.bands, len(gaps))
    return EXIT_OK


def cmd_exponents(cfg: Config, out: Outputs, threads: int) -> int:
    corners = extract_corners(cfg.partition)
    rows = []
    for ic, c in enumerate(corners):
        for ex in find_exponents(c):
            rows.append((ic, c.location[0], c.location[1], len(c.sectors), ex.lam, ex.family, ex.residual))
    sig = sigma_epsilon(corners)
    sig_txt = "smooth" if math.isinf(sig) else _fmt(sig)
    out.csv(
        "exponents.csv",
        [f"seed={cfg.seed}", f"pcfband {__version__} exponents", f"sigma_epsilon={sig_txt}"],
        ["corner_index", "x[a]", "y[a]", "sector_count", "lambda[1]", "family", "residual[1]"],
        rows,
    )
    log.info("exponents: %d corners, sigma_epsilon=%s", len(corners), sig_txt)
    return EXIT_OK


def _kpoints(cfg: Config):
    """Distinct k-path vertices, folded into the zone, in path order."""
    seen, out = [], []
    for v in cfg.kpath.vertices:
        xi = fold_to_zone(v, cfg.lattice)
        if not any(np.allclose(xi, s, atol=1e-12) for s in seen):
            seen.append(xi)
            out.append(BlochParams(xi, cfg.beta))
    return out


def cmd_converge(cfg: Config, out: Outputs, threads: int) -> int:
    if not cfg.ladder:
        raise ConfigError("converge needs a 'ladder' of cutoffs")
    table = _table(cfg, cfg.ladder[-1])
    kps = _kpoints(cfg)
    plan = SweepPlan(table, cfg.lattice, kps, cfg.ladder, cfg.bands, cfg.tol)
    rec = resolution_sweep(plan, threads)
    rows = []
    for ik in range(len(kps)):
        for b in range(cfg.bands):
            for iN, N in enumerate(cfg.ladder):
                w = rec.windows[ik, b, iN - 2] if iN >= 2 else float("nan")
                rows.append((ik, b, N, dof(N), rec.kappa2[ik, iN, b], rec.errors[ik, iN, b], w))
    meta = _meta(cfg, "converge") + ["p_hat_window fits the 3 rungs ending at N"]
    out.csv(
        "converge.csv",
        meta,
        ["k_index", "band", "N", "dof", "kappa2[1/a^2]", "error[1/a^2]", "p_hat_window[1]"],
        rows,
    )
    orows = [
        (ik, b, rec.reference[ik, b], rec.rate_used[ik, b], rec.p_hat[ik, b], rec.fit_residual[ik, b])
        for ik in range(len(kps))
        for b in range(cfg.bands)
    ]
    out.csv(
        "orders.csv",
        meta,
        ["k_index", "band", "reference[1/a^2]", "richardson_rate[1]", "p_hat[1]", "fit_residual[1]"],
        orows,
    )
    return EXIT_OK


def validation_suite(cfg: Config, threads: int = 1) -> list[tuple]:
    """Invariant checks on the configured medium: (name, value, threshold, passed)."""
    rng = np.random.default_rng(cfg.seed)
    opts = cfg.validate
    N = min(_cutoff(cfg), opts.cutoff) if _cutoff(cfg) else opts.cutoff
    table = _table(cfg, max(N, 1))
    rec = reciprocal_lattice(cfg.lattice)
    checks = []

    def add(name, value, threshold, ok):
        checks.append((name, float(value), float(threshold), bool(ok)))

    add("eta_conjugate_symmetry", table.conjugate_symmetry_error(), 1e-14, table.conjugate_symmetry_error() <= 1e-14)

    n_inf = math.sqrt(cfg.medium.n2_max)
    worst_id, worst_g, worst_g2 = 0.0, math.inf, math.inf
    for _ in range(opts.fields):
        xi = fold_to_zone(rng.uniform(-0.5, 0.5, 2) @ rec.matrix, cfg.lattice)
        beta = rng.uniform(-2.0, 2.0)
        v = random_field(cfg.lattice, N, xi, beta, rng)
        worst_id = max(worst_id, check_identity(v).relative_gap)
        g = check_garding(v, table, n_inf)
        worst_g = min(worst_g, g.slack / (1 + abs(g.lhs)))
        worst_g2 = min(worst_g2, g.slack2 / (1 + abs(g.lhs2)))
    add("curl_div_identity_gap", worst_id, 1e-12, worst_id < 1e-12)
    add("garding_slack", worst_g, -1e-10, worst_g >= -1e-10)
    add("garding_beta_slack", worst_g2, -1e-10, worst_g2 >= -1e-10)

    herm, psd, div, far = 0.0, math.inf, 0.0, 0.0
    for p in _kpoints(cfg):
        basis = build_basis(p, cfg.lattice, N)
        op = assemble(basis, table)
        herm = max(herm, op.hermiticity_error)
        w = np.linalg.eigvalsh(op.matrix)
        psd = min(psd, w[0] / max(1.0, abs(w[-1])))
        sol = solve_bloch(table, cfg.lattice, p, N, min(cfg.bands, basis.dim - basis.n_zero_modes), cfg.tol)
        for b in range(sol.nev):
            div = max(div, divergence_bound(sol, b) / np.linalg.norm(sol.coefficients(b)))
            if sol.eigenvalues[b] > 1e-8:
                far = max(far, faraday_residual(sol, b))
    add("hermiticity", herm, 1e-12, herm <= 1e-12)
    add("psd_min_eigenvalue", psd, -1e-10, psd >= -1e-10)
    add("divergence_residual", div, 1e-12, div < 1e-12)
    add("faraday_residual", far, 1e-8, far < 1e-8)

    if not cfg.partition.regions or cfg.partition.is_homogeneous:
        n2 = cfg.partition.background_n2
        worst = 0.0
        for p in _kpoints(cfg):
            sol = solve_bloch(table, cfg.lattice, p, N, 10, cfg.tol)
            k = np.column_stack([rec.vectors(sol.basis.m) + p.xi, np.full(len(sol.basis.m), p.beta)])
            exact = np.sort(np.repeat(np.sum(k**2, axis=1) / n2, 2))
            exact = exact[exact > 1e-12][: sol.nev]
            worst = max(worst, float(np.max(np.abs(sol.eigenvalues - exact) / np.maximum(exact, 1e-300))))
        add("homogeneous_analytic", worst, 1e-8, worst < 1e-8)
    return checks


def cmd_validate(cfg: Config, out: Outputs, threads: int) -> int:
    checks = validation_suite(cfg, threads)
    rows = [(name, val, thr, "PASS" if ok else "FAIL") for name, val, thr, ok in checks]
    out.csv(
        "validate.csv",
        [f"seed={cfg.seed}", f"pcfband {__version__} validate", f"fields={cfg.validate.fields}"],
        ["check", "value[1]", "threshold[1]", "status"],
        rows,
    )
    failed = [r[0] for r in rows if r[3] == "FAIL"]
    for r in rows:
        log.info("%-26s %s  value=%s threshold=%s", r[0], r[3], _fmt(r[1]), _fmt(r[2]))
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_field(cfg: Config, out: Outputs, threads: int) -> int:
    N = _cutoff(cfg)
    table = _table(cfg, N)
    samples = sample_kpath(cfg.kpath, cfg.lattice)
    fo = cfg.field
    xi = fold_to_zone(samples[fo.k_index].xi, cfg.lattice)
    sol = solve_bloch(table, cfg.lattice, BlochParams(xi, cfg.beta), N, fo.band + 1, cfg.tol)
    H = reconstruct_H(sol, fo.band, fo.grid)
    E = recover_E(sol, fo.band, fo.grid, cfg.medium)
    M = fo.grid
    rows = []
    for i in range(M):
        for j in range(M):
            h = H.values[:, i, j]
            e = E.values[:, i, j]
            rows.append(
                (i, j, H.x[i, j], H.y[i, j])
                + tuple(v for c in h for v in (c.real, c.imag))
                + tuple(v for c in e for v in (c.real, c.imag))
            )
    comp = [f"{f}{a}_{part}[1]" for f in "he" for a in "xyz" for part in ("re", "im")]
    out.csv(
        "field.csv",
        _meta(cfg, "field")
        + [f"k_index={fo.k_index} band={fo.band} kappa2={_fmt(sol.eigenvalues[fo.band])}", "h, e: Bloch fields (e^{i xi.x} included)"],
        ["i", "j", "x[a]", "y[a]"] + comp,
        rows,
    )
    return EXIT_OK


COMMANDS = {
    "bands": cmd_bands,
    "exponents": cmd_exponents,
    "converge": cmd_converge,
    "validate": cmd_validate,
    "field": cmd_field,
}


def run(subcommand: str, cfg: Config, out_dir, threads: int = 1) -> int:
    """Run one subcommand; on any error the files it wrote are removed."""
    out = Outputs(Path(out_dir))
    try:
        status = COMMANDS[subcommand](cfg, out, threads)
    except ConfigError as exc:
        out.discard()
        log.error("config error in %s: %s", subcommand, exc)
        return EXIT_CONFIG
    except PcfBandError as exc:
        out.discard()
        log.error("%s failed (%s): %s", subcommand, type(exc).__name__, exc)
        return EXIT_SOLVER
    except BaseException:
        out.discard()
        raise
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcfband", description="Band structure and corner exponents of photonic-crystal fibres.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None, help="output directory (default ./out)")
        p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 0:
        log.error("--threads must be >= 0")
        return EXIT_CONFIG
    if args.tol is not None and not args.tol > 0:
        log.error("--tol must be positive")
        return EXIT_CONFIG
    if args.seed is not None and args.seed < 0:
        log.error("--seed must be non-negative")
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config).with_overrides(tol=args.tol, seed=args.seed)
    except ConfigError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or (Path(cfg.out) if cfg.out else Path("out"))
    threads = args.threads or os.cpu_count() or 1
    return run(args.command, cfg, out_dir, threads)


if __name__ == "__main__":
    sys.exit(main())
