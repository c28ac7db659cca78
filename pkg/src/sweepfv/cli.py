"""Command-line front end.

    sweepfv run --case euler_nosource --driver sweep --cfl 0.6 --out runs/
    sweepfv accuracy --case euler_nosource --levels 3
    sweepfv orderings --mesh my.mesh
    sweepfv refine coarse.mesh fine.mesh
    sweepfv stencils --case euler_nosource
"""
import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .euler import NonPhysicalStateError, get_case
from .io import (ConfigError, RunConfig, load_packaged_mesh, parse_config_values,
                 parse_ref_points, read_config, write_residue_csv, write_vtk)
from .mesh import MeshError, read_mesh, refine_uniform, write_mesh
from .solver import Discretization, SolverConfig, SolverError, run_to_convergence
from .stencil import RankDeficiencyError
from .sweep import build_orderings, dump_orderings

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_PHYSICS = 5
EXIT_NOT_CONVERGED = 6


def _load_mesh(cfg):
    if cfg.mesh is None:
        return load_packaged_mesh(get_case(cfg.case).mesh_file)
    return read_mesh(cfg.mesh)


def _ref_points(cfg):
    return None if cfg.ref_points is None else np.reshape(cfg.ref_points, (4, 2))


def _solver_config(cfg):
    return SolverConfig(driver=cfg.driver, cfl=cfg.cfl, delta=cfg.delta,
                        max_iters=cfg.max_iters, case=cfg.case, ref_points=_ref_points(cfg))


def _solve(cfg, mesh, progress=None):
    disc = Discretization(mesh, cfg.case)
    orderings = build_orderings(mesh, _ref_points(cfg))
    report = run_to_convergence(_solver_config(cfg), disc, orderings=orderings,
                                progress=progress)
    return disc, report


# ---------------------------------------------------------------- run

def cmd_run(cfg, stream=sys.stdout):
    """Solve one case; write solution.vtk, residue.csv and the summary line.

    Returns the exit status.
    """
    mesh = _load_mesh(cfg)
    for _ in range(cfg.levels):
        mesh = refine_uniform(mesh)
    disc, report = _solve(cfg, mesh)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_vtk(out / "solution.vtk", mesh, report.field, disc.gamma_gas)
    write_residue_csv(out / "residue.csv", report)
    line = report.summary(cfg.case)
    (out / "summary.txt").write_text(line + "\n")
    print(line, file=stream)
    if not report.converged:
        print(report.message, file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# ---------------------------------------------------------------- accuracy

@dataclass
class AccuracyTable:
    """Rows of (M, L1 error, L1 order, Linf error, Linf order, iterations, seconds)."""

    rows: list = field(default_factory=list)
    converged: list = field(default_factory=list)

    def add(self, m, l1, linf, iterations, seconds, converged=True):
        if self.rows:
            prev = self.rows[-1]
            o1, oinf = _order(prev[1], l1), _order(prev[3], linf)
        else:
            o1 = oinf = None
        self.rows.append((m, l1, o1, linf, oinf, iterations, seconds))
        self.converged.append(converged)

    def orders(self, norm="l1"):
        k = 2 if norm == "l1" else 4
        return [r[k] for r in self.rows[1:]]

    def text(self):
        def fmt(o):
            return "n/a" if o is None else f"{o:.2f}"
        lines = ["M L1 order Linf order iters seconds"]
        for m, l1, o1, li, oi, it, s in self.rows:
            lines.append(f"{m} {l1:.3e} {fmt(o1)} {li:.3e} {fmt(oi)} {it} {s:.2f}")
        return "\n".join(lines) + "\n"


ROUNDOFF = 1e-13


def _order(coarse, fine):
    """log2(coarse/fine), or None when either error is at round-off."""
    if coarse <= ROUNDOFF or fine <= ROUNDOFF:
        return None
    return math.log2(coarse / fine)


def cmd_accuracy(cfg, levels=None, progress=None):
    """Run the base mesh and ``levels`` uniform refinements of it."""
    levels = cfg.levels if levels is None else levels
    mesh = _load_mesh(cfg)
    table = AccuracyTable()
    for lev in range(levels + 1):
        if lev:
            mesh = refine_uniform(mesh)
        disc, report = _solve(cfg, mesh)
        l1, linf = disc.density_errors(report.field)
        table.add(mesh.n_cells, l1, linf, report.iterations, report.seconds, report.converged)
        if progress is not None:
            progress(table)
    return table


# ---------------------------------------------------------------- orderings / stencils

def cmd_orderings(cfg):
    mesh = _load_mesh(cfg)
    return dump_orderings(build_orderings(mesh, _ref_points(cfg)))


def cmd_stencils(cfg):
    """Per-cell stencil membership, one line per cell and stencil."""
    mesh = _load_mesh(cfg)
    disc = Discretization(mesh, cfg.case)
    op = disc.operator
    lines = ["cell stencil degree members"]
    for i in range(mesh.n_cells):
        for m in range(5):
            n = op.count[i, m]
            members = " ".join(str(int(j)) for j in op.idx[i, m, :n]) if n else "-"
            lines.append(f"{i} T{m + 1} {op.degree[i, m] if n else '-'} {members}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- argument parsing

def _add_common(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--case")
    p.add_argument("--mesh")
    p.add_argument("--driver", choices=["fe", "rk3", "sweep", "fe_jacobi", "rk3_jacobi",
                                        "fe_fast_sweep"])
    p.add_argument("--cfl", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--levels", type=int)
    p.add_argument("--out")
    p.add_argument("--ref-points", dest="ref_points", metavar="x1,y1,...,x4,y4")
    p.add_argument("--threads", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="sweepfv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "solve a case to steady state"),
                           ("accuracy", "error table over uniform refinements"),
                           ("orderings", "dump the eight sweep orderings"),
                           ("stencils", "dump per-cell stencil membership")):
        _add_common(sub.add_parser(name, help=helptext))
    p = sub.add_parser("refine", help="uniformly refine a mesh file")
    p.add_argument("mesh_in")
    p.add_argument("mesh_out")
    p.add_argument("--times", type=int, default=1)
    return parser


def config_from_args(args):
    values = {}
    if args.config:
        values.update(parse_config_values(Path(args.config).read_text()))
    for key in ("case", "mesh", "driver", "cfl", "delta", "max_iters", "levels", "out",
                "threads"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.ref_points is not None:
        values["ref_points"] = parse_ref_points(args.ref_points)
    return RunConfig(**values)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "refine":
            if args.times < 0:
                raise ConfigError("--times must be non-negative")
            mesh = read_mesh(args.mesh_in)
            for _ in range(args.times):
                mesh = refine_uniform(mesh)
            write_mesh(mesh, args.mesh_out)
            print(f"{mesh.n_cells} cells written to {args.mesh_out}")
            return EXIT_OK
        cfg = config_from_args(args)
        get_case(cfg.case)
        if cfg.threads is not None:
            import numba
            numba.set_num_threads(cfg.threads)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "accuracy":
            t0 = time.perf_counter()
            table = cmd_accuracy(cfg)
            text = table.text()
            print(text, end="")
            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "accuracy.txt").write_text(text)
            print(f"total {time.perf_counter() - t0:.1f} s", file=sys.stderr)
            return EXIT_OK if all(table.converged) else EXIT_NOT_CONVERGED
        if args.command == "orderings":
            print(cmd_orderings(cfg), end="")
            return EXIT_OK
        if args.command == "stencils":
            print(cmd_stencils(cfg), end="")
            return EXIT_OK
    except OSError as exc:
        print(f"sweepfv: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, MeshError, KeyError) as exc:
        print(f"sweepfv: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NonPhysicalStateError, RankDeficiencyError, SolverError) as exc:
        print(f"sweepfv: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
