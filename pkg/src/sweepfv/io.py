"""File formats: legacy VTK output, residue CSV, flat key=value run configs."""
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .euler import GAMMA, conservative_to_primitive
from .mesh import load_mesh
from .solver import DRIVER_ALIASES, DRIVERS

VTK_TRIANGLE = 5


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- meshes

def packaged_mesh_names():
    root = resources.files("sweepfv") / "data"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".mesh"))


def load_packaged_mesh(name):
    """One of the meshes shipped in ``sweepfv/data``."""
    root = resources.files("sweepfv") / "data"
    return load_mesh((root / name).read_text())


# ---------------------------------------------------------------- VTK

def vtk_text(mesh, U, gamma=GAMMA, title="sweepfv solution"):
    """Legacy ASCII unstructured grid with cell data rho, u, v, p."""
    prim = conservative_to_primitive(np.asarray(U, dtype=float), gamma)
    m = mesh.n_cells
    out = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
           f"POINTS {mesh.n_nodes} double"]
    out += [f"{x!r} {y!r} 0.0" for x, y in mesh.nodes.tolist()]
    out.append(f"CELLS {m} {4 * m}")
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.cells.tolist()]
    out.append(f"CELL_TYPES {m}")
    out += [str(VTK_TRIANGLE)] * m
    out.append(f"CELL_DATA {m}")
    for k, name in enumerate(("rho", "u", "v", "p")):
        out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        out += [repr(v) for v in prim[:, k].tolist()]
    return "\n".join(out) + "\n"


def write_vtk(path, mesh, U, gamma=GAMMA):
    Path(path).write_text(vtk_text(mesh, U, gamma))


def read_vtk_cell_data(path):
    """Cell-data arrays of a file written by :func:`write_vtk`, by name."""
    lines = Path(path).read_text().splitlines()
    n = None
    data = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if parts and parts[0] == "CELL_DATA":
            n = int(parts[1])
        elif parts and parts[0] == "SCALARS" and n is not None:
            data[parts[1]] = np.array([float(v) for v in lines[i + 2:i + 2 + n]])
            i += 1 + n
        i += 1
    return data


# ---------------------------------------------------------------- residue CSV

def write_residue_csv(path, report):
    Path(path).write_text(report.csv())


def read_residue_csv(path):
    """Rows of (iter, resA, dt, cfl, driver)."""
    rows = []
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "iter,resA,dt,cfl,driver":
        raise ValueError(f"{path}: not a residue CSV")
    for line in lines[1:]:
        it, res, dt, cfl, drv = line.split(",")
        rows.append((int(it), float(res), float(dt), float(cfl), drv))
    return rows


# ---------------------------------------------------------------- run config

@dataclass(frozen=True)
class RunConfig:
    case: str = "euler_nosource"
    mesh: Optional[str] = None  # None: the case's packaged mesh
    driver: str = "fe_fast_sweep"
    cfl: float = 0.6
    delta: Optional[float] = None
    max_iters: int = 100000
    out: str = "."
    ref_points: Optional[tuple] = None
    levels: int = 0
    threads: Optional[int] = None

    def __post_init__(self):
        drv = DRIVER_ALIASES.get(self.driver, self.driver)
        if drv not in DRIVERS:
            raise ConfigError(f"unknown driver {self.driver!r}")
        object.__setattr__(self, "driver", drv)
        if not self.cfl > 0:
            raise ConfigError("cfl must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.levels < 0:
            raise ConfigError("levels must be non-negative")
        if self.ref_points is not None and len(self.ref_points) != 8:
            raise ConfigError("ref_points needs exactly 8 numbers")
        if self.mesh is not None and not Path(self.mesh).is_file():
            raise FileNotFoundError(f"mesh file not found: {self.mesh}")

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def parse_ref_points(text):
    try:
        vals = tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"bad reference points {text!r}") from None
    if len(vals) != 8:
        raise ConfigError("reference points need 8 numbers: x1,y1,...,x4,y4")
    return vals


_CONVERT = {"cfl": float, "delta": float, "max_iters": int, "levels": int, "threads": int,
            "ref_points": parse_ref_points}


def parse_config_values(text):
    """Flat ``key = value`` lines; '#' starts a comment. Returns a dict."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CONVERT.get(key, str)(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
    return values


def parse_config(text):
    return RunConfig(**parse_config_values(text))


def read_config(path):
    return parse_config(Path(path).read_text())


def dump_config(cfg):
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if f.name == "ref_points":
            v = ",".join(repr(float(x)) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
