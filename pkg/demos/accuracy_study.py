"""
Convergence order on the manufactured Euler solutions
=====================================================

Solve the smooth steady problem on the packaged 58-cell square mesh and
two uniform refinements, then read off the observed order of the density
error. Pass ``--case euler_source`` for the variant with a source term.
"""
import argparse

import numpy as np

from sweepfv import Discretization, SolverConfig, run_to_convergence
from sweepfv.io import load_packaged_mesh
from sweepfv.mesh import refine_uniform

parser = argparse.ArgumentParser()
parser.add_argument("--case", default="euler_nosource")
parser.add_argument("--levels", type=int, default=2)
args = parser.parse_args()

# the coarse mesh; every refinement splits each triangle into four
mesh = load_packaged_mesh("square_58.mesh")

prev = None
print("M        L1         order   Linf       iters")
for level in range(args.levels + 1):
    if level:
        mesh = refine_uniform(mesh)
    disc = Discretization(mesh, args.case)
    report = run_to_convergence(SolverConfig(driver="sweep", cfl=0.6), disc)
    l1, linf = disc.density_errors(report.field)
    order = "" if prev is None else f"{np.log2(prev / l1):.2f}"
    print(f"{mesh.n_cells:<8d} {l1:.3e}  {order:<6s}  {linf:.3e}  {report.iterations}")
    prev = l1
