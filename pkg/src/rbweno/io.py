"""CSV and VTK output with deterministic formatting.

Floats carry 17 significant digits so identical runs produce byte-identical
files. VTK output is legacy ASCII 3.0 with one cell per mesh element and
per-element point duplication (works for CG and DG alike).
"""

from __future__ import annotations

import os

import numpy as np

from .basis import FeSpace


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: str, headers: list, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write(",".join(headers) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def line_profile(space: FeSpace, u: np.ndarray):
    """Nodal samples (x, values) of a 1D field, ascending in x.

    DG profiles keep the duplicated interface nodes so jumps stay visible.
    """
    if space.dim != 1:
        raise ValueError("line_profile needs a 1D space")
    u = np.atleast_2d(u)
    nodes = space.mesh.elem_centers[:, None, 0] + 0.5 * space.mesh.spacing[0] * space.ref_nodes[:, 0][None, :]
    vals = space.gather(u)                        # (m, E, n_loc)
    x = nodes.ravel()
    v = vals.reshape(u.shape[0], -1)
    order = np.lexsort((np.arange(x.size), x))    # stable: element order breaks ties
    return x[order], v[:, order]


def write_profile_csv(path: str, space: FeSpace, u: np.ndarray,
                      component_names: list | None = None) -> None:
    x, v = line_profile(space, u)
    names = component_names or [f"u{c}" for c in range(v.shape[0])]
    rows = ([x[i]] + [v[c, i] for c in range(v.shape[0])] for i in range(x.size))
    write_csv(path, ["x"] + list(names), rows)


def write_diagnostics_csv(path: str, rows: list) -> None:
    if not rows:
        write_csv(path, ["step"], [])
        return
    headers = list(rows[0].keys())
    write_csv(path, headers, ([r[h] for h in headers] for r in rows))


def write_convergence_csv(path: str, table) -> None:
    headers = ["h", "dofs", "err_L2", "err_S", "rate_L2", "rate_S", "picard_iters"]
    write_csv(path, headers, ([r[h] for h in headers] for r in table.rows))


_VTK_CELL = {
    (1, 1): (3, [0, 1]),                       # VTK_LINE
    (1, 2): (21, [0, 2, 1]),                   # VTK_QUADRATIC_EDGE
    (2, 1): (9, [0, 1, 3, 2]),                 # VTK_QUAD
    (2, 2): (28, [0, 2, 8, 6, 1, 5, 7, 3, 4]),  # VTK_BIQUADRATIC_QUAD
}


def write_vtk(path: str, space: FeSpace, fields: dict) -> None:
    """Legacy ASCII unstructured-grid dump with per-node scalar fields."""
    mesh = space.mesh
    E, n_loc = space.num_elements, space.n_loc
    ctype, order = _VTK_CELL[(mesh.dim, space.p)]
    pts = mesh.elem_centers[:, None, :] + 0.5 * mesh.spacing * space.ref_nodes[None, :, :]
    pts = pts.reshape(-1, mesh.dim)

    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write("rbweno field dump\n")
        f.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {E * n_loc} double\n")
        for p in pts:
            x = p[0]
            y = p[1] if mesh.dim == 2 else 0.0
            f.write(f"{_fmt(x)} {_fmt(y)} 0\n")
        f.write(f"CELLS {E} {E * (n_loc + 1)}\n")
        for e in range(E):
            ids = [e * n_loc + j for j in order]
            f.write(" ".join([str(n_loc)] + [str(i) for i in ids]) + "\n")
        f.write(f"CELL_TYPES {E}\n")
        for _ in range(E):
            f.write(f"{ctype}\n")
        f.write(f"POINT_DATA {E * n_loc}\n")
        for name, coeffs in fields.items():
            f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            vals = space.gather(np.asarray(coeffs)).reshape(-1)
            for v in vals:
                f.write(_fmt(v) + "\n")
