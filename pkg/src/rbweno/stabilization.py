"""Low-order, high-order, and blended dissipation forms plus the LPS split.

The hyperbolic solver blends gamma*high + (1-gamma)*low per element. The
steady CDR solver uses the split s_h + d_h, whose nonnegativity relies on the
per-patch stability weight omega_e computed by a small generalized
eigenproblem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .basis import FeSpace
from .projection import (
    FluctuationOperator,
    GradientProjection,
    fluctuation_at_quad,
    gradient_at_quad,
    project_gradient,
)


class StabilizationError(ValueError):
    pass


@dataclass
class StabParams:
    """Per-element stabilization data."""

    nu: np.ndarray               # artificial viscosity
    lam: np.ndarray              # wave speed bound
    omega: np.ndarray            # projection stability weight in (0, 1]
    gamma: np.ndarray            # blending factor in [0, 1]


def viscosity(lam, h_e, p: int):
    """Lax-Friedrichs-type coefficient lam * h / (2p)."""
    if p < 1:
        raise StabilizationError(f"degree {p} unsupported for viscosity")
    return np.asarray(lam) * np.asarray(h_e) / (2.0 * p)


def low_order_apply(space: FeSpace, nu, u_coeffs, w_coeffs) -> np.ndarray:
    """Per-element nu_e * (grad w, grad u)_{K_e}."""
    K = space.local_stiffness
    ul = space.gather(u_coeffs)
    wl = space.gather(w_coeffs)
    return np.asarray(nu) * np.einsum("ei,ij,ej->e", wl, K, ul)


def high_order_apply(
    space: FeSpace,
    nu,
    projection: GradientProjection | None,
    u_coeffs,
    w_coeffs,
) -> np.ndarray:
    """Per-element nu_e * (kappa grad w, kappa grad u)_{K_e}."""
    if space.continuity == "DG":
        return np.zeros(space.num_elements)
    ku = fluctuation_at_quad(space, u_coeffs, projection)
    kw = fluctuation_at_quad(space, w_coeffs)
    wq = space.quad_weights_phys
    return np.asarray(nu) * np.einsum("deq,q,deq->e", kw, wq, ku)


def blended_apply(space: FeSpace, params: StabParams, u_coeffs, w_coeffs) -> float:
    """Sum over elements of gamma*high-order + (1-gamma)*low-order."""
    lo = low_order_apply(space, params.nu, u_coeffs, w_coeffs)
    if space.continuity == "DG":
        return float(((1.0 - params.gamma) * lo).sum())
    proj = project_gradient(space, u_coeffs)
    hi = high_order_apply(space, params.nu, proj, u_coeffs, w_coeffs)
    return float((params.gamma * hi + (1.0 - params.gamma) * lo).sum())


# ---- patch tables ----------------------------------------------------------


def _patch_table(mesh) -> np.ndarray:
    """(E, 3^d) lattice patch neighbor ids, -1 where absent."""
    key = "patch_table"
    if key in mesh._cache:
        return mesh._cache[key]
    dim = mesh.dim
    offs = (
        [(dx,) for dx in (-1, 0, 1)]
        if dim == 1
        else [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
    )
    cols = []
    for off in offs:
        g = mesh.elem_grid + np.asarray(off)
        ok = np.ones(mesh.num_elements, dtype=bool)
        for ax in range(dim):
            if mesh.periodic[ax]:
                g[:, ax] %= mesh.shape[ax]
            else:
                ok &= (g[:, ax] >= 0) & (g[:, ax] < mesh.shape[ax])
        ids = g[:, 0] if dim == 1 else g[:, 1] * mesh.shape[0] + g[:, 0]
        cols.append(np.where(ok, ids, -1))
    table = np.stack(cols, axis=1)
    mesh._cache[key] = table
    return table


def patch_spread(mesh, values: np.ndarray) -> np.ndarray:
    """out[e'] = sum of values[e] over all patches containing e'.

    On periodic meshes an element can appear several times in the lattice
    patch of a small mesh; duplicates are collapsed, matching the set
    semantics of the patch definition.
    """
    table = _patch_table(mesh)
    E = mesh.num_elements
    out = np.zeros(E)
    small = any(per and s <= 2 for s, per in zip(mesh.shape, mesh.periodic))
    if small:
        for e in range(E):
            for e2 in mesh.patches[e]:
                out[e2] += values[e]
        return out
    for j in range(table.shape[1]):
        ids = table[:, j]
        ok = ids >= 0
        out += np.bincount(ids[ok], weights=values[ok], minlength=E)
    return out


def patch_gradient_inner(space: FeSpace, coeff_per_element: np.ndarray,
                         v_coeffs, w_coeffs) -> float:
    """Sum over e of c_e * (grad v, grad w)_{Omega_e}."""
    smear = patch_spread(space.mesh, np.asarray(coeff_per_element))
    per_elem = low_order_apply(space, 1.0, v_coeffs, w_coeffs)
    return float((smear * per_elem).sum())


# ---- stability weight ------------------------------------------------------


def estimate_omega_e(
    space: FeSpace,
    fluct: FluctuationOperator | None,
    e: int,
    tol: float = 1e-10,
) -> float:
    """Largest w <= 1 with w * |kappa_e grad v|^2_{K_e} <= |grad v|^2_{Omega_e}
    for every FE function v on the vertex patch of e."""
    if space.continuity == "DG":
        return 1.0
    if fluct is None:
        fluct = FluctuationOperator(space)
    mesh = space.mesh
    patch = mesh.patches[e]
    pdofs = np.unique(space.element_dofs[patch])
    pos = {g: i for i, g in enumerate(pdofs)}
    n = pdofs.size

    A = np.zeros((n, n))
    K_loc = space.local_stiffness
    for e2 in patch:
        idx = np.array([pos[g] for g in space.element_dofs[e2]])
        A[np.ix_(idx, idx)] += K_loc

    n_q = space.quadrature.points.shape[0]
    d = space.dim
    rows = fluct.matrix[e * n_q * d : (e + 1) * n_q * d]
    R = rows[:, pdofs].toarray()
    wq = np.repeat(space.quad_weights_phys, d)
    G = R.T @ (wq[:, None] * R)

    ew, V = sla.eigh(A)
    keep = ew > tol * max(ew[-1], 1.0)
    if not keep.any():
        return 1.0
    M = V[:, keep] / np.sqrt(ew[keep])
    T = M.T @ G @ M
    lam_max = float(sla.eigh(T, eigvals_only=True)[-1])
    if lam_max <= tol:
        return 1.0
    return min(1.0, 1.0 / lam_max)


def estimate_omega_field(space: FeSpace, fluct: FluctuationOperator | None = None,
                         mode: str = "computed") -> np.ndarray:
    """omega_e for every element; mode "one" short-circuits to all ones."""
    if mode == "one" or space.continuity == "DG":
        return np.ones(space.num_elements)
    if fluct is None:
        fluct = FluctuationOperator(space)
    return np.array([estimate_omega_e(space, fluct, e) for e in range(space.num_elements)])


def estimate_omega_field_fast(space: FeSpace, fluct: FluctuationOperator | None = None,
                              mode: str = "computed") -> np.ndarray:
    """Like estimate_omega_field, but deduplicates translated patches.

    On a uniform mesh all elements whose patch has the same boundary-clipping
    pattern share the same omega_e, so one eigensolve per pattern suffices.
    """
    if mode == "one" or space.continuity == "DG":
        return np.ones(space.num_elements)
    key = ("omega_field", space.p, space.seminorm_mode)
    if key in space._cache:
        return space._cache[key]
    if fluct is None:
        fluct = FluctuationOperator(space)
    mesh = space.mesh
    table = _patch_table(mesh)
    signatures = [tuple(row >= 0) for row in table]
    out = np.empty(mesh.num_elements)
    cache: dict = {}
    for e, sig in enumerate(signatures):
        if sig not in cache:
            cache[sig] = estimate_omega_e(space, fluct, e)
        out[e] = cache[sig]
    space._cache[key] = out
    return out


# ---- LPS split -------------------------------------------------------------


def lps_form_sh(space: FeSpace, params: StabParams, u_coeffs, w_coeffs) -> float:
    """sum_e omega_e nu_e (kappa grad w, kappa grad u)_{K_e}."""
    if space.continuity == "DG":
        return 0.0
    per = high_order_apply(space, params.nu * params.omega, None, u_coeffs, w_coeffs)
    return float(per.sum())


def nonlinear_form_dh(
    space: FeSpace,
    params: StabParams,
    gamma: np.ndarray,
    v_coeffs,
    w_coeffs,
) -> float:
    """Nonnegative remainder of the blended dissipation after the LPS part.

    sum_e (1-gamma_e) nu_e [ (grad v, grad w)_{Omega_e}
                             - omega_e (kappa grad v, kappa grad w)_{K_e} ]
    + sum_e gamma_e nu_e (1 - omega_e) (kappa grad v, kappa grad w)_{K_e}
    """
    gamma = np.asarray(gamma)
    c_lo = (1.0 - gamma) * params.nu
    total = patch_gradient_inner(space, c_lo, v_coeffs, w_coeffs)
    if space.continuity == "CG":
        kk = high_order_apply(space, 1.0, None, v_coeffs, w_coeffs)
        total -= float((c_lo * params.omega * kk).sum())
        total += float((gamma * params.nu * (1.0 - params.omega) * kk).sum())
    return total
