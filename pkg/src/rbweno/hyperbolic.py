"""Semi-discrete CG/DG solvers for conservation laws with blended dissipation.

DG couples elements through local Lax-Friedrichs face fluxes; CG imposes
boundary data weakly through an LF flux correction on boundary faces (which
reduces to an |v.n| inflow penalty for linear advection). Element residuals
use the lagged time derivative of the previous Runge-Kutta stage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import FeSpace
from .physics import BoundarySpec, _dot_n, lax_friedrichs_flux
from .projection import FluctuationOperator
from .stabilization import viscosity
from .weno import WenoConfig, evaluate_field_weno

STAB_MODES = ("none", "low_only", "weno_classical", "rb_weno")


class SolverBlowUp(RuntimeError):
    def __init__(self, step: int, t: float, detail: str = ""):
        super().__init__(f"solution blew up at step {step}, t={t:.6g} {detail}".rstrip())
        self.step = step
        self.t = t


@dataclass
class HyperbolicProblem:
    space: FeSpace
    model: object
    boundary: BoundarySpec | None = None
    stab: str = "weno_classical"
    weno: WenoConfig = field(default_factory=WenoConfig)
    residual_source: str = "time_dependent"   # or "spatial_only"
    positivity_fix: bool = True               # Euler/DG: squeeze stage states
                                              # toward admissible cell means

    def __post_init__(self):
        if self.stab not in STAB_MODES:
            raise ValueError(f"unknown stabilization mode {self.stab!r}")
        if self.space.continuity == "CG" and self.model.m > 1:
            raise NotImplementedError("CG assembly is scalar-only; use DG for systems")


@dataclass
class SemiDiscreteState:
    u: np.ndarray                 # (m, N)
    t: float
    udot: np.ndarray              # (m, N), lagged time derivative
    gamma: np.ndarray | None = None
    nu: np.ndarray | None = None
    lam: np.ndarray | None = None

    @classmethod
    def initial(cls, u0: np.ndarray, t: float = 0.0) -> "SemiDiscreteState":
        u0 = np.atleast_2d(np.asarray(u0, dtype=float))
        return cls(u0, t, np.zeros_like(u0))


@dataclass
class TimeIntegrator:
    order: int = 3
    cfl: float = 0.3
    t_final: float = 1.0

    def __post_init__(self):
        if self.order not in (2, 3):
            raise ValueError(f"SSP-RK order {self.order} unsupported")


# ---- cached face batches ---------------------------------------------------


def _face_batches(space: FeSpace):
    def build():
        mesh = space.mesh
        n_fq = max(space.face_quadrature.weights.size, 1)
        tq = space.face_quadrature.points[:, 0] if mesh.dim == 2 else np.zeros(1)

        def face_coords(idx):
            centers = mesh.face_center[idx]
            if mesh.dim == 1:
                return centers[:, None, :]
            normals = mesh.face_normal[idx]
            coords = np.repeat(centers[:, None, :], n_fq, axis=1)
            tang_ax = int(np.argmin(np.abs(normals[0])))
            coords[:, :, tang_ax] += tq[None, :] * 0.5 * mesh.spacing[tang_ax]
            return coords

        def face_wq(idx):
            meas = mesh.face_measure[idx] / (2.0 if mesh.dim == 2 else 1.0)
            return np.outer(meas, space.face_quadrature.weights)

        def face_h(idx):
            if mesh.dim == 2:
                return mesh.face_measure[idx]
            return mesh.h_e[mesh.face_left[idx]]

        interior = []
        ifaces = mesh.interior_faces
        if ifaces.size:
            pairs = mesh.face_side_left[ifaces] * 10 + mesh.face_side_right[ifaces]
            for key in np.unique(pairs):
                sel = ifaces[pairs == key]
                interior.append(
                    dict(
                        sL=int(mesh.face_side_left[sel[0]]),
                        sR=int(mesh.face_side_right[sel[0]]),
                        eL=mesh.face_left[sel],
                        eR=mesh.face_right[sel],
                        normal=mesh.face_normal[sel],
                        coords=face_coords(sel),
                        wq=face_wq(sel),
                        h_F=face_h(sel),
                    )
                )
        boundary = []
        bfaces = mesh.boundary_faces
        if bfaces.size:
            keys = [(mesh.face_tag[f], int(mesh.face_side_left[f])) for f in bfaces]
            for key in sorted(set(keys)):
                sel = bfaces[np.array([k == key for k in keys])]
                boundary.append(
                    dict(
                        tag=key[0],
                        side=key[1],
                        elem=mesh.face_left[sel],
                        normal=mesh.face_normal[sel],
                        coords=face_coords(sel),
                        wq=face_wq(sel),
                        h_F=face_h(sel),
                    )
                )
        return interior, boundary

    return space._table("face_batches", build)


def _scatter_face(out: np.ndarray, elems: np.ndarray, contrib: np.ndarray) -> None:
    """out (m, E, n_loc) += scatter of contrib (m, nf, n_loc) into elems."""
    m, E, n_loc = out.shape
    idx = (elems[:, None] * n_loc + np.arange(n_loc)[None, :]).ravel()
    for c in range(m):
        out[c] += np.bincount(idx, weights=contrib[c].ravel(), minlength=E * n_loc).reshape(
            E, n_loc
        )


def _mass_solver(space: FeSpace):
    """Callable rhs (m, N) -> du/dt (m, N)."""

    def build():
        if space.continuity == "DG":
            Minv = np.linalg.inv(space.local_mass)

            def solve(b, x0=None):
                loc = b.reshape(b.shape[0], space.num_elements, space.n_loc)
                return np.einsum("ij,mej->mei", Minv, loc).reshape(b.shape)

            return solve

        E, n_loc = space.num_elements, space.n_loc
        dofs = space.element_dofs
        rows = np.repeat(dofs, n_loc, axis=1).ravel()
        cols = np.tile(dofs, (1, n_loc)).ravel()
        vals = np.tile(space.local_mass.ravel(), E)
        M = sp.csr_matrix((vals, (rows, cols)), shape=(space.num_dofs, space.num_dofs))
        precond = _tensor_mass_preconditioner(space)

        def solve(b, x0=None):
            out = np.empty_like(b)
            for c in range(b.shape[0]):
                guess = None if x0 is None else x0[c]
                x, info = _pcg(M, b[c], precond, guess)
                if info != 0:
                    raise SolverBlowUp(-1, 0.0, f"(mass solve failed, info={info})")
                out[c] = x
            return out

        return solve

    return space._table("mass_solver", build)


def _mass_matrix_1d(space: FeSpace, axis: int) -> sp.csc_matrix:
    """1D factor of the tensor-product CG mass matrix along one axis."""
    mesh = space.mesh
    p = space.p
    n_elem = mesh.shape[axis]
    n = p * n_elem + (0 if mesh.periodic[axis] else 1)
    pts, w = np.polynomial.legendre.leggauss(p + 1)
    B = _eval_lagrange_1d(space, pts)                       # (n_q, p+1)
    m_loc = (B * w[:, None]).T @ B * (mesh.spacing[axis] / 2.0)
    rows, cols, vals = [], [], []
    for e in range(n_elem):
        idx = (p * e + np.arange(p + 1)) % n
        rows.append(np.repeat(idx, p + 1))
        cols.append(np.tile(idx, p + 1))
        vals.append(m_loc.ravel())
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def _eval_lagrange_1d(space: FeSpace, pts: np.ndarray) -> np.ndarray:
    from numpy.polynomial import polynomial as P

    out = np.empty((pts.size, space.p + 1))
    for i, c in enumerate(space.lagrange_coeffs):
        out[:, i] = P.polyval(pts, c)
    return out


def _tensor_mass_preconditioner(space: FeSpace):
    """Exact Kronecker factorization of the CG mass matrix on the tensor
    lattice: two small banded solves per application, so the outer PCG
    converges in one or two iterations."""
    mesh = space.mesh
    if mesh.dim == 1:
        lu = spla.splu(_mass_matrix_1d(space, 0))
        return spla.LinearOperator((space.num_dofs,) * 2, matvec=lu.solve)
    lux = spla.splu(_mass_matrix_1d(space, 0))
    luy = spla.splu(_mass_matrix_1d(space, 1))
    nx = space.p * mesh.shape[0] + (0 if mesh.periodic[0] else 1)
    ny = space.num_dofs // nx

    def apply(x):
        X = x.reshape(ny, nx)
        Z = luy.solve(X)                 # along y (rows index gy)
        return lux.solve(Z.T).T.reshape(-1)

    return spla.LinearOperator((space.num_dofs,) * 2, matvec=apply)


def _pcg(A, b, M, x0=None):
    try:
        return spla.cg(A, b, x0=x0, rtol=1e-12, atol=0.0, M=M, maxiter=1000)
    except TypeError:  # older scipy spells the tolerance differently
        return spla.cg(A, b, x0=x0, tol=1e-12, atol=0.0, M=M, maxiter=1000)


# ---- stabilization parameters ----------------------------------------------


def wavespeed_field(prob: HyperbolicProblem, u: np.ndarray) -> np.ndarray:
    """Per-element wave speed bound sampled at quadrature points.

    Advection and KPP speeds do not depend on the state, so their field is
    computed once per space and reused.
    """
    space = prob.space
    static = prob.model.tag in ("advection", "kpp")
    key = ("lam_static", id(prob.model))
    if static and key in space._cache:
        return space._cache[key]
    B = space.basis_at(space.quadrature.points)
    uq = np.einsum("qj,mej->meq", B, space.gather(u))
    lam = prob.model.wavespeed(uq, space.quad_points_phys).max(axis=-1)
    if static:
        space._cache[key] = lam
    return lam


def element_residual_unsteady(prob: HyperbolicProblem, state: SemiDiscreteState,
                              e: int | None = None):
    """R_e = int (du/dt + div f(u))^2 over K_e (density equation for systems).

    du/dt is the lagged stage derivative stored on the state; it is zero
    before the first stage. residual_source="spatial_only" drops it.
    """
    space = prob.space
    model = prob.model
    B = space.basis_at(space.quadrature.points)
    loc = space.gather(state.u)

    if model.m == 1:
        uq = np.einsum("qj,mej->meq", B, loc)
        grad = np.einsum("dqj,mej->mdeq", space.grad_tables, loc, optimize=True)
        divf = model.flux_divergence(uq, grad, space.quad_points_phys)
    else:
        divf = np.einsum("dqj,dej->eq", space.grad_tables, loc[1 : 1 + space.dim])

    r = divf
    if prob.residual_source == "time_dependent":
        r = r + np.einsum("qj,ej->eq", B, space.gather(state.udot[0]))
    R = np.einsum("eq,q->e", r**2, space.quad_weights_phys, optimize=True)
    return float(R[e]) if e is not None else R


def stabilization_params(prob: HyperbolicProblem, state: SemiDiscreteState):
    """(gamma, nu, lam) for the current state and stabilization mode."""
    space = prob.space
    E = space.num_elements
    if prob.stab == "none":
        return np.ones(E), np.zeros(E), np.zeros(E)
    lam = wavespeed_field(prob, state.u)
    nu = viscosity(lam, space.mesh.h_e, space.p)
    if prob.stab == "low_only":
        return np.zeros(E), nu, lam
    scalar = state.u[0]
    if prob.stab == "rb_weno":
        res = element_residual_unsteady(prob, state)
        wf = evaluate_field_weno(space, scalar, prob.weno.with_mode("residual"), res)
    else:
        wf = evaluate_field_weno(space, scalar, prob.weno.with_mode("classical"))
    return wf.gamma, nu, lam


# ---- right-hand side ---------------------------------------------------------


def assemble_rhs(prob: HyperbolicProblem, state: SemiDiscreteState,
                 diag: dict | None = None) -> np.ndarray:
    """Solve M du/dt = b(u, t) and return du/dt with shape (m, N)."""
    space = prob.space
    model = prob.model
    t = state.t
    B = space.basis_at(space.quadrature.points)
    wq = space.quad_weights_phys
    xq = space.quad_points_phys
    loc = space.gather(state.u)                             # (m, E, n_loc)
    uq = np.einsum("qj,mej->meq", B, loc)
    model.check(uq, f"volume quadrature, t={t:.6g}")

    gamma, nu, lam = stabilization_params(prob, state)
    if diag is not None:
        diag.update(gamma=gamma, nu=nu, lam=lam)

    if space.continuity == "DG":
        F = model.flux(uq, xq)                              # (m, d, E, q)
        b_loc = np.einsum("mdeq,dqi,q->mei", F, space.grad_tables, wq, optimize=True)
        _add_dg_face_terms(prob, loc, t, b_loc)
    else:
        grad = np.einsum("dqj,mej->mdeq", space.grad_tables, loc, optimize=True)
        divf = model.flux_divergence(uq, grad, xq)
        b_loc = -np.einsum("eq,q,qi->ei", divf, wq, B, optimize=True)[None]
        _add_cg_boundary_terms(prob, loc, t, b_loc)

    # blended dissipation: (1-gamma)*low-order; high-order term below (CG only)
    b_loc -= np.einsum("e,ij,mej->mei", nu * (1.0 - gamma), space.local_stiffness, loc, optimize=True)
    b = _scatter(space, b_loc)

    if space.continuity == "CG" and prob.stab in ("weno_classical", "rb_weno"):
        Kf = _fluct_matrix(space)
        coef = np.repeat(((gamma * nu)[:, None] * wq[None, :]).ravel(), space.dim)
        for c in range(model.m):
            b[c] -= Kf.T @ (coef * (Kf @ state.u[c]))

    return _mass_solver(space)(b, x0=state.udot)


def _scatter(space: FeSpace, local: np.ndarray) -> np.ndarray:
    if space.continuity == "DG":
        return local.reshape(local.shape[0], -1)
    return space.scatter_add(local)


def _fluct_matrix(space: FeSpace):
    return space._table("fluct_matrix", lambda: FluctuationOperator(space).matrix)


def _add_dg_face_terms(prob: HyperbolicProblem, loc: np.ndarray, t: float,
                       out: np.ndarray) -> None:
    space = prob.space
    model = prob.model
    T = space.trace_tables
    interior, boundary = _face_batches(space)

    for g in interior:
        uL = np.einsum("qj,mfj->mfq", T[g["sL"]], loc[:, g["eL"]])
        uR = np.einsum("qj,mfj->mfq", T[g["sR"]], loc[:, g["eR"]])
        n = g["normal"][:, None, :]
        Fs = lax_friedrichs_flux(model, uL, uR, n, g["coords"])
        wF = Fs * g["wq"]
        _scatter_face(out, g["eL"], -np.einsum("mfq,qi->mfi", wF, T[g["sL"]]))
        _scatter_face(out, g["eR"], np.einsum("mfq,qi->mfi", wF, T[g["sR"]]))

    for g in boundary:
        uL = np.einsum("qj,mfj->mfq", T[g["side"]], loc[:, g["elem"]])
        n = g["normal"][:, None, :]
        ghost = prob.boundary.condition(g["tag"]).ghost(uL, n, g["coords"], t)
        Fs = lax_friedrichs_flux(model, uL, ghost, n, g["coords"])
        _scatter_face(out, g["elem"], -np.einsum("mfq,qi->mfi", Fs * g["wq"], T[g["side"]]))


def _add_cg_boundary_terms(prob: HyperbolicProblem, loc: np.ndarray, t: float,
                           out: np.ndarray) -> None:
    """Weak boundary data: -(F*(u, ghost, n) - f(u).n, w) over boundary faces."""
    if prob.boundary is None:
        return
    space = prob.space
    model = prob.model
    T = space.trace_tables
    _, boundary = _face_batches(space)
    for g in boundary:
        uL = np.einsum("qj,mfj->mfq", T[g["side"]], loc[:, g["elem"]])
        n = g["normal"][:, None, :]
        ghost = prob.boundary.condition(g["tag"]).ghost(uL, n, g["coords"], t)
        Fs = lax_friedrichs_flux(model, uL, ghost, n, g["coords"])
        fn = _dot_n(model.flux(uL, g["coords"]), n)
        _scatter_face(out, g["elem"], -np.einsum("mfq,qi->mfi", (Fs - fn) * g["wq"], T[g["side"]]))


# ---- admissibility safeguard ---------------------------------------------------

RHO_FLOOR = 1e-10
EINT_FLOOR = 1e-10


def _eval_points_matrix(space: FeSpace) -> np.ndarray:
    """Basis at the volume quadrature, all face quadratures, and the nodes:
    the point set where stage states are evaluated by the solver."""

    def build():
        mats = [space.basis_at(space.quadrature.points)]
        for s in range(space.trace_tables.shape[0]):
            mats.append(space.trace_tables[s])
        mats.append(space.basis_at(space.ref_nodes))
        return np.vstack(mats)

    return space._table("adm_points", build)


def enforce_admissible(prob: HyperbolicProblem, u: np.ndarray) -> np.ndarray:
    """Squeeze inadmissible element polynomials toward their cell means.

    Conserved cell means are kept exactly; density and internal energy at all
    solver evaluation points are raised above small positive floors. Elements
    whose mean state is itself inadmissible raise (genuine blow-up).
    Positivity only: no function-bound limiting happens here.
    """
    model = prob.model
    space = prob.space
    if not (prob.positivity_fix and getattr(model, "tag", "") == "euler"
            and space.continuity == "DG"):
        return u
    m = model.m
    d = space.dim
    loc = u.reshape(m, space.num_elements, space.n_loc)
    P = _eval_points_matrix(space)
    vals = np.einsum("qj,mej->meq", P, loc)                 # (m, E, n_pts)
    rho = vals[0]
    eint = vals[-1] - 0.5 * np.einsum("cek,cek->ek", vals[1:1 + d], vals[1:1 + d]) / rho
    bad = (rho.min(axis=1) <= RHO_FLOOR) | (eint.min(axis=1) <= EINT_FLOOR) \
        | ~np.isfinite(rho.min(axis=1)) | ~np.isfinite(eint.min(axis=1))
    if not bad.any():
        return u

    idx = np.flatnonzero(bad)
    mean = np.einsum("j,mej->me", space.mean_vector, loc[:, idx])  # (m, nbad)
    mean_rho = mean[0]
    mean_eint = mean[-1] - 0.5 * (mean[1:1 + d] ** 2).sum(axis=0) / mean_rho
    if (mean_rho <= RHO_FLOOR).any() or (mean_eint <= EINT_FLOOR).any():
        e_bad = int(idx[np.argmin(np.where(mean_rho <= RHO_FLOOR, -1.0, mean_eint))])
        raise SolverBlowUp(-1, 0.0, f"(inadmissible cell mean in element {e_bad})")

    v = vals[:, idx]                                        # (m, nbad, n_pts)
    dv = v - mean[:, :, None]
    # density: rho(theta) = mean + theta*drho >= floor
    drho = dv[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_rho = np.where(
            drho < 0.0, (RHO_FLOOR - mean_rho[:, None]) / np.minimum(drho, -1e-300), 1.0
        )
    theta = np.minimum(1.0, t_rho.min(axis=1))
    # internal energy: q(theta) = rho*E - |mom|^2/2 - rho*floor is quadratic
    # in theta with q(0) > 0; take the smallest positive real root per point
    a = dv[0] * dv[-1] - 0.5 * (dv[1:1 + d] ** 2).sum(axis=0)
    b = (dv[0] * mean[-1][:, None] + mean_rho[:, None] * dv[-1]
         - (mean[1:1 + d][:, :, None] * dv[1:1 + d]).sum(axis=0)
         - EINT_FLOOR * dv[0])
    c = (mean_rho * mean[-1] - 0.5 * (mean[1:1 + d] ** 2).sum(axis=0)
         - EINT_FLOOR * mean_rho)[:, None] + np.zeros_like(a)
    t_e = np.full_like(a, 1.0)
    disc = b * b - 4.0 * a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.maximum(disc, 0.0))
        quad_ok = (np.abs(a) > 1e-300) & (disc >= 0.0)
        r1 = np.where(quad_ok, (-b - sq) / (2.0 * a), np.inf)
        r2 = np.where(quad_ok, (-b + sq) / (2.0 * a), np.inf)
        r_lin = np.where((np.abs(a) <= 1e-300) & (b < 0.0), -c / np.minimum(b, -1e-300), np.inf)
    for roots in (r1, r2, r_lin):
        pos = (roots > 0.0) & np.isfinite(roots)
        t_e = np.where(pos & (roots < t_e), roots, t_e)
    theta = np.minimum(theta, t_e.min(axis=1)) * (1.0 - 1e-12)
    theta = np.maximum(theta, 0.0)

    out = u.copy()
    out_loc = out.reshape(m, space.num_elements, space.n_loc)
    out_loc[:, idx] = mean[:, :, None] + theta[None, :, None] * (loc[:, idx] - mean[:, :, None])
    return out


# ---- time stepping -----------------------------------------------------------


def cfl_timestep(prob: HyperbolicProblem, state: SemiDiscreteState,
                 cfl: float, t_final: float) -> float:
    """dt = cfl * min_e h_e / (lam_e (2p+1)), capped at the remaining time."""
    remaining = max(t_final - state.t, 0.0)
    lam = wavespeed_field(prob, state.u)
    mask = lam > 0
    if not mask.any():
        return remaining
    dt = cfl * float(np.min(prob.space.mesh.h_e[mask] / (lam[mask] * (2 * prob.space.p + 1))))
    return min(dt, remaining)


def ssp_rk_step(prob: HyperbolicProblem, state: SemiDiscreteState, dt: float,
                order: int = 3) -> SemiDiscreteState:
    """One SSP-RK step; every stage refreshes gamma and the lagged residual."""
    u, t = state.u, state.t
    diag: dict = {}

    k1 = assemble_rhs(prob, state, diag)
    u1 = enforce_admissible(prob, u + dt * k1)
    s1 = replace(state, u=u1, t=t + dt, udot=k1)
    if order == 2:
        k2 = assemble_rhs(prob, s1)
        u_new, k_last = 0.5 * u + 0.5 * (u1 + dt * k2), k2
    else:
        k2 = assemble_rhs(prob, s1)
        u2 = enforce_admissible(prob, 0.75 * u + 0.25 * (u1 + dt * k2))
        s2 = replace(state, u=u2, t=t + 0.5 * dt, udot=k2)
        k3 = assemble_rhs(prob, s2)
        u_new, k_last = u / 3.0 + 2.0 / 3.0 * (u2 + dt * k3), k3
    u_new = enforce_admissible(prob, u_new)
    return SemiDiscreteState(
        u_new, t + dt, k_last, gamma=diag.get("gamma"), nu=diag.get("nu"), lam=diag.get("lam")
    )


# ---- driver ------------------------------------------------------------------


@dataclass
class RunResult:
    state: SemiDiscreteState
    steps: int
    diagnostics: list               # per-step dict rows
    summary: dict


def total_mass(space: FeSpace, u: np.ndarray) -> np.ndarray:
    w_int = space.quad_weights_phys @ space.basis_at(space.quadrature.points)
    return np.einsum("j,mej->m", w_int, space.gather(u))


def run(
    prob: HyperbolicProblem,
    integrator: TimeIntegrator,
    u0: np.ndarray,
    exact=None,
    max_steps: int = 10**7,
    diag_every: int = 1,
) -> RunResult:
    """Advance to t_final with CFL timesteps, recording per-step diagnostics.

    `exact`, if given, is a callable (node coords, t) -> nodal reference used
    for final L1/L2 errors.
    """
    space = prob.space
    state = SemiDiscreteState.initial(enforce_admissible(prob, np.atleast_2d(np.asarray(u0, dtype=float))))
    mass0 = total_mass(space, state.u)
    t_start = time.perf_counter()
    rows = []
    step = 0
    while state.t < integrator.t_final - 1e-14 and step < max_steps:
        dt = cfl_timestep(prob, state, integrator.cfl, integrator.t_final)
        if dt <= 0:
            break
        state = ssp_rk_step(prob, state, dt, integrator.order)
        step += 1
        if not np.isfinite(state.u).all():
            raise SolverBlowUp(step, state.t)
        if step % diag_every == 0:
            mass = total_mass(space, state.u)
            row = {"step": step, "t": state.t, "dt": dt}
            for c in range(state.u.shape[0]):
                row[f"min_{c}"] = float(state.u[c].min())
                row[f"max_{c}"] = float(state.u[c].max())
                row[f"mass_{c}"] = float(mass[c])
            rows.append(row)
    mass1 = total_mass(space, state.u)
    summary = {
        "steps": step,
        "t_final": state.t,
        "min": state.u.min(axis=1).tolist(),
        "max": state.u.max(axis=1).tolist(),
        "mass_initial": mass0.tolist(),
        "mass_final": mass1.tolist(),
        "mass_drift_abs": float(np.max(np.abs(mass1 - mass0))),
        "mass_drift": float(
            np.max(np.abs(mass1 - mass0)) / max(np.max(np.abs(mass0)), 1e-300)
        ),
        "wall_time": time.perf_counter() - t_start,
    }
    if exact is not None:
        u_ref = np.atleast_2d(np.asarray(exact(space.node_coords, state.t), dtype=float))
        summary.update(errors_vs_reference(space, state.u, u_ref))
    return RunResult(state, step, rows, summary)


def errors_vs_reference(space: FeSpace, u: np.ndarray, u_ref: np.ndarray) -> dict:
    """L1/L2 errors of the nodal field u against reference nodal coefficients."""
    B = space.basis_at(space.quadrature.points)
    wq = space.quad_weights_phys
    dq = np.einsum("qj,mej->meq", B, space.gather(np.atleast_2d(u) - u_ref))
    l1 = np.einsum("meq,q->m", np.abs(dq), wq)
    l2 = np.sqrt(np.einsum("meq,q->m", dq**2, wq))
    return {"err_l1": l1.tolist(), "err_l2": l2.tolist()}
