"""Steady convection-diffusion-reaction solvers.

CG uses the bilinear form a + s_h + d_h with Dirichlet node elimination;
DG uses a symmetric interior penalty form with upwind advection plus the
elementwise low-order remainder. The nonlinearity (the blending factor
gamma) is resolved by Picard iteration with the sensor frozen per solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import FeSpace, local_seminorm, make_space
from .physics import VelocityField
from .projection import FluctuationOperator, project_gradient
from .stabilization import StabParams, patch_spread, viscosity
from .weno import WenoConfig, evaluate_field_weno


class CdrDataError(ValueError):
    pass


@dataclass
class DiscreteSource:
    """Source defined as the CDR operator applied to a discrete field.

    Evaluating the residual of that same field then cancels exactly in
    floating point, which makes "matching data" tests bit-exact.
    """

    space: FeSpace
    coeffs: np.ndarray


@dataclass
class CdrProblem:
    """eps * (-Laplace u) + b.grad u + c u = g with Dirichlet data u_D."""

    eps: float
    b: VelocityField
    c: object                      # callable(x) -> (...) or scalar
    g: object                      # callable(x) -> (...) or DiscreteSource
    u_D: object                    # callable(x) -> (...) or scalar
    exact: object = None           # optional callable(x)
    exact_grad: object = None      # optional callable(x) -> (..., d)

    def __post_init__(self):
        if self.eps < 0:
            raise CdrDataError(f"negative diffusion {self.eps}")

    def c_at(self, x):
        return np.asarray(self.c(x)) if callable(self.c) else np.full(np.asarray(x).shape[:-1], float(self.c))

    def u_D_at(self, x):
        return np.asarray(self.u_D(x)) if callable(self.u_D) else np.full(np.asarray(x).shape[:-1], float(self.u_D))

    def sigma_at(self, x):
        return self.c_at(x) - 0.5 * self.b.divergence(x)

    def sigma0(self, space: FeSpace) -> float:
        """min over quadrature points of c - div(b)/2; must be positive."""
        s0 = float(self.sigma_at(space.quad_points_phys).min())
        if s0 <= 0:
            raise CdrDataError(f"sigma_0 = {s0:.6g} <= 0: problem not uniquely solvable")
        return s0


def manufactured_problem(dim: int, eps: float, b_exprs, c_expr, u_expr) -> CdrProblem:
    """Build a CdrProblem from sympy expressions; g derives from u symbolically."""
    import sympy as sy

    xs = sy.symbols("x y")[:dim]
    u = sy.sympify(u_expr)
    bs = [sy.sympify(e) for e in b_exprs]
    c = sy.sympify(c_expr)
    g = -eps * sum(sy.diff(u, v, 2) for v in xs) + sum(
        bv * sy.diff(u, v) for bv, v in zip(bs, xs)
    ) + c * u
    divb = sum(sy.diff(bv, v) for bv, v in zip(bs, xs))

    def lamb(expr):
        f = sy.lambdify(xs, expr, "numpy")
        def wrapped(x):
            x = np.asarray(x)
            args = [x[..., i] for i in range(dim)]
            return np.broadcast_to(np.asarray(f(*args), dtype=float), x.shape[:-1]).copy()
        return wrapped

    def lamb_vec(exprs):
        fns = [lamb(e) for e in exprs]
        def wrapped(x):
            return np.stack([fn(x) for fn in fns], axis=-1)
        return wrapped

    grads = [sy.diff(u, v) for v in xs]
    return CdrProblem(
        eps=eps,
        b=VelocityField(lamb_vec(bs), lamb(divb)),
        c=lamb(c),
        g=lamb(g),
        u_D=lamb(u),
        exact=lamb(u),
        exact_grad=lamb_vec(grads),
    )


# ---- stabilization data ----------------------------------------------------


def cdr_wavespeed(problem: CdrProblem, space: FeSpace) -> np.ndarray:
    bq = problem.b(space.quad_points_phys)                  # (E, q, d)
    return np.linalg.norm(bq, axis=-1).max(axis=-1)


def cdr_stab_params(
    problem: CdrProblem,
    space: FeSpace,
    gamma: np.ndarray | None = None,
    omega_mode: str = "computed",
    fluct: FluctuationOperator | None = None,
) -> StabParams:
    from .stabilization import estimate_omega_field_fast

    lam = cdr_wavespeed(problem, space)
    nu = viscosity(lam, space.mesh.h_e, space.p)
    omega = estimate_omega_field_fast(space, fluct, omega_mode)
    if gamma is None:
        gamma = np.ones(space.num_elements)
    return StabParams(nu=nu, lam=lam, omega=omega, gamma=np.asarray(gamma))


# ---- sources and residuals ---------------------------------------------------


def _operator_at_quad(problem: CdrProblem, space: FeSpace, coeffs: np.ndarray) -> np.ndarray:
    """(-eps Lap + b.grad + c) u_h at quadrature points, shape (E, n_q)."""
    B = space.basis_at(space.quadrature.points)
    loc = space.gather(coeffs)
    xq = space.quad_points_phys
    grad = np.einsum("dqj,ej->deq", space.grad_tables, loc)
    bq = problem.b(xq)
    out = np.einsum("eqd,deq->eq", bq, grad) + problem.c_at(xq) * np.einsum("qj,ej->eq", B, loc)
    if problem.eps > 0 and space.p >= 2:
        lap = np.zeros_like(out)
        for ax in range(space.dim):
            k = tuple(2 if a == ax else 0 for a in range(space.dim))
            Bk = space.basis_at(space.quadrature.points, k) * space.deriv_scale(k)
            lap += np.einsum("qj,ej->eq", Bk, loc)
        out -= problem.eps * lap
    return out


def source_at_quad(problem: CdrProblem, space: FeSpace) -> np.ndarray:
    if isinstance(problem.g, DiscreteSource):
        return _operator_at_quad(problem, space, problem.g.coeffs)
    return np.asarray(problem.g(space.quad_points_phys))


def element_residual_steady(problem: CdrProblem, space: FeSpace, coeffs: np.ndarray,
                            e: int | None = None):
    """R_e = int_K (L u_h - g)^2 by quadrature."""
    r = _operator_at_quad(problem, space, coeffs) - source_at_quad(problem, space)
    R = np.einsum("eq,q->e", r**2, space.quad_weights_phys)
    return float(R[e]) if e is not None else R


# ---- CG assembly -------------------------------------------------------------


@dataclass
class DiscreteSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    constrained: np.ndarray        # bool mask over dofs (empty for DG)


def _element_matrices_cg(problem: CdrProblem, space: FeSpace) -> np.ndarray:
    """(E, n_loc, n_loc) local Galerkin matrices of a(., .), trial = 2nd index."""
    B = space.basis_at(space.quadrature.points)
    G = space.grad_tables
    wq = space.quad_weights_phys
    xq = space.quad_points_phys
    bq = problem.b(xq)
    cq = problem.c_at(xq)
    diff = problem.eps * np.einsum("dqi,dqj,q->ij", G, G, wq)
    conv = np.einsum("qi,eqd,dqj,q->eij", B, bq, G, wq)
    react = np.einsum("qi,eq,qj,q->eij", B, cq, B, wq)
    return diff[None] + conv + react


def _assemble_from_local(space: FeSpace, local: np.ndarray) -> sp.csr_matrix:
    E, n_loc = space.num_elements, space.n_loc
    dofs = space.element_dofs
    rows = np.repeat(dofs, n_loc, axis=1).ravel()
    cols = np.tile(dofs, (1, n_loc)).ravel()
    if local.ndim == 2:
        vals = np.tile(local.ravel(), E)
    else:
        vals = local.ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(space.num_dofs, space.num_dofs))


def _fluct_quadratic(space: FeSpace, fluct: FluctuationOperator, coef_e: np.ndarray) -> sp.csr_matrix:
    """K^T diag(coef_e * w_q) K for the fluctuation map K."""
    wq = space.quad_weights_phys
    diag = np.repeat((np.asarray(coef_e)[:, None] * wq[None, :]).ravel(), space.dim)
    K = fluct.matrix
    return (K.T @ sp.diags(diag) @ K).tocsr()


def sh_matrix(problem: CdrProblem, space: FeSpace, params: StabParams,
              fluct: FluctuationOperator) -> sp.csr_matrix:
    if space.continuity == "DG":
        return sp.csr_matrix((space.num_dofs, space.num_dofs))
    return _fluct_quadratic(space, fluct, params.omega * params.nu)


def dh_matrix_cg(problem: CdrProblem, space: FeSpace, params: StabParams,
                 gamma: np.ndarray, fluct: FluctuationOperator) -> sp.csr_matrix:
    """Patch gradient term minus its LPS part plus the (1-omega) remainder."""
    gamma = np.asarray(gamma)
    c_lo = (1.0 - gamma) * params.nu
    smear = patch_spread(space.mesh, c_lo)
    A = _assemble_from_local(space, smear[:, None, None] * space.local_stiffness[None])
    A -= _fluct_quadratic(space, fluct, c_lo * params.omega)
    A += _fluct_quadratic(space, fluct, gamma * params.nu * (1.0 - params.omega))
    return A.tocsr()


def boundary_dof_mask(space: FeSpace) -> np.ndarray:
    mesh = space.mesh
    x = space.node_coords
    mask = np.zeros(space.num_dofs, dtype=bool)
    for ax in range(mesh.dim):
        if mesh.periodic[ax]:
            continue
        lo = mesh.origin[ax]
        hi = mesh.origin[ax] + mesh.spacing[ax] * mesh.shape[ax]
        tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
        mask |= np.abs(x[:, ax] - lo) < tol
        mask |= np.abs(x[:, ax] - hi) < tol
    return mask


def assemble_cg(
    problem: CdrProblem,
    space: FeSpace,
    gamma: np.ndarray | None = None,
    params: StabParams | None = None,
    fluct: FluctuationOperator | None = None,
    scheme: str = "rb_weno",
) -> DiscreteSystem:
    """Rows realize a(u, v) + s_h(u, v) + d_h(.; u, v) with frozen gamma.

    scheme "galerkin" omits both stabilization terms, "high_order" keeps only
    s_h; the WENO variants keep both.
    """
    if fluct is None and space.continuity == "CG":
        fluct = FluctuationOperator(space)
    if params is None:
        params = cdr_stab_params(problem, space)
    if gamma is None:
        gamma = np.ones(space.num_elements)

    A = _assemble_from_local(space, _element_matrices_cg(problem, space))
    if scheme != "galerkin":
        A = A + sh_matrix(problem, space, params, fluct)
        if scheme not in ("high_order",):
            A = A + dh_matrix_cg(problem, space, params, gamma, fluct)

    B = space.basis_at(space.quadrature.points)
    gq = source_at_quad(problem, space)
    rhs = space.scatter_add(np.einsum("eq,q,qi->ei", gq, space.quad_weights_phys, B))

    bnd = boundary_dof_mask(space)
    sel_i = sp.diags((~bnd).astype(float))
    sel_b = sp.diags(bnd.astype(float))
    A_c = (sel_i @ A + sel_b).tocsr()
    rhs_c = np.where(bnd, problem.u_D_at(space.node_coords), rhs)
    return DiscreteSystem(A_c, rhs_c, bnd)


# ---- SIP-DG assembly ---------------------------------------------------------


def default_penalty(p: int) -> float:
    return 10.0 * p * p


def assemble_sipdg(
    problem: CdrProblem,
    space: FeSpace,
    gamma: np.ndarray | None = None,
    eta: float | None = None,
    params: StabParams | None = None,
    scheme: str = "rb_weno",
) -> DiscreteSystem:
    """Symmetric interior penalty diffusion + upwind advection + low-order
    remainder (1-gamma_e) nu_e (grad u, grad v)_K with Dirichlet data via a
    Nitsche-type right-hand side."""
    from .hyperbolic import _face_batches

    if space.continuity != "DG":
        raise CdrDataError("assemble_sipdg needs a DG space")
    eta = default_penalty(space.p) if eta is None else float(eta)
    if eta <= 0:
        raise CdrDataError(f"penalty eta must be positive, got {eta}")
    if params is None:
        params = cdr_stab_params(problem, space)
    if gamma is None:
        gamma = np.ones(space.num_elements)
    eps = problem.eps
    mesh = space.mesh
    E, n_loc, N = space.num_elements, space.n_loc, space.num_dofs

    B = space.basis_at(space.quadrature.points)
    G = space.grad_tables
    wq = space.quad_weights_phys
    xq = space.quad_points_phys
    bq = problem.b(xq)
    sig = problem.c_at(xq) - problem.b.divergence(xq)

    local = eps * np.einsum("dqi,dqj,q->ij", G, G, wq)[None] + np.zeros((E, 1, 1))
    local -= np.einsum("eqd,dqi,qj,q->eij", bq, G, B, wq)      # -(u, b.grad w)
    local += np.einsum("qi,eq,qj,q->eij", B, sig, B, wq)        # (c - div b) u w
    coef = (1.0 - np.asarray(gamma)) * params.nu
    local += coef[:, None, None] * space.local_stiffness[None]  # d_h, DG form

    rows_list = [np.repeat(space.element_dofs, n_loc, axis=1).ravel()]
    cols_list = [np.tile(space.element_dofs, (1, n_loc)).ravel()]
    vals_list = [local.ravel()]

    gq = source_at_quad(problem, space)
    rhs_loc = np.einsum("eq,q,qi->ei", gq, wq, B)
    rhs = np.zeros(N)
    np.add.at(rhs, space.element_dofs.ravel(), rhs_loc.ravel())

    T = space.trace_tables
    TG = space.trace_grad_tables
    interior, boundary = _face_batches(space)

    def add_block(dofs_i, dofs_j, block):
        # block (nf, n_loc, n_loc): test i rows, trial j cols
        nf = block.shape[0]
        rows_list.append(np.repeat(dofs_i, n_loc, axis=1).ravel())
        cols_list.append(np.tile(dofs_j, (1, n_loc)).ravel())
        vals_list.append(block.ravel())

    for g in interior:
        eL, eR = g["eL"], g["eR"]
        n = g["normal"]                                     # (nf, d)
        wf = g["wq"]                                        # (nf, n_fq)
        h_F = g["h_F"]                                      # (nf,)
        TL, TR = T[g["sL"]], T[g["sR"]]                     # (n_fq, n_loc)
        GnL = np.einsum("fd,dqi->fqi", n, TG[g["sL"]])      # grad phi_L . n
        GnR = np.einsum("fd,dqi->fqi", n, TG[g["sR"]])
        dofL, dofR = space.element_dofs[eL], space.element_dofs[eR]

        if eps > 0:
            half = 0.5
            # -eps int {grad u}.n (vL - vR): test traces against trial gradients
            add_block(dofL, dofL, -eps * half * np.einsum("fq,qi,fqj->fij", wf, TL, GnL))
            add_block(dofL, dofR, -eps * half * np.einsum("fq,qi,fqj->fij", wf, TL, GnR))
            add_block(dofR, dofL, eps * half * np.einsum("fq,qi,fqj->fij", wf, TR, GnL))
            add_block(dofR, dofR, eps * half * np.einsum("fq,qi,fqj->fij", wf, TR, GnR))
            # -eps int {grad v}.n (uL - uR): test gradients against trial traces
            add_block(dofL, dofL, -eps * half * np.einsum("fq,fqi,qj->fij", wf, GnL, TL))
            add_block(dofR, dofL, -eps * half * np.einsum("fq,fqi,qj->fij", wf, GnR, TL))
            add_block(dofL, dofR, eps * half * np.einsum("fq,fqi,qj->fij", wf, GnL, TR))
            add_block(dofR, dofR, eps * half * np.einsum("fq,fqi,qj->fij", wf, GnR, TR))
            pen = eps * eta * (wf / h_F[:, None])
            add_block(dofL, dofL, np.einsum("fq,qi,qj->fij", pen, TL, TL))
            add_block(dofL, dofR, -np.einsum("fq,qi,qj->fij", pen, TL, TR))
            add_block(dofR, dofL, -np.einsum("fq,qi,qj->fij", pen, TR, TL))
            add_block(dofR, dofR, np.einsum("fq,qi,qj->fij", pen, TR, TR))

        # upwind advection: int (b.n) u_up (vL - vR)
        bn = np.einsum("fqd,fd->fq", problem.b(g["coords"]), n)
        up_pos = np.maximum(bn, 0.0)                        # take left trace
        up_neg = np.minimum(bn, 0.0)                        # take right trace
        add_block(dofL, dofL, np.einsum("fq,qi,qj->fij", wf * up_pos, TL, TL))
        add_block(dofL, dofR, np.einsum("fq,qi,qj->fij", wf * up_neg, TL, TR))
        add_block(dofR, dofL, -np.einsum("fq,qi,qj->fij", wf * up_pos, TR, TL))
        add_block(dofR, dofR, -np.einsum("fq,qi,qj->fij", wf * up_neg, TR, TR))

    for g in boundary:
        n = g["normal"]
        wf = g["wq"]
        h_F = g["h_F"]
        Tb = T[g["side"]]
        Gn = np.einsum("fd,dqi->fqi", n, TG[g["side"]])
        dofs_b = space.element_dofs[g["elem"]]
        uD = problem.u_D_at(g["coords"])                    # (nf, n_fq)

        if eps > 0:
            add_block(dofs_b, dofs_b, -eps * np.einsum("fq,qi,fqj->fij", wf, Tb, Gn))
            add_block(dofs_b, dofs_b, -eps * np.einsum("fq,fqi,qj->fij", wf, Gn, Tb))
            pen = eps * eta * (wf / h_F[:, None])
            add_block(dofs_b, dofs_b, np.einsum("fq,qi,qj->fij", pen, Tb, Tb))
            r_loc = -eps * np.einsum("fq,fq,fqi->fi", wf, uD, Gn)
            r_loc += np.einsum("fq,fq,qi->fi", pen, uD, Tb)
            np.add.at(rhs, dofs_b.ravel(), r_loc.ravel())

        bn = np.einsum("fqd,fd->fq", problem.b(g["coords"]), n)
        up_pos = np.maximum(bn, 0.0)
        up_neg = np.minimum(bn, 0.0)
        add_block(dofs_b, dofs_b, np.einsum("fq,qi,qj->fij", wf * up_pos, Tb, Tb))
        r_loc = -np.einsum("fq,fq,qi->fi", wf * up_neg, uD, Tb)
        np.add.at(rhs, dofs_b.ravel(), r_loc.ravel())

    A = sp.csr_matrix(
        (np.concatenate(vals_list), (np.concatenate(rows_list), np.concatenate(cols_list))),
        shape=(N, N),
    )
    return DiscreteSystem(A, rhs, np.zeros(N, dtype=bool))


# ---- norms -------------------------------------------------------------------


def _l2_and_h1(space: FeSpace, coeffs: np.ndarray):
    B = space.basis_at(space.quadrature.points)
    wq = space.quad_weights_phys
    loc = space.gather(coeffs)
    vq = np.einsum("qj,ej->eq", B, loc)
    gq = np.einsum("dqj,ej->deq", space.grad_tables, loc)
    return float(np.einsum("eq,q->", vq**2, wq)), float(np.einsum("deq,q->", gq**2, wq))


def s_norm(problem: CdrProblem, space: FeSpace, coeffs: np.ndarray,
           params: StabParams | None = None,
           fluct: FluctuationOperator | None = None) -> float:
    """(eps |v|_1^2 + sigma_0 ||v||_0^2 + s_h(v, v))^(1/2)."""
    if params is None:
        params = cdr_stab_params(problem, space)
    l2sq, h1sq = _l2_and_h1(space, coeffs)
    total = problem.eps * h1sq + problem.sigma0(space) * l2sq
    if space.continuity == "CG":
        if fluct is None:
            fluct = FluctuationOperator(space)
        kv = fluct.apply(coeffs)                            # (E, n_q, d)
        coef = params.omega * params.nu
        total += float(np.einsum("e,eqd,q->", coef, kv**2, space.quad_weights_phys))
    return float(np.sqrt(max(total, 0.0)))


def dg_norm(problem: CdrProblem, space: FeSpace, coeffs: np.ndarray) -> float:
    """(eps [sum |grad v|^2 + sum (1/h_F)||jump||^2] + sigma_0 ||v||^2)^(1/2)."""
    from .hyperbolic import _face_batches

    l2sq, h1sq = _l2_and_h1(space, coeffs)
    total = problem.sigma0(space) * l2sq + problem.eps * h1sq
    total += problem.eps * _jump_seminorm_sq(space, coeffs)
    return float(np.sqrt(max(total, 0.0)))


def _jump_seminorm_sq(space: FeSpace, coeffs: np.ndarray, boundary_data=None) -> float:
    """sum_F (1/h_F) int_F [v]^2; boundary jump is v - boundary_data (or v)."""
    from .hyperbolic import _face_batches

    T = space.trace_tables
    interior, boundary = _face_batches(space)
    loc = space.gather(coeffs)
    jump_sq = 0.0
    for g in interior:
        uL = np.einsum("qj,fj->fq", T[g["sL"]], loc[g["eL"]])
        uR = np.einsum("qj,fj->fq", T[g["sR"]], loc[g["eR"]])
        jump_sq += float((((uL - uR) ** 2 * g["wq"]) / g["h_F"][:, None]).sum())
    for g in boundary:
        uB = np.einsum("qj,fj->fq", T[g["side"]], loc[g["elem"]])
        if boundary_data is not None:
            uB = uB - boundary_data(g["coords"])
        jump_sq += float(((uB**2 * g["wq"]) / g["h_F"][:, None]).sum())
    return jump_sq


# ---- Picard iteration ----------------------------------------------------------


@dataclass
class PicardResult:
    u: np.ndarray
    iterations: int
    trace: list
    converged: bool
    gamma: np.ndarray
    params: StabParams
    ustar_gap: float = 0.0         # max_e |u_h - u*|_e at the fixed point


def _gamma_update(problem: CdrProblem, space: FeSpace, u: np.ndarray,
                  weno: WenoConfig, scheme: str):
    if scheme in ("galerkin", "high_order"):
        return np.ones(space.num_elements), 0.0
    if scheme == "low_only":
        return np.zeros(space.num_elements), 0.0
    if scheme == "rb_weno":
        res = element_residual_steady(problem, space, u)
        wf = evaluate_field_weno(space, u, weno.with_mode("residual"), res)
    else:
        wf = evaluate_field_weno(space, u, weno.with_mode("classical"))
    gap = float(local_seminorm(space, space.gather(u) - wf.ustar).max())
    return wf.gamma, gap


def picard_solve(
    problem: CdrProblem,
    space: FeSpace,
    variant: str = "cg",
    weno: WenoConfig | None = None,
    scheme: str = "rb_weno",
    max_iter: int = 30,
    tol: float = 1e-10,
    omega_mode: str = "computed",
    eta: float | None = None,
    damping: float = 1.0,
) -> PicardResult:
    """Freeze gamma, solve the linear system, update gamma; iterate.

    The first solve uses gamma = 1 (pure high-order). Linear schemes
    converge in one iteration. Non-convergence is reported, not fatal.
    """
    if weno is None:
        weno = WenoConfig()
    fluct = FluctuationOperator(space) if space.continuity == "CG" else None
    params = cdr_stab_params(problem, space, omega_mode=omega_mode, fluct=fluct)
    gamma = np.ones(space.num_elements)
    u_old = None
    trace: list = []
    alpha = damping
    converged = False
    linear = scheme in ("galerkin", "high_order", "low_only")
    gap = 0.0

    for it in range(1, max_iter + 1):
        if scheme == "low_only":
            gamma = np.zeros(space.num_elements)
        if variant == "cg":
            system = assemble_cg(problem, space, gamma, params, fluct, scheme)
        else:
            system = assemble_sipdg(problem, space, gamma, eta, params, scheme)
        u = spla.spsolve(system.matrix.tocsc(), system.rhs)
        if u_old is not None:
            u = (1.0 - alpha) * u_old + alpha * u
            num = _l2_diff(space, u, u_old)
            den = max(_l2_diff(space, u, None), 1e-300)
            trace.append(num / den)
            if num <= tol * den:
                converged = True
                gamma, gap = _gamma_update(problem, space, u, weno, scheme)
                u_old = u
                break
            if len(trace) >= 3 and trace[-1] > trace[-2] > trace[-3]:
                alpha = 0.5   # oscillating trace: damp
        u_old = u
        gamma, gap = _gamma_update(problem, space, u, weno, scheme)
        if linear:
            converged = True
            break

    return PicardResult(u_old, len(trace) + 1, trace, converged, gamma, params, gap)


def _l2_diff(space: FeSpace, u: np.ndarray, v: np.ndarray | None) -> float:
    B = space.basis_at(space.quadrature.points)
    d = u if v is None else u - v
    vq = np.einsum("qj,ej->eq", B, space.gather(d))
    return float(np.sqrt(np.einsum("eq,q->", vq**2, space.quad_weights_phys)))


# ---- errors and convergence ----------------------------------------------------


def error_norms(problem: CdrProblem, space: FeSpace, u_h: np.ndarray,
                params: StabParams | None = None) -> dict:
    """L2, H1-semi, and S (or DG) norms of u - u_h against problem.exact."""
    if problem.exact is None:
        raise CdrDataError("problem has no exact solution")
    if params is None:
        params = cdr_stab_params(problem, space)
    B = space.basis_at(space.quadrature.points)
    wq = space.quad_weights_phys
    xq = space.quad_points_phys
    loc = space.gather(u_h)
    diff_q = problem.exact(xq) - np.einsum("qj,ej->eq", B, loc)
    gdiff_q = np.moveaxis(problem.exact_grad(xq), -1, 0) - np.einsum(
        "dqj,ej->deq", space.grad_tables, loc
    )
    l2 = float(np.sqrt(np.einsum("eq,q->", diff_q**2, wq)))
    h1 = float(np.sqrt(np.einsum("deq,q->", gdiff_q**2, wq)))
    total = problem.eps * h1**2 + problem.sigma0(space) * l2**2

    if space.continuity == "CG":
        # kappa of the error: exact gradient enters through its interpolant
        proj_u = project_gradient(space, u_h)
        g_ex_nodes = problem.exact_grad(space.node_coords)          # (N, d)
        interp_q = np.einsum("qj,dej->deq", B, space.gather(g_ex_nodes.T))
        kappa_err = gdiff_q - (interp_q - proj_u.at_quad())
        coef = params.omega * params.nu
        total += float(np.einsum("e,deq,q->", coef, kappa_err**2, wq))
    else:
        # exact solution is continuous: error jumps are jumps of u_h, and
        # the boundary jump measures u_h against the Dirichlet datum
        total += problem.eps * _jump_seminorm_sq(space, u_h, problem.u_D_at)
    s_or_dg = float(np.sqrt(max(total, 0.0)))
    return {"err_L2": l2, "err_H1": h1, "err_S": s_or_dg}


@dataclass
class ConvergenceTable:
    rows: list                     # dicts: h, dofs, err_L2, err_S, rates...

    def rates(self, key: str) -> list:
        vals = [r[key] for r in self.rows]
        return [float(np.log2(a / b)) for a, b in zip(vals, vals[1:])]


def convergence_study(
    problem_factory,
    dim: int,
    base_n: int,
    levels: int,
    p: int,
    variant: str = "cg",
    scheme: str = "high_order",
    weno: WenoConfig | None = None,
    omega_mode: str = "computed",
    lo: tuple = (0.0, 0.0),
    hi: tuple = (1.0, 1.0),
) -> ConvergenceTable:
    """Solve on meshes base_n * 2^k and tabulate errors and observed rates."""
    from .mesh import build_uniform_line, build_uniform_quad

    rows = []
    for lev in range(levels):
        n = base_n * 2**lev
        if dim == 1:
            mesh = build_uniform_line(lo[0], hi[0], n)
        else:
            mesh = build_uniform_quad(lo[0], lo[1], hi[0], hi[1], n, n)
        space = make_space(mesh, "CG" if variant == "cg" else "DG", p)
        problem = problem_factory(mesh)
        result = picard_solve(
            problem, space, variant=variant, scheme=scheme, weno=weno,
            omega_mode=omega_mode,
        )
        errs = error_norms(problem, space, result.u, result.params)
        rows.append(
            {
                "h": float(mesh.h_e[0]),
                "dofs": space.num_dofs,
                "picard_iters": result.iterations,
                "ustar_gap": result.ustar_gap,
                **errs,
            }
        )
    table = ConvergenceTable(rows)
    for i, row in enumerate(table.rows):
        row["rate_L2"] = float("nan") if i == 0 else float(
            np.log2(table.rows[i - 1]["err_L2"] / row["err_L2"])
        )
        row["rate_S"] = float("nan") if i == 0 else float(
            np.log2(table.rows[i - 1]["err_S"] / row["err_S"])
        )
    return table
