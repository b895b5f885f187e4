"""Gradient projection P_h and the fluctuation operator grad(u) - P_h grad(u).

For DG spaces the elementwise L2 projection of an FE gradient is the gradient
itself, so the fluctuation vanishes. For CG spaces P_h is a node-averaged
quasi-interpolant: at every global Lagrange node the projected gradient is
the arithmetic mean of the gradients evaluated from all adjacent elements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import FeSpace


@dataclass
class GradientProjection:
    """Projected gradient: d scalar fields in the same space."""

    space: FeSpace
    mode: str                    # "DG_L2" | "CG_CLEMENT"
    coeffs: np.ndarray           # (d, N)

    def at_quad(self) -> np.ndarray:
        """(d, E, n_q) values of the projected gradient at quadrature points."""
        B = self.space.basis_at(self.space.quadrature.points)
        loc = self.space.gather(self.coeffs)            # (d, E, n_loc)
        return np.einsum("qj,dej->deq", B, loc)


def projection_mode(space: FeSpace) -> str:
    return "DG_L2" if space.continuity == "DG" else "CG_CLEMENT"


def project_gradient(space: FeSpace, coeffs: np.ndarray) -> GradientProjection:
    """Nodal gradient recovery (averaged for CG, elementwise exact for DG)."""
    loc = space.gather(coeffs)                           # (E, n_loc)
    g_nodes = np.einsum("daj,ej->dea", space.node_grad_tables, loc)
    summed = space.scatter_add(g_nodes)                  # (d, N)
    proj = summed / space.node_multiplicity
    return GradientProjection(space, projection_mode(space), proj)


def gradient_at_quad(space: FeSpace, coeffs: np.ndarray) -> np.ndarray:
    """(d, E, n_q) raw FE gradient at quadrature points."""
    loc = space.gather(coeffs)
    return np.einsum("dqj,ej->deq", space.grad_tables, loc)


def fluctuation_at_quad(space: FeSpace, coeffs: np.ndarray,
                        projection: GradientProjection | None = None) -> np.ndarray:
    """(d, E, n_q) values of grad(u) - P_h grad(u) at quadrature points."""
    if space.continuity == "DG":
        nq = space.quadrature.points.shape[0]
        return np.zeros((space.dim, space.num_elements, nq))
    if projection is None:
        projection = project_gradient(space, coeffs)
    return gradient_at_quad(space, coeffs) - projection.at_quad()


@dataclass
class LocalFluctuation:
    """Fluctuation of one element, evaluable at reference points."""

    space: FeSpace
    element: int
    u_local: np.ndarray          # (n_loc,)
    proj_local: np.ndarray       # (d, n_loc)
    is_zero: bool = False        # DG case: the L2 projection is exact

    def at(self, ref_points: np.ndarray) -> np.ndarray:
        """(n_pts, d) fluctuation values at element reference points."""
        sp_ = self.space
        pts = np.asarray(ref_points, dtype=float).reshape(-1, sp_.dim)
        if self.is_zero:
            return np.zeros((pts.shape[0], sp_.dim))
        B = sp_.basis_at(pts)
        out = np.empty((pts.shape[0], sp_.dim))
        for ax in range(sp_.dim):
            k = tuple(1 if a == ax else 0 for a in range(sp_.dim))
            Bk = sp_.basis_at(pts, k) * sp_.deriv_scale(k)
            out[:, ax] = Bk @ self.u_local - B @ self.proj_local[ax]
        return out

    def at_quad(self) -> np.ndarray:
        return self.at(self.space.quadrature.points)


def fluctuation(space: FeSpace, coeffs: np.ndarray, e: int,
                projection: GradientProjection | None = None) -> LocalFluctuation:
    """kappa_e applied to grad(u_h), restricted to element e."""
    if projection is None:
        projection = project_gradient(space, coeffs)
    return LocalFluctuation(
        space,
        e,
        np.asarray(coeffs)[space.element_dofs[e]],
        projection.coeffs[:, space.element_dofs[e]],
        is_zero=space.continuity == "DG",
    )


class FluctuationOperator:
    """Sparse map from global coefficients to fluctuation values at quadrature
    points, row order (element, quad point, component)."""

    def __init__(self, space: FeSpace):
        self.space = space
        self._matrix = None

    @property
    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None:
            self._matrix = self._build()
        return self._matrix

    def _build(self) -> sp.csr_matrix:
        space = self.space
        E, n_loc, d, N = space.num_elements, space.n_loc, space.dim, space.num_dofs
        n_q = space.quadrature.points.shape[0]

        # averaging projection: global coeffs -> (d*N,) projected gradient coeffs
        mult = space.node_multiplicity
        rows, cols, vals = [], [], []
        dofs = space.element_dofs
        ngrad = space.node_grad_tables                       # (d, n_loc, n_loc)
        for c in range(d):
            r = (c * N + dofs[:, :, None]).repeat(n_loc, axis=2)      # (E,a,j)
            cl = np.broadcast_to(dofs[:, None, :], (E, n_loc, n_loc))
            v = np.broadcast_to(ngrad[c][None], (E, n_loc, n_loc)) / mult[dofs[:, :, None]]
            rows.append(r.ravel())
            cols.append(cl.ravel())
            vals.append(v.ravel())
        P = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(d * N, N),
        )

        # evaluation at quadrature points: (d*N,) -> rows (e, q, c)
        B = space.basis_at(space.quadrature.points)          # (n_q, n_loc)
        eq = (np.arange(E)[:, None, None] * n_q + np.arange(n_q)[None, :, None]) * d
        rows, cols, vals = [], [], []
        for c in range(d):
            r = np.broadcast_to(eq + c, (E, n_q, n_loc))
            cl = np.broadcast_to(c * N + dofs[:, None, :], (E, n_q, n_loc))
            v = np.broadcast_to(B[None], (E, n_q, n_loc))
            rows.append(r.ravel())
            cols.append(cl.ravel())
            vals.append(v.ravel())
        Nq = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(E * n_q * d, d * N),
        )

        # raw gradient at quadrature points
        G = space.grad_tables                                # (d, n_q, n_loc)
        rows, cols, vals = [], [], []
        for c in range(d):
            r = np.broadcast_to(eq + c, (E, n_q, n_loc))
            cl = np.broadcast_to(dofs[:, None, :], (E, n_q, n_loc))
            v = np.broadcast_to(G[c][None], (E, n_q, n_loc))
            rows.append(r.ravel())
            cols.append(cl.ravel())
            vals.append(v.ravel())
        Graw = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(E * n_q * d, N),
        )
        K = (Graw - Nq @ P).tocsr()
        K.eliminate_zeros()
        return K

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """(E, n_q, d) fluctuation values."""
        space = self.space
        n_q = space.quadrature.points.shape[0]
        return (self.matrix @ np.asarray(coeffs)).reshape(space.num_elements, n_q, space.dim)
