"""Lagrange finite element spaces on uniform line/quad meshes.

Degrees p in {1, 2} with equispaced nodes (vertices included). All reference
tables (basis values, derivatives, traces, quadrature) are precomputed once
per space; the mesh is uniform, so physical element matrices are shared by
all elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from numpy.polynomial import polynomial as P

MAX_QUAD_ORDER = 20


class BasisError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre tensor rule on [-1,1]^d, exact to `order`."""

    dim: int
    order: int
    points: np.ndarray   # (n_q, dim)
    weights: np.ndarray  # (n_q,)


def quadrature_rule(d: int, order: int) -> QuadratureRule:
    if order < 0:
        raise BasisError(f"negative quadrature order {order}")
    if order > MAX_QUAD_ORDER:
        raise BasisError(f"quadrature order {order} > {MAX_QUAD_ORDER} unsupported")
    n = order // 2 + 1
    x, w = np.polynomial.legendre.leggauss(n)
    if d == 1:
        return QuadratureRule(1, order, x[:, None], w)
    if d == 2:
        X, Y = np.meshgrid(x, x, indexing="xy")
        W = np.outer(w, w)
        return QuadratureRule(2, order, np.stack([X.ravel(), Y.ravel()], axis=1), W.ravel())
    raise BasisError(f"dimension {d} unsupported")


def _lagrange_coeffs(p: int) -> np.ndarray:
    """Power-basis coefficients of the p+1 equispaced Lagrange polynomials."""
    nodes = np.linspace(-1.0, 1.0, p + 1)
    coeffs = np.zeros((p + 1, p + 1))
    for i in range(p + 1):
        roots = np.delete(nodes, i)
        c = P.polyfromroots(roots)
        coeffs[i, : c.size] = c / P.polyval(nodes[i], c)
    return coeffs


def _eval_1d(coeffs: np.ndarray, x: np.ndarray, deriv: int) -> np.ndarray:
    """Values of all 1D basis functions (rows) at points x, derivative `deriv`."""
    out = np.empty((len(coeffs), np.size(x)))
    for i, c in enumerate(coeffs):
        out[i] = P.polyval(np.asarray(x, dtype=float).ravel(), P.polyder(c, deriv) if deriv else c)
    return out


def seminorm_multiindices(dim: int, p: int, mode: str = "standard") -> list[tuple[int, ...]]:
    """Multiindices k with 1 <= |k| <= p; "pure" drops mixed derivatives."""
    out = []
    for k in product(range(p + 1), repeat=dim):
        total = sum(k)
        if not 1 <= total <= p:
            continue
        if mode == "pure" and sum(1 for ki in k if ki > 0) > 1:
            continue
        out.append(k)
    return out


@dataclass(frozen=True)
class FeSpace:
    """CG or DG Lagrange space of degree p over a uniform mesh."""

    mesh: object
    continuity: str                 # "CG" | "DG"
    p: int
    element_dofs: np.ndarray        # (E, n_loc)
    num_dofs: int
    seminorm_mode: str = "standard"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def n_loc(self) -> int:
        return (self.p + 1) ** self.dim

    @property
    def num_elements(self) -> int:
        return self.mesh.num_elements

    # ---- reference tables (cached) -------------------------------------

    def _table(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def lagrange_coeffs(self) -> np.ndarray:
        return self._table("lag", lambda: _lagrange_coeffs(self.p))

    @property
    def ref_nodes(self) -> np.ndarray:
        def build():
            n1 = np.linspace(-1.0, 1.0, self.p + 1)
            if self.dim == 1:
                return n1[:, None]
            X, Y = np.meshgrid(n1, n1, indexing="xy")
            return np.stack([X.ravel(), Y.ravel()], axis=1)

        return self._table("nodes", build)

    @property
    def quadrature(self) -> QuadratureRule:
        return self._table("quad", lambda: quadrature_rule(self.dim, 2 * self.p + 1))

    def basis_at(self, points: np.ndarray, k: tuple[int, ...] | None = None) -> np.ndarray:
        """(n_pts, n_loc) table of reference derivatives D^k phi_j."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if k is None:
            k = (0,) * self.dim
        for ki in k:
            if ki > self.p:
                raise BasisError(f"derivative order {k} exceeds degree {self.p}")
        gx = _eval_1d(self.lagrange_coeffs, pts[:, 0], k[0])  # (p+1, n_pts)
        if self.dim == 1:
            return gx.T
        gy = _eval_1d(self.lagrange_coeffs, pts[:, 1], k[1])
        # tensor node ordering: local j = jy*(p+1) + jx
        return (gy[:, None, :] * gx[None, :, :]).reshape(self.n_loc, -1).T

    def _quad_table(self, k: tuple[int, ...]) -> np.ndarray:
        return self._table(("qtab", k), lambda: self.basis_at(self.quadrature.points, k))

    @property
    def quad_weights_phys(self) -> np.ndarray:
        scale = float(np.prod(self.mesh.spacing)) / 2**self.dim
        return self._table("wq", lambda: self.quadrature.weights * scale)

    @property
    def quad_points_phys(self) -> np.ndarray:
        """(E, n_q, d) physical quadrature points."""

        def build():
            c = self.mesh.elem_centers[:, None, :]
            return c + 0.5 * self.mesh.spacing * self.quadrature.points[None, :, :]

        return self._table("xq", build)

    def deriv_scale(self, k: tuple[int, ...]) -> float:
        return float(np.prod((2.0 / self.mesh.spacing) ** np.asarray(k)))

    @property
    def grad_tables(self) -> np.ndarray:
        """(d, n_q, n_loc) physical gradients of the basis at quadrature points."""

        def build():
            rows = []
            for ax in range(self.dim):
                k = tuple(1 if a == ax else 0 for a in range(self.dim))
                rows.append(self._quad_table(k) * self.deriv_scale(k))
            return np.stack(rows)

        return self._table("grad", build)

    @property
    def node_grad_tables(self) -> np.ndarray:
        """(d, n_loc_nodes, n_loc) physical basis gradients at the Lagrange nodes."""

        def build():
            rows = []
            for ax in range(self.dim):
                k = tuple(1 if a == ax else 0 for a in range(self.dim))
                rows.append(self.basis_at(self.ref_nodes, k) * self.deriv_scale(k))
            return np.stack(rows)

        return self._table("ngrad", build)

    @property
    def mean_vector(self) -> np.ndarray:
        """Maps local coefficients to the cell mean."""

        def build():
            B = self._quad_table((0,) * self.dim)
            return (self.quadrature.weights @ B) / 2**self.dim

        return self._table("mean", build)

    @property
    def local_mass(self) -> np.ndarray:
        def build():
            B = self._quad_table((0,) * self.dim)
            return (B * self.quad_weights_phys[:, None]).T @ B

        return self._table("mass", build)

    @property
    def local_stiffness(self) -> np.ndarray:
        def build():
            G = self.grad_tables
            return np.einsum("dqi,q,dqj->ij", G, self.quad_weights_phys, G)

        return self._table("stiff", build)

    @property
    def seminorm_matrix(self) -> np.ndarray:
        """S with ||u||_e^2 = u^T S u for local coefficients u (uniform h)."""

        def build():
            h = float(self.mesh.h_e[0])
            S = np.zeros((self.n_loc, self.n_loc))
            for k in seminorm_multiindices(self.dim, self.p, self.seminorm_mode):
                Bk = self._quad_table(k) * self.deriv_scale(k)
                S += h ** (2 * sum(k) - self.dim) * (Bk * self.quad_weights_phys[:, None]).T @ Bk
            return S

        return self._table("semi", build)

    # ---- faces ----------------------------------------------------------

    @property
    def face_quadrature(self) -> QuadratureRule:
        if self.dim == 1:
            return self._table(
                "fquad",
                lambda: QuadratureRule(1, 0, np.zeros((1, 0)), np.ones(1)),
            )
        return self._table("fquad", lambda: quadrature_rule(1, 2 * self.p + 1))

    @property
    def trace_tables(self) -> np.ndarray:
        """(n_sides, n_fq, n_loc) basis values at face quadrature points."""

        def build():
            if self.dim == 1:
                pts = {0: [[-1.0]], 1: [[1.0]]}
                return np.stack([self.basis_at(np.array(pts[s])) for s in (0, 1)])
            t = self.face_quadrature.points[:, 0]
            o = np.ones_like(t)
            side_pts = [
                np.stack([-o, t], axis=1),   # west, runs along +y
                np.stack([o, t], axis=1),    # east
                np.stack([t, -o], axis=1),   # south, runs along +x
                np.stack([t, o], axis=1),    # north
            ]
            return np.stack([self.basis_at(sp) for sp in side_pts])

        return self._table("trace", build)

    @property
    def trace_grad_tables(self) -> np.ndarray:
        """(n_sides, d, n_fq, n_loc) physical basis gradients at face points."""

        def build():
            if self.dim == 1:
                sides = [np.array([[-1.0]]), np.array([[1.0]])]
            else:
                t = self.face_quadrature.points[:, 0]
                o = np.ones_like(t)
                sides = [
                    np.stack([-o, t], axis=1),
                    np.stack([o, t], axis=1),
                    np.stack([t, -o], axis=1),
                    np.stack([t, o], axis=1),
                ]
            out = []
            for sp in sides:
                rows = []
                for ax in range(self.dim):
                    k = tuple(1 if a == ax else 0 for a in range(self.dim))
                    rows.append(self.basis_at(sp, k) * self.deriv_scale(k))
                out.append(np.stack(rows))
            return np.stack(out)

        return self._table("tracegrad", build)

    @property
    def face_weights_phys(self) -> np.ndarray:
        def build():
            if self.dim == 1:
                return np.ones(1)
            # face measure varies by axis for rectangular cells; scaled on use
            return self.face_quadrature.weights / 2.0

        return self._table("fw", build)

    @property
    def extension_matrices(self) -> dict:
        """offset (unit lattice tuple) -> matrix taking neighbor local coeffs to
        the neighbor polynomial's values at this element's nodes."""

        def build():
            out = {}
            offsets = (
                [(-1,), (1,)]
                if self.dim == 1
                else [(-1, 0), (1, 0), (0, -1), (0, 1)]
            )
            for off in offsets:
                # key = lattice offset from the neighbor to this element; a node
                # xi of K_e sits at xi + 2*off in the neighbor's frame
                shifted = self.ref_nodes + 2.0 * np.asarray(off, dtype=float)
                out[off] = self.basis_at(shifted)
            return out

        return self._table("ext", build)

    # ---- dof handling ---------------------------------------------------

    def gather(self, coeffs: np.ndarray) -> np.ndarray:
        """Global (..., N) -> local (..., E, n_loc) values."""
        return np.asarray(coeffs)[..., self.element_dofs]

    def scatter_add(self, local: np.ndarray) -> np.ndarray:
        """Sum local (..., E, n_loc) contributions into global (..., N)."""
        local = np.asarray(local)
        lead = local.shape[:-2]
        flat = local.reshape(-1, local.shape[-2] * local.shape[-1])
        idx = self.element_dofs.ravel()
        out = np.empty(lead + (self.num_dofs,))
        outf = out.reshape(-1, self.num_dofs)
        for r in range(flat.shape[0]):
            outf[r] = np.bincount(idx, weights=flat[r], minlength=self.num_dofs)
        return out

    @property
    def node_multiplicity(self) -> np.ndarray:
        def build():
            return np.bincount(self.element_dofs.ravel(), minlength=self.num_dofs).astype(float)

        return self._table("mult", build)

    @property
    def node_coords(self) -> np.ndarray:
        """(N, d) physical coordinates of the global Lagrange nodes."""

        def build():
            c = self.mesh.elem_centers[:, None, :] + 0.5 * self.mesh.spacing * self.ref_nodes
            out = np.zeros((self.num_dofs, self.dim))
            out[self.element_dofs.ravel()] = c.reshape(-1, self.dim)
            return out

        return self._table("ncoords", build)

    def interpolate(self, fn) -> np.ndarray:
        """Nodal interpolation of fn(x) -> scalar (vectorized over points)."""
        vals = np.asarray(fn(self.node_coords))
        return vals.astype(float)


def make_space(mesh, continuity: str, p: int, seminorm_mode: str = "standard") -> FeSpace:
    if continuity not in ("CG", "DG"):
        raise BasisError(f"continuity must be CG or DG, got {continuity}")
    if p not in (1, 2):
        raise BasisError(f"degree {p} unsupported (p in {{1, 2}})")
    E = mesh.num_elements
    n_loc = (p + 1) ** mesh.dim
    if continuity == "DG":
        dofs = np.arange(E * n_loc, dtype=np.int64).reshape(E, n_loc)
        return FeSpace(mesh, "DG", p, dofs, E * n_loc, seminorm_mode)

    # CG: shared lattice of p*shape+1 nodes per axis (wrapping when periodic)
    shape = mesh.shape
    nn = [p * s + (0 if per else 1) for s, per in zip(shape, mesh.periodic)]
    if mesh.dim == 1:
        idx = np.arange(p + 1)
        base = p * np.arange(E)[:, None] + idx[None, :]
        if mesh.periodic[0]:
            base %= nn[0]
        dofs = base
        N = nn[0]
    else:
        idx = np.arange(p + 1)
        gx = p * mesh.elem_grid[:, 0:1] + idx[None, :]          # (E, p+1)
        gy = p * mesh.elem_grid[:, 1:2] + idx[None, :]
        if mesh.periodic[0]:
            gx %= nn[0]
        if mesh.periodic[1]:
            gy %= nn[1]
        dofs = gy[:, :, None] * nn[0] + gx[:, None, :]          # (E, p+1, p+1) y-major
        dofs = dofs.reshape(E, n_loc)
        N = nn[0] * nn[1]
    return FeSpace(mesh, "CG", p, dofs.astype(np.int64), int(N), seminorm_mode)


# ---- spec operations ----------------------------------------------------


@dataclass
class LocalPolynomial:
    """Element-local polynomial in the Lagrange basis (coeffs = nodal values)."""

    element: int
    coeffs: np.ndarray


def local_coeffs(space: FeSpace, coeffs: np.ndarray, e: int) -> np.ndarray:
    return np.asarray(coeffs)[space.element_dofs[e]]


def evaluate_field(
    space: FeSpace,
    coeffs: np.ndarray,
    e: int,
    ref_point: np.ndarray,
    k: tuple[int, ...] | None = None,
) -> np.ndarray:
    """D^k u_h at element e's reference point(s), physical derivatives."""
    if k is None:
        k = (0,) * space.dim
    B = space.basis_at(ref_point, k) * space.deriv_scale(k)
    return B @ local_coeffs(space, coeffs, e)


def cell_mean(space: FeSpace, coeffs: np.ndarray, e: int) -> float:
    return float(space.mean_vector @ local_coeffs(space, coeffs, e))


def cell_means(space: FeSpace, coeffs: np.ndarray) -> np.ndarray:
    return space.gather(coeffs) @ space.mean_vector


def scaled_seminorm(space: FeSpace, coeffs: np.ndarray, e: int) -> float:
    """Sobolev semi-norm over K_e with h-power scalings per derivative order."""
    u = local_coeffs(space, coeffs, e)
    return float(np.sqrt(max(u @ space.seminorm_matrix @ u, 0.0)))


def local_seminorm(space: FeSpace, local: np.ndarray) -> np.ndarray:
    """Batch semi-norms for (..., n_loc) local coefficient arrays."""
    q = np.einsum("...i,ij,...j->...", local, space.seminorm_matrix, local, optimize=True)
    return np.sqrt(np.maximum(q, 0.0))


def local_mass_matrix(space: FeSpace, e: int) -> np.ndarray:
    if not 0 <= e < space.num_elements:
        raise BasisError(f"element index {e} out of range")
    return space.local_mass.copy()
