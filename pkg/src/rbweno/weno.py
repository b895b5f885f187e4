"""HWENO reconstruction with classical and residual-based nonlinear weights.

Candidate polynomials extend each face neighbor's polynomial into the cell
and shift it to match the cell mean, so the l-th candidate keeps the cell
average of u_h^e and the derivatives of the neighbor. Nonlinear weights are
either the classical smoothness-indicator kind or the residual-gated kind
that reduces to (1, 0, ..., 0) on elements with zero residual. The blending
factor gamma compares u_h against the reconstruction in a scaled Sobolev
semi-norm.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .basis import FeSpace, LocalPolynomial, local_seminorm
from .mesh import neighbor_offset


class WenoConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WenoConfig:
    """Parameters of the reconstruction and the smoothness sensor."""

    neighbor_weight: float = 1e-3    # linear weight for each neighbor candidate
    uniform_weights: bool = False    # all candidates share weight 1/(m+1)
    r: int = 2                       # smoothness exponent in the weights
    eps: float = 1e-6                # floor in (eps + beta)^r
    delta: float = 1e-6              # residual floor on the own-cell weight
    theta: float = 1.0               # neighbor-residual threshold
    q: float = 1.0                   # sensor exponent
    q_beta: float | None = None      # indicator exponent; dimension default if None
    mode: str = "classical"          # "classical" | "residual"

    def __post_init__(self):
        if self.r < 1 or int(self.r) != self.r:
            raise WenoConfigError(f"r must be a positive integer, got {self.r}")
        if self.eps <= 0 or self.delta <= 0:
            raise WenoConfigError("eps and delta must be positive")
        if self.theta < 0:
            raise WenoConfigError(f"theta must be nonnegative, got {self.theta}")
        if not 0 < self.neighbor_weight < 1:
            raise WenoConfigError("neighbor weight must lie in (0, 1)")
        if self.mode not in ("classical", "residual"):
            raise WenoConfigError(f"unknown weight mode {self.mode!r}")

    def indicator_exponent(self, dim: int) -> float:
        if self.q_beta is not None:
            return self.q_beta
        return 2.0 if dim == 1 else 1.0

    def linear_weights(self, m: int) -> np.ndarray:
        """Linear weights for one own-cell candidate plus m neighbor candidates."""
        if self.uniform_weights:
            return np.full(m + 1, 1.0 / (m + 1))
        w = np.full(m + 1, self.neighbor_weight)
        w[0] = 1.0 - m * self.neighbor_weight
        if w[0] <= 0:
            raise WenoConfigError("neighbor weights exceed 1 in total")
        return w

    def with_mode(self, mode: str) -> "WenoConfig":
        return replace(self, mode=mode)


@dataclass
class CandidateSet:
    """Candidates on one element; polys[0] is the cell's own polynomial."""

    element: int
    polys: list
    neighbor_ids: list           # stencil neighbor per candidate l >= 1


@dataclass
class WenoContext:
    element: int
    candidates: CandidateSet
    betas: np.ndarray
    weights: np.ndarray
    ustar: LocalPolynomial
    gamma: float


# ---- stencil tables -------------------------------------------------------


def _directions(dim: int):
    if dim == 1:
        return [(-1,), (1,)]
    return [(-1, 0), (1, 0), (0, -1), (0, 1)]


def stencil_neighbors(space: FeSpace):
    """(L-1 direction-wise neighbor ids (E,), -1 where absent) cached table."""

    def build():
        mesh = space.mesh
        E = mesh.num_elements
        cols = []
        for j, d in enumerate(_directions(mesh.dim)):
            g = mesh.elem_grid + np.asarray(d)
            ok = np.ones(E, dtype=bool)
            ax_active = int(np.flatnonzero(np.asarray(d))[0])
            for ax in range(mesh.dim):
                if mesh.periodic[ax]:
                    g[:, ax] %= mesh.shape[ax]
                else:
                    ok &= (g[:, ax] >= 0) & (g[:, ax] < mesh.shape[ax])
            if mesh.dim == 1:
                ids = g[:, 0]
            else:
                ids = g[:, 1] * mesh.shape[0] + g[:, 0]
            ids = np.where(ok, ids, -1)
            # degenerate periodic extents: drop self-neighbors and wrap
            # duplicates so the stencil set matches mesh.neighbors
            if mesh.periodic[ax_active] and mesh.shape[ax_active] <= 2:
                ids = np.where(ids == np.arange(E), -1, ids)
                if mesh.shape[ax_active] == 2 and sum(d) > 0:
                    ids = np.full(E, -1)
            cols.append(ids)
        return np.stack(cols, axis=1)      # (E, n_dirs)

    return space._table("weno_stencils", build)


# ---- per-element operations (spec surface) --------------------------------


def build_candidates(space: FeSpace, coeffs: np.ndarray, e: int) -> CandidateSet:
    """Own polynomial plus mean-corrected extensions of all face neighbors."""
    mesh = space.mesh
    own = np.asarray(coeffs)[space.element_dofs[e]].astype(float)
    polys = [LocalPolynomial(e, own.copy())]
    nbr_ids = []
    mean_own = float(space.mean_vector @ own)
    for e_nbr in mesh.neighbors[e]:
        if e_nbr == e:
            continue
        off = tuple(int(v) for v in neighbor_offset(mesh, e, int(e_nbr)))
        X = space.extension_matrices[off]
        ext = X @ np.asarray(coeffs)[space.element_dofs[e_nbr]]
        shift = mean_own - float(space.mean_vector @ ext)
        polys.append(LocalPolynomial(e, ext + shift))
        nbr_ids.append(int(e_nbr))
    return CandidateSet(e, polys, nbr_ids)


def smoothness_indicator(space: FeSpace, candidate: LocalPolynomial,
                         q_beta: float | None = None) -> float:
    """Scaled semi-norm of the candidate raised to the indicator exponent."""
    if q_beta is None:
        q_beta = 2.0 if space.dim == 1 else 1.0
    norm = float(local_seminorm(space, candidate.coeffs))
    return norm**q_beta


def classical_weights(config: WenoConfig, betas: np.ndarray) -> np.ndarray:
    betas = np.asarray(betas, dtype=float)
    tilde = config.linear_weights(betas.size - 1) / (config.eps + betas) ** config.r
    return tilde / tilde.sum()


def residual_weights(
    config: WenoConfig,
    betas: np.ndarray,
    residual: float,
    neighbor_residuals: np.ndarray,
) -> np.ndarray:
    """Residual-gated weights; exact (1, 0, ..., 0) when the residual is zero."""
    betas = np.asarray(betas, dtype=float)
    nres = np.asarray(neighbor_residuals, dtype=float)
    lin = config.linear_weights(betas.size - 1)
    denom = (config.eps + betas) ** config.r
    tilde = np.empty_like(betas)
    tilde[0] = lin[0] * (residual + config.delta) / denom[0]
    tilde[1:] = lin[1:] * np.maximum(residual - config.theta * nres, 0.0) / denom[1:]
    return tilde / tilde.sum()


def reconstruct(candidates: CandidateSet, weights: np.ndarray) -> LocalPolynomial:
    coeffs = sum(w * p.coeffs for w, p in zip(np.asarray(weights), candidates.polys))
    return LocalPolynomial(candidates.element, coeffs)


def smoothness_sensor(
    space: FeSpace,
    coeffs: np.ndarray,
    e: int,
    ustar: LocalPolynomial,
    q: float = 1.0,
) -> float:
    """gamma_e = 1 - min(1, |u - u*|_e / |u|_e)^q, with gamma_e = 1 for
    locally constant u (zero semi-norm)."""
    own = np.asarray(coeffs)[space.element_dofs[e]]
    den = float(local_seminorm(space, own))
    if den == 0.0:
        return 1.0
    num = float(local_seminorm(space, own - ustar.coeffs))
    return 1.0 - min(1.0, num / den) ** q


def build_context(
    space: FeSpace,
    coeffs: np.ndarray,
    e: int,
    config: WenoConfig,
    residuals: np.ndarray | None = None,
) -> WenoContext:
    """Full reconstruction pipeline on one element."""
    cand = build_candidates(space, coeffs, e)
    q_beta = config.indicator_exponent(space.dim)
    betas = np.array([smoothness_indicator(space, p, q_beta) for p in cand.polys])
    if config.mode == "residual":
        if residuals is None:
            raise WenoConfigError("residual mode needs element residuals")
        w = residual_weights(
            config, betas, float(residuals[e]), np.asarray(residuals)[cand.neighbor_ids]
        )
    else:
        w = classical_weights(config, betas)
    ustar = reconstruct(cand, w)
    gamma = smoothness_sensor(space, coeffs, e, ustar, config.q)
    return WenoContext(e, cand, betas, w, ustar, gamma)


# ---- batch evaluation ------------------------------------------------------


@dataclass
class WenoField:
    """Vectorized reconstruction over all elements."""

    candidates: np.ndarray       # (E, L, n_loc); invalid slots zeroed
    mask: np.ndarray             # (E, L) candidate validity
    neighbor_ids: np.ndarray     # (E, L-1), -1 where absent
    betas: np.ndarray            # (E, L)
    weights: np.ndarray          # (E, L)
    ustar: np.ndarray            # (E, n_loc)
    gamma: np.ndarray            # (E,)


def evaluate_field_weno(
    space: FeSpace,
    coeffs: np.ndarray,
    config: WenoConfig,
    residuals: np.ndarray | None = None,
) -> WenoField:
    mesh = space.mesh
    E, n_loc = space.num_elements, space.n_loc
    nbr = stencil_neighbors(space)                   # (E, n_dirs)
    n_dirs = nbr.shape[1]
    L = n_dirs + 1

    loc = space.gather(coeffs).astype(float)         # (E, n_loc)
    means = loc @ space.mean_vector

    cand = np.zeros((E, L, n_loc))
    mask = np.zeros((E, L), dtype=bool)
    cand[:, 0] = loc
    mask[:, 0] = True
    for j, d in enumerate(_directions(mesh.dim)):
        ids = nbr[:, j]
        valid = ids >= 0
        if not valid.any():
            continue
        X = space.extension_matrices[tuple(-v for v in d)]
        ext = loc[ids[valid]] @ X.T
        shift = means[valid] - ext @ space.mean_vector
        cand[valid, j + 1] = ext + shift[:, None]
        mask[:, j + 1] = valid

    q_beta = config.indicator_exponent(mesh.dim)
    norms = local_seminorm(space, cand)
    betas = norms**q_beta

    lin_nbr = np.where(mask[:, 1:], config.neighbor_weight, 0.0)
    m_e = mask[:, 1:].sum(axis=1)
    if config.uniform_weights:
        lin = mask / (m_e + 1)[:, None]
    else:
        lin = np.concatenate([(1.0 - m_e * config.neighbor_weight)[:, None], lin_nbr], axis=1)
        if (lin[:, 0] <= 0).any():
            raise WenoConfigError("neighbor weights exceed 1 in total")

    denom = (config.eps + betas) ** config.r
    if config.mode == "residual":
        if residuals is None:
            raise WenoConfigError("residual mode needs element residuals")
        res = np.asarray(residuals, dtype=float)
        nres = np.where(nbr >= 0, res[np.maximum(nbr, 0)], 0.0)
        tilde = np.empty_like(betas)
        tilde[:, 0] = lin[:, 0] * (res + config.delta) / denom[:, 0]
        tilde[:, 1:] = lin[:, 1:] * np.maximum(res[:, None] - config.theta * nres, 0.0) / denom[:, 1:]
    else:
        tilde = lin / denom
    tilde *= mask
    weights = tilde / tilde.sum(axis=1, keepdims=True)

    ustar = np.einsum("el,eln->en", weights, cand, optimize=True)
    den = local_seminorm(space, loc)
    num = local_seminorm(space, loc - ustar)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    gamma = 1.0 - np.minimum(1.0, ratio) ** config.q

    return WenoField(cand, mask, nbr, betas, weights, ustar, gamma)
