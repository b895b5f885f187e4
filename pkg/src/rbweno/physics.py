"""Flux functions, wave speed bounds, LF numerical flux, and boundary states.

State arrays have shape (m, ...) with an arbitrary batch tail; coordinate
arrays have shape (..., d). Flux arrays are (m, d, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PhysicsError(ValueError):
    pass


def _dot_n(vec_md, n):
    """Contract flux (m, d, ...) with normals (..., d) -> (m, ...)."""
    n = np.asarray(n)
    return np.einsum("md...,...d->m...", vec_md, n)


@dataclass(frozen=True)
class VelocityField:
    """Velocity b(x) with an optional analytic divergence (default 0)."""

    fn: object
    div_fn: object = None
    speed_bound: float | None = None   # optional global |b| bound

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x)))

    def divergence(self, x):
        if self.div_fn is None:
            return np.zeros(np.asarray(x).shape[:-1])
        return np.asarray(self.div_fn(np.asarray(x)))


def rotation_about(cx: float, cy: float, rate: float = 2.0 * np.pi) -> VelocityField:
    """Solid-body rotation field rate*(cy - y, x - cx) (divergence free)."""

    def fn(x):
        return rate * np.stack([cy - x[..., 1], x[..., 0] - cx], axis=-1)

    return VelocityField(fn)


@dataclass(frozen=True)
class Advection:
    """Linear transport u_t + div(v u) = 0."""

    velocity: VelocityField
    dim: int
    m: int = 1
    tag: str = "advection"

    def flux(self, u, x=None):
        v = self.velocity(x)                                  # (..., d)
        return np.einsum("...d,m...->md...", v, np.asarray(u))

    def wavespeed(self, u, x=None):
        v = self.velocity(x)
        return np.linalg.norm(v, axis=-1)

    def directional_speed(self, u, n, x=None):
        v = self.velocity(x)
        return np.abs(np.einsum("...d,...d->...", v, np.broadcast_to(n, v.shape)))

    def flux_divergence(self, u, grad_u, x):
        v = self.velocity(x)
        adv = np.einsum("...d,d...->...", v, grad_u[0])
        return adv + self.velocity.divergence(x) * u[0]

    def check(self, u, where=""):
        pass


@dataclass(frozen=True)
class Kpp:
    """Nonconvex scalar flux (sin u, cos u) with global speed bound 1."""

    dim: int = 2
    m: int = 1
    tag: str = "kpp"

    def flux(self, u, x=None):
        u0 = np.asarray(u)[0]
        return np.stack([np.sin(u0), np.cos(u0)])[None]

    def wavespeed(self, u, x=None):
        return np.ones(np.asarray(u)[0].shape)

    def directional_speed(self, u, n, x=None):
        return np.ones(np.asarray(u)[0].shape)

    def flux_divergence(self, u, grad_u, x):
        u0 = np.asarray(u)[0]
        return np.cos(u0) * grad_u[0][0] - np.sin(u0) * grad_u[0][1]

    def check(self, u, where=""):
        pass


@dataclass(frozen=True)
class Burgers:
    """Scalar u_t + div(u^2/2 * ones) = 0."""

    dim: int = 1
    m: int = 1
    tag: str = "burgers"

    def flux(self, u, x=None):
        u0 = np.asarray(u)[0]
        f = 0.5 * u0**2
        return np.stack([f] * self.dim)[None]

    def wavespeed(self, u, x=None):
        return np.abs(np.asarray(u)[0]) * np.sqrt(self.dim)

    def directional_speed(self, u, n, x=None):
        u0 = np.asarray(u)[0]
        n = np.asarray(n)
        nsum = n.sum(axis=-1)
        return np.abs(u0 * nsum)

    def flux_divergence(self, u, grad_u, x):
        u0 = np.asarray(u)[0]
        return u0 * sum(grad_u[0][ax] for ax in range(self.dim))

    def check(self, u, where=""):
        pass


@dataclass(frozen=True)
class Euler:
    """Compressible Euler equations with a polytropic ideal gas law."""

    dim: int
    gamma: float = 1.4
    tag: str = "euler"

    @property
    def m(self) -> int:
        return self.dim + 2

    def primitives(self, u):
        u = np.asarray(u)
        rho = u[0]
        vel = u[1 : 1 + self.dim] / rho
        kinetic = 0.5 * rho * (vel**2).sum(axis=0)
        p = (self.gamma - 1.0) * (u[-1] - kinetic)
        return rho, vel, p

    def check(self, u, where=""):
        rho, _, p = self.primitives(u)
        bad = ~(np.isfinite(rho) & np.isfinite(p) & (rho > 0) & (p > 0))
        if bad.any():
            idx = np.unravel_index(np.argmax(bad), bad.shape)
            raise PhysicsError(
                f"inadmissible euler state at {where} index {idx}: "
                f"rho={np.asarray(rho)[idx]:.6g}, p={np.asarray(p)[idx]:.6g}"
            )

    def flux(self, u, x=None):
        u = np.asarray(u)
        rho, vel, p = self.primitives(u)
        out = np.empty((self.m, self.dim) + rho.shape)
        for k in range(self.dim):
            out[0, k] = u[1 + k]
            for j in range(self.dim):
                out[1 + j, k] = u[1 + j] * vel[k] + (p if j == k else 0.0)
            out[-1, k] = (u[-1] + p) * vel[k]
        return out

    def sound_speed(self, u):
        rho, _, p = self.primitives(u)
        return np.sqrt(self.gamma * p / rho)

    def wavespeed(self, u, x=None):
        rho, vel, p = self.primitives(u)
        return np.sqrt((vel**2).sum(axis=0)) + np.sqrt(self.gamma * p / rho)

    def directional_speed(self, u, n, x=None):
        rho, vel, p = self.primitives(u)
        n = np.asarray(n)
        vn = np.einsum("d...,...d->...", vel, np.broadcast_to(n, vel.shape[1:] + (self.dim,)))
        return np.abs(vn) + np.sqrt(self.gamma * p / rho)


def prim_to_cons(rho, vel, p, gamma: float = 1.4) -> np.ndarray:
    vel = np.atleast_1d(np.asarray(vel, dtype=float))
    rho = np.asarray(rho, dtype=float)
    mom = rho * vel
    E = p / (gamma - 1.0) + 0.5 * rho * (vel**2).sum()
    return np.concatenate([[rho], mom, [E]])


# ---- numerical flux --------------------------------------------------------


def flux(model, u, x=None) -> np.ndarray:
    model.check(u, "flux evaluation")
    return model.flux(u, x)


def max_wavespeed(model, states, n=None, x=None) -> float:
    """Upper wave speed bound over the supplied states (directional if n given)."""
    model.check(states, "wavespeed evaluation")
    if n is None:
        return float(np.max(model.wavespeed(states, x)))
    return float(np.max(model.directional_speed(states, n, x)))


def lax_friedrichs_flux(model, uL, uR, n, x=None) -> np.ndarray:
    """0.5*(f(uL)+f(uR)).n - 0.5*lam*(uR-uL) with lam the two-sided bound."""
    model.check(uL, "LF flux (left)")
    model.check(uR, "LF flux (right)")
    uL, uR = np.asarray(uL), np.asarray(uR)
    fl = _dot_n(model.flux(uL, x), n)
    fr = _dot_n(model.flux(uR, x), n)
    lam = np.maximum(model.directional_speed(uL, n, x), model.directional_speed(uR, n, x))
    return 0.5 * (fl + fr) - 0.5 * lam * (uR - uL)


# ---- boundary conditions ---------------------------------------------------


@dataclass(frozen=True)
class DirichletBC:
    """Fixed or time/space dependent exterior state (conserved variables)."""

    state: object         # (m,) array or callable (x, t) -> (m, ...)

    def ghost(self, u_int, n, x, t):
        if callable(self.state):
            return np.asarray(self.state(x, t))
        tail = np.asarray(u_int).shape[1:]
        return np.broadcast_to(np.asarray(self.state)[(...,) + (None,) * len(tail)],
                               np.asarray(u_int).shape).copy()


@dataclass(frozen=True)
class WallBC:
    """Reflecting wall: mirrors the normal momentum component."""

    def ghost(self, u_int, n, x, t):
        u = np.asarray(u_int).copy()
        d = np.asarray(n).shape[-1]
        mom = u[1 : 1 + d]
        mn = np.einsum("d...,...d->...", mom, np.broadcast_to(n, mom.shape[1:] + (d,)))
        for k in range(d):
            u[1 + k] = mom[k] - 2.0 * mn * np.asarray(n)[..., k]
        return u


@dataclass(frozen=True)
class OutflowBC:
    def ghost(self, u_int, n, x, t):
        return np.asarray(u_int).copy()


@dataclass(frozen=True)
class MovingShockBC:
    """Exterior state switches from post- to pre-shock at a moving front.

    The front position along x is x_front(t) = x0 + (offset + speed*t)/slope.
    """

    post: np.ndarray
    pre: np.ndarray
    x0: float
    offset: float
    speed: float
    slope: float

    def ghost(self, u_int, n, x, t):
        xf = self.x0 + (self.offset + self.speed * t) / self.slope
        mask = np.asarray(x)[..., 0] < xf
        tail = mask.shape
        post = np.asarray(self.post)[(...,) + (None,) * len(tail)]
        pre = np.asarray(self.pre)[(...,) + (None,) * len(tail)]
        return np.where(mask[None], post, pre)


@dataclass(frozen=True)
class BoundarySpec:
    """Maps mesh boundary tags to boundary conditions."""

    conditions: dict = field(default_factory=dict)

    def condition(self, tag: str):
        if tag not in self.conditions:
            raise PhysicsError(f"no boundary condition for tag {tag!r}")
        return self.conditions[tag]


def boundary_state(spec: BoundarySpec, u_int, n, x, t, tag: str) -> np.ndarray:
    """Exterior (ghost) state for a tagged boundary face."""
    return spec.condition(tag).ghost(u_int, n, x, t)
