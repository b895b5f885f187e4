"""Benchmark registry: meshes, initial data, boundary specs, and defaults.

Each hyperbolic benchmark builds a ready-to-run (problem, integrator, u0)
triple from a RunConfig; the CDR entries expose problem factories for the
convergence harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cdr, physics
from .basis import make_space
from .config import RunConfig
from .hyperbolic import HyperbolicProblem, TimeIntegrator
from .mesh import build_uniform_line, build_uniform_quad

GAMMA_GAS = 1.4


@dataclass
class HyperbolicSetup:
    problem: HyperbolicProblem
    integrator: TimeIntegrator
    u0: np.ndarray
    exact: object = None       # callable (x, t) -> nodal reference
    name: str = ""


# ---- scalar benchmarks -----------------------------------------------------


def sbr_initial(x: np.ndarray) -> np.ndarray:
    """Smooth hump, sharp cone, and slotted cylinder on the unit square."""
    X, Y = x[..., 0], x[..., 1]
    u = np.zeros(X.shape)

    r_hump = np.sqrt((X - 0.25) ** 2 + (Y - 0.5) ** 2)
    hump = r_hump <= 0.15
    u = np.where(hump, 0.25 + 0.25 * np.cos(np.pi * np.minimum(r_hump, 0.15) / 0.15), u)

    r_cone = np.sqrt((X - 0.5) ** 2 + (Y - 0.25) ** 2)
    cone = r_cone <= 0.15
    u = np.where(cone, 1.0 - np.minimum(r_cone, 0.15) / 0.15, u)

    r_cyl = np.sqrt((X - 0.5) ** 2 + (Y - 0.75) ** 2)
    cyl = (r_cyl <= 0.15) & ((np.abs(X - 0.5) >= 0.025) | (Y >= 0.85))
    u = np.where(cyl, 1.0, u)
    return u


def _setup_sbr(cfg: RunConfig) -> HyperbolicSetup:
    n = cfg.elements[0]
    ny = cfg.elements[1] if len(cfg.elements) > 1 else n
    mesh = build_uniform_quad(0.0, 0.0, 1.0, 1.0, n, ny, tagger=lambda x, nrm: "inflow")
    space = make_space(mesh, "CG", cfg.degree)
    model = physics.Advection(physics.rotation_about(0.5, 0.5), dim=2)
    bc = physics.BoundarySpec({"inflow": physics.DirichletBC(np.array([0.0]))})
    prob = HyperbolicProblem(space, model, bc, cfg.stab_mode, cfg.weno_config(),
                             cfg.residual_source)
    u0 = space.interpolate(sbr_initial)[None]
    t_final = 1.0 if cfg.t_final is None else cfg.t_final
    integ = TimeIntegrator(order=min(cfg.degree + 1, 3), cfl=cfg.cfl, t_final=t_final)
    # the field rotates with period 1: the initial state is the reference at
    # integer times
    exact = (lambda x, t: sbr_initial(x)) if abs(t_final - round(t_final)) < 1e-12 else None
    return HyperbolicSetup(prob, integ, u0, exact, "sbr")


def kpp_initial(x: np.ndarray) -> np.ndarray:
    inside = np.sqrt(x[..., 0] ** 2 + x[..., 1] ** 2) <= 1.0
    return np.where(inside, 3.5 * np.pi, 0.25 * np.pi)


def _setup_kpp(cfg: RunConfig) -> HyperbolicSetup:
    n = cfg.elements[0]
    ny = cfg.elements[1] if len(cfg.elements) > 1 else n
    mesh = build_uniform_quad(-2.0, -2.5, 2.0, 1.5, n, ny, tagger=lambda x, nrm: "inflow")
    space = make_space(mesh, "CG", cfg.degree)
    model = physics.Kpp()
    bc = physics.BoundarySpec({"inflow": physics.DirichletBC(np.array([0.25 * np.pi]))})
    prob = HyperbolicProblem(space, model, bc, cfg.stab_mode, cfg.weno_config(),
                             cfg.residual_source)
    u0 = space.interpolate(kpp_initial)[None]
    integ = TimeIntegrator(order=min(cfg.degree + 1, 3), cfl=cfg.cfl,
                           t_final=1.0 if cfg.t_final is None else cfg.t_final)
    return HyperbolicSetup(prob, integ, u0, None, "kpp")


# ---- Euler benchmarks --------------------------------------------------------

TT_LEFT = physics.prim_to_cons(1.515695, [0.523346], 1.805, GAMMA_GAS)
TT_SPLIT = -4.5


def titarev_toro_initial(x: np.ndarray) -> np.ndarray:
    X = x[..., 0]
    rho = np.where(X < TT_SPLIT, TT_LEFT[0], 1.0 + 0.1 * np.sin(20.0 * np.pi * (X - 5.0)))
    mom = np.where(X < TT_SPLIT, TT_LEFT[1], 0.0)
    p = np.where(X < TT_SPLIT, 1.805, 1.0)
    E = p / (GAMMA_GAS - 1.0) + 0.5 * mom**2 / rho
    return np.stack([rho, mom, E])


def _setup_titarev_toro(cfg: RunConfig) -> HyperbolicSetup:
    def tagger(x, nrm):
        return "inflow" if nrm[0] < 0 else "wall"

    mesh = build_uniform_line(-5.0, 5.0, cfg.elements[0], tagger=tagger)
    space = make_space(mesh, "DG", cfg.degree)
    model = physics.Euler(dim=1, gamma=GAMMA_GAS)
    bc = physics.BoundarySpec(
        {"inflow": physics.DirichletBC(TT_LEFT), "wall": physics.WallBC()}
    )
    prob = HyperbolicProblem(space, model, bc, cfg.stab_mode, cfg.weno_config(),
                             cfg.residual_source)
    u0 = titarev_toro_initial(space.node_coords)
    integ = TimeIntegrator(order=min(cfg.degree + 1, 3), cfl=cfg.cfl,
                           t_final=5.0 if cfg.t_final is None else cfg.t_final)
    return HyperbolicSetup(prob, integ, u0, None, "titarev_toro")


KH_BAND = (0.25, 0.75)


def kelvin_helmholtz_initial(x: np.ndarray) -> np.ndarray:
    X, Y = x[..., 0], x[..., 1]
    in_band = (Y >= KH_BAND[0]) & (Y <= KH_BAND[1])
    rho = np.where(in_band, 2.0, 1.0)
    vx = np.where(in_band, -0.5, 0.5)
    vy = 0.01 * np.sin(2.0 * np.pi * (X - 0.5))
    p = np.full(X.shape, 2.5)
    E = p / (GAMMA_GAS - 1.0) + 0.5 * rho * (vx**2 + vy**2)
    return np.stack([rho, rho * vx, rho * vy, E])


def _setup_kelvin_helmholtz(cfg: RunConfig) -> HyperbolicSetup:
    n = cfg.elements[0]
    ny = cfg.elements[1] if len(cfg.elements) > 1 else n
    mesh = build_uniform_quad(0.0, 0.0, 1.0, 1.0, n, ny, periodic=True)
    space = make_space(mesh, "DG", cfg.degree)
    model = physics.Euler(dim=2, gamma=GAMMA_GAS)
    prob = HyperbolicProblem(space, model, physics.BoundarySpec({}), cfg.stab_mode,
                             cfg.weno_config(), cfg.residual_source)
    u0 = kelvin_helmholtz_initial(space.node_coords)
    integ = TimeIntegrator(order=min(cfg.degree + 1, 3), cfl=cfg.cfl,
                           t_final=1.0 if cfg.t_final is None else cfg.t_final)
    return HyperbolicSetup(prob, integ, u0, None, "kelvin_helmholtz")


DMR_POST = physics.prim_to_cons(
    8.0, [8.25 * np.cos(np.pi / 6.0), -8.25 * np.sin(np.pi / 6.0)], 116.5, GAMMA_GAS
)
DMR_PRE = physics.prim_to_cons(1.4, [0.0, 0.0], 1.0, GAMMA_GAS)
DMR_X0 = 1.0 / 6.0


def double_mach_initial(x: np.ndarray) -> np.ndarray:
    X, Y = x[..., 0], x[..., 1]
    post = X < DMR_X0 + Y / np.sqrt(3.0)
    out = np.empty((4,) + X.shape)
    for c in range(4):
        out[c] = np.where(post, DMR_POST[c], DMR_PRE[c])
    return out


def _setup_double_mach(cfg: RunConfig) -> HyperbolicSetup:
    nx = cfg.elements[0]
    ny = cfg.elements[1] if len(cfg.elements) > 1 else max(nx // 4, 2)

    def tagger(x, nrm):
        if nrm[0] < 0:
            return "inflow"
        if nrm[0] > 0:
            return "outflow"
        if nrm[1] < 0:
            return "inflow" if x[0] < DMR_X0 else "wall"
        return "dirichlet_timed"

    mesh = build_uniform_quad(0.0, 0.0, 4.0, 1.0, nx, ny, tagger=tagger)
    space = make_space(mesh, "DG", cfg.degree)
    model = physics.Euler(dim=2, gamma=GAMMA_GAS)
    bc = physics.BoundarySpec(
        {
            "inflow": physics.DirichletBC(DMR_POST),
            "outflow": physics.OutflowBC(),
            "wall": physics.WallBC(),
            "dirichlet_timed": physics.MovingShockBC(
                DMR_POST, DMR_PRE, DMR_X0, 1.0, 20.0, np.sqrt(3.0)
            ),
        }
    )
    prob = HyperbolicProblem(space, model, bc, cfg.stab_mode, cfg.weno_config(),
                             cfg.residual_source)
    u0 = double_mach_initial(space.node_coords)
    integ = TimeIntegrator(order=min(cfg.degree + 1, 3), cfl=cfg.cfl,
                           t_final=0.2 if cfg.t_final is None else cfg.t_final)
    return HyperbolicSetup(prob, integ, u0, None, "double_mach")


# ---- CDR problems --------------------------------------------------------------


def cdr_mms_factory(eps: float = 1.0):
    def factory(mesh):
        return cdr.manufactured_problem(2, eps, ("2.0", "1.0"), "1.0",
                                        "sin(pi*x)*sin(pi*y)")

    return factory


def cdr_layer_factory(eps: float = 1e-4):
    """Boundary-layer profile u = x (1 - e^{(y-1)/eps}) / (1 - e^{-1/eps}).

    Hand-coded closed forms: the exponential argument stays nonpositive, so
    the evaluation never overflows (a naive symbolic pipeline splits the
    exponential and hits 0 * inf for small eps).
    """

    def factory(mesh):
        denom = -np.expm1(-1.0 / eps)           # 1 - e^{-1/eps}

        def E(y):
            return np.exp((y - 1.0) / eps)

        def u(x):
            return x[..., 0] * (1.0 - E(x[..., 1])) / denom

        def grad_u(x):
            X, Y = x[..., 0], x[..., 1]
            return np.stack(
                [(1.0 - E(Y)) / denom, -X * E(Y) / (eps * denom)], axis=-1
            )

        def g(x):
            X, Y = x[..., 0], x[..., 1]
            lap = -X * E(Y) / (eps**2 * denom)
            return -eps * lap + (1.0 - E(Y)) / denom + u(x)

        b = physics.VelocityField(
            lambda x: np.stack([np.ones(x.shape[:-1]), np.zeros(x.shape[:-1])], axis=-1)
        )
        return cdr.CdrProblem(eps, b, 1.0, g, u, exact=u, exact_grad=grad_u)

    return factory


# ---- registry -------------------------------------------------------------------

_HYPERBOLIC = {
    "sbr": _setup_sbr,
    "kpp": _setup_kpp,
    "titarev_toro": _setup_titarev_toro,
    "kelvin_helmholtz": _setup_kelvin_helmholtz,
    "double_mach": _setup_double_mach,
}

_CDR = {
    "cdr_mms": cdr_mms_factory,
    "cdr_layer": cdr_layer_factory,
}

_DEFAULTS = {
    # uniform linear weights: the own-cell-heavy default makes u* track u_h
    # so closely that the sensor never fires on CG fronts (the discontinuity
    # spans the shared nodes of neighboring cells); equal weights detect
    # through candidate spread instead
    "sbr": dict(elements=(64,), degree=2, scheme="weno", uniform_weights=True),
    "kpp": dict(elements=(64,), degree=2, scheme="weno", uniform_weights=True),
    "titarev_toro": dict(elements=(500,), degree=2, scheme="rb_weno", theta=10.0),
    "kelvin_helmholtz": dict(elements=(128,), degree=1, scheme="rb_weno"),
    "double_mach": dict(elements=(192, 48), degree=1, scheme="rb_weno"),
    "cdr_mms": dict(elements=(8,), degree=1, scheme="rb_weno"),
    "cdr_layer": dict(elements=(8,), degree=1, scheme="rb_weno"),
}


def benchmark_defaults(name: str) -> dict:
    return dict(_DEFAULTS.get(name, {}))


def is_cdr(name: str) -> bool:
    return name in _CDR


def build_setup(cfg: RunConfig) -> HyperbolicSetup:
    if cfg.benchmark not in _HYPERBOLIC:
        raise ValueError(f"{cfg.benchmark!r} is not a time-dependent benchmark")
    return _HYPERBOLIC[cfg.benchmark](cfg)


def cdr_factory(name: str, eps: float | None = None):
    if name not in _CDR:
        raise ValueError(f"{name!r} is not a CDR benchmark")
    return _CDR[name]() if eps is None else _CDR[name](eps)
