"""Built-in property checks behind the `selftest` CLI verb.

A trimmed, dependency-free version of the test suite's property checks:
runs in seconds and prints one PASS/FAIL line per property.
"""

from __future__ import annotations

import numpy as np

from . import basis, cdr, hyperbolic, mesh, physics, projection, stabilization, weno


def _check(name: str, ok: bool, detail: str = "") -> bool:
    print(f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))
    return ok


def run_selftest(seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    ok = True

    m = mesh.build_uniform_quad(0, 0, 1, 1, 4, 4)
    sym = all(
        e in m.neighbors[e2]
        for e in range(m.num_elements)
        for e2 in m.neighbors[e]
    )
    area = m.element_volume * m.num_elements
    ok &= _check("mesh adjacency symmetry and area", sym and abs(area - 1.0) < 1e-12)

    cfg = weno.WenoConfig()
    worst = 0.0
    for _ in range(10_000):
        nb = rng.integers(1, 5)
        betas = rng.uniform(0, 1e4, nb + 1)
        theta = rng.uniform(0, 10)
        R = rng.uniform(0, 10)
        Rn = rng.uniform(0, 10, nb)
        c = weno.WenoConfig(theta=theta)
        w1 = weno.classical_weights(cfg, betas)
        w2 = weno.residual_weights(c, betas, R, Rn)
        for w in (w1, w2):
            worst = max(worst, abs(w.sum() - 1.0), -min(w.min(), 0.0))
    ok &= _check("weight convexity (2x10^4 samples)", worst <= 1e-13, f"worst={worst:.2e}")

    sp = basis.make_space(m, "CG", 2)
    u = rng.normal(size=sp.num_dofs)
    res = np.zeros(m.num_elements)
    wf = weno.evaluate_field_weno(sp, u, cfg.with_mode("residual"), res)
    chain = (
        np.allclose(wf.weights[:, 0], 1.0)
        and np.abs(wf.ustar - sp.gather(u)).max() == 0.0
        and np.all(wf.gamma == 1.0)
    )
    ok &= _check("strong consistency chain (R=0)", chain)

    mp = mesh.build_uniform_line(0, 1, 16, periodic=True)
    spd = basis.make_space(mp, "DG", 1)
    adv = physics.Advection(physics.VelocityField(lambda x: np.ones(x.shape[:-1] + (1,))), dim=1)
    prob = hyperbolic.HyperbolicProblem(spd, adv, None, "rb_weno")
    const = np.full((1, spd.num_dofs), 2.5)
    ud = hyperbolic.assemble_rhs(prob, hyperbolic.SemiDiscreteState.initial(const))
    ok &= _check("free-stream preservation", np.abs(ud).max() < 1e-12,
                 f"max |du/dt|={np.abs(ud).max():.2e}")

    m8 = mesh.build_uniform_quad(0, 0, 1, 1, 4, 4)
    sp8 = basis.make_space(m8, "CG", 1)
    problem = cdr.manufactured_problem(2, 1.0, ("2.0", "1.0"), "1.0", "sin(pi*x)*sin(pi*y)")
    fl = projection.FluctuationOperator(sp8)
    params = cdr.cdr_stab_params(problem, sp8, fluct=fl)
    bnd = cdr.boundary_dof_mask(sp8)
    worst_ratio = np.inf
    for _ in range(10):
        v = rng.normal(size=sp8.num_dofs)
        v[bnd] = 0.0
        g = rng.uniform(0, 1, m8.num_elements)
        sys_g = cdr.assemble_cg(problem, sp8, g, params, fl, scheme="rb_weno")
        lhs = float(v @ (sys_g.matrix @ v))
        rhs = cdr.s_norm(problem, sp8, v, params, fl) ** 2
        worst_ratio = min(worst_ratio, lhs / rhs)
    ok &= _check("discrete coercivity (CG)", worst_ratio >= 1.0 - 1e-8,
                 f"min ratio={worst_ratio:.6f}")
    return ok
