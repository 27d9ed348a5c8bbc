"""Identity and inequality verification suites behind ``kortorus verify``.

Each suite sweeps a seeded corpus and returns one CheckResult per check;
a check passes when its residual (or constant) meets the stated tolerance.
Exact-zero checks compare bit-for-bit.  Empirical-constant checks never fail
on magnitude, only on non-finiteness or drift above 2x under corpus or
resolution refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import littlewood_paley as lp
from .functionals import quartic_forms, vacuum_functional
from .model import (
    FieldState,
    ModelParams,
    effective_velocity,
    inverse_density_capillarity,
    korteweg_div_general,
    korteweg_div_special,
    rhs,
)
from .scenarios import besov_corpus, density_corpus, velocity_corpus
from .spectral import (
    ScalarField,
    SpectralGrid,
    VectorField,
    gradient,
    hessian,
    integrate,
    laplacian,
    lp_norm,
    relative_l2_gap,
    tensor_divergence,
    vector_gradient,
    dealias,
    TensorField,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: value={self.value:.6e} tol={self.tolerance:.3e}{extra}"


def _max_check(name, values, tol, detail="") -> CheckResult:
    worst = float(np.max(values)) if len(values) else 0.0
    return CheckResult(name, worst, tol, worst < tol, detail)


def _corpora(seed: int):
    g1 = SpectralGrid(256)
    g2 = SpectralGrid((128, 128))
    one_d = density_corpus(g1, 8, seed=seed, lo=1.0, hi=3.0)
    two_d = density_corpus(g2, 4, seed=seed + 1, lo=1.0, hi=3.0)
    return one_d, two_d


def suite_appendix(seed: int = 0) -> list[CheckResult]:
    """Capillary-tensor equivalences and the supporting pointwise identities."""
    kappa = 1.0
    one_d, two_d = _corpora(seed)
    gaps, lap_resid, inter_gaps, bd_resid = [], [], [], []
    for rho in one_d + two_d:
        grid = rho.grid
        special = korteweg_div_special(rho, kappa)
        general = korteweg_div_general(rho, inverse_density_capillarity(kappa))
        gaps.append(relative_l2_gap(general, special))

        ln = ScalarField(grid, np.log(rho.data))
        grad_rho = gradient(rho)
        resid = np.max(np.abs(laplacian(rho).data - rho.data * laplacian(ln).data
                              - np.sum(grad_rho.data ** 2, axis=0) / rho.data))
        lap_resid.append(resid)

        grad_ln = gradient(ln)
        sq = dealias(ScalarField(grid, np.sum(grad_ln.data ** 2, axis=0)))
        inter = dealias(VectorField(grid, kappa * rho.data
                                    * (gradient(laplacian(ln)).data
                                       + 0.5 * gradient(sq).data)))
        inter_gaps.append(relative_l2_gap(special, inter))

        lhs = integrate(ScalarField(grid, np.sum(special.data * grad_ln.data, axis=0)))
        hess_ln = hessian(ln)
        rhs_val = -kappa * integrate(
            ScalarField(grid, rho.data * np.sum(hess_ln.data ** 2, axis=(0, 1))))
        bd_resid.append(abs(lhs - rhs_val) / abs(rhs_val))
    return [
        _max_check("capillary general-vs-closed-form relative L2 gap", gaps, 1e-8),
        _max_check("pointwise identity Lap(rho) = rho Lap(ln rho) + |grad rho|^2/rho",
                   lap_resid, 1e-8),
        _max_check("closed form vs intermediate assembly", inter_gaps, 1e-8),
        _max_check("integration by parts against grad(ln rho)", bd_resid, 1e-7),
    ]


def suite_entropy(seed: int = 0) -> list[CheckResult]:
    """Momentum-form equivalence, change-of-variables consistency, and the
    algebraic identities feeding the entropy monitors."""
    results = []
    g1 = SpectralGrid(128)
    rhos = density_corpus(g1, 4, seed=seed + 10, lo=1.0, hi=2.0)
    vels = velocity_corpus(g1, 4, seed=seed + 11, amplitude=0.5)

    # diffusion-tensor assemblies agree: (mu-a) div(r grad u) + a div(r D u)
    # versus div(mu r grad u) + div(a r grad u^T)
    mu, al = 1.0, 0.4
    diffs = []
    for rho, u in zip(rhos, vels):
        grid = rho.grid
        grad_u = vector_gradient(u)
        sym = TensorField(grid, grad_u.data + np.swapaxes(grad_u.data, 0, 1))
        lhs = ((mu - al) * tensor_divergence(
            TensorField(grid, rho.data * grad_u.data)).data
            + al * tensor_divergence(TensorField(grid, rho.data * sym.data)).data)
        rhs_d = (mu * tensor_divergence(TensorField(grid, rho.data * grad_u.data)).data
                 + al * tensor_divergence(
                     TensorField(grid, rho.data * np.swapaxes(grad_u.data, 0, 1))).data)
        diffs.append(float(np.max(np.abs(lhs - rhs_d))))
    results.append(_max_check("diffusion-tensor assemblies agree", diffs, 1e-11))

    # original-variant tendencies mapped through the change of variables
    params1 = ModelParams(mu=1.0, alpha=0.5, kappa=0.5, a=1.0, gamma=2.0,
                          variant="effective_v1")
    gaps_rho, gaps_v = [], []
    for rho, u in zip(rhos, vels):
        grid = rho.grid
        st_orig = FieldState(rho, u)
        drho_o, du_o = rhs(st_orig, params1.with_variant("original"))
        dv_mapped = VectorField(grid, du_o.data + params1.eps * gradient(
            ScalarField(grid, drho_o.data / rho.data)).data)
        st_eff = FieldState(rho, effective_velocity(rho, u, params1))
        drho_e, dv_e = rhs(st_eff, params1)
        gaps_rho.append(relative_l2_gap(drho_o, drho_e))
        gaps_v.append(relative_l2_gap(dv_mapped, dv_e))
    results.append(_max_check("density tendency, original vs effective", gaps_rho, 1e-8))
    results.append(_max_check("velocity tendency mapped through the change of variables",
                              gaps_v, 1e-8))

    # quartic dissipation identity (band-limited fields, exact product space)
    quartic = []
    g2 = SpectralGrid((64, 64))
    for v in velocity_corpus(g2, 4, seed=seed + 12, amplitude=1.0, kmax=4):
        direct, identity = quartic_forms(v)
        quartic.append(float(np.max(np.abs(direct - identity))))
    results.append(_max_check(
        "quartic dissipation: quadruple sum vs half-gradient-squared form",
        quartic, 1e-12))

    # vacuum multiplier identity
    params2 = ModelParams(mu=1.0, alpha=0.0, kappa=1.0, a=1.0, gamma=2.0,
                          variant="effective_v2")
    vac = []
    for rho in density_corpus(SpectralGrid(256), 4, seed=seed + 13, lo=1.0, hi=3.0):
        st = FieldState(rho, rho.grid.zero_vector())
        vac.append(vacuum_functional(st, params2, 3.0).identity_residual)
    results.append(_max_check("vacuum multiplier identity residual", vac, 1e-8))
    return results


def suite_lp_partition(seed: int = 0) -> list[CheckResult]:
    """Dyadic-family structure: partition of unity, supports, reconstruction."""
    results = []
    partition, recon = [], []
    support_exact = True
    ortho_exact = True
    for grid in (SpectralGrid(64), SpectralGrid(256), SpectralGrid((64, 64))):
        fam = lp.family_for(grid)
        partition.append(fam.partition_deviation())
        for k in fam.q_range:
            for kp in fam.q_range:
                if abs(k - kp) >= 2:
                    if np.any(fam.phi_tables[k] * fam.phi_tables[kp]):
                        support_exact = False
            if k >= 1 and np.any(fam.chi_table * fam.phi_tables[k]):
                support_exact = False
        corpus = besov_corpus(grid, 3, seed=seed + 20)
        for u in corpus:
            total = np.zeros(grid.shape)
            for q in fam.block_range:
                total += lp.dyadic_block(u, q, fam).data
            recon.append(float(np.max(np.abs(total - u.data))))
            z = lp.dyadic_block_pair(u, 1, 4, fam)
            if np.max(np.abs(z.data)) != 0.0:
                ortho_exact = False
    results.append(_max_check("partition of unity deviation over the lattice",
                              partition, 1e-12))
    results.append(CheckResult("shell/ball support disjointness (exact)",
                               0.0 if support_exact else 1.0, 0.5, support_exact))
    results.append(_max_check("reconstruction mean + sum of blocks", recon, 1e-12))
    results.append(CheckResult("block composition |q-q'| >= 2 is the exact zero field",
                               0.0 if ortho_exact else 1.0, 0.5, ortho_exact))
    return results


def suite_lp_norms(seed: int = 0) -> list[CheckResult]:
    """Norm equivalences with stability under corpus and resolution doubling."""
    results = []
    grid = SpectralGrid(128)
    corpus = besov_corpus(grid, 100, seed=seed + 30)

    # Sobolev weight comparison
    ratios = []
    for u in corpus[:40]:
        b = lp.besov_norm(u, lp.BesovIndex(1.0, 2.0, 2.0))
        h = lp.sobolev_weight_norm(u, 1.0)
        ratios.append(max(b / h, h / b))
    results.append(_max_check("B^1_{2,2} vs Sobolev-weight equivalence factor",
                              ratios, 4.0))

    # derivative equivalence with refinement stability
    rep = lp.verify_derivative_equivalence(corpus, 1.0, 2.0, 2.0)
    ok = math.isfinite(rep.constant) and rep.min_ratio >= 0.1 and rep.max_ratio <= 10.0
    results.append(CheckResult("derivative-equivalence ratios within [1/10, 10]",
                               rep.constant, 10.0, ok,
                               f"min={rep.min_ratio:.3f} max={rep.max_ratio:.3f}"))
    rep2 = lp.verify_derivative_equivalence(
        besov_corpus(grid, 200, seed=seed + 30), 1.0, 2.0, 2.0)
    rep3 = lp.verify_derivative_equivalence(
        besov_corpus(SpectralGrid(256), 100, seed=seed + 31), 1.0, 2.0, 2.0)
    drift = max(rep2.constant / rep.constant, rep.constant / rep2.constant,
                rep3.constant / rep.constant, rep.constant / rep3.constant)
    results.append(CheckResult("derivative-equivalence constant drift under doubling",
                               drift, 2.0, drift < 2.0))

    # embedding and product law: finite constants, stable under corpus growth
    emb = lp.verify_embedding(corpus[:50], 1.0, 2.0, 2.0, 4.0, 2.0)
    emb2 = lp.verify_embedding(corpus, 1.0, 2.0, 2.0, 4.0, 2.0)
    emb_drift = emb2.worst_constant / emb.worst_constant if emb.worst_constant else math.inf
    results.append(CheckResult("embedding constant finite and stable",
                               emb2.worst_constant, math.inf,
                               math.isfinite(emb2.worst_constant) and emb_drift < 2.0,
                               f"drift={emb_drift:.3f}"))
    pairs = list(zip(corpus[:50], corpus[50:]))
    prod = lp.verify_product_law(pairs, 1.0, 2.0, 2.0)
    prod2 = lp.verify_product_law(pairs[:25], 1.0, 2.0, 2.0)
    prod_drift = prod.worst_constant / prod2.worst_constant if prod2.worst_constant else math.inf
    results.append(CheckResult("product-law constant finite and stable",
                               prod.worst_constant, math.inf,
                               math.isfinite(prod.worst_constant) and prod_drift < 2.0,
                               f"drift={prod_drift:.3f}"))

    # almost orthogonality
    fam = lp.family_for(grid)
    factors = []
    for u in corpus[:20]:
        l2 = lp_norm(u, 2.0) ** 2
        blocks = sum(lp_norm(lp.dyadic_block(u, q, fam), 2.0) ** 2
                     for q in fam.block_range)
        factors.append(max(l2 / blocks, blocks / l2))
    results.append(_max_check("almost-orthogonality factor", factors, 3.0))
    return results


def suite_heat(seed: int = 0) -> list[CheckResult]:
    """Parabolic maximal-regularity constants and the closed-form oracle."""
    results = []
    grid = SpectralGrid(128)
    mu, T = 0.7, 1.3
    fam = lp.family_for(grid)

    u0 = grid.from_function(lambda x: np.cos(x))
    rep = lp.heat_regularity_check(u0, None, mu, 0.0, 2.0, 2.0, 1.0, 1.0, T)
    shell_time = (1.0 - math.exp(-mu * T)) / mu
    oracle_terms = []
    for q in fam.block_range:
        tab = float(fam.multiplier(q)[1])
        if tab:
            oracle_terms.append((2.0 ** (2.0 * q) * tab * math.sqrt(math.pi)
                                 * shell_time) ** 2)
    oracle = math.sqrt(sum(oracle_terms))
    results.append(CheckResult("single-mode decay matches closed-form time integral",
                               abs(rep.lhs - oracle) / oracle, 1e-10,
                               abs(rep.lhs - oracle) / oracle < 1e-10))

    rng = np.random.default_rng(seed + 40)
    cases = []
    for rho1, rho2 in ((math.inf, math.inf), (1.0, 1.0), (2.0, 1.0)):
        consts = []
        for trial in range(4):
            u0 = besov_corpus(grid, 1, seed=seed + 41 + trial)[0]
            f0 = besov_corpus(grid, 1, seed=seed + 61 + trial)[0]
            omega = 1.0 + rng.uniform()
            forcing = (lambda f0d, om: (lambda t: f0d * math.cos(om * t)))(f0.data, omega)
            rep = lp.heat_regularity_check(u0, forcing, mu, 1.0, 2.0, 2.0,
                                           rho1, rho2, T, n_time=129)
            consts.append(rep.constant)
        finite = all(math.isfinite(c) for c in consts)
        cases.append(CheckResult(
            f"heat constant finite for (rho1, rho2) = ({rho1}, {rho2})",
            max(consts), math.inf, finite,
            f"max C={max(consts):.3f}"))
    results.extend(cases)

    # stability of the (2,1) constant under resolution doubling, with the
    # same analytic initial datum sampled on both grids
    def analytic_datum(g):
        x = g.axes()[0]
        f = np.exp(0.8 * np.sin(x)) * np.cos(2 * x)
        return ScalarField(g, f - f.mean())

    rep_c = lp.heat_regularity_check(analytic_datum(grid), None, mu,
                                     1.0, 2.0, 2.0, 2.0, 1.0, T)
    rep_f = lp.heat_regularity_check(analytic_datum(SpectralGrid(256)), None, mu,
                                     1.0, 2.0, 2.0, 2.0, 1.0, T)
    drift = max(rep_c.constant / rep_f.constant, rep_f.constant / rep_c.constant)
    results.append(CheckResult("heat constant stable under resolution doubling",
                               drift, 2.0, drift < 2.0))
    return results


SUITES = {
    "appendix": suite_appendix,
    "entropy": suite_entropy,
    "lp-partition": suite_lp_partition,
    "lp-norms": suite_lp_norms,
    "heat": suite_heat,
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name == "all":
        out = []
        for suite in SUITES.values():
            out.extend(suite(seed))
        return out
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed)
