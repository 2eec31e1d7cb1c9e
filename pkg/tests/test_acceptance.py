"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they
happen.  The three-way constant check compares the gradient-flow estimate
against the quadrature route in the convention both share: the flow
recovers the best weighted-norm/gradient-norm ratio, which is
Lambda^(-1/2) = K^(-(n-1)/(n-2)) in the normalisation the closed-form K
uses (the converged energy itself equals Lambda).
"""

import math
import time

import numpy as np
import pytest

import hscyl
from hscyl import (
    CylindricalDomain,
    DiscreteRayleigh,
    ExtremalParams,
    GridSpec,
    MinimizeOptions,
    ShiftedQuadraticParams,
    RaySamples,
    beta_integral_full,
    build_grid,
    check_decay_bounds,
    cyl_laplacian,
    el_residual,
    extremal_profile,
    fit_decay,
    integrate_cylindrical,
    integrate_radial,
    kelvin_transform,
    local_sup_ratio,
    minimize_rayleigh,
    shifted_power_profile,
    shifted_quadratic_residual,
    sample_ray,
    sharp_constant_K,
    window_grid,
)

PI = math.pi


def _report(num: int, description: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {num} [{status}] {description}"
    if detail:
        line += f" :: {detail}"
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def flow_result(const32):
    spec = GridSpec(rho_max=120.0, r_max=120.0, n_rho=256, n_r=256, grading=1.5)
    opts = MinimizeOptions(init="analytic-extremal", init_scale=0.6, tol=1e-10)
    start = time.perf_counter()
    result = minimize_rayleigh(3, 2, 1.0, spec, opts)
    return result, time.perf_counter() - start


def test_criterion_1_beta_identity_suite():
    start = time.perf_counter()
    worst = 0.0
    combos = 0
    for n in (3, 4, 5):
        for k in range(2, n):
            for s in (0.0, 0.5, 1.0):
                for m in (2.0, 3.0):
                    if not (m > 0.5 * (n - s) and s < k):
                        continue
                    closed = beta_integral_full(n, k, m, s)
                    quad = integrate_cylindrical(
                        lambda rho, r: (1.0 + rho**2 + r**2) ** -m,
                        n, k, s, tol=1e-9)
                    worst = max(worst, abs(quad.value - closed) / abs(closed))
                    combos += 1
    hand = beta_integral_full(3, 2, 2.0, 1.0)
    hand_ok = abs(hand - PI**2) <= 1e-12 * PI**2
    elapsed = time.perf_counter() - start
    _report(1, "Beta-identity suite (closed form vs adaptive quadrature)",
            worst <= 1e-8 and hand_ok and elapsed <= 60.0,
            f"{combos} combinations, worst relative error {worst:.2e}, "
            f"(3,2,2,1) = pi^2 exact, {elapsed:.1f}s")


def test_criterion_2_sharp_constant_three_way(const32, flow_result):
    start = time.perf_counter()
    result, flow_seconds = flow_result

    # (i) quadrature oracle on the normalisation integral, shift (n-2)/(4a)
    k_oracle = const32.K
    # (ii) the literal published display, with its discrepancy recorded
    discrepancy = const32.printed_discrepancy
    recorded = math.isfinite(discrepancy) and discrepancy > 1e-3
    # (iii) gradient flow on a 256x256 graded grid; the flow estimates the
    # attained norm ratio Lambda^(-1/2) = K^(-(n-1)/(n-2))
    target = const32.attained_ratio
    flow_err = abs(result.K_est - target) / target

    elapsed = time.perf_counter() - start + flow_seconds
    _report(2, "Sharp-constant three-way check (n, k) = (3, 2)",
            recorded and flow_err <= 0.02 and elapsed <= 600.0,
            f"K_quadrature = {k_oracle:.10f}, printed-route discrepancy "
            f"{discrepancy:.3%} (recorded), flow K_est = {result.K_est:.6f} vs "
            f"Lambda^(-1/2) = {target:.6f} ({flow_err:.2%}), "
            f"E_min = {result.E_min:.6f} vs Lambda = {const32.Lambda:.6f}, "
            f"{elapsed:.0f}s")


def test_criterion_3_residual_refinement(const32, extremal32):
    worsts = []
    for nodes in (24, 48, 96, 192):
        grid = build_grid(3, 2, 4.0, 4.0, nodes, nodes, grading=1.0)
        res = el_residual(grid.sampled(extremal32), const32.Lambda, 1.0)
        rho_win = (grid.rho_nodes >= 0.5) & (grid.rho_nodes <= 3.0)
        r_win = (grid.r_nodes >= 0.5) & (grid.r_nodes <= 3.0)
        worsts.append(float(np.abs(res.values[np.ix_(rho_win, r_win)]).max()))
    ratios = [a / b for a, b in zip(worsts, worsts[1:])]
    good = all(3.5 <= q <= 4.5 for q in ratios)
    _report(3, "Euler-Lagrange residual of the analytic extremal converges at "
               "second order",
            good, "halving ratios " + ", ".join(f"{q:.2f}" for q in ratios))


def test_criterion_4_explicit_solution_residuals():
    cases = [
        ShiftedQuadraticParams(a=1, b=1, lam=1.0, alpha=1.0, beta=1.0),
        ShiftedQuadraticParams(a=2, b=1, lam=2.0, alpha=1.0, beta=0.0),
        ShiftedQuadraticParams(a=1, b=1, lam=1.0, alpha=0.0, beta=0.0),  # harmonic case
    ]
    details = []
    passed = True
    for params in cases:
        n, k = params.n, params.a + 1
        grid = window_grid(n, k, 1.0, 2.0, 1.0, 2.0, 1024, 1024)
        lam2 = params.lam**2
        phi = grid.sampled(lambda rho, r: lam2 * ((rho + params.alpha) ** 2
                                                  + (r + params.beta) ** 2))
        res_q = shifted_quadratic_residual(phi, params)
        v = grid.sampled(shifted_power_profile(params))
        source = ((params.p_coef / grid.rho_nodes)[:, None]
                  + (params.q_coef / grid.r_nodes)[None, :])
        res_s = cyl_laplacian(v).values + v.values ** (n / (n - 2.0)) * source
        trim = slice(1, -1)
        worst = max(float(np.abs(res_q.values[trim, trim]).max()),
                    float(np.abs(res_s[trim, trim]).max()))
        details.append(f"(a={params.a},b={params.b},alpha={params.alpha},"
                       f"beta={params.beta}): {worst:.1e}")
        passed = passed and worst <= 1e-6
    _report(4, "Explicit-solution residuals at 1e-6 on uniform fine grids",
            passed, "; ".join(details))


def test_criterion_5_decay_suite(const32, extremal32, flow_result):
    result, _ = flow_result

    radii = np.geomspace(1e2, 1e4, 40)
    analytic_fit = fit_decay(RaySamples("r-axis", radii, extremal32(0.0, radii)))
    analytic_ok = abs(analytic_fit.exponent - 1.0) <= 0.05

    samples = sample_ray(result.grid, "rho-axis", min_radius=2.0, max_radius=20.0)
    flow_fit = fit_decay(samples)
    verdict = check_decay_bounds(flow_fit, 3, 2.0, "solution-two-sided", tol=0.1)

    grid = build_grid(3, 2, 48.0, 48.0, 640, 640, grading=1.0).sampled(extremal32)
    ratios = [local_sup_ratio(grid, t, 4.0) for t in (4.0, 8.0, 16.0, 32.0)]
    spread = max(ratios) / min(ratios)

    _report(5, "Decay suite (fundamental-solution rate, sup/mean boundedness)",
            analytic_ok and verdict.passed and spread <= 2.0,
            f"analytic exponent {analytic_fit.exponent:.4f}, flow exponent "
            f"{flow_fit.exponent:.4f} (r^2 = {flow_fit.r_squared:.4f}), "
            f"sup-ratio spread {spread:.3f}x over dyadic centres")


def test_criterion_6_property_suite(rng, const32, flow_result):
    result, _ = flow_result
    checks = {}

    # exponent identities on random admissible contexts
    ok = True
    count = 0
    while count < 200:
        n = int(rng.integers(3, 9))
        k = int(rng.integers(2, n + 1))
        p = float(rng.uniform(1.0 + 1e-6, n - 1e-6))
        s = float(rng.uniform(0.0, p))
        ctx = hscyl.ExponentContext(n, k, p, s)
        if not hscyl.admissible(ctx):
            continue
        count += 1
        rep = hscyl.aux_exponents(ctx)
        ok &= abs(rep.r * p - hscyl.hs_conjugate(p, rep.r * s, n)) <= 1e-12 * rep.r * p
        if math.isfinite(rep.r_prime):
            ok &= abs(1.0 / rep.r + 1.0 / rep.r_prime - 1.0) <= 1e-12
        ok &= rep.r * s < k
        ok &= p - 1e-12 <= rep.p_star_s <= hscyl.hs_conjugate(p, 0.0, n) + 1e-12
    checks["exponent identities"] = ok

    # Kelvin involution and annulus energy isometry
    def u_pt(z):
        return 1.0 / (1.0 + float(np.dot(z, z)))

    double = kelvin_transform(kelvin_transform(u_pt, 3), 3)
    pts = rng.standard_normal((8, 3))
    checks["Kelvin involution"] = all(
        abs(double(z) - u_pt(z)) <= 1e-10 * abs(u_pt(z)) for z in pts)

    def u_rad(rho):
        inside = (rho >= 0.5) & (rho <= 1.0)
        return np.where(inside, np.sin(PI * (2 * rho - 1)) ** 2, 0.0)

    def du_rad(rho):
        inside = (rho >= 0.5) & (rho <= 1.0)
        return np.where(inside, 2 * PI * np.sin(2 * PI * (2 * rho - 1)), 0.0)

    e_u = integrate_radial(lambda rho: du_rad(rho) ** 2, 3, 0.0, tol=1e-10,
                           upper=1.0)
    ku = kelvin_transform(lambda z: float(u_rad(np.linalg.norm(z))), 3)
    h = 1e-5

    def dku_sq(rho):
        if rho < 1.0 + 2 * h or rho > 2.0 - 2 * h:
            return 0.0
        plus = ku(np.array([rho + h, 0.0, 0.0]))
        minus = ku(np.array([rho - h, 0.0, 0.0]))
        return ((plus - minus) / (2 * h)) ** 2

    e_ku = integrate_radial(dku_sq, 3, 0.0, tol=1e-9, upper=2.0)
    checks["annulus energy isometry"] = (
        abs(e_ku.value - e_u.value) <= 1e-6 * abs(e_u.value))

    # cylindrical quadrature factorises for rho-only integrands
    joint = integrate_cylindrical(lambda rho, r: (1.0 + rho**2) ** -3.0,
                                  4, 2, 0.5, domain=CylindricalDomain(r_max=5.0),
                                  tol=1e-10)
    rho_part = integrate_radial(lambda rho: (1.0 + rho**2) ** -3.0, 2, 0.5,
                                tol=1e-11)
    r_part = integrate_radial(lambda r: np.ones_like(r), 2, 0.0, tol=1e-11,
                              upper=5.0)
    product = rho_part.value * r_part.value
    checks["quadrature factorization"] = abs(joint.value - product) <= 1e-8 * product

    # flow direction vs finite-difference Rayleigh gradient (mass metric)
    grid = build_grid(3, 2, 20.0, 20.0, 12, 12, grading=1.5)
    problem = DiscreteRayleigh(3, 2, 1.0, grid)
    u = rng.uniform(0.2, 1.0, size=problem.shape)
    u = problem.project(np.where(problem.interior, u, 0.0))
    direction = problem.direction(u)
    eps = 1e-7
    grad = np.zeros_like(u)
    for idx in np.ndindex(problem.shape):
        if not problem.interior[idx]:
            continue
        up = u.copy(); up[idx] += eps
        dn = u.copy(); dn[idx] -= eps
        grad[idx] = (problem.rayleigh(up) - problem.rayleigh(dn)) / (2 * eps)
    descent = -grad / problem.mass
    cosine = float(np.sum(direction * descent)
                   / (np.linalg.norm(direction) * np.linalg.norm(descent)))
    checks["gradient direction cosine"] = cosine >= 0.999

    # converged minimiser is monotone along both radial directions
    vals = result.grid.values
    checks["minimiser monotone profile"] = bool(
        np.all(np.diff(vals, axis=0) <= 1e-8)
        and np.all(np.diff(vals, axis=1) <= 1e-8))

    failed = [name for name, good in checks.items() if not good]
    detail = ", ".join(f"{name}: {'ok' if good else 'FAIL'}"
                       for name, good in checks.items())
    detail += f"; cosine = {cosine:.6f}"
    _report(6, "Property suite (no published numbers)", not failed, detail)
