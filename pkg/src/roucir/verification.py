"""Acceptance checks, grouped into suites for ``rou-cir-lab verify``.

Every check returns one or more :class:`CheckResult` lines holding the
measured value next to its threshold. Seeds are fixed: multi-seed checks use
master seeds ``0, 1, ..., n-1``; single-seed checks use master seed 0.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .convergence import FIGURE2_EPSILONS, epsilon_ladder, square_consistency
from .models import ModelParams, SamplePath
from .noise import (
    RngSeed,
    TimeGrid,
    generate_bm_increments,
    generate_fbm_increments,
    stack_noises,
    validate_noise_covariance,
)
from .reflection import (
    default_bandwidth,
    epsilon_integral_reflection,
    hitting_time,
    inverse_integral_diagnostic,
    occupation_local_time,
    residual_reflection,
    skorokhod_map,
    tanaka_noise,
)
from .schemes import (
    euler_cir_full_truncation,
    implicit_sqrt_step,
    ou_squared_sum,
    simulate_ou,
    simulate_rou_projected,
    simulate_sqrt_process,
)

__all__ = ["CheckResult", "SUITES", "run_suite", "seeded_noise", "relative_gap"]

EXACT = 1e-12
FIGURE_PARAMS = dict(y0=0.25, b=1.0, sigma=1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: str
    threshold: str
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured {self.measured}; required {self.threshold}"


def seeded_noise(grid: TimeGrid, hurst: float, seeds) -> "NoisePath":
    """One path per master seed, stacked into a batch."""
    if hurst == 0.5:
        paths = [generate_bm_increments(grid, RngSeed(s)) for s in seeds]
    else:
        paths = [generate_fbm_increments(grid, hurst, RngSeed(s)) for s in seeds]
    return stack_noises(paths)


def base_params(hurst: float, **overrides) -> ModelParams:
    """Unperturbed ladder base: critical for Brownian noise, ``a = 0`` otherwise."""
    kw = dict(FIGURE_PARAMS)
    kw.update(overrides)
    a = kw["sigma"] ** 2 / 4.0 if hurst == 0.5 else 0.0
    return ModelParams(a=a, hurst=hurst, **kw)


def relative_gap(a, b):
    """``|a - b| / max(|a|, |b|)``, zero where both are below 1e-12."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.abs(b))
    safe = np.where(scale > EXACT, scale, 1.0)
    return np.where(scale > EXACT, np.abs(a - b) / safe, 0.0)


# --- criterion 1 -------------------------------------------------------------

def check_fbm_covariance() -> list[CheckResult]:
    grid = TimeGrid(1.0, 512)
    out = []
    start = time.perf_counter()
    for i, H in enumerate((0.5, 0.6, 0.7, 0.8, 0.9)):
        noise = generate_fbm_increments(grid, H, RngSeed(0, i), n_paths=10_000)
        rep = validate_noise_covariance(noise, H)
        out.append(CheckResult(
            f"C1 fBm covariance H={H}", rep.passed(4.0), f"max|z|={rep.max_abs_z:.3f}", "< 4",
            detail=rep.table(),
        ))
    elapsed = time.perf_counter() - start
    out.append(CheckResult("C1 fBm covariance runtime", elapsed < 60.0, f"{elapsed:.1f}s", "< 60s"))
    return out


# --- criterion 2 -------------------------------------------------------------

def check_positivity(n_runs: int = 100) -> list[CheckResult]:
    grid = TimeGrid(5.0, 5000)
    out = []
    for H in (0.5, 0.7):
        noise = seeded_noise(grid, H, range(n_runs))
        for eps in (1e-4, 1e-2):
            y = simulate_sqrt_process(base_params(H, epsilon=eps), noise).values
            m = float(y.min())
            out.append(CheckResult(
                f"C2 positivity H={H} eps={eps:g} ({n_runs} runs)", m > 0.0, f"min Y={m:.3e}", "> 0"
            ))
    return out


# --- criteria 3, 4, 5, 9 -----------------------------------------------------

def _ladder(H, n_seeds=20):
    grid = TimeGrid(5.0, 5000)
    noise = seeded_noise(grid, H, range(n_seeds))
    return epsilon_ladder(base_params(H), FIGURE2_EPSILONS, noise, seeds=range(n_seeds), keep_paths=True)


def check_ladder_ordering(n_seeds: int = 20) -> list[CheckResult]:
    out = []
    for H in (0.5, 0.6):
        rep = _ladder(H, n_seeds)
        out.append(CheckResult(
            f"C3 ladder ordering H={H} ({n_seeds} seeds)",
            rep.order_violation <= EXACT,
            f"max(Y_next - Y_prev)={rep.order_violation:.3e}",
            f"<= {EXACT:g}",
        ))
    return out


def _growth_localization(report, level=0.05):
    worst = -math.inf
    dt = report.dt
    for eps in report.epsilons:
        y, L = report.paths[float(eps)]
        for yv, lv in zip(np.atleast_2d(y.values), np.atleast_2d(L.values)):
            above = yv >= level
            # maximal runs of consecutive grid points with Y >= level
            edges = np.flatnonzero(np.diff(np.concatenate([[0], above.astype(int), [0]])))
            for start, stop in zip(edges[::2], edges[1::2]):
                end = stop - 1
                if end == start:
                    continue
                incr = lv[end] - lv[start]
                bound = eps / (2 * level) * (end - start) * dt
                worst = max(worst, incr - bound * (1 + EXACT))
    return worst


def check_uniform_convergence(n_seeds: int = 20) -> list[CheckResult]:
    rep = _ladder(0.6, n_seeds)
    first, last = 0, len(rep.epsilons) - 1
    ry = rep.sup_gap_Y[last] / rep.sup_gap_Y[first]
    rl = rep.sup_gap_L[last] / rep.sup_gap_L[first]
    worst = _growth_localization(rep)
    return [
        CheckResult(f"C4 sup|Y_eps - Y_ref| ratio eps=1e-4 vs eps=1 ({n_seeds} seeds)",
                    bool(np.all(ry <= 0.1)), f"max ratio={ry.max():.4f}", "<= 0.1 every seed"),
        CheckResult(f"C5 sup|L_eps - L_ref| ratio eps=1e-4 vs eps=1 ({n_seeds} seeds)",
                    bool(np.all(rl <= 0.1)), f"max ratio={rl.max():.4f}", "<= 0.1 every seed"),
        CheckResult("C9 growth localization (min Y >= 0.05)", worst <= 0.0,
                    f"max(increment - bound)={worst:.3e}", "<= 0"),
    ]


# --- criterion 6 -------------------------------------------------------------

def _random_params(rng, hurst=None, b=None):
    return ModelParams(
        y0=rng.uniform(0.05, 1.0),
        b=rng.uniform(0.1, 2.0) if b is None else b,
        sigma=rng.uniform(0.2, 2.0),
        hurst=rng.choice([0.5, 0.6, 0.7, 0.8, 0.9]) if hurst is None else hurst,
    )


def _random_noise(rng, params, seed):
    grid = TimeGrid(rng.uniform(0.5, 5.0), int(rng.integers(100, 2001)))
    if params.hurst == 0.5:
        return generate_bm_increments(grid, seed)
    return generate_fbm_increments(grid, params.hurst, seed)


def check_exact_identities(n_seeds: int = 50) -> list[CheckResult]:
    worst = [0.0, 0.0, 0.0]
    for s in range(n_seeds):
        rng = np.random.default_rng(s)
        p = _random_params(rng)
        nz = _random_noise(rng, p, RngSeed(s))
        out = simulate_rou_projected(p, nz)
        res = residual_reflection(out.path, nz, p)
        worst[0] = max(worst[0], float(np.max(np.abs(res.values - out.reflection.values))))

        p0 = _random_params(rng, b=0.0)
        nz0 = _random_noise(rng, p0, RngSeed(s, 1))
        proj = simulate_rou_projected(p0, nz0).path.values
        oracle, _ = skorokhod_map(p0.y0 + 0.5 * p0.sigma * nz0.cumulative())
        worst[1] = max(worst[1], float(np.max(np.abs(proj - oracle))))

        pc = ModelParams(y0=1.0, a=0.25 * 1.0, b=rng.uniform(0, 5), sigma=1.0)
        dt = rng.uniform(1e-4, 0.1)
        y = rng.exponential(1.0, 1000)
        dn = rng.normal(0.0, 1.0, 1000)
        step = implicit_sqrt_step(y, dt, dn, pc)
        expect = np.maximum(0.0, y + 0.5 * pc.sigma * dn) / (1.0 + 0.5 * pc.b * dt)
        worst[2] = max(worst[2], float(np.max(np.abs(step - expect))))
    names = (
        "C6(i) residual reflection = clamp accumulator",
        "C6(ii) projected scheme (b=0) = discrete Skorokhod map",
        "C6(iii) implicit step with c=0 = max(0, beta)/(1 + b dt/2)",
    )
    return [
        CheckResult(f"{n} ({n_seeds} seeds)", w <= EXACT, f"sup gap={w:.3e}", f"<= {EXACT:g}")
        for n, w in zip(names, worst)
    ]


# --- criterion 7 -------------------------------------------------------------

def check_square_consistency() -> list[CheckResult]:
    p = ModelParams(y0=1.0, a=0.5, b=1.0, sigma=1.0)
    noise = generate_bm_increments(TimeGrid(1.0, 10_000), RngSeed(0))
    rep = square_consistency(p, noise, factors=(100, 10, 1))
    gaps = ", ".join(f"{g:.3e}" for g in rep.sup_gaps)
    return [CheckResult(
        "C7 sup|Y^2 - X_euler| over dt=1e-2,1e-3,1e-4", rep.strictly_decreasing(),
        f"[{gaps}]", "strictly decreasing"
    )]


# --- criterion 8 -------------------------------------------------------------

def _tanaka_gap(params, noise):
    u = simulate_ou(params, noise)
    w = tanaka_noise(u, noise)
    absu = SamplePath(u.grid, np.abs(u.values))
    res = residual_reflection(absu, w, params).terminal
    occ = occupation_local_time(u, default_bandwidth(noise.grid.dt), params).terminal
    return relative_gap(res, occ)


def check_local_time(n_seeds: int = 10, n_refine: int = 3) -> list[CheckResult]:
    # dt = 1e-4 paths are block sums of the dt = 1e-5 ones (same Brownian paths)
    p = ModelParams(y0=0.25, b=1.0, sigma=1.0)
    fine = seeded_noise(TimeGrid(5.0, 500_000), 0.5, range(n_seeds))
    coarse = fine.coarsen(10)
    g_coarse = _tanaka_gap(p, coarse)
    g_fine = _tanaka_gap(p, fine.with_increments(fine.increments[:n_refine]))
    mean_c = float(g_coarse.mean())
    before, after = float(g_coarse[:n_refine].mean()), float(g_fine.mean())
    return [
        CheckResult(f"C8 occupation vs Tanaka residual, dt=1e-4 ({n_seeds} seeds)",
                    mean_c <= 0.15, f"mean relative gap={mean_c:.4f} (max {g_coarse.max():.4f})", "<= 0.15"),
        CheckResult(f"C8 gap shrinks dt=1e-4 -> 1e-5 ({n_refine} seeds)",
                    after < before, f"{before:.4f} -> {after:.4f}", "decrease"),
    ]


# --- criterion 10 ------------------------------------------------------------

def _mean_check(name, sample, expected):
    m = float(sample.mean())
    se = float(sample.std(ddof=1) / math.sqrt(sample.size))
    z = (m - expected) / se
    return CheckResult(name, abs(z) <= 3.0, f"mean={m:.5f} vs {expected:.5f} (z={z:.2f})", "|z| <= 3")


def check_mean_odes(n_paths: int = 10_000) -> list[CheckResult]:
    start = time.perf_counter()
    grid = TimeGrid(1.0, 1000)
    out = []
    p = ModelParams(y0=1.0, a=0.25, b=1.0, sigma=1.0)
    nz = generate_bm_increments(grid, RngSeed(0, 0), n_paths=n_paths)
    x = euler_cir_full_truncation(p, nz).values[:, -1]
    out.append(_mean_check("C10 CIR Euler mean at T=1", x, p.a / p.b + (p.x0 - p.a / p.b) * math.exp(-p.b)))

    d = 4
    q = ModelParams(y0=0.5, b=1.0, sigma=1.0)
    noises = [generate_bm_increments(grid, RngSeed(0, 1 + i), n_paths=n_paths) for i in range(d)]
    s = ou_squared_sum(d, q, noises).values[:, -1]
    a, x0 = d * q.sigma**2 / 4.0, d * q.y0**2
    out.append(_mean_check("C10 sum of d=4 squared OU mean at T=1 (a=d sigma^2/4)", s, a / q.b + (x0 - a / q.b) * math.exp(-q.b)))

    u = simulate_ou(ModelParams(y0=1.0, b=1.0, sigma=1.0), nz).values[:, -1]
    out.append(_mean_check("C10 OU mean at T=1", u, math.exp(-0.5)))
    elapsed = time.perf_counter() - start
    out.append(CheckResult("C10 runtime", elapsed < 120.0, f"{elapsed:.1f}s", "< 120s"))
    return out


# --- criterion 11 ------------------------------------------------------------

def supercritical_inverse_integrals(levels: int = 4):
    p = ModelParams(y0=1.0, a=0.5, b=1.0, sigma=1.0)
    fine = generate_bm_increments(TimeGrid(1.0, 1000 * 2 ** (levels - 1)), RngSeed(0))
    return [
        inverse_integral_diagnostic(simulate_sqrt_process(p, fine.coarsen(2**k)), 1.0)
        for k in reversed(range(levels))
    ]


def critical_inverse_integrals(levels: int = 4, gamma: float = 0.5):
    """Critical run (a = sigma^2/4, eps = 0) integrated past its first zero.

    The hitting time is read off the coarsest level; every level then
    integrates ``1/Y`` up to ``tau + gamma``. Returns ``(tau, diagnostics)``.
    """
    p = ModelParams(y0=0.25, a=0.25, b=1.0, sigma=1.0)
    fine = generate_bm_increments(TimeGrid(5.0, 5000 * 2 ** (levels - 1)), RngSeed(0))
    paths = [simulate_sqrt_process(p, fine.coarsen(2**k)) for k in reversed(range(levels))]
    tau = hitting_time(paths[0], 0.0).tau_time
    if tau is None:
        return None, []
    upto = min(tau + gamma, 5.0)
    return tau, [inverse_integral_diagnostic(y, upto) for y in paths]


def check_integrability() -> list[CheckResult]:
    sup = [d.value for d in supercritical_inverse_integrals()]
    changes = [abs(b - a) / abs(b) for a, b in zip(sup, sup[1:])]
    out = [CheckResult(
        "C11 supercritical int 1/Y Cauchy across dt halvings",
        max(changes) <= 0.05,
        f"values={[round(v, 5) for v in sup]}, max rel change={max(changes):.2e}",
        "<= 0.05",
    )]
    tau, crit = critical_inverse_integrals()
    if tau is None:
        out.append(CheckResult("C11 critical int 1/Y growth past tau", False, "no zero observed", "tau exists"))
        return out
    vals = [d.value for d in crit]
    factors = [b / a for a, b in zip(vals, vals[1:])]
    floored = [d.floored for d in crit]
    out.append(CheckResult(
        "C11 critical int 1/Y growth past tau",
        min(factors) >= 1.5,
        f"tau={tau:.3f}, values={[f'{v:.3e}' for v in vals]}, floored={floored}, "
        f"growth factors={[round(f, 3) for f in factors]}",
        ">= 1.5 per halving",
    ))
    return out


SUITES: dict[str, list[Callable[[], list[CheckResult]]]] = {
    "noise": [check_fbm_covariance],
    "schemes": [check_positivity, check_exact_identities, check_square_consistency, check_mean_odes],
    "reflection": [check_local_time, check_integrability],
    "convergence": [check_ladder_ordering, check_uniform_convergence],
}
SUITES["all"] = [c for name in ("noise", "schemes", "reflection", "convergence") for c in SUITES[name]]


def run_suite(name: str, report: Callable[[str], None] = print) -> list[CheckResult]:
    """Run every check of suite ``name`` and report one line per result."""
    if name not in SUITES:
        raise KeyError(name)
    results = []
    for check in SUITES[name]:
        for r in check():
            report(r.line())
            if r.detail:
                report("\n".join("    " + ln for ln in r.detail.splitlines()))
            results.append(r)
    return results
