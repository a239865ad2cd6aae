"""Multistart harness and minimizer-equivalence reporting.

Turns the local-equals-global claim into executable evidence: many random
starts, a first-order stationarity screen, deduplication in parameter space,
and a pairwise comparison of the reconstructed states.  Distinct retained
parameter vectors mapping to one state is the expected outcome, not a
failure.
"""

from dataclasses import dataclass, field

import numpy as np

from . import likelihood, optimizers
from .errors import AllRunsFailedError
from .optimizers import StopConfig, constrained_sign_solve, run_solver
from .parameterize import random_param

DEDUP_TOL = 1e-2


@dataclass
class MultistartReport:
    solutions: list  # deduplicated in t-space
    screened_results: list  # every run passing the stationarity screen
    distinct_t_count: int
    max_pairwise_rho_distance: float
    max_f_spread: float
    discarded_count: int
    discard_diagnostics: list = field(default_factory=list)


def _pairwise_spreads(results):
    max_rho = 0.0
    max_f = 0.0
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            dist = float(np.linalg.norm(results[i].rho_final - results[j].rho_final))
            max_rho = max(max_rho, dist)
            max_f = max(max_f, abs(results[i].f_final - results[j].f_final))
    return max_rho, max_f


def multistart(
    model,
    n_starts,
    seed,
    solver="lm",
    cfg=None,
    dedup_tol=DEDUP_TOL,
    screen_tol=None,
    pattern=None,
):
    """Run `solver` from n_starts uniform draws in [-1, 1]^{d^2}.

    Draws with a near-zero diagonal parameter are rejected and redrawn.
    Each run gets the derived seed (seed + index), so serial and parallel
    schedules agree.  Runs with final gradient norm at or above `screen_tol`
    (default: the solver's grad_tol) are discarded; retained parameter
    vectors are deduplicated at `dedup_tol` in the 2-norm.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    cfg = cfg or StopConfig()
    screen = cfg.grad_tol if screen_tol is None else screen_tol
    d = model.dim

    screened = []
    solutions = []
    discards = []
    for i in range(n_starts):
        rng = np.random.default_rng(seed + i)
        t0 = random_param(rng, d)
        if pattern is not None:
            result = constrained_sign_solve(model, pattern, t0, cfg)
        else:
            result = run_solver(solver, model, t0, cfg)
        if result.grad_norm < screen:
            screened.append(result)
            if all(
                np.linalg.norm(result.t_final - kept.t_final) > dedup_tol
                for kept in solutions
            ):
                solutions.append(result)
        else:
            discards.append(
                {
                    "start_index": i,
                    "reason": result.reason.value,
                    "grad_norm": result.grad_norm,
                    "f_final": result.f_final,
                }
            )

    if not screened:
        raise AllRunsFailedError(
            f"all {n_starts} runs failed the stationarity screen at {screen}",
            diagnostics=discards,
        )
    max_rho, max_f = _pairwise_spreads(screened)
    return MultistartReport(
        solutions=solutions,
        screened_results=screened,
        distinct_t_count=len(solutions),
        max_pairwise_rho_distance=max_rho,
        max_f_spread=max_f,
        discarded_count=len(discards),
        discard_diagnostics=discards,
    )


def equivalence_check(results, rho_tol=1e-4, f_tol=1e-8):
    """All results agree pairwise in state and objective value.

    Returns (passed, report); the report names the worst pair.
    """
    if not results:
        raise ValueError("need at least one result")
    worst_rho = (0.0, None)
    worst_f = (0.0, None)
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            dist = float(np.linalg.norm(results[i].rho_final - results[j].rho_final))
            if dist > worst_rho[0]:
                worst_rho = (dist, (i, j))
            df = abs(results[i].f_final - results[j].f_final)
            if df > worst_f[0]:
                worst_f = (df, (i, j))
    passed = worst_rho[0] <= rho_tol and worst_f[0] <= f_tol
    report = {
        "passed": passed,
        "n_results": len(results),
        "max_rho_distance": worst_rho[0],
        "worst_rho_pair": worst_rho[1],
        "max_f_spread": worst_f[0],
        "worst_f_pair": worst_f[1],
        "rho_tol": rho_tol,
        "f_tol": f_tol,
    }
    return passed, report


def gradient_check(model, n_points=100, seed=0, gradient_fn=None):
    """Worst analytic-vs-central-difference gradient error over random points.

    Relative to the finite-difference scale; falls back to an absolute
    comparison (1e-10 scale) where both gradients vanish.  `gradient_fn`
    overrides the analytic gradient (negative-control hook for tests).
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    rng = np.random.default_rng(seed)
    d = model.dim
    worst = 0.0
    for _ in range(n_points):
        t = random_param(rng, d)
        analytic = (
            gradient_fn(t, model)
            if gradient_fn is not None
            else likelihood.value_and_gradient(t, model).gradient
        )
        fd = likelihood.finite_difference_gradient(t, model)
        scale = max(float(np.max(np.abs(fd))), 1e-10)
        err = float(np.max(np.abs(analytic - fd))) / scale
        worst = max(worst, err)
    return worst


def normalize_sign_gauge(t):
    """Scale to ||t|| = 1 and flip rows so all diagonal parameters are positive."""
    from .parameterize import inverse_param, rho_of_t

    t = np.asarray(t, dtype=float)
    d = int(round(np.sqrt(t.size)))
    return inverse_param(rho_of_t(t), np.ones(d), 1.0)
