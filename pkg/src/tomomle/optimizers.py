"""Unconstrained minimizers over parameter vectors, with explicit stopping
diagnostics.

Every run terminates with exactly one StopReason.  Gradient tolerance is the
preferred criterion; stagnation criteria (small step / small function change)
use tolerances that default to grad_tol**2, and a terminated run always
reports the final gradient norm so that a stagnation stop can be told apart
from true stationarity.  An artificial bound on ||t||_inf guards against the
false-stationarity regime where growing ||t|| shrinks the gradient.

Solvers accept either a likelihood ObjectiveModel or any object exposing
value(t) / value_and_gradient(t) (and residuals_and_jacobian(t) for the
least-squares solver).
"""

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import likelihood
from .errors import NumericalError
from .likelihood import ObjectiveModel
from .parameterize import param_dim, rho_of_t

ARMIJO_C1 = 1e-4
MAX_BACKTRACKS = 60
LM_LAMBDA_INIT = 1e-3
LM_LAMBDA_MAX = 1e15
SIGN_MAG_FLOOR = 1e-10


class StopReason(enum.Enum):
    GradientTolerance = "gradient-tolerance"
    StepStagnation = "step-stagnation"
    FunctionStagnation = "function-stagnation"
    MaxIterations = "max-iterations"
    MaxFunctionEvals = "max-function-evals"
    ParamBoundHit = "param-bound-hit"
    NumericalFailure = "numerical-failure"


STAGNATION_REASONS = frozenset(
    {
        StopReason.StepStagnation,
        StopReason.FunctionStagnation,
        StopReason.MaxIterations,
        StopReason.MaxFunctionEvals,
        StopReason.ParamBoundHit,
        StopReason.NumericalFailure,
    }
)


@dataclass
class StopConfig:
    grad_tol: float = 1e-6
    step_tol: float | None = None  # default grad_tol**2
    fun_tol: float | None = None  # default grad_tol**2
    max_iters: int | None = None  # default 2 * 200 * n
    max_fevals: int | None = None  # default 2 * 200 * n
    param_bound: float = 1e3

    def resolved(self, n):
        step_tol = self.grad_tol**2 if self.step_tol is None else self.step_tol
        fun_tol = self.grad_tol**2 if self.fun_tol is None else self.fun_tol
        max_iters = 2 * 200 * n if self.max_iters is None else self.max_iters
        max_fevals = 2 * 200 * n if self.max_fevals is None else self.max_fevals
        if step_tol > self.grad_tol or fun_tol > self.grad_tol:
            warnings.warn(
                "stagnation tolerances exceed the gradient tolerance; stagnation "
                "stops may mask non-stationary points",
                stacklevel=3,
            )
        return step_tol, fun_tol, max_iters, max_fevals


@dataclass
class OptimizationResult:
    t_final: np.ndarray
    rho_final: np.ndarray
    f_final: float
    grad_norm: float
    iters: int
    fevals: int
    reason: StopReason
    trace_log: list = field(default_factory=list)


class _Budget(Exception):
    pass


def _is_objective_model(model):
    return isinstance(model, ObjectiveModel)


def _value(model, t):
    if _is_objective_model(model):
        return likelihood.value(t, model)
    return model.value(t)


def _value_grad(model, t):
    if _is_objective_model(model):
        ev = likelihood.value_and_gradient(t, model)
        return ev.value, ev.gradient
    return model.value_and_gradient(t)


def _res_jac(model, t):
    if _is_objective_model(model):
        r, jac, _ = likelihood.residuals_and_jacobian(t, model)
        return r, jac
    return model.residuals_and_jacobian(t)


def _finish(model, t, f, iters, fevals, reason, trace, grad=None):
    if grad is None:
        try:
            _, grad = _value_grad(model, t)
        except Exception:
            grad = np.full(len(t), np.nan)
    rho = rho_of_t(t) if _is_objective_model(model) else None
    return OptimizationResult(
        t_final=np.asarray(t, dtype=float),
        rho_final=rho,
        f_final=float(f),
        grad_norm=float(np.linalg.norm(grad)),
        iters=iters,
        fevals=fevals,
        reason=reason,
        trace_log=trace,
    )


def levenberg_marquardt(model, t0, cfg=None, project=None):
    """Damped least-squares minimization on the (residual, Jacobian) pair.

    Identity damping with a gain-ratio update: the damping halves on a
    strong step, doubles on a rejected one.  `project` (if given)
    maps each trial point back to the feasible set before evaluation.
    """
    cfg = cfg or StopConfig()
    t = np.asarray(t0, dtype=float).copy()
    if project is not None:
        t = project(t)
    n = t.size
    step_tol, fun_tol, max_iters, max_fevals = cfg.resolved(n)
    trace = []

    r, jac = _res_jac(model, t)
    fevals = 1
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(jac))):
        return _finish(model, t, np.inf, 0, fevals, StopReason.NumericalFailure, trace)
    f = 0.5 * float(r @ r)
    grad = jac.T @ r
    lam = LM_LAMBDA_INIT
    iters = 0
    trace.append((f, float(np.linalg.norm(grad)), 0.0))

    while True:
        gnorm = float(np.linalg.norm(grad))
        if gnorm < cfg.grad_tol:
            return _finish(model, t, f, iters, fevals, StopReason.GradientTolerance, trace, grad)
        if np.max(np.abs(t)) > cfg.param_bound:
            return _finish(model, t, f, iters, fevals, StopReason.ParamBoundHit, trace, grad)
        if iters >= max_iters:
            return _finish(model, t, f, iters, fevals, StopReason.MaxIterations, trace, grad)
        if fevals >= max_fevals:
            return _finish(model, t, f, iters, fevals, StopReason.MaxFunctionEvals, trace, grad)
        iters += 1

        jtj = jac.T @ jac
        eye = np.eye(n)
        delta = None
        while True:
            try:
                # identity damping: near-Newton steps survive in stiff
                # directions (12-orders curvature spread near the boundary
                # would freeze them under diag(J^T J) scaling)
                delta = np.linalg.solve(jtj + lam * eye, -grad)
            except np.linalg.LinAlgError:
                delta = None
            if delta is not None and np.all(np.isfinite(delta)):
                trial = t + delta
                if project is not None:
                    trial = project(trial)
                r_new, jac_new = _res_jac(model, trial)
                fevals += 1
                if np.all(np.isfinite(r_new)) and np.all(np.isfinite(jac_new)):
                    f_new = 0.5 * float(r_new @ r_new)
                    if f_new < f:
                        break
            # rejected step
            lam *= 2.0
            if lam > LM_LAMBDA_MAX:
                return _finish(model, t, f, iters, fevals, StopReason.StepStagnation, trace, grad)
            if fevals >= max_fevals:
                return _finish(
                    model, t, f, iters, fevals, StopReason.MaxFunctionEvals, trace, grad
                )

        pred = 0.5 * float(lam * (delta @ delta) - grad @ delta)
        gain = (f - f_new) / max(pred, 1e-300)
        if gain > 0.75:
            lam = max(lam * 0.5, 1e-15)
        step = float(np.linalg.norm(trial - t))
        df = f - f_new
        t, f, r, jac = trial, f_new, r_new, jac_new
        grad = jac.T @ r
        trace.append((f, float(np.linalg.norm(grad)), step))

        if float(np.linalg.norm(grad)) < cfg.grad_tol:
            return _finish(model, t, f, iters, fevals, StopReason.GradientTolerance, trace, grad)
        if step < step_tol:
            return _finish(model, t, f, iters, fevals, StopReason.StepStagnation, trace, grad)
        if df < fun_tol:
            return _finish(model, t, f, iters, fevals, StopReason.FunctionStagnation, trace, grad)


def gradient_descent(model, t0, cfg=None, project=None):
    """Steepest descent with Armijo backtracking (c1 = 1e-4, halving)."""
    cfg = cfg or StopConfig()
    t = np.asarray(t0, dtype=float).copy()
    if project is not None:
        t = project(t)
    n = t.size
    step_tol, fun_tol, max_iters, max_fevals = cfg.resolved(n)
    trace = []

    f, grad = _value_grad(model, t)
    fevals = 1
    if not (np.isfinite(f) and np.all(np.isfinite(grad))):
        return _finish(model, t, f, 0, fevals, StopReason.NumericalFailure, trace)
    alpha = 1.0
    iters = 0
    trace.append((f, float(np.linalg.norm(grad)), 0.0))

    while True:
        direction = -grad
        if project is not None:
            # tangential component on the unit sphere
            direction = direction - (direction @ t) * t
        dnorm2 = float(direction @ direction)
        gnorm = float(np.linalg.norm(direction if project is not None else grad))
        if gnorm < cfg.grad_tol:
            return _finish(model, t, f, iters, fevals, StopReason.GradientTolerance, trace, grad)
        if np.max(np.abs(t)) > cfg.param_bound:
            return _finish(model, t, f, iters, fevals, StopReason.ParamBoundHit, trace, grad)
        if iters >= max_iters:
            return _finish(model, t, f, iters, fevals, StopReason.MaxIterations, trace, grad)
        if fevals >= max_fevals:
            return _finish(model, t, f, iters, fevals, StopReason.MaxFunctionEvals, trace, grad)
        iters += 1

        accepted = False
        a = alpha
        for _ in range(MAX_BACKTRACKS):
            trial = t + a * direction
            if project is not None:
                trial = project(trial)
            f_trial = _value(model, trial)
            fevals += 1
            if np.isfinite(f_trial) and f_trial <= f - ARMIJO_C1 * a * dnorm2:
                accepted = True
                break
            if fevals >= max_fevals:
                return _finish(
                    model, t, f, iters, fevals, StopReason.MaxFunctionEvals, trace, grad
                )
            a *= 0.5
        if not accepted:
            return _finish(model, t, f, iters, fevals, StopReason.StepStagnation, trace, grad)

        step = float(np.linalg.norm(trial - t))
        df = f - f_trial
        t = trial
        f, grad = _value_grad(model, t)
        fevals += 1
        if not (np.isfinite(f) and np.all(np.isfinite(grad))):
            return _finish(model, t, f, iters, fevals, StopReason.NumericalFailure, trace)
        alpha = min(a * 2.0, 1e6)
        trace.append((f, float(np.linalg.norm(grad)), step))

        if step < step_tol:
            return _finish(model, t, f, iters, fevals, StopReason.StepStagnation, trace, grad)
        if df < fun_tol:
            return _finish(model, t, f, iters, fevals, StopReason.FunctionStagnation, trace, grad)


def nelder_mead(model, t0, cfg=None):
    """Downhill simplex with standard coefficients (1, 2, 0.5, 0.5).

    Termination follows the simplex-stagnation rule: all vertices within
    step_tol of the best point (inf norm) and all function values within
    fun_tol of the best value.  The gradient norm reported in the result is
    evaluated a posteriori at the final point and plays no role in the
    search.
    """
    cfg = cfg or StopConfig()
    t0 = np.asarray(t0, dtype=float).copy()
    n = t0.size
    step_tol, fun_tol, max_iters, max_fevals = cfg.resolved(n)
    trace = []

    state = {"fevals": 0}

    def f(x):
        if state["fevals"] >= max_fevals:
            raise _Budget
        state["fevals"] += 1
        val = _value(model, x)
        if not np.isfinite(val):
            raise NumericalError("non-finite objective value in simplex search")
        return val

    # fminsearch-style initial simplex: 5% relative perturbation per
    # coordinate, 0.00025 absolute where the coordinate is zero
    simplex = [t0]
    for i in range(n):
        v = t0.copy()
        v[i] = v[i] * 1.05 if v[i] != 0.0 else 0.00025
        simplex.append(v)
    simplex = np.array(simplex)

    iters = 0
    reason = None
    try:
        values = np.array([f(v) for v in simplex])
        while True:
            order = np.argsort(values, kind="stable")
            simplex = simplex[order]
            values = values[order]
            best, fbest = simplex[0], values[0]
            diameter = float(np.max(np.abs(simplex[1:] - best)))
            fspread = float(np.max(np.abs(values[1:] - fbest)))
            trace.append((fbest, np.nan, diameter))
            if diameter <= step_tol and fspread <= fun_tol:
                reason = StopReason.StepStagnation
                break
            if iters >= max_iters:
                reason = StopReason.MaxIterations
                break
            iters += 1

            centroid = simplex[:-1].mean(axis=0)
            worst, fworst = simplex[-1], values[-1]
            reflected = centroid + (centroid - worst)
            fr = f(reflected)
            if fr < fbest:
                expanded = centroid + 2.0 * (centroid - worst)
                fe = f(expanded)
                if fe < fr:
                    simplex[-1], values[-1] = expanded, fe
                else:
                    simplex[-1], values[-1] = reflected, fr
            elif fr < values[-2]:
                simplex[-1], values[-1] = reflected, fr
            else:
                if fr < fworst:
                    contracted = centroid + 0.5 * (reflected - centroid)
                    fc = f(contracted)
                    better_than = fr
                else:
                    contracted = centroid + 0.5 * (worst - centroid)
                    fc = f(contracted)
                    better_than = fworst
                if fc < better_than:
                    simplex[-1], values[-1] = contracted, fc
                else:
                    # shrink toward the best vertex
                    for i in range(1, n + 1):
                        simplex[i] = best + 0.5 * (simplex[i] - best)
                        values[i] = f(simplex[i])
    except _Budget:
        reason = StopReason.MaxFunctionEvals
    except NumericalError:
        reason = StopReason.NumericalFailure

    order = np.argsort(values, kind="stable")
    best, fbest = simplex[order[0]], values[order[0]]
    return _finish(model, best, fbest, iters, state["fevals"], reason, trace)


def make_sign_projection(pattern):
    """Projection onto {||t||_2 = 1, diagonal signs fixed by `pattern`}.

    Diagonal entries with the wrong sign are clamped to a small magnitude of
    the right sign; the vector is then renormalized.  Renormalization does
    not change the objective (degree-zero homogeneity).
    """
    pattern = np.asarray(pattern, dtype=float)
    d = pattern.size

    def project(t):
        t = np.asarray(t, dtype=float).copy()
        t[:d] = pattern * np.maximum(pattern * t[:d], SIGN_MAG_FLOOR)
        return t / np.linalg.norm(t)

    return project


def constrained_sign_solve(model, pattern, t0, cfg=None):
    """Minimize on the unit sphere within one diagonal-sign orthant.

    Projected damped least squares: every trial point is clamped back into
    the requested orthant and renormalized.  The result satisfies
    ||t||_2 = 1 to machine precision and matches the sign pattern exactly.
    """
    project = make_sign_projection(pattern)
    return levenberg_marquardt(model, t0, cfg, project=project)


def default_start(d):
    """Maximally mixed start: t_i = 1/sqrt(d) on the diagonal, 0 elsewhere."""
    t = np.zeros(d * d)
    t[:d] = 1.0 / np.sqrt(d)
    return t


SOLVERS = {
    "lm": levenberg_marquardt,
    "gd": gradient_descent,
    "nelder-mead": nelder_mead,
}


def run_solver(name, model, t0, cfg=None):
    try:
        solver = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None
    return solver(model, t0, cfg)
