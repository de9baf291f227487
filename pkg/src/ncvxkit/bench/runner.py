"""Problem/solver registry and the suite runner.

Each problem supplies an instance generator plus named solvers. A run is a
pure function of (config, seed): instances are regenerated per task from the
seed, so results do not depend on worker scheduling. Wall time is measured
around the solver call only.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core import RandomSource
from ..em import (
    GmmState,
    MixRegState,
    amlvm_run,
    em_run,
    make_gmm_hard_steps,
    make_gmm_steps,
    make_mixreg_steps,
)
from ..exceptions import ConfigError
from ..lowrank import ammc_run, gen_arm_instance, gen_completion_instance, svp_run
from ..phase import dist_mod_phase, gen_phase_instance, gsam_run, wf_run
from ..robust import amrr_run, gen_corrupted_instance, robust_gpgd_run
from ..sparse import gen_sparse_instance, iht_run
from ..tensor import decompose, tensor_from_components
from .config import ExperimentConfig

JOBS_ENV_VAR = "NCVXKIT_JOBS"


@dataclass
class ResultRow:
    problem: str
    solver: str
    seed: int
    n: object = None
    p: object = None
    s: object = None
    r: object = None
    k: object = None
    iterations: int = 0
    final_error: float = math.nan
    wall_seconds: float = 0.0
    converged: bool = False

    def as_record(self) -> dict:
        return {
            "problem": self.problem,
            "solver": self.solver,
            "seed": self.seed,
            "n": self.n,
            "p": self.p,
            "s": self.s,
            "r": self.r,
            "k": self.k,
            "iterations": self.iterations,
            "final_error": self.final_error,
            "wall_seconds": self.wall_seconds,
            "converged": self.converged,
        }


@dataclass
class SolverRun:
    final_error: float
    iterations: int
    converged: bool
    trace_rows: list = field(default_factory=list)  # (iteration, objective, error, elapsed)


def _trace_rows(trace):
    it, obj, err, el = trace.as_arrays()
    return list(zip(it.tolist(), obj.tolist(), err.tolist(), el.tolist()))


def _min_over_swap(a0, a1, b0, b1):
    direct = max(np.linalg.norm(a0 - b0), np.linalg.norm(a1 - b1))
    swapped = max(np.linalg.norm(a0 - b1), np.linalg.norm(a1 - b0))
    return float(min(direct, swapped))


# -- problem implementations -------------------------------------------------


def _sparse_gen(size, rand):
    return gen_sparse_instance(
        n=int(size["n"]), p=int(size["p"]), s=int(size["s"]),
        sigma=float(size.get("sigma", 0.0)),
        design=size.get("design", "gaussian"), rand=rand,
    )


def _sparse_iht(inst, options, rand):
    res = iht_run(
        inst.X, inst.y,
        k=int(options.get("k", inst.s)),
        eta=float(options.get("eta", 1.0)),
        T=int(options.get("T", 500)),
        theta_star=inst.theta_star,
    )
    err = float(np.linalg.norm(res.theta - inst.theta_star))
    return SolverRun(err, len(res.trace), res.converged, _trace_rows(res.trace))


def _arm_gen(size, rand):
    m, n, r = int(size["m"]), int(size["n"]), int(size["r"])
    k = int(size.get("k", 6 * n * r))
    return gen_arm_instance(m, n, r, k, rand)


def _arm_svp(inst, options, rand):
    amap, y, X_star = inst
    eta = options.get("eta")
    res = svp_run(amap, y, q=int(options.get("q", np.linalg.matrix_rank(X_star))),
                  eta=float(eta) if eta is not None else None,
                  T=int(options.get("T", 300)), X_star=X_star, rand=rand)
    err = float(np.linalg.norm(res.X - X_star) / np.linalg.norm(X_star))
    return SolverRun(err, len(res.trace), res.converged, _trace_rows(res.trace))


def _completion_gen(size, rand):
    return gen_completion_instance(
        m=int(size["m"]), n=int(size["n"]), r=int(size["r"]),
        p_sample=float(size["p_sample"]),
        mu_cap=float(size.get("mu_cap", 3.0)), rand=rand,
    )


def _completion_ammc(inst, options, rand):
    res = ammc_run(inst, r=int(options.get("r", inst.rank)),
                   T=int(options.get("T", 25)),
                   fresh_splits=bool(options.get("fresh_splits", False)),
                   rand=rand)
    err = float(np.linalg.norm(res.product() - inst.A_star)
                / np.linalg.norm(inst.A_star))
    obs = inst.omega
    fit = res.product()[obs[:, 0], obs[:, 1]] - inst.observed_values()
    resid = float(np.linalg.norm(fit) / max(np.linalg.norm(inst.observed_values()), 1e-300))
    return SolverRun(err, len(res.trace), resid <= 1e-8, _trace_rows(res.trace))


def _robust_gen(size, rand):
    n = int(size["n"])
    return gen_corrupted_instance(
        n=n, p=int(size["p"]), k=int(size["k"]),
        sigma=float(size.get("sigma", 0.0)),
        magnitude=float(size.get("magnitude", 100.0)), rand=rand,
    )


def _robust_amrr(inst, options, rand):
    res = amrr_run(
        inst.X, inst.y, k=int(options.get("k", inst.k)),
        mode=options.get("mode", "fully_corrective"),
        T=int(options.get("T", 30)),
        eta=options.get("eta"),
        switch_t=options.get("switch_t"),
        theta_star=inst.theta_star,
    )
    err = float(np.linalg.norm(res.theta - inst.theta_star))
    return SolverRun(err, len(res.trace), res.converged, _trace_rows(res.trace))


def _robust_gpgd(inst, options, rand):
    res = robust_gpgd_run(
        inst.X, inst.y, k=int(options.get("k", max(inst.k, 1))),
        eta=float(options.get("eta", 0.5)),
        T=int(options.get("T", 100)),
        theta_star=inst.theta_star,
    )
    err = float(np.linalg.norm(res.theta - inst.theta_star))
    return SolverRun(err, len(res.trace), True, _trace_rows(res.trace))


def _phase_gen(size, rand):
    return gen_phase_instance(n=int(size["n"]), p=int(size["p"]), rand=rand)


def _phase_gsam(inst, options, rand):
    res = gsam_run(inst, eps=float(options.get("eps", 1e-7)), rand=rand)
    err = dist_mod_phase(res.theta, inst.theta_star)
    return SolverRun(err, len(res.trace), True, _trace_rows(res.trace))


def _phase_wf(inst, options, rand):
    eta = options.get("eta")
    res = wf_run(inst, eta=float(eta) if eta is not None else None,
                 T=int(options.get("T", 500)))
    err = dist_mod_phase(res.theta, inst.theta_star)
    return SolverRun(err, len(res.trace), True, _trace_rows(res.trace))


def _tensor_gen(size, rand):
    p, r = int(size["p"]), int(size["r"])
    G = rand.split("components").normal(p, r)
    Q, _ = np.linalg.qr(G)
    U = Q[:, :r]
    return U, tensor_from_components(U)


def _tensor_decompose(inst, options, rand):
    U, T = inst
    W = decompose(
        T, U.shape[1], rand,
        eta_max=float(options.get("eta_max", 0.02)),
        epsilon=float(options.get("epsilon", 0.9)),
        restarts=int(options.get("restarts", 5)),
    )
    # greedy assignment on overlaps (components are near-orthonormal)
    M = np.abs(U.T @ W)
    r = M.shape[0]
    overlap = []
    free = set(range(r))
    for i in np.argsort(-M.max(axis=1)):
        j = max(free, key=lambda c: M[i, c])
        overlap.append(M[i, j])
        free.remove(j)
    err = float(1.0 - min(overlap))
    return SolverRun(err, r, err <= 0.01, [])


def _gmm_gen(size, rand):
    n, p = int(size["n"]), int(size["p"])
    sep = float(size.get("separation", 5.0))
    mu0 = np.zeros(p)
    mu0[0] = sep
    mu1 = -mu0
    labels = rand.split("labels").integers(0, 2, n)
    Y = np.where(labels[:, None] == 0, mu0, mu1) + rand.split("noise").normal(n, p)
    return Y, mu0, mu1


def _gmm_init(mu0, mu1, rand):
    off = rand.split("init")
    return GmmState(mu0 + 0.4 * off.normal(mu0.shape[0]),
                    mu1 + 0.4 * off.normal(mu1.shape[0]))


def _gmm_em(inst, options, rand):
    Y, mu0, mu1 = inst
    e, m, ll = make_gmm_steps(Y)
    res = em_run(e, m, _gmm_init(mu0, mu1, rand), T=int(options.get("T", 30)),
                 log_likelihood=ll)
    final = res.final
    err = _min_over_swap(final.mu0, final.mu1, mu0, mu1)
    rows = [(i + 1, -ll_val, math.nan, 0.0)
            for i, ll_val in enumerate(res.log_likelihoods[1:])]
    return SolverRun(err, len(res.states) - 1, True, rows)


def _gmm_amlvm(inst, options, rand):
    Y, mu0, mu1 = inst
    e, m, obj = make_gmm_hard_steps(Y)
    res = amlvm_run(e, m, _gmm_init(mu0, mu1, rand), T=int(options.get("T", 30)),
                    joint_objective=obj)
    final = res.final
    err = _min_over_swap(final.mu0, final.mu1, mu0, mu1)
    rows = [(i + 1, -ll_val, math.nan, 0.0)
            for i, ll_val in enumerate(res.log_likelihoods[1:])]
    return SolverRun(err, len(res.states) - 1, True, rows)


def _mixreg_gen(size, rand):
    n, p = int(size["n"]), int(size["p"])
    sigma = float(size.get("sigma", 0.05))
    theta = rand.split("model").normal(p)
    X = rand.split("design").normal(n, p)
    signs = np.where(rand.split("labels").integers(0, 2, n) == 0, 1.0, -1.0)
    y = signs * (X @ theta) + sigma * rand.split("noise").normal(n)
    return X, y, theta


def _mixreg_em(inst, options, rand):
    X, y, theta = inst
    e, m, ll = make_mixreg_steps(X, y)
    off = rand.split("init")
    init = MixRegState(theta + 0.2 * off.normal(theta.shape[0]),
                       -theta + 0.2 * off.normal(theta.shape[0]))
    res = em_run(e, m, init, T=int(options.get("T", 40)), log_likelihood=ll)
    final = res.final
    err = _min_over_swap(final.theta0, final.theta1, theta, -theta)
    rows = [(i + 1, -ll_val, math.nan, 0.0)
            for i, ll_val in enumerate(res.log_likelihoods[1:])]
    return SolverRun(err, len(res.states) - 1, True, rows)


def _size_fields(problem, size):
    return {key: size.get(key) for key in ("n", "p", "s", "r", "k")}


PROBLEMS = {
    "sparse": {"gen": _sparse_gen, "solvers": {"iht": _sparse_iht}},
    "arm": {"gen": _arm_gen, "solvers": {"svp": _arm_svp}},
    "completion": {"gen": _completion_gen, "solvers": {"ammc": _completion_ammc}},
    "robust": {"gen": _robust_gen,
               "solvers": {"amrr": _robust_amrr, "robust_gpgd": _robust_gpgd}},
    "phase": {"gen": _phase_gen, "solvers": {"gsam": _phase_gsam, "wf": _phase_wf}},
    "tensor": {"gen": _tensor_gen, "solvers": {"decompose": _tensor_decompose}},
    "gmm": {"gen": _gmm_gen, "solvers": {"em": _gmm_em, "amlvm": _gmm_amlvm}},
    "mixreg": {"gen": _mixreg_gen, "solvers": {"em": _mixreg_em}},
}


def list_solvers(problem: str):
    if problem not in PROBLEMS:
        raise ConfigError(f"unknown problem {problem!r}; options: {sorted(PROBLEMS)}")
    return sorted(PROBLEMS[problem]["solvers"])


def validate_config(config: ExperimentConfig):
    if config.problem not in PROBLEMS:
        raise ConfigError(
            f"unknown problem {config.problem!r}; options: {sorted(PROBLEMS)}"
        )
    known = PROBLEMS[config.problem]["solvers"]
    for spec in config.solvers:
        if spec.name not in known:
            raise ConfigError(
                f"unknown solver {spec.name!r} for problem {config.problem!r}; "
                f"options: {sorted(known)}"
            )


def _run_task(config: ExperimentConfig, solver_name: str, options: dict, seed: int):
    problem = PROBLEMS[config.problem]
    inst = problem["gen"](config.size, RandomSource(seed))
    solver_rand = RandomSource(seed).split(solver_name)
    start = time.perf_counter()
    run = problem["solvers"][solver_name](inst, options, solver_rand)
    wall = time.perf_counter() - start
    row = ResultRow(
        problem=config.problem,
        solver=solver_name,
        seed=seed,
        iterations=run.iterations,
        final_error=run.final_error,
        wall_seconds=wall,
        converged=run.converged,
        **_size_fields(config.problem, config.size),
    )
    return row, run.trace_rows


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_suite(config: ExperimentConfig, jobs: int | None = None):
    """Run every (solver, seed) pair of the experiment.

    Returns (rows, traces) with rows sorted by (solver, seed) and traces
    keyed by (solver, seed). Deterministic given the config; the worker pool
    only affects wall-clock columns.
    """
    validate_config(config)
    if jobs is None:
        jobs = default_jobs()
    tasks = [(spec.name, spec.options, seed)
             for spec in config.solvers for seed in config.seeds]
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_task, config, name, options, seed)
                       for name, options, seed in tasks]
            for (name, _, seed), fut in zip(tasks, futures):
                row, trace = fut.result()
                results.append(((name, seed), row, trace))
    else:
        for name, options, seed in tasks:
            row, trace = _run_task(config, name, options, seed)
            results.append(((name, seed), row, trace))
    results.sort(key=lambda item: item[0])
    rows = [row for _, row, _ in results]
    traces = {key: trace for key, _, trace in results}
    return rows, traces
