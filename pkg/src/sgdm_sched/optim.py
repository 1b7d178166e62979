"""Mini-batch SHB and NSHB state machines driven by a schedule table.

Both algorithms keep a momentum buffer m (zero before the first step) and
update theta_{t+1} = theta_t - lr_t * m_t, where

    nshb:  m_t = beta * m_{t-1} + (1 - beta) * g_t
    shb:   m_t = beta * m_{t-1} + g_t

with g_t the mini-batch gradient.  shb run with lr (1-beta)*eta reproduces
nshb run with lr eta.  Mini-batches are sampled i.i.d. with replacement from
one fresh generator per (master seed, run index, step), so runs are
deterministic and streams can be shared across algorithms exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import schedules, theory

__all__ = [
    "ALGS",
    "NumericalDivergence",
    "OptimizerState",
    "RunTrace",
    "step",
    "batch_indices",
    "run",
]

ALGS = ("nshb", "shb")


class NumericalDivergence(RuntimeError):
    """A gradient or parameter coordinate became non-finite.

    Carries the offending step index and, when raised out of ``run``, the
    truncated trace collected up to that step.
    """

    def __init__(self, step_index: int, trace: "RunTrace | None" = None):
        super().__init__(f"non-finite value encountered at step {step_index}")
        self.step_index = step_index
        self.trace = trace


def _check_alg(alg: str) -> str:
    alg = str(alg).lower()
    if alg not in ALGS:
        raise ValueError(f"unknown algorithm {alg!r}; expected one of {ALGS}")
    return alg


@dataclass
class OptimizerState:
    theta: np.ndarray
    momentum: np.ndarray
    t: int
    beta: float
    alg: str

    @classmethod
    def initial(cls, theta0: np.ndarray, beta: float, alg: str) -> "OptimizerState":
        alg = _check_alg(alg)
        if not 0.0 <= beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {beta}")
        theta0 = np.array(theta0, dtype=np.float64, copy=True)
        if theta0.ndim != 1:
            raise ValueError("theta0 must be a 1-D vector")
        return cls(theta=theta0, momentum=np.zeros_like(theta0), t=0, beta=beta, alg=alg)


def step(state: OptimizerState, grad: np.ndarray, lr: float) -> OptimizerState:
    """One update: fold grad into the momentum buffer, move theta, bump t."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.theta.shape:
        raise ValueError(
            f"gradient dimension {grad.shape} does not match parameters {state.theta.shape}"
        )
    if lr < 0:
        raise ValueError(f"learning rate must be >= 0, got {lr}")
    if not np.all(np.isfinite(grad)):
        raise NumericalDivergence(state.t)
    # divergence is detected explicitly below; let inf/nan flow, not warn
    with np.errstate(over="ignore", invalid="ignore"):
        if state.alg == "nshb":
            m = state.beta * state.momentum + (1.0 - state.beta) * grad
        else:
            m = state.beta * state.momentum + grad
        theta = state.theta - lr * m
    if not np.all(np.isfinite(theta)):
        raise NumericalDivergence(state.t)
    return OptimizerState(theta=theta, momentum=m, t=state.t + 1, beta=state.beta, alg=state.alg)


def batch_indices(master_seed: int, run_index: int, t: int, b: int, n: int) -> np.ndarray:
    """I.i.d.-with-replacement index sample of size b for step t.

    A counter-based stream: a fresh generator keyed by
    (master_seed, run_index, t) per step.
    """
    rng = np.random.default_rng((int(master_seed), int(run_index), int(t)))
    return rng.integers(0, n, size=int(b))


@dataclass
class RunTrace:
    """Per-recorded-step metrics of one run plus the post-run summary.

    Row k holds step t[k] quantities evaluated BEFORE the step-t[k] update:
    the exact objective, exact squared full-gradient norm, and Lyapunov value
    (using the step-(t-1) coefficient and momentum buffer).  The final_*
    fields hold the same quantities at the post-run iterate theta_T.
    """

    t: np.ndarray
    lr: np.ndarray
    batch: np.ndarray
    f: np.ndarray
    grad_norm_sq: np.ndarray
    lyapunov: np.ndarray
    final_f: float
    final_grad_norm_sq: float
    final_lyapunov: float
    seed: int
    run_index: int
    alg: str
    beta: float
    diverged: bool = False
    diverged_at: int | None = None
    validation_waived: bool = False
    theta: np.ndarray | None = None
    theta_final: np.ndarray | None = None

    @property
    def min_grad_norm_sq(self) -> float:
        return float(np.min(self.grad_norm_sq))

    @property
    def rows(self) -> int:
        return int(self.t.shape[0])


def run(
    alg: str,
    beta: float,
    table: schedules.ScheduleTable,
    problem,
    seed: int,
    *,
    run_index: int = 0,
    theta0: np.ndarray | None = None,
    theta0_seed: int = 0,
    record_every: int = 1,
    waive_admissibility: bool = False,
    record_theta: bool = False,
) -> RunTrace:
    """Execute all T schedule steps, recording exact diagnostics.

    Unless waived, the schedule must pass the admissibility check for
    (beta, problem.L, alg).  theta0 defaults to a deterministic seeded
    standard-normal draw.  Divergence aborts the run: the raised
    NumericalDivergence carries the truncated trace with the step recorded.
    """
    alg = _check_alg(alg)
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if not waive_admissibility:
        report = schedules.validate_admissible(table, beta, problem.L, alg)
        if not report.admissible:
            raise schedules.InadmissibleSchedule(
                f"max lr {report.lr_max:.6g} is not below the admissible bound "
                f"{report.lr_bound:.6g} for {alg} (beta={beta}, L={problem.L:.6g}, "
                f"c={report.c:.6g}); waive explicitly to run anyway"
            )
    if theta0 is None:
        theta0 = np.random.default_rng((int(theta0_seed),)).standard_normal(problem.d)
    state = OptimizerState.initial(theta0, beta, alg)
    one_minus_beta = 1.0 - beta
    # Lyapunov bookkeeping always uses the nshb parameterization: eta = lr
    # for nshb, eta = lr/(1-beta) and momentum scaled by (1-beta) for shb.
    eta = table.lr if alg == "nshb" else table.lr / one_minus_beta
    A = theory.lyapunov_coefficient_array(eta, problem.L, beta)

    rec_t: list[int] = []
    rec_f: list[float] = []
    rec_gns: list[float] = []
    rec_lyap: list[float] = []
    rec_theta: list[np.ndarray] = []
    diverged = False
    diverged_at: int | None = None

    def observe(t: int, st: OptimizerState) -> None:
        f_t = float(problem.loss(st.theta))
        g = problem.full_gradient(st.theta)
        m_eq = st.momentum if alg == "nshb" else one_minus_beta * st.momentum
        A_prev = float(A[t - 1]) if t > 0 else 0.0
        rec_t.append(t)
        rec_f.append(f_t)
        rec_gns.append(float(np.dot(g, g)))
        rec_lyap.append(theory.lyapunov_value(f_t, float(np.dot(m_eq, m_eq)), A_prev, t))
        if record_theta:
            rec_theta.append(st.theta.copy())

    for t in range(table.T):
        if t % record_every == 0:
            observe(t, state)
        problem.check_iterate(state.theta)
        idx = batch_indices(seed, run_index, t, int(table.batch[t]), problem.n)
        grad = problem.minibatch_gradient(state.theta, idx)
        try:
            state = step(state, grad, float(table.lr[t]))
        except NumericalDivergence:
            diverged = True
            diverged_at = t
            break

    t_final = state.t
    f_final = float(problem.loss(state.theta))
    g_final = problem.full_gradient(state.theta)
    m_eq = state.momentum if alg == "nshb" else one_minus_beta * state.momentum
    A_prev = float(A[t_final - 1]) if t_final > 0 else 0.0
    lyap_final = theory.lyapunov_value(
        f_final, float(np.dot(m_eq, m_eq)), A_prev, t_final
    )

    rec = np.asarray(rec_t, dtype=np.int64)
    trace = RunTrace(
        t=rec,
        lr=np.asarray(table.lr[rec], dtype=np.float64),
        batch=np.asarray(table.batch[rec], dtype=np.int64),
        f=np.asarray(rec_f),
        grad_norm_sq=np.asarray(rec_gns),
        lyapunov=np.asarray(rec_lyap),
        final_f=f_final,
        final_grad_norm_sq=float(np.dot(g_final, g_final)),
        final_lyapunov=lyap_final,
        seed=int(seed),
        run_index=int(run_index),
        alg=alg,
        beta=float(beta),
        diverged=diverged,
        diverged_at=diverged_at,
        validation_waived=bool(waive_admissibility),
        theta=np.asarray(rec_theta) if record_theta else None,
        theta_final=state.theta.copy() if record_theta else None,
    )
    if diverged:
        raise NumericalDivergence(diverged_at, trace)
    return trace
