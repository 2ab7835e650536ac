"""Generalized Dinkelbach iteration for the relaxed max-min ratio problem.

Each outer step solves the epigraph SDP

    max_{Q in S} min_k { N_k(Q) - lambda D_k(Q) }

with S the elliptope (unit diagonal, PSD), then updates
lambda = min_k N_k(Q*) / D_k(Q*) and the merit F accordingly, stopping
once F <= tau. The lambda sequence is non-decreasing and the iteration
converges linearly to the SDR optimum of min_k N_k / D_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .lift import LiftedProblem, eval_affine_forms

DEFAULT_TAU = 1e-5
DEFAULT_MAX_OUTER = 50


class MaxOuterIterations(RuntimeError):
    """Outer loop hit its iteration cap; best state attached."""

    def __init__(self, message, state, q_best=None):
        super().__init__(message)
        self.state = state
        self.q_best = q_best


class MalformedLift(ValueError):
    """A lifted denominator fell below its structural lower bound."""


@dataclass
class DinkelbachState:
    lam: float = 0.0
    F: float = np.inf
    iteration: int = 0
    history: list = field(default_factory=list)  # (lam, F) per outer iteration


def epigraph_instance(lp: LiftedProblem, lam, objective="mm-sop") -> sdp.SdpInstance:
    """Assemble the P10 data (C_k, a_k) for the current lambda.

    For the outage objective, N_k - lam D_k collects into
    C_k = c1k M_kk + (c2k - lam) sum_{i != k} rho_i M_ik; the SINR baseline
    uses rho_k M_kk as numerator and drops the affine constants.
    """
    K = len(lp.rho)
    mats, offs = [], []
    for k in range(K):
        if objective == "mm-sinr":
            num_coef, den_coef = lp.rho[k], -lam
        else:
            num_coef, den_coef = lp.c1[k], lp.c2[k] - lam
        c = num_coef * lp.M[k][k]
        a = num_coef * lp.v[k, k] + den_coef * lp.t[k]
        for i in range(K):
            if i == k:
                continue
            c = c + den_coef * lp.rho[i] * lp.M[i][k]
            a += den_coef * lp.rho[i] * lp.v[i, k]
        mats.append(0.5 * (c + c.conj().T))
        offs.append(a)
    return sdp.SdpInstance(dim=lp.dim, C=mats, a=np.array(offs))


def _ratios(lp, Q, objective):
    nums, dens = [], []
    for k in range(len(lp.rho)):
        num, den = eval_affine_forms(lp, Q, k)
        if den < lp.t[k] / 2.0:
            raise MalformedLift(f"denominator {den:.3e} below t/2 for user {k}")
        if objective == "mm-sinr":
            num = lp.rho[k] * (np.real(np.trace(lp.M[k][k] @ Q)) + lp.v[k, k])
        nums.append(num)
        dens.append(den)
    return np.array(nums), np.array(dens)


def dinkelbach_solve(lp: LiftedProblem, tau=DEFAULT_TAU, max_outer=DEFAULT_MAX_OUTER,
                     objective="mm-sop", sdp_tol=sdp.DEFAULT_TOL,
                     sdp_max_iter=sdp.DEFAULT_MAX_ITER, trace_sink=None):
    """Run the outer iteration; returns (Q*, state).

    ``trace_sink``, when given, receives one ``(lam, F)`` pair per outer
    iteration.
    """
    state = DinkelbachState()
    q_star = None
    for it in range(1, max_outer + 1):
        inst = epigraph_instance(lp, state.lam, objective=objective)
        sol = sdp.solve(inst, tol=sdp_tol, max_iter=sdp_max_iter)
        nums, dens = _ratios(lp, sol.Q, objective)
        state.F = float(np.min(nums - state.lam * dens))
        new_lam = float(np.min(nums / dens))
        # The ratio at the new iterate can dip below the incumbent by the
        # inner solver's accuracy; keep the best feasible (lambda, Q) pair.
        if it == 1 or new_lam > state.lam:
            state.lam = new_lam
            q_star = sol.Q
        state.iteration = it
        state.history.append((state.lam, state.F))
        if trace_sink is not None:
            trace_sink((state.lam, state.F))
        if state.F <= tau:
            return q_star, state
    raise MaxOuterIterations(
        f"no convergence within {max_outer} outer iterations", state, q_best=q_star
    )
