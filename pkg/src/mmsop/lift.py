"""Lifted (SDR) representation of the phase-shift subproblem.

The composite channel term G Phi f_i is rewritten as E_i q with
E_i = G diag(f_i) and q the vector of unit-modulus reflection
coefficients. Homogenizing with an auxiliary unit-modulus scalar l turns
every |w_k^H (h_i + E_i q)|^2 into a pure quadratic form
q_hat^H M_ik q_hat + v_ik over q_hat = [q; l], and lifting Q = q_hat q_hat^H
makes the per-user objectives ratios of affine functions of Q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, SystemConfig
from .linalg import herm_eig
from .metrics import ratio_form


class NotPSD(ValueError):
    """Lifted matrix violates the PSD tolerance."""


RANK_ONE_RATIO = 1e-6  # lambda_2 / lambda_1 threshold for exact recovery


@dataclass(frozen=True)
class PhaseShift:
    """Unit-modulus IRS configuration given by Ns angles in [0, 2pi)."""

    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "theta", np.mod(np.asarray(self.theta, dtype=float), 2.0 * np.pi)
        )

    @property
    def vec(self):
        """Reflection coefficients e^{j theta}, unit modulus by construction."""
        return np.exp(1j * self.theta)

    @property
    def matrix(self):
        return np.diag(self.vec)


@dataclass(frozen=True)
class LiftedProblem:
    """All data of the lifted max-min ratio problem.

    M[i][k] : (Ns+1, Ns+1) Hermitian quadratic-form blocks (zero corner)
    v[i, k] : |w_k^H h_i|^2
    t[k]    : sigma_b^2 ||w_k||^2
    c1, c2  : per-user affine constants tying the ratio back to z_k
    """

    dim: int
    M: list
    v: np.ndarray
    t: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    rho: np.ndarray


def build_lift(chs: ChannelSet, W, cfg: SystemConfig) -> LiftedProblem:
    """Assemble the lifted blocks for fixed receivers W (rows w_k)."""
    if W.shape != (cfg.K, cfg.Nt):
        raise ValueError(f"W must be (K, Nt) = ({cfg.K}, {cfg.Nt}), got {W.shape}")
    n = cfg.Ns + 1
    M = [[None] * cfg.K for _ in range(cfg.K)]
    v = np.empty((cfg.K, cfg.K))
    c1 = np.empty(cfg.K)
    c2 = np.empty(cfg.K)
    for k in range(cfg.K):
        w = W[k]
        form = ratio_form(chs, np.zeros(cfg.Ns), cfg, k)
        c1[k], c2[k] = form.c1, form.c2
        for i in range(cfg.K):
            e_i = chs.G * chs.F[:, i]  # G diag(f_i), (Nt, Ns)
            u = e_i.conj().T @ w       # E_i^H w_k
            s = np.vdot(w, chs.H[:, i])  # w_k^H h_i
            block = np.zeros((n, n), dtype=complex)
            block[:-1, :-1] = np.outer(u, u.conj())
            block[:-1, -1] = s * u
            block[-1, :-1] = np.conj(s * u)
            M[i][k] = block
            v[i, k] = abs(s) ** 2
    t = cfg.sigma2_b * np.real(np.einsum("ki,ki->k", W.conj(), W))
    return LiftedProblem(dim=n, M=M, v=v, t=t, c1=c1, c2=c2, rho=cfg.rho.copy())


def eval_affine_forms(lp: LiftedProblem, Q, k):
    """Numerator/denominator (N_k, D_k) of the lifted ratio at Q.

    N_k / D_k equals z_k whenever Q = q_hat q_hat^H for a feasible q_hat.
    """
    den = lp.t[k]
    for i in range(len(lp.rho)):
        if i == k:
            continue
        den += lp.rho[i] * (np.real(np.trace(lp.M[i][k] @ Q)) + lp.v[i, k])
    num = lp.c1[k] * (np.real(np.trace(lp.M[k][k] @ Q)) + lp.v[k, k]) + lp.c2[k] * den
    return float(num), float(den)


def min_ratio(lp: LiftedProblem, Q):
    """min_k N_k(Q) / D_k(Q), the SDR objective value at Q."""
    vals = []
    for k in range(len(lp.rho)):
        num, den = eval_affine_forms(lp, Q, k)
        vals.append(num / den)
    return min(vals)


def unit_modulus_constraints(dim):
    """Selector matrices E_n with trace(E_n Q) = Q_nn, n = 1..dim."""
    mats = []
    for n in range(dim):
        e = np.zeros((dim, dim))
        e[n, n] = 1.0
        mats.append(e)
    return mats


def dehomogenize(q_hat):
    """Angles of the first Ns entries relative to the homogenizing entry."""
    theta = np.angle(q_hat[:-1]) - np.angle(q_hat[-1])
    return PhaseShift(theta)


def candidate_objectives(chs: ChannelSet, W, cfg: SystemConfig, lp: LiftedProblem,
                         phases, objective="mm-sop"):
    """min_k z_k (or min_k SINR_k) for a batch of candidate phase vectors.

    ``phases`` has shape (n_candidates, Ns) holding unit-modulus
    coefficients e^{j theta}.
    """
    out = np.empty(len(phases))
    wc = W.conj()
    for c, p in enumerate(phases):
        eff = chs.H + chs.G @ (p[:, None] * chs.F)  # (Nt, K)
        cross = np.abs(wc @ eff) ** 2               # cross[k, i] = |w_k^H eff_i|^2
        best = np.inf
        for k in range(cfg.K):
            inter = cross[k] @ cfg.rho - cfg.rho[k] * cross[k, k]
            s = cfg.rho[k] * cross[k, k] / (inter + cfg.sigma2_b)
            if objective == "mm-sinr":
                val = s
            else:
                val = lp.c1[k] * s / cfg.rho[k] + lp.c2[k]
            best = min(best, val)
        out[c] = best
    return out


def recover_phase(q_lifted, lp: LiftedProblem, chs: ChannelSet, W, cfg: SystemConfig,
                  rng, i_g=1000, objective="mm-sop") -> PhaseShift:
    """Recover a feasible unit-modulus phase vector from a lifted solution.

    Rank-one solutions are de-homogenized directly from the leading
    eigenvector. Otherwise candidates are drawn from CN(0, Q), each
    de-homogenized and projected to unit modulus, and the best candidate
    under the exact objective is returned (the projected leading
    eigenvector is always included as a candidate).
    """
    res = herm_eig(q_lifted)
    lam = res.eigenvalues
    if lam[0] < -1e-6 * max(lam[-1], 1.0):
        raise NotPSD(f"smallest eigenvalue {lam[0]:.3e} violates PSD tolerance")
    lead = res.eigenvectors[:, -1]
    if lam.shape[0] == 1 or lam[-2] <= RANK_ONE_RATIO * lam[-1]:
        return dehomogenize(lead)

    half = res.eigenvectors * np.sqrt(np.clip(lam, 0.0, None))
    z = (rng.standard_normal((lp.dim, i_g)) + 1j * rng.standard_normal((lp.dim, i_g))) / np.sqrt(2.0)
    samples = (half @ z).T
    candidates = np.vstack([lead[None, :], samples])
    # De-homogenize and project every candidate to unit modulus.
    rel = candidates[:, :-1] * np.exp(-1j * np.angle(candidates[:, -1]))[:, None]
    mags = np.abs(rel)
    phases = np.where(mags > 0, rel / np.where(mags > 0, mags, 1.0), 1.0)
    scores = candidate_objectives(chs, W, cfg, lp, phases, objective=objective)
    return PhaseShift(np.angle(phases[int(np.argmax(scores))]))
