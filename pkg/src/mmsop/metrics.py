"""SINR, capacities, and the closed-form secrecy outage probability.

The outage probability of user k at PLS coding rate R_k is

    P_k(R) = Gamma(Ne, z_k) / Gamma(Ne),
    z_k = phi_k / (1 + |Phi f_k|^2),     phi_k = sigma_e^2 (2^(Cm - R) - 1) / rho_k,

with Gamma(., .) the upper incomplete gamma function. z_k admits a second
evaluation route as a positive affine map of a generalized Rayleigh
quotient, z_k = c1 * (w^H A w / w^H B w) + c2, which is what the receiver
and phase optimizers work with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .channel import ChannelSet, SystemConfig, effective_channel, interference_matrix


class DomainError(ValueError):
    """Argument outside the mathematical domain of a special function."""


@dataclass(frozen=True)
class UserMetrics:
    """Per-user snapshot at a fixed (Phi, W) operating point."""

    sinr: float
    capacity: float  # main channel, bits/s/Hz
    phi_k: float     # outage threshold scale; may be negative
    z: float
    sop: float


@dataclass(frozen=True)
class RatioForm:
    """Constants of the affine-over-Rayleigh-quotient form of z_k.

    z_k = c1 * (w^H A w / w^H B w) + c2 with A rank-one PSD and B >= sigma_b^2 I.
    """

    c1: float
    c2: float
    A: np.ndarray
    B: np.ndarray


def upper_incomplete_gamma(eps, eta):
    """Upper incomplete gamma function Gamma(eps, eta) = int_eta^inf e^-z z^(eps-1) dz.

    For positive integer ``eps`` uses the exact finite-sum closed form
    Gamma(n, x) = (n-1)! e^-x sum_{m<n} x^m / m!, evaluated in log space for
    stability; otherwise falls back to the regularized routine in scipy.
    """
    if eta < 0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    if eps <= 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    return regularized_upper_gamma(eps, eta) * math.gamma(eps)


def regularized_upper_gamma(eps, eta):
    """Gamma(eps, eta) / Gamma(eps), in [0, 1]."""
    if eta < 0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    if eps <= 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    n = int(round(eps))
    if abs(eps - n) > 1e-12:
        return float(scipy.special.gammaincc(eps, eta))
    if eta == 0:
        return 1.0
    log_eta = math.log(eta)
    total = 0.0
    for m in range(n):
        total += math.exp(m * log_eta - eta - math.lgamma(m + 1))
    return min(total, 1.0)


def sinr(chs: ChannelSet, theta, W, cfg: SystemConfig, k):
    """SINR of user k at the BS for receive vector w_k = W[k]."""
    w = W[k]
    g = effective_channel(chs, theta, k)
    kt = interference_matrix(chs, theta, k)
    p = np.delete(cfg.rho, k)
    cross = kt.conj().T @ w
    denom = float(np.real(cross.conj() @ (p * cross))) + cfg.sigma2_b * float(
        np.real(w.conj() @ w)
    )
    num = cfg.rho[k] * abs(np.vdot(w, g)) ** 2
    return num / denom


def main_capacity(sinr_value):
    return math.log2(1.0 + sinr_value)


def outage_threshold(capacity, cfg: SystemConfig, k):
    """phi_k = sigma_e^2 (2^(Cm - R_k) - 1) / rho_k."""
    return cfg.sigma2_e * (2.0 ** (capacity - cfg.rate[k]) - 1.0) / cfg.rho[k]


def sop_from_z(z, ne):
    """Outage probability from the auxiliary value z; z <= 0 means certain outage."""
    if z <= 0:
        return 1.0
    return regularized_upper_gamma(ne, z)


def secrecy_outage_probability(capacity, cfg: SystemConfig, f_k, k):
    """Closed-form secrecy outage probability of user k.

    ``capacity`` is the achieved main-channel capacity; ``f_k`` the
    user-to-IRS channel column (only its norm enters).
    """
    phi_k = outage_threshold(capacity, cfg, k)
    if phi_k <= 0:
        return 1.0
    z = phi_k / (1.0 + float(np.linalg.norm(f_k)) ** 2)
    return sop_from_z(z, cfg.Ne)


def z_value(chs: ChannelSet, theta, W, cfg: SystemConfig, k):
    """Auxiliary objective z_k = phi_k / (1 + |Phi f_k|^2) at (Phi, W)."""
    s = sinr(chs, theta, W, cfg, k)
    phi_k = outage_threshold(main_capacity(s), cfg, k)
    return phi_k / (1.0 + float(np.linalg.norm(chs.F[:, k])) ** 2)


def ratio_form(chs: ChannelSet, theta, cfg: SystemConfig, k) -> RatioForm:
    """Build (c1, c2, A_k, B_k) of the Rayleigh-quotient route for user k."""
    fk_norm2 = float(np.linalg.norm(chs.F[:, k])) ** 2
    gain = 2.0 ** cfg.rate[k] * (1.0 + fk_norm2)
    c1 = cfg.sigma2_e / gain
    c2 = cfg.sigma2_e * (1.0 - 2.0 ** cfg.rate[k]) / (cfg.rho[k] * gain)
    g = effective_channel(chs, theta, k)
    a = np.outer(g, g.conj())
    kt = interference_matrix(chs, theta, k)
    p = np.delete(cfg.rho, k)
    b = (kt * p) @ kt.conj().T + cfg.sigma2_b * np.eye(cfg.Nt)
    return RatioForm(c1=c1, c2=c2, A=a, B=0.5 * (b + b.conj().T))


def user_metrics(chs: ChannelSet, theta, W, cfg: SystemConfig, k) -> UserMetrics:
    """Evaluate all per-user quantities at one operating point."""
    s = sinr(chs, theta, W, cfg, k)
    cm = main_capacity(s)
    phi_k = outage_threshold(cm, cfg, k)
    z = phi_k / (1.0 + float(np.linalg.norm(chs.F[:, k])) ** 2)
    return UserMetrics(sinr=s, capacity=cm, phi_k=phi_k, z=z, sop=sop_from_z(z, cfg.Ne))


def z_from_ratio(form: RatioForm, w):
    """z_k via the Rayleigh-quotient route (cross-check of z_value)."""
    num = float(np.real(w.conj() @ form.A @ w))
    den = float(np.real(w.conj() @ form.B @ w))
    return form.c1 * (num / den) + form.c2
