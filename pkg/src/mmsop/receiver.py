"""Optimal per-user receive vectors via the generalized Rayleigh quotient.

With the phase shifts fixed, the per-user objectives decouple and each
z_k is a positive affine map of w^H A_k w / w^H B_k w with B_k positive
definite, so the optimal w_k is the leading generalized eigenvector of
the pencil (A_k, B_k).
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet, SystemConfig
from .linalg import generalized_max_eigvec
from .metrics import ratio_form


def optimize_receivers(chs: ChannelSet, theta, cfg: SystemConfig):
    """Receive matrix W (K, Nt): row k is the optimal unit-norm w_k.

    Each row maximizes z_k (equivalently the SINR) for the given phase
    shifts. Rows are phase-normalized so traces are deterministic.
    """
    W = np.empty((cfg.K, cfg.Nt), dtype=complex)
    for k in range(cfg.K):
        form = ratio_form(chs, theta, cfg, k)
        if np.abs(form.A).max() < 1e-300:
            # Effective channel exactly zero: any w is optimal (SINR = 0).
            w = np.zeros(cfg.Nt, dtype=complex)
            w[0] = 1.0
        else:
            _, w = generalized_max_eigvec(form.A, form.B)
        W[k] = w
    return W
