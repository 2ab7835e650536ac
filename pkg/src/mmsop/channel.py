"""System configuration and random channel generation.

All links are sampled i.i.d. circularly-symmetric complex normal CN(0, 1)
(unit-variance Rayleigh fading, no pathloss). Sampling is deterministic
given a seed; independent trials use spawned child streams of a single
``numpy.random.SeedSequence`` so sweeps are reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions, powers, noise variances, and coding rates.

    ``rho`` (linear watts) and ``rate`` (bit/s/Hz) are per-user vectors of
    length K. Noise variances are linear.
    """

    K: int
    Nt: int
    Ns: int
    Ne: int
    rho: np.ndarray
    sigma2_b: float = 1.0
    sigma2_e: float = 1.0
    rate: np.ndarray = None
    seed: int = 0

    def __post_init__(self):
        for name in ("K", "Nt", "Ns", "Ne"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        object.__setattr__(self, "rho", np.atleast_1d(np.asarray(self.rho, dtype=float)))
        rate = self.rate if self.rate is not None else np.full(self.K, 2.0)
        object.__setattr__(self, "rate", np.atleast_1d(np.asarray(rate, dtype=float)))
        if self.rho.shape != (self.K,) or self.rate.shape != (self.K,):
            raise ValueError("rho and rate must have length K")
        if np.any(self.rho <= 0) or self.sigma2_b <= 0 or self.sigma2_e <= 0:
            raise ValueError("powers and noise variances must be positive")
        if np.any(self.rate <= 0):
            raise ValueError("coding rates must be positive")

    @classmethod
    def from_snr_db(cls, K, Nt, Ns, Ne, snr_db, rate=2.0, seed=0):
        """Equal-power config with SNR (dB) = 10 log10(rho / sigma2_b)."""
        rho = 10.0 ** (snr_db / 10.0)
        return cls(
            K=K, Nt=Nt, Ns=Ns, Ne=Ne,
            rho=np.full(K, rho),
            sigma2_b=1.0, sigma2_e=1.0,
            rate=np.full(K, float(rate)),
            seed=seed,
        )


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all known channels.

    H : (Nt, K) user-to-BS columns h_k
    G : (Nt, Ns) IRS-to-BS matrix
    F : (Ns, K) user-to-IRS columns f_k
    """

    H: np.ndarray
    G: np.ndarray
    F: np.ndarray

    def h(self, k):
        return self.H[:, k]

    def f(self, k):
        return self.F[:, k]


@dataclass(frozen=True)
class EveChannelSample:
    """One draw of the unknown wiretap channels, entries i.i.d. CN(0, 1)."""

    h_e: np.ndarray  # (Ne, K)
    G_e: np.ndarray  # (Ne, Ns)


def complex_normal(rng, shape):
    """I.i.d. CN(0, 1) array: real and imaginary parts N(0, 1/2)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_channels(cfg: SystemConfig, rng) -> ChannelSet:
    """Draw one realization of the known channels H, G, F."""
    return ChannelSet(
        H=complex_normal(rng, (cfg.Nt, cfg.K)),
        G=complex_normal(rng, (cfg.Nt, cfg.Ns)),
        F=complex_normal(rng, (cfg.Ns, cfg.K)),
    )


def sample_eve_channels(cfg: SystemConfig, rng) -> EveChannelSample:
    """Draw one realization of the eavesdropper channels."""
    return EveChannelSample(
        h_e=complex_normal(rng, (cfg.Ne, cfg.K)),
        G_e=complex_normal(rng, (cfg.Ne, cfg.Ns)),
    )


def trial_rng(seed, trial):
    """Independent generator for one trial of a sweep.

    Spawning is keyed on (seed, trial) so any single trial can be
    reproduced without running the others.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def effective_channel(chs: ChannelSet, theta, k):
    """Composite BS channel of user k: h_k + G diag(e^{j theta}) f_k."""
    _check_user(chs, k)
    phase = np.exp(1j * np.asarray(theta))
    return chs.H[:, k] + chs.G @ (phase * chs.F[:, k])


def interference_matrix(chs: ChannelSet, theta, k):
    """(Nt, K-1) matrix of composite channels of all users except k.

    Columns are ordered by ascending user index; for K = 1 the result has
    zero columns.
    """
    _check_user(chs, k)
    phase = np.exp(1j * np.asarray(theta))
    eff = chs.H + chs.G @ (phase[:, None] * chs.F)
    return np.delete(eff, k, axis=1)


def _check_user(chs, k):
    if not 0 <= k < chs.H.shape[1]:
        raise IndexError(f"user index {k} out of range for K={chs.H.shape[1]}")
