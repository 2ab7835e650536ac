"""Min-max secrecy outage probability optimization for IRS-assisted uplinks.

Core pieces:

* closed-form secrecy outage evaluation (:mod:`mmsop.metrics`),
* per-user receive vectors via the generalized Rayleigh quotient
  (:mod:`mmsop.receiver`),
* IRS phase shifts via semidefinite relaxation, a generalized Dinkelbach
  iteration, and Gaussian randomization (:mod:`mmsop.lift`,
  :mod:`mmsop.sdp`, :mod:`mmsop.dinkelbach`),
* the alternating-optimization driver and the max-min-SINR baseline
  (:mod:`mmsop.ao`),
* a Monte Carlo validation and sweep harness (:mod:`mmsop.experiments`),
  exposed over HTTP (:mod:`mmsop.service`) with a thin CLI client
  (:mod:`mmsop.cli`).
"""

__version__ = "0.1.0"
