"""Information-backflow diagnostics for fractional and non-Markovian models.

Library layout:

* mittag: Mittag-Leffler envelope E_alpha(-x) (compiled kernels when built)
* functional: the positive-increment backflow functional N_I
* quantum: fractional two-state revival observable and its backflow N_qe
* classical: three-state generator, four memory propagators, Caputo oracle
* measures: Shannon entropy, KL to stationarity, entropy overshoot
* sweeps: phase diagrams over (alpha, omega/lambda), the simplex, and alpha
* serialize: CSV/JSON/SVG output, byte-stable for deterministic runs
* cli: the `backflow` command with one subcommand per diagnostic
"""
from .mittag import kernel_lane, ml_envelope, ml_neg

__version__ = "0.1.0"

__all__ = ["ml_neg", "ml_envelope", "kernel_lane", "__version__"]
