"""Error-rate analysis and ML-assisted power optimization for a two-phase
superposition-coded relay link over Nakagami fading.

Submodules: specfun (numeric kernels), model (domain types), bep (closed-form
engine), sim (Monte Carlo link simulator), optim (grid search), surrogate
(dataset/training/prediction), sweeps + plotting + cli (report surface).
"""

__version__ = "0.1.0"
