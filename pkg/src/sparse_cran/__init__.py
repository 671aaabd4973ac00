"""Sparse-beamforming BS clustering for backhaul-limited cloud RANs.

Modules, bottom up: :mod:`topology` (layout), :mod:`channel` (gains and
fading), :mod:`clustering` (static clusters), :mod:`qcqp` (beamformer
subproblem), :mod:`wmmse` (the iterative engines), :mod:`simulator`
(proportional-fair campaigns), :mod:`reporting` and :mod:`cli`.
"""

__version__ = "0.1.0"
