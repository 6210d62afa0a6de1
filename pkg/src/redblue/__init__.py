"""Two-type preferential attachment with community structure.

Simulator for the red/blue growth process, the deterministic drift field
it tracks, stationary-point and stability analysis, and a reproducible
experiment harness.
"""

__version__ = "0.1.0"
