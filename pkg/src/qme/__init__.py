"""Quantum master equations at desk scale.

Redfield, GAME and the surrounding family of completely positive
approximations (RWA, PRWA, coarse-grained Redfield, DCG, PERLind, ULE),
their time-dependent-coefficient forms, a Floquet extension, an exactly
solvable three-level emitter and a dipolar Heisenberg chain test bed.
"""

__version__ = "0.1.0"
