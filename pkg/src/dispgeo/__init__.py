"""dispgeo: exact and numerical displacement geometry.

Word metrics and translation lengths in free groups, ping-pong
certificates, Cartan/Jordan projections on SL(n,R), and exact SL(n,Z)
computations (word-metric balls, bounded-depth roots, contortion
witnesses), plus a deterministic experiment harness.
"""

__version__ = "0.1.0"

from . import words, hyperbolic, matgeo, lattice  # noqa: F401
