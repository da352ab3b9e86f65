"""Exact shuffle-algebra toolkit.

Builds the distinguished generators of the positive shuffle algebra two
independent ways and mechanically verifies the identities relating them:
products, coproducts, the bilinear pairing, lattice-triangle relations, and
the character and symmetric-function comparisons.
"""

__version__ = "0.1.0"
