"""Desk-scale verification of a constructive blowup mechanism for a coupled
reaction-diffusion pair.

Subpackages by capability:

- ``hermite``: weighted Hermite bases, quadrature, inner products.
- ``profile``: blowup profile constants, shapes, potentials, residuals.
- ``spectral``: eigenstructure of the linearization and projection tables.
- ``dynamics``: similarity-variable evolution, shrinking-set membership.
- ``shooting``: two-parameter trapping search and stability scan.
- ``identities``: closed-form identity verification suite.
- ``cli``: command-line entry points.
"""

__version__ = "0.1.0"
