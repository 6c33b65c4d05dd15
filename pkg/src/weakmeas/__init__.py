"""weakmeas: pre- and post-selected von Neumann measurements on a grid.

Subpackages by role:

- hilbert: finite-dimensional states, observables, generated unitaries
- pointer: meter wavefunctions, Fourier transforms, moments, quadrature
- vonneumann: relative states, conditional/unconditional data, sum rule
- weakvalues: local weak values, likelihood factors, error laws, pooling
- sampling: windowed superpositions of weak measurements, Bessel envelope
- classical: the classical Bayesian counterpart and its correspondence sweep
- scenarios: canned reproductions of the worked examples
- cli: `weakmeas run|list|dry-run`
"""

__version__ = "0.1.0"
