"""Numerical laboratory for endpoint L^1 estimates of Riesz potentials and Hodge systems.

Submodules: ``grid`` (periodic fields and spectral calculus), ``lorentz``,
``heat``, ``besov``, ``loops``, ``cocancel``, ``hodge``, ``constructions``,
``fitting`` and ``experiments``; ``python -m endpoint_l1`` is the CLI.
"""

__version__ = "0.1.0"
