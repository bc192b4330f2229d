"""Gadget algebra and counting-to-observables reductions for Gibbs distributions.

Exact rationals cross the boundary as fractions.Fraction; reals are floats.
"""

try:
    from ._spinobs import *  # noqa: F401,F403  (installed layout)
    from ._spinobs import __doc__ as _core_doc  # noqa: F401
except ImportError:  # build-tree layout: extension on PYTHONPATH
    from _spinobs import *  # noqa: F401,F403
    from _spinobs import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
