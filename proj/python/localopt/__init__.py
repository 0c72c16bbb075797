"""Deterministic local-SGD simulator with server-side outer optimizers.

Thin Python surface over the compiled core: problem generators, the
round-level simulator, convergence-bound evaluators, stepsize tuners, and
run diagnostics.
"""

try:
    from ._localopt import *  # noqa: F401,F403  (installed package layout)
    from ._localopt import __doc__ as _core_doc
except ImportError:  # pragma: no cover - build-tree layout for smoke tests
    from _localopt import *  # noqa: F401,F403
    from _localopt import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
