"""Backend selection for the per-step kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise, or
when ``CFP_PURE_PYTHON`` is set, the pure-Python ``_pykernels`` are used.
"""

import os

from . import _pykernels
from ._pack import Packed, pack

_ckernels = None
if not os.environ.get("CFP_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

BACKEND = "cython" if _ckernels is not None else "python"
_active = BACKENDS[BACKEND]


def use(name):
    """Switch the active backend (``"cython"`` or ``"python"``)."""
    global BACKEND, _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    BACKEND, _active = name, BACKENDS[name]


def get(name=None):
    return _active if name is None else BACKENDS[name]


def continuous_step(x, adj, pk, set_gain, ineq_gain, dt, out):
    _active.continuous_step(x, adj, pk, set_gain, ineq_gain, dt, out)


def discrete_step(x, adj, h, alpha, beta, pk, out, y_out, grad_out):
    _active.discrete_step(x, adj, h, alpha, beta, pk, out, y_out, grad_out)


def continuous_steps(x, adj, pk, set_gain, ineq_gain, dt, count, bound):
    return _active.continuous_steps(x, adj, pk, set_gain, ineq_gain, dt, count, bound)


def discrete_steps(x, adj, h, alphas, betas, pk, bound):
    return _active.discrete_steps(x, adj, h, alphas, betas, pk, bound)


def consensus_term(x, adj, out):
    _active.consensus_term(x, adj, out)


__all__ = ["BACKEND", "BACKENDS", "Packed", "pack", "use", "get",
           "continuous_step", "discrete_step", "continuous_steps", "discrete_steps",
           "consensus_term"]
