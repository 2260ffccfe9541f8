"""Numeric tolerances shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

ENV_TOLERANCE = "CFP_NUMERIC_TOLERANCE"


@dataclass(frozen=True)
class NumericConfig:
    """Tolerance record.

    ``balance`` and ``spectral`` feed the graph diagnostics, ``convergence``
    is the residual/consensus threshold used by the harness, ``membership``
    decides set/inequality membership and ``divergence`` is the state norm
    that aborts a run.
    """

    balance: float = 1e-12
    spectral: float = 1e-8
    null_residual: float = 1e-10
    convergence: float = 1e-6
    membership: float = 1e-12
    lyapunov: float = 1e-10
    divergence: float = 1e9


def default_config() -> NumericConfig:
    """Defaults, with ``CFP_NUMERIC_TOLERANCE`` overriding the convergence tolerance.

    The variable holds either a bare float or comma-separated ``field=value``
    pairs, e.g. ``convergence=1e-8,balance=1e-10``.
    """
    cfg = NumericConfig()
    raw = os.environ.get(ENV_TOLERANCE, "").strip()
    if not raw:
        return cfg
    if "=" not in raw:
        return replace(cfg, convergence=float(raw))
    fields = {}
    for item in raw.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in NumericConfig.__dataclass_fields__:
            raise ValueError(f"{ENV_TOLERANCE}: unknown tolerance field {key!r}")
        fields[key] = float(value)
    return replace(cfg, **fields)
