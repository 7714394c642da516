"""Run-wide numerical tolerances.

Every tolerance used by the library is read from the active :class:`Config`.
The active config lives in a context variable, so overrides are scoped::

    with evpos.config.override(tol_pos=1e-8):
        ...

Precedence for the command line tool is flags > ``EVPOS_*`` environment
variables > built-in defaults (see :func:`from_environment`).
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import os
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

ENV_PREFIX = "EVPOS_"


@dataclass(frozen=True)
class Config:
    """Relative tolerance factors and scan defaults.

    ``tol_zero`` and ``tol_pos`` are multiplied by ``1 + ||x||_sup`` of the
    vector under test. ``tol_cluster`` and ``tol_proj`` are multiplied by
    ``1 + ||A||`` and ``tol_rank`` by ``max(1, ||A||)``.
    """

    tol_zero: float = 1e-12
    tol_pos: float = 1e-9
    tol_cluster: float = 1e-8
    tol_proj: float = 1e-8
    tol_rank: float = 1e-10
    tol_asym: float = 1e-8
    scan_delta0: float = 1.0
    scan_factor: float = 0.5
    scan_steps: int = 40
    t_max: Optional[float] = None
    grid_points: int = 64
    n_probes: int = 16
    probe_seed: int = 20160101

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_ENV_FIELDS = {
    "TOL_POS": ("tol_pos", float),
    "TOL_ZERO": ("tol_zero", float),
    "TMAX": ("t_max", float),
    "SCAN_STEPS": ("scan_steps", int),
}

_active: contextvars.ContextVar[Config] = contextvars.ContextVar(
    "evpos_config", default=Config()
)


def get() -> Config:
    """Return the active configuration."""
    return _active.get()


@contextlib.contextmanager
def override(**changes) -> Iterator[Config]:
    """Temporarily replace fields of the active configuration."""
    cfg = dataclasses.replace(_active.get(), **changes)
    token = _active.set(cfg)
    try:
        yield cfg
    finally:
        _active.reset(token)


@contextlib.contextmanager
def use(cfg: Config) -> Iterator[Config]:
    token = _active.set(cfg)
    try:
        yield cfg
    finally:
        _active.reset(token)


def from_environment(
    environ: Optional[Mapping[str, str]] = None, base: Optional[Config] = None
) -> Config:
    """Build a config from ``EVPOS_*`` variables on top of ``base``."""
    environ = os.environ if environ is None else environ
    base = Config() if base is None else base
    changes = {}
    for suffix, (field, cast) in _ENV_FIELDS.items():
        raw = environ.get(ENV_PREFIX + suffix)
        if raw is None or raw.strip() == "":
            continue
        try:
            changes[field] = cast(raw)
        except ValueError as exc:
            raise ValueError(f"{ENV_PREFIX}{suffix}={raw!r} is not a valid {cast.__name__}") from exc
    return dataclasses.replace(base, **changes)
