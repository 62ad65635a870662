"""Run configuration: a validated record read from flat key=value files.

One format only.  Lines are ``key = value``; blank lines and ``#``
comments are ignored; every key must be known and appear at most once.
``p``, ``q``, ``mu`` are required, everything else has a default.  The
record validates the standing assumptions itself and defers the solver
constraints to the solver config so each error names its key.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .core import ConfigurationError
from .core import Params
from .dynamics import SolverConfig

_INT_KEYS = frozenset({"n_grid", "M_trunc", "quad_order", "levels", "boundary_samples", "seed"})
_STR_KEYS = frozenset({"dtype", "mode", "csv_out", "report_out"})


@dataclass(frozen=True)
class RunConfig:
    """Everything a command-line run needs, in one flat record."""

    p: float
    q: float
    mu: float
    s0: float = 20.0
    s_end: float = 28.0
    ds: float = 0.05
    ds_out: float = 0.5
    y_max: float = 44.0
    n_grid: int = 512
    K: float = 4.0
    A: float = 20.0
    M_trunc: int = 4
    quad_order: int = 80
    horizon: float = 0.0  # absolute shooting horizon; 0 means "use s_end"
    levels: int = 90
    boundary_samples: int = 4
    seed: int = 20260822
    dtype: str = "float64"
    mode: str = "deviation"
    csv_out: str = ""
    report_out: str = ""

    def __post_init__(self) -> None:
        if not self.p > 1.0:
            raise ConfigurationError(f"p={self.p} violates the standing assumption p > 1")
        if not self.q > 1.0:
            raise ConfigurationError(f"q={self.q} violates the standing assumption q > 1")
        if not self.mu > 0.0:
            raise ConfigurationError(f"mu={self.mu} violates the standing assumption mu > 0")
        if self.horizon and self.horizon <= self.s0:
            raise ConfigurationError(
                f"horizon={self.horizon} must exceed s0={self.s0} (or be 0 for s_end)"
            )
        if self.levels < 1:
            raise ConfigurationError(f"levels={self.levels} must be at least 1")
        if self.boundary_samples < 2:
            raise ConfigurationError(
                f"boundary_samples={self.boundary_samples} must be at least 2"
            )
        # surface solver-field violations at load time, not first use; the
        # shooting horizon is the deepest end any subcommand will reach
        self.solver_config(end=self.shoot_end)

    @property
    def params(self) -> Params:
        return Params(self.p, self.q, self.mu)

    def solver_config(self, end: float | None = None) -> SolverConfig:
        """Solver view of this record; ``end`` overrides the final time."""
        return SolverConfig(
            s0=self.s0,
            s_end=self.s_end if end is None else end,
            ds=self.ds,
            y_max=self.y_max,
            n_grid=self.n_grid,
            K=self.K,
            A=self.A,
            M_trunc=self.M_trunc,
            quad_order=self.quad_order,
            mode=self.mode,
            dtype=self.dtype,
            ds_out=self.ds_out,
        )

    @property
    def shoot_end(self) -> float:
        return self.horizon if self.horizon else self.s_end


_KNOWN = {f.name for f in fields(RunConfig)}


def load_config(path: str) -> RunConfig:
    """Parse and validate a flat key=value file into a RunConfig."""
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected 'key = value', got {text!r}"
                )
            key, value = (part.strip() for part in text.split("=", 1))
            if key not in _KNOWN:
                raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in raw:
                raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value

    for required in ("p", "q", "mu"):
        if required not in raw:
            raise ConfigurationError(f"{path}: missing required key {required!r}")

    kwargs: dict[str, object] = {}
    for key, value in raw.items():
        if key in _STR_KEYS:
            kwargs[key] = value
            continue
        try:
            kwargs[key] = int(value) if key in _INT_KEYS else float(value)
        except ValueError:
            kind = "an integer" if key in _INT_KEYS else "a number"
            raise ConfigurationError(
                f"{path}: key {key!r} needs {kind}, got {value!r}"
            ) from None
    return RunConfig(**kwargs)
