"""Solver and run configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class SolverConfig:
    N: int = 1024
    L: float = 40.0
    tol: float = 1e-11
    max_newton: int = 50
    backtrack: float = 0.5
    min_step: float = 1.0 / 1024
    dense_limit: int = 4096
    krylov_tol: float = 1e-13
    continuation_step: float = 0.05
    continuation_floor: float = 1e-4
    output_dir: str = "runs"
    ladder: tuple[tuple[int, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "ladder", tuple((int(n), float(l)) for n, l in self.ladder))

    def validate(self) -> list[str]:
        """All problems with this configuration (empty when valid)."""
        errs = []
        if self.N % 2 or self.N < 8:
            errs.append("N must be even and >= 8")
        if not self.L > 0:
            errs.append("L must be positive")
        if not self.tol > 0:
            errs.append("tol must be positive")
        if self.max_newton < 1:
            errs.append("max_newton must be >= 1")
        if not 0 < self.backtrack < 1:
            errs.append("backtrack must lie in (0, 1)")
        if not self.continuation_step > 0 or not self.continuation_floor > 0:
            errs.append("continuation step and floor must be positive")
        ns = [n for n, _ in self.ladder]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            errs.append("ladder must be strictly increasing in N")
        for n, l in self.ladder:
            if n % 2 or n < 8 or not l > 0:
                errs.append(f"invalid ladder rung ({n}, {l})")
        return errs

    def with_overrides(self, **kw) -> "SolverConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ladder"] = [list(r) for r in self.ladder]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "SolverConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))
