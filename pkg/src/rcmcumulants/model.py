"""Model configuration shared by the exact engine and the simulator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

INTENSITIES = ("flat", "gaussian")


@dataclass(frozen=True)
class ModelConfig:
    """Random-connection model with kernel ``exp(-beta*|x-y|^2)``.

    ``beta="pi"`` selects the exact algebraic path (together with endpoints
    at the origin); a float ``beta`` always uses the floating-point path.
    ``intensity`` is ``"flat"`` (Lebesgue) or ``"gaussian"``, the density
    ``exp(-beta*|x|^2)``.  ``endpoints`` holds the positions of the fixed
    endpoints; when omitted every endpoint sits at the origin.
    """

    d: int = 1
    beta: object = "pi"
    intensity: str = "flat"
    endpoints: tuple | None = field(default=None)

    def __post_init__(self):
        if int(self.d) < 1:
            raise DomainError(f"dimension must be >= 1, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        beta = self.beta
        if isinstance(beta, str):
            if beta.strip().lower() != "pi":
                try:
                    beta = float(beta)
                except ValueError:
                    raise DomainError(f"beta must be 'pi' or a positive number, got {beta!r}") from None
            else:
                beta = "pi"
        if beta != "pi":
            beta = float(beta)
            if not beta > 0:
                raise DomainError(f"beta must be positive, got {beta}")
        object.__setattr__(self, "beta", beta)
        if self.intensity not in INTENSITIES:
            raise DomainError(f"intensity must be one of {INTENSITIES}, got {self.intensity!r}")
        if self.endpoints is not None:
            pts = tuple(tuple(float(c) for c in y) for y in self.endpoints)
            if any(len(y) != self.d for y in pts):
                raise DomainError(f"every endpoint position needs {self.d} coordinates")
            object.__setattr__(self, "endpoints", pts)

    @property
    def beta_value(self) -> float:
        return math.pi if self.beta == "pi" else float(self.beta)

    def endpoint_positions(self, m: int) -> tuple[tuple[float, ...], ...]:
        if self.endpoints is None:
            return tuple((0.0,) * self.d for _ in range(m))
        if len(self.endpoints) != m:
            raise DomainError(f"model lists {len(self.endpoints)} endpoint positions, graph has {m} endpoints")
        return self.endpoints

    def is_exact(self, m: int | None = None) -> bool:
        """True when the closed algebraic form applies."""
        if self.beta != "pi":
            return False
        if self.endpoints is None:
            return True
        return all(c == 0.0 for y in self.endpoints for c in y)

    def to_json(self) -> dict:
        return {"d": self.d, "beta": self.beta, "intensity": self.intensity,
                "endpoints": None if self.endpoints is None else [list(y) for y in self.endpoints]}

    @classmethod
    def from_json(cls, data: dict) -> "ModelConfig":
        eps = data.get("endpoints")
        return cls(d=data.get("d", 1), beta=data.get("beta", "pi"),
                   intensity=data.get("intensity", "flat"),
                   endpoints=None if eps is None else tuple(tuple(y) for y in eps))
