"""Plate geometry, material and discretization parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class PlateConfig:
    """Parameters of the partially hinged plate Omega = (0, pi) x (-ell, ell).

    Defaults are the standard bridge-deck configuration used throughout the
    benchmark tables: sigma = 0.2, ell = pi/150, density bounds 0.5 / 1.5
    (denser material has triple density), truncation 30 modes per parity.
    """

    ell: float = math.pi / 150
    sigma: float = 0.2
    alpha: float = 0.5
    beta: float = 1.5
    n_modes: int = 30

    def __post_init__(self) -> None:
        if not self.ell > 0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if not 0 < self.sigma < 0.5:
            raise ValueError(f"sigma must lie in (0, 1/2), got {self.sigma}")
        if not 0 < self.alpha < 1 < self.beta:
            raise ValueError(
                f"density bounds must satisfy 0 < alpha < 1 < beta, got "
                f"alpha={self.alpha}, beta={self.beta}"
            )
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")

    @property
    def area(self) -> float:
        """|Omega| = 2 pi ell."""
        return 2.0 * math.pi * self.ell

    def with_(self, **kwargs) -> "PlateConfig":
        return replace(self, **kwargs)
