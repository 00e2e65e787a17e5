"""Rectangular windows in the s-plane."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import errors


@dataclass(frozen=True)
class GridWindow:
    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float
    nx: int = 256
    ny: int = 256

    def __post_init__(self):
        if not (self.sigma_min < self.sigma_max and self.t_min < self.t_max):
            raise errors.InvalidSpec("window must satisfy sigma_min < sigma_max and t_min < t_max")
        if self.nx < 64 or self.ny < 64:
            raise errors.InvalidSpec("grid resolution must be at least 64 x 64")

    @classmethod
    def parse(cls, text: str, grid: str | None = None) -> "GridWindow":
        """``"s0,s1,t0,t1"`` plus optional ``"nx,ny"``."""
        vals = [float(x) for x in text.split(",")]
        if len(vals) != 4:
            raise ValueError("window needs four comma-separated numbers")
        nx, ny = (256, 256) if grid is None else (int(x) for x in grid.split(","))
        return cls(*vals, nx=nx, ny=ny)

    @property
    def box(self) -> tuple:
        return (self.sigma_min, self.sigma_max, self.t_min, self.t_max)

    @property
    def width(self) -> float:
        return self.sigma_max - self.sigma_min

    @property
    def height(self) -> float:
        return self.t_max - self.t_min

    @property
    def hx(self) -> float:
        return self.width / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.height / (self.ny - 1)

    def mesh(self) -> np.ndarray:
        x = np.linspace(self.sigma_min, self.sigma_max, self.nx)
        y = np.linspace(self.t_min, self.t_max, self.ny)
        return x[None, :] + 1j * y[:, None]

    def contains(self, s, pad: float = 0.0) -> np.ndarray:
        s = np.asarray(s)
        return ((s.real >= self.sigma_min - pad) & (s.real <= self.sigma_max + pad)
                & (s.imag >= self.t_min - pad) & (s.imag <= self.t_max + pad))

    def to_dict(self) -> dict:
        return {"sigma_min": self.sigma_min, "sigma_max": self.sigma_max,
                "t_min": self.t_min, "t_max": self.t_max, "nx": self.nx, "ny": self.ny}


def as_box(window) -> tuple:
    if isinstance(window, GridWindow):
        return window.box
    box = tuple(float(v) for v in window)
    if len(box) != 4 or not (box[0] < box[1] and box[2] < box[3]):
        raise errors.InvalidSpec(f"invalid box {window!r}")
    return box
