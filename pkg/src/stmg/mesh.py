"""Uniform space-time grids and the time-major DOF ordering."""

from __future__ import annotations

import dataclasses
import enum

import numpy as np


class CoarseningDirection(enum.Enum):
    SpaceX = "x"
    TimeT = "t"
    FullST = "f"

    @classmethod
    def parse(cls, token: str) -> "CoarseningDirection":
        for d in cls:
            if token.strip().lower() in (d.value, d.name.lower()):
                return d
        raise ValueError(f"unknown coarsening direction {token!r}")


def _frozen_array(a, n: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(arr > 0):
        raise ValueError(f"{name} must be strictly positive")
    arr.flags.writeable = False
    return arr


@dataclasses.dataclass(frozen=True)
class SpaceTimeGrid:
    """One level of the space-time mesh.

    ``k`` and ``c`` are per-element conductivity and volumetric heat capacity.
    They are ``None`` on a freshly coarsened grid until materials are filled in.
    """

    L: float
    t_T: float
    N_el: int
    N_t: int
    k: np.ndarray | None = None
    c: np.ndarray | None = None

    def __post_init__(self):
        if self.N_el < 1 or self.N_t < 1:
            raise ValueError("N_el and N_t must be >= 1")
        if not (self.L > 0 and self.t_T > 0):
            raise ValueError("L and t_T must be positive")
        if (self.k is None) != (self.c is None):
            raise ValueError("k and c must be set together")
        if self.k is not None:
            object.__setattr__(self, "k", _frozen_array(self.k, self.N_el, "k"))
            object.__setattr__(self, "c", _frozen_array(self.c, self.N_el, "c"))

    @property
    def dx(self) -> float:
        return self.L / self.N_el

    @property
    def dt(self) -> float:
        return self.t_T / self.N_t

    @property
    def n_nodes(self) -> int:
        return self.N_el + 1

    @property
    def n_times(self) -> int:
        return self.N_t + 1

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.n_times

    @property
    def has_materials(self) -> bool:
        return self.k is not None

    def element_centres(self) -> np.ndarray:
        return (np.arange(self.N_el) + 0.5) * self.dx

    def time_points(self) -> np.ndarray:
        return np.arange(self.N_t + 1) * self.dt

    def with_materials(self, k, c) -> "SpaceTimeGrid":
        return dataclasses.replace(self, k=k, c=c)

    def require_materials(self):
        if not self.has_materials:
            raise ValueError("grid has no material arrays set")

    def flatten(self, n, i):
        """Flat time-major index of time level ``n`` and node ``i``."""
        return np.asarray(n) * self.n_nodes + np.asarray(i)

    def unflatten(self, idx):
        return divmod(np.asarray(idx), self.n_nodes)

    def as_field(self, u: np.ndarray) -> np.ndarray:
        """View a flat DOF vector as a ``(N_t+1, N_el+1)`` array."""
        return np.asarray(u).reshape(self.n_times, self.n_nodes)


def build_fine_grid(L, t_T, N_el, N_t, k, c) -> SpaceTimeGrid:
    if int(N_el) != N_el or int(N_t) != N_t:
        raise ValueError("N_el and N_t must be integers")
    return SpaceTimeGrid(float(L), float(t_T), int(N_el), int(N_t), k, c)


def can_coarsen(g: SpaceTimeGrid, direction: CoarseningDirection) -> bool:
    even_x = g.N_el % 2 == 0
    even_t = g.N_t % 2 == 0
    if direction is CoarseningDirection.SpaceX:
        return even_x
    if direction is CoarseningDirection.TimeT:
        return even_t
    return even_x and even_t


def coarsen_grid(g: SpaceTimeGrid, direction: CoarseningDirection) -> SpaceTimeGrid:
    """Halve the element count, the step count, or both. Materials are left unset."""
    if not can_coarsen(g, direction):
        raise ValueError(
            f"cannot apply {direction.name} coarsening to N_el={g.N_el}, N_t={g.N_t}"
        )
    n_el, n_t = g.N_el, g.N_t
    if direction in (CoarseningDirection.SpaceX, CoarseningDirection.FullST):
        n_el //= 2
    if direction in (CoarseningDirection.TimeT, CoarseningDirection.FullST):
        n_t //= 2
    return SpaceTimeGrid(g.L, g.t_T, n_el, n_t)
