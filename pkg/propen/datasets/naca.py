"""
NACA 4-digit airfoil geometry and a synthetic aerodynamic property of its parameters.

A flattened airfoil is the row-major flattening of its (n_points, 2) coordinates, ordered from
the trailing edge along the upper surface to the leading edge, then along the lower surface
back towards the trailing edge. Both surfaces use the same n_points / 2 + 1 cosine-spaced chord
stations. The leading and trailing edge points are stored once: the lower surface holds the
interior stations only, and the contour closes on the first point.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import torch
from torch import Tensor

from propen.modules.dense_mlp import DTYPE

from .default_configs import (
    CAMBER_POSITION_RANGE,
    MAX_CAMBER_RANGE,
    RANDOM_AIRFOIL_RANGES,
    THICKNESS_RANGE,
)
from .design_set import DesignSet

OPEN_EDGE_QUARTIC_COEFFICIENT = -0.1015
CLOSED_EDGE_QUARTIC_COEFFICIENT = -0.1036
CAMBER_POSITION_GRID_SIZE = 161


@dataclass(frozen=True)
class NacaParams:
    """
    Parameters of a NACA 4-digit airfoil, as chord fractions: NACA 2412 is
    m_camber=0.02, p_pos=0.4, t_thick=0.12.
    With closed_trailing_edge, the quartic thickness coefficient is -0.1036 so that both
    surfaces meet at the trailing edge; otherwise the classic -0.1015 is used.
    """

    m_camber: float
    p_pos: float
    t_thick: float
    n_points: int = 200
    closed_trailing_edge: bool = True

    def __post_init__(self):
        _check_range("m_camber", self.m_camber, MAX_CAMBER_RANGE)
        _check_range("p_pos", self.p_pos, CAMBER_POSITION_RANGE)
        if self.t_thick != 0:
            _check_range("t_thick", self.t_thick, THICKNESS_RANGE)
        if self.n_points < 4 or self.n_points % 2 != 0:
            raise ValueError(f"n_points must be an even integer >= 4, got {self.n_points}.")


def _check_range(name: str, value: float, bounds: Tuple[float, float]):
    if not bounds[0] <= value <= bounds[1]:
        raise ValueError(f"{name} must be in [{bounds[0]}, {bounds[1]}], got {value}.")


def chord_stations(n_stations: int) -> Tensor:
    """Cosine-spaced stations from the leading edge (0) to the trailing edge (1)."""
    angles = torch.linspace(0, math.pi, n_stations, dtype=DTYPE)
    return (1 - angles.cos()) / 2


def naca_thickness(
    x: Tensor, t_thick: float, closed_trailing_edge: bool = True
) -> Tensor:
    """Half-thickness y_t at chord stations x."""
    x = torch.as_tensor(x, dtype=DTYPE)
    quartic = (
        CLOSED_EDGE_QUARTIC_COEFFICIENT
        if closed_trailing_edge
        else OPEN_EDGE_QUARTIC_COEFFICIENT
    )
    return (
        5
        * t_thick
        * (0.2969 * x.sqrt() - 0.1260 * x - 0.3516 * x**2 + 0.2843 * x**3 + quartic * x**4)
    )


def naca_camber(
    x: Tensor, m_camber: float, p_pos: Union[float, Tensor]
) -> Tuple[Tensor, Tensor]:
    """
    Mean camber line y_c and its slope dy_c/dx at chord stations x.
    The line is made of two parabolas joining at x = p_pos. A column of camber positions
    broadcasts against a row of stations.
    """
    x = torch.as_tensor(x, dtype=DTYPE)
    front = x < p_pos
    camber = torch.where(
        front,
        m_camber / p_pos**2 * (2 * p_pos * x - x**2),
        m_camber / (1 - p_pos) ** 2 * ((1 - 2 * p_pos) + 2 * p_pos * x - x**2),
    )
    slope = torch.where(
        front,
        2 * m_camber / p_pos**2 * (p_pos - x),
        2 * m_camber / (1 - p_pos) ** 2 * (p_pos - x),
    )
    return camber, slope


def naca_coordinates(params: NacaParams) -> Tensor:
    """
    Airfoil coordinates of shape (n_points, 2), from the trailing edge over the upper surface
    to the leading edge, then over the interior stations of the lower surface.
    With an open trailing edge, the edge is represented by its upper point.
    """
    x = chord_stations(params.n_points // 2 + 1)
    half_thickness = naca_thickness(x, params.t_thick, params.closed_trailing_edge)
    camber, slope = naca_camber(x, params.m_camber, params.p_pos)
    theta = slope.atan()

    upper = torch.stack(
        [x - half_thickness * theta.sin(), camber + half_thickness * theta.cos()], dim=1
    )
    lower = torch.stack(
        [x + half_thickness * theta.sin(), camber - half_thickness * theta.cos()], dim=1
    )
    return torch.cat([upper.flip(0), lower[1:-1]])


def generate_naca(params: NacaParams) -> Tensor:
    """Flattened airfoil coordinates, of length 2 * n_points."""
    return naca_coordinates(params).flatten()


def recover_naca_params(
    flattened_airfoil: Tensor, closed_trailing_edge: bool = True
) -> Tuple[float, float, float]:
    """
    Least-squares estimate of (m_camber, p_pos, t_thick) from flattened coordinates laid out
    like generate_naca's output.
    Stations, camber and half-thickness are read from the mid-points and half-differences of
    facing upper/lower points at the interior stations. The thickness is a linear least-squares fit, and the camber
    is fitted linearly in m_camber for each camber position of a grid, keeping the best one.
    Estimates are clipped to the NACA parameter ranges.
    Returns:
        the estimated (m_camber, p_pos, t_thick)
    """
    coordinates = torch.as_tensor(flattened_airfoil, dtype=DTYPE).reshape(-1, 2)
    n_interior = len(coordinates) // 2 - 1
    upper = coordinates[1 : n_interior + 1].flip(0)
    lower = coordinates[n_interior + 2 :]

    x = ((upper[:, 0] + lower[:, 0]) / 2).clamp(0, 1)
    camber = (upper[:, 1] + lower[:, 1]) / 2
    half_thickness = torch.sqrt(
        ((upper[:, 1] - lower[:, 1]) / 2) ** 2 + ((lower[:, 0] - upper[:, 0]) / 2) ** 2
    )

    thickness_basis = naca_thickness(x, 1.0, closed_trailing_edge)
    t_thick = float(
        (half_thickness @ thickness_basis) / (thickness_basis @ thickness_basis)
    )

    candidate_positions = torch.linspace(
        *CAMBER_POSITION_RANGE, CAMBER_POSITION_GRID_SIZE, dtype=DTYPE
    )[:, None]
    camber_bases, _ = naca_camber(x[None, :], 1.0, candidate_positions)
    candidate_cambers = (
        (camber_bases @ camber) / (camber_bases**2).sum(dim=1)
    ).clamp(min=0)
    residuals = ((camber - candidate_cambers[:, None] * camber_bases) ** 2).sum(dim=1)
    best = int(residuals.argmin())
    m_camber = float(candidate_cambers[best])
    p_pos = float(candidate_positions[best])

    return (
        min(max(m_camber, MAX_CAMBER_RANGE[0]), MAX_CAMBER_RANGE[1]),
        p_pos,
        min(max(t_thick, THICKNESS_RANGE[0]), THICKNESS_RANGE[1]),
    )


def synthetic_lift_to_drag(
    m_camber: float, p_pos: float, t_thick: float, angle_of_attack: float = 4.0
) -> float:
    """
    Smooth stand-in for a lift-to-drag ratio, with an interior optimum.
    Lift follows the thin-airfoil slope 2 pi per radian, shifted by camber (more so for forward
    camber); drag is a parabolic polar whose profile term grows away from 9% thickness and
    40% camber position.
    Args:
        angle_of_attack: in degrees
    """
    lift = 2 * math.pi * (
        math.radians(angle_of_attack) + 2 * m_camber * (1 + 0.5 * (0.4 - p_pos))
    )
    profile_drag = 0.005 + 0.05 * (t_thick - 0.09) ** 2 + 0.004 * (p_pos - 0.4) ** 2
    return lift / (profile_drag + 0.01 * lift**2)


class SyntheticAirfoilProperty:
    """
    Property oracle on flattened airfoils: recover (M, P, T) by least squares, then evaluate
    synthetic_lift_to_drag.
    """

    def __init__(self, angle_of_attack: float = 4.0, closed_trailing_edge: bool = True):
        self.angle_of_attack = angle_of_attack
        self.closed_trailing_edge = closed_trailing_edge

    def __call__(self, airfoils: Tensor) -> Tensor:
        airfoils = torch.as_tensor(airfoils, dtype=DTYPE)
        batch = airfoils.unsqueeze(0) if airfoils.ndim == 1 else airfoils
        values = torch.tensor(
            [
                synthetic_lift_to_drag(
                    *recover_naca_params(airfoil, self.closed_trailing_edge),
                    angle_of_attack=self.angle_of_attack,
                )
                for airfoil in batch
            ],
            dtype=DTYPE,
        )
        return values[0] if airfoils.ndim == 1 else values


def random_airfoils(
    n_airfoils: int, seed: int, n_points: int = 200
) -> Tuple[DesignSet, Tensor]:
    """
    Sample NACA parameters uniformly in the default random ranges and generate the airfoils.
    Args:
        n_airfoils: number of airfoils
        seed: seed of the parameter sampling
        n_points: coordinate pairs per airfoil
    Returns:
        a DesignSet of flattened airfoils (properties unset), and the sampled parameters as a
            tensor of shape (n_airfoils, 3) with columns (M, P, T)
    """
    generator = torch.Generator().manual_seed(seed)
    lows = torch.tensor([bounds[0] for bounds in RANDOM_AIRFOIL_RANGES], dtype=DTYPE)
    highs = torch.tensor([bounds[1] for bounds in RANDOM_AIRFOIL_RANGES], dtype=DTYPE)
    parameters = lows + (highs - lows) * torch.rand(
        n_airfoils, 3, generator=generator, dtype=DTYPE
    )
    designs = torch.stack(
        [
            generate_naca(NacaParams(*row.tolist(), n_points=n_points))
            for row in parameters
        ]
    ) if n_airfoils > 0 else torch.empty(0, 2 * n_points, dtype=DTYPE)
    return DesignSet(designs), parameters
