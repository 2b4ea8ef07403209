"""Scale-free humanoid capability metrics.

Power factor: total stall torque over height*weight, optionally split into
upper/lower body. Cross-scale torque estimation maps joint torques between
bodies of different height and mass. The relative-deflection ratio quantifies
how structural stiffness demands shrink with characteristic length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import ValidationError

GRAVITY = 9.81

GROUPS = ("upper", "lower")


@dataclass(frozen=True)
class InventoryEntry:
    """One actuated degree of freedom and its stall torque [N*m]."""

    name: str
    tau_max: float
    group: str = "upper"
    end_effector: bool = False

    def __post_init__(self):
        if not math.isfinite(self.tau_max) or self.tau_max < 0.0:
            raise ValidationError(f"tau_max must be >= 0 for {self.name!r}")
        if self.group not in GROUPS:
            raise ValidationError(
                f"group must be one of {GROUPS}, got {self.group!r} for {self.name!r}"
            )


@dataclass(frozen=True)
class TorqueInventory:
    """Stall torques of every joint plus overall height [m] and mass [kg]."""

    entries: tuple
    height: float
    mass: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for field_name in ("height", "mass"):
            v = float(getattr(self, field_name))
            if not math.isfinite(v) or v <= 0.0:
                raise ValidationError(f"{field_name} must be > 0, got {v}")
            object.__setattr__(self, field_name, v)

    def select(
        self, group: Optional[str] = None, include_end_effectors: bool = False
    ) -> tuple:
        if group is not None and group not in GROUPS:
            raise ValidationError(f"group must be one of {GROUPS}, got {group!r}")
        return tuple(
            e
            for e in self.entries
            if (group is None or e.group == group)
            and (include_end_effectors or not e.end_effector)
        )


def torque_sum(
    inv: TorqueInventory,
    group: Optional[str] = None,
    include_end_effectors: bool = False,
) -> float:
    """Exactly rounded sum of |tau_max| over the selected entries."""
    return math.fsum(
        abs(e.tau_max) for e in inv.select(group, include_end_effectors)
    )


def power_factor(
    inv: TorqueInventory,
    group: Optional[str] = None,
    include_end_effectors: bool = False,
) -> float:
    """Total stall torque normalized by height * mass * g (dimensionless).

    End-effector joints are excluded by default. Uses an exactly rounded sum,
    so the value is independent of entry order and additive over the
    upper/lower split.
    """
    return torque_sum(inv, group, include_end_effectors) / (
        inv.height * inv.mass * GRAVITY
    )


@dataclass(frozen=True)
class PowerFactorBreakdown:
    total: float
    upper: float
    lower: float
    torque_total: float


def power_factor_split(
    inv: TorqueInventory, include_end_effectors: bool = False
) -> PowerFactorBreakdown:
    return PowerFactorBreakdown(
        total=power_factor(inv, None, include_end_effectors),
        upper=power_factor(inv, "upper", include_end_effectors),
        lower=power_factor(inv, "lower", include_end_effectors),
        torque_total=torque_sum(inv, None, include_end_effectors),
    )


def scale_torque(
    height_robot: float,
    mass_robot: float,
    height_human: float,
    mass_human: float,
    tau_human,
):
    """Map a joint torque across body scales:
    tau_robot = (h_r*m_r)/(h_h*m_h) * tau_human. Accepts scalar or array tau."""
    for name, v in (
        ("height_robot", height_robot),
        ("mass_robot", mass_robot),
        ("height_human", height_human),
        ("mass_human", mass_human),
    ):
        if not math.isfinite(v) or v <= 0.0:
            raise ValidationError(f"{name} must be > 0, got {v}")
    factor = (height_robot * mass_robot) / (height_human * mass_human)
    tau = np.asarray(tau_human, dtype=np.float64)
    if not np.all(np.isfinite(tau)):
        raise ValidationError("tau_human must be finite")
    out = factor * tau
    if np.isscalar(tau_human):
        return float(out)
    return out


def relative_deflection(load: float, modulus: float, length: float) -> float:
    """Tip deflection per unit length of a cantilever, up to the 1/3 constant:
    P / (3*E*L^2)."""
    for name, v in (("load", load), ("modulus", modulus), ("length", length)):
        if not math.isfinite(v) or v <= 0.0:
            raise ValidationError(f"{name} must be > 0, got {v}")
    return load / (3.0 * modulus * length * length)
