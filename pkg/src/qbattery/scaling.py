"""
Finite-size scaling exponents and hardware coherence-time mapping.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "HardwareRates",
    "InsufficientDataError",
    "Regime",
    "ScalingFit",
    "UnphysicalCoherenceError",
    "classify_regime",
    "fit_power_law",
    "hardware_map",
]

MAD_TO_SIGMA = 1.4826


class InsufficientDataError(ValueError):
    pass


class DomainError(ValueError):
    pass


class UnphysicalCoherenceError(ValueError):
    pass


class Regime(str, enum.Enum):
    TUNED_DECAY = "TunedDecay"
    INTERMEDIATE = "Intermediate"
    DEPHASING_DOMINATED = "DephasingDominated"


@dataclass(frozen=True)
class ScalingFit:
    """Power law ``value = exp(intercept) * N**alpha`` fitted in log-log space."""

    alpha: float
    intercept: float
    r_squared: float
    n_points_used: int
    n_outliers_removed: int
    observable: str = ""
    regime: str = ""
    used: tuple = field(default=(), repr=False)
    removed: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "observable": self.observable,
            "regime": self.regime,
            "alpha": self.alpha,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_points_used": self.n_points_used,
            "n_outliers_removed": self.n_outliers_removed,
            "used": [list(p) for p in self.used],
            "removed": [list(p) for p in self.removed],
        }


def _line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    design = np.column_stack([x, np.ones_like(x)])
    (slope, icept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(slope), float(icept)


def _r_squared(x, y, slope, icept) -> float:
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    ss_res = float(np.sum((y - (slope * x + icept)) ** 2))
    return min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)


def fit_power_law(points, mad_threshold: float = 2.0, observable: str = "", regime: str = "") -> ScalingFit:
    """Log-log least squares with a single MAD outlier pass.

    A preliminary ordinary least-squares line is fitted to ``(ln N, ln value)``.
    Residuals are standardized as ``z = (r - median(r)) / (1.4826 * MAD)`` and
    points with ``|z| > mad_threshold`` are dropped before the final fit.  When
    the MAD is zero no point is dropped.
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 4:
        raise InsufficientDataError(f"need at least 4 points, got {len(pts)}")
    for n, v in pts:
        if not (n > 0):
            raise DomainError(f"non-positive size N={n} at point ({n}, {v})")
        if not (v > 0) or not math.isfinite(v):
            raise DomainError(f"non-positive value {v} at N={n}")
    pts.sort()
    arr = np.asarray(pts)
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])

    slope, icept = _line(x, y)
    resid = y - (slope * x + icept)
    centre = float(np.median(resid))
    mad = float(np.median(np.abs(resid - centre)))
    if mad > 1e-14 * max(1.0, float(np.max(np.abs(y)))):
        z = (resid - centre) / (MAD_TO_SIGMA * mad)
        keep = np.abs(z) <= mad_threshold
    else:
        keep = np.ones(len(pts), dtype=bool)
    if keep.sum() < 3:
        raise InsufficientDataError(f"only {int(keep.sum())} points survive outlier removal")
    if not keep.all():
        slope, icept = _line(x[keep], y[keep])
    return ScalingFit(
        alpha=slope,
        intercept=icept,
        r_squared=_r_squared(x[keep], y[keep], slope, icept),
        n_points_used=int(keep.sum()),
        n_outliers_removed=int((~keep).sum()),
        observable=observable,
        regime=regime,
        used=tuple(p for p, k in zip(pts, keep) if k),
        removed=tuple(p for p, k in zip(pts, keep) if not k),
    )


def classify_regime(gamma_minus: float, gamma_z: float) -> Regime:
    """Regime from the dephasing-to-relaxation ratio, split at half decades."""
    if gamma_minus <= 0 or gamma_z <= 0:
        raise ValueError("rates must be positive")
    ratio = gamma_z / gamma_minus
    if ratio < 10**0.5:
        return Regime.TUNED_DECAY
    if ratio < 10**1.5:
        return Regime.INTERMEDIATE
    return Regime.DEPHASING_DOMINATED


@dataclass(frozen=True)
class HardwareRates:
    t1: float
    t2: float
    t_phi: float
    gamma_minus: float
    gamma_z: float

    @property
    def ratio(self) -> float:
        return self.gamma_z / self.gamma_minus

    def to_dict(self) -> dict:
        return {
            "t1": self.t1,
            "t2": self.t2,
            "t_phi": self.t_phi,
            "gamma_minus": self.gamma_minus,
            "gamma_z": self.gamma_z,
            "ratio": self.ratio,
        }


def hardware_map(t1: float, t2: float) -> HardwareRates:
    """Relaxation and pure-dephasing rates from measured ``T1`` and ``T2``.

    ``1/T2 = 1/(2 T1) + 1/T_phi``, ``gamma- = 2 pi / T1``, ``gamma_z = 2 pi / T_phi``.
    """
    if not (t1 > 0 and t2 > 0):
        raise ValueError("T1 and T2 must be positive")
    if t2 > 2 * t1:
        raise UnphysicalCoherenceError(f"T2={t2} exceeds 2*T1={2 * t1}")
    inv_phi = 1.0 / t2 - 1.0 / (2.0 * t1)
    t_phi = math.inf if inv_phi <= 0.0 else 1.0 / inv_phi
    return HardwareRates(t1, t2, t_phi, 2 * math.pi / t1, 2 * math.pi * max(inv_phi, 0.0))
