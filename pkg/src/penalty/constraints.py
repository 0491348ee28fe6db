#!/usr/bin/env python3
"""
Closed convex sets with metric projections
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from common.errors import ConstructionError
from common.vectors import Vector


class ConstraintKind(str, Enum):
    WHOLE_SPACE = 'whole_space'
    NONNEG_ORTHANT = 'nonneg_orthant'
    BOX = 'box'
    SIMPLEX = 'simplex'


@dataclass(frozen=True)
class ConstraintSet:
    """A closed convex set C together with its metric projection P_C

    For the simplex the projection is taken in the weighted norm of the domain,
    which makes it the set {x >= 0, sum_i w_i x_i = total_mass}.
    """
    kind: ConstraintKind
    lo: float | None = None
    hi: float | None = None
    total_mass: float = 1.0
    weights: Vector | None = None

    def project(self, v: Vector) -> Vector:
        if self.kind is ConstraintKind.WHOLE_SPACE:
            return np.array(v, dtype=np.float64)
        if self.kind is ConstraintKind.NONNEG_ORTHANT:
            return np.maximum(v, 0.0)
        if self.kind is ConstraintKind.BOX:
            return np.clip(v, self.lo, self.hi)
        return project_simplex(v, self.total_mass, self.weights)

    def contains(self, x: Vector, tol: float = 1e-10) -> bool:
        if self.kind is ConstraintKind.WHOLE_SPACE:
            return True
        if self.kind is ConstraintKind.NONNEG_ORTHANT:
            return bool(np.all(x >= -tol))
        if self.kind is ConstraintKind.BOX:
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        weights = np.ones_like(x) if self.weights is None else self.weights
        mass = float(np.dot(weights, x))
        return bool(np.all(x >= -tol) and abs(mass - self.total_mass) <= tol * max(1.0, self.total_mass))

    def params(self) -> dict:
        """JSON-friendly description used when problems are serialized"""
        data = {'kind': self.kind.value}
        if self.kind is ConstraintKind.BOX:
            data.update(lo=self.lo, hi=self.hi)
        elif self.kind is ConstraintKind.SIMPLEX:
            data['total_mass'] = self.total_mass
            if self.weights is not None:
                data['weights'] = [float(w) for w in self.weights]
        return data


def whole_space() -> ConstraintSet:
    return ConstraintSet(ConstraintKind.WHOLE_SPACE)


def nonneg_orthant() -> ConstraintSet:
    return ConstraintSet(ConstraintKind.NONNEG_ORTHANT)


def box(lo: float, hi: float) -> ConstraintSet:
    if not lo <= hi:
        raise ConstructionError(f"Box needs lo <= hi, got [{lo}, {hi}]")
    return ConstraintSet(ConstraintKind.BOX, lo=float(lo), hi=float(hi))


def simplex(total_mass: float = 1.0, weights: Vector | None = None) -> ConstraintSet:
    if total_mass <= 0:
        raise ConstructionError(f"Simplex total_mass must be positive, got {total_mass}")
    if weights is not None:
        weights = np.array(weights, dtype=np.float64)
        if np.any(weights <= 0):
            raise ConstructionError("Simplex weights must be strictly positive")
        weights.setflags(write=False)
    return ConstraintSet(ConstraintKind.SIMPLEX, total_mass=float(total_mass), weights=weights)


def constraint_from_params(data: dict) -> ConstraintSet:
    """Inverse of ConstraintSet.params"""
    kind = ConstraintKind(data.get('kind', 'whole_space'))
    if kind is ConstraintKind.WHOLE_SPACE:
        return whole_space()
    if kind is ConstraintKind.NONNEG_ORTHANT:
        return nonneg_orthant()
    if kind is ConstraintKind.BOX:
        return box(data['lo'], data['hi'])
    return simplex(data.get('total_mass', 1.0), data.get('weights'))


def project_simplex(v: Vector, total_mass: float = 1.0, weights: Vector | None = None) -> Vector:
    """Project v onto {x >= 0, sum_i w_i x_i = total_mass} in the w-weighted norm

    The minimizer has the form max(v - theta, 0). Sorting v in decreasing order,
    theta is the threshold of the longest prefix whose entries stay above it.
    """
    v = np.asarray(v, dtype=np.float64)
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=np.float64)
    order = np.argsort(-v, kind='stable')
    sorted_v = v[order]
    sorted_w = w[order]
    cum_w = np.cumsum(sorted_w)
    cum_wv = np.cumsum(sorted_w * sorted_v)
    thresholds = (cum_wv - total_mass) / cum_w
    active = np.nonzero(sorted_v - thresholds > 0)[0]
    theta = thresholds[active[-1]]
    return np.maximum(v - theta, 0.0)
