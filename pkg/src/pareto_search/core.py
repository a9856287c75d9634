"""Shared value types for the search games: box instances, hider
distributions and consistency/robustness curves."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

EQ_TOL = 1e-9
PROB_TOL = 1e-12


class InstanceError(ValueError):
    """Raised for an invalid problem description."""


# ---------------------------------------------------------------------------
# strategy parameter tags
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixParams:
    """Perfect-detection mixing weight (probability of searching H first)."""

    alpha: float

    def to_dict(self) -> dict:
        return {"family": "box-perfect", "alpha": self.alpha}


@dataclass(frozen=True)
class CycleParams:
    """Imperfect-detection family s^k(beta)."""

    k: int
    beta: float

    def to_dict(self) -> dict:
        return {"family": "box-imperfect", "k": self.k, "beta": self.beta}


@dataclass(frozen=True)
class GeometricParams:
    """Biased geometric line strategy."""

    alpha_base: float
    mu: float

    def to_dict(self) -> dict:
        return {"family": "line", "alpha": self.alpha_base, "mu": self.mu}


@dataclass(frozen=True)
class OracleParams:
    """Explicit mixed strategy found by the LP oracle."""

    weights: tuple[float, ...]
    lam: tuple[float, float] = (0.0, 1.0)

    def to_dict(self) -> dict:
        return {"family": "oracle", "lambda": list(self.lam), "weights": list(self.weights)}


Params = Union[MixParams, CycleParams, GeometricParams, OracleParams, None]


def params_from_dict(d: dict | None) -> Params:
    if not d:
        return None
    family = d.get("family")
    if family == "box-perfect":
        return MixParams(float(d["alpha"]))
    if family == "box-imperfect":
        return CycleParams(int(d["k"]), float(d["beta"]))
    if family == "line":
        return GeometricParams(float(d["alpha"]), float(d["mu"]))
    if family == "oracle":
        return OracleParams(tuple(float(w) for w in d["weights"]), tuple(d.get("lambda", (0.0, 1.0))))
    raise ValueError(f"unknown params family {family!r}")


# ---------------------------------------------------------------------------
# frontier points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParetoPoint:
    consistency: float
    robustness: float
    params: Params = None

    def __post_init__(self):
        if self.consistency < 0 or self.robustness < 0:
            raise ValueError("consistency and robustness must be nonnegative")
        if self.consistency > self.robustness + EQ_TOL * max(1.0, abs(self.robustness)):
            raise ValueError(
                f"consistency {self.consistency} exceeds robustness {self.robustness}")

    def to_dict(self) -> dict:
        return {
            "consistency": self.consistency,
            "robustness": self.robustness,
            "params": self.params.to_dict() if self.params is not None else None,
        }


@dataclass(frozen=True)
class ParetoCurve:
    """Points sorted by strictly increasing consistency and strictly
    decreasing robustness."""

    points: tuple[ParetoPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        for a, b in zip(self.points, self.points[1:]):
            if not b.consistency > a.consistency:
                raise ValueError("consistency must be strictly increasing along the curve")
            if not b.robustness < a.robustness:
                raise ValueError("robustness must be strictly decreasing along the curve")

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def consistencies(self) -> list[float]:
        return [p.consistency for p in self.points]

    @property
    def robustnesses(self) -> list[float]:
        return [p.robustness for p in self.points]

    @classmethod
    def from_points(cls, points: Iterable[ParetoPoint], merge_tol: float = EQ_TOL) -> "ParetoCurve":
        """Build a curve from unsorted points, merging near-duplicates and
        dropping dominated ones."""
        pts = sorted(points, key=lambda p: (p.consistency, p.robustness))
        kept: list[ParetoPoint] = []
        for p in pts:
            if kept:
                last = kept[-1]
                if (abs(p.consistency - last.consistency) <= merge_tol
                        and abs(p.robustness - last.robustness) <= merge_tol):
                    continue
                # sorted by c: p is dominated unless it strictly improves r
                if p.robustness >= last.robustness - merge_tol:
                    continue
                if p.consistency <= last.consistency + merge_tol:
                    # same c (within tol), better r: replaces last
                    kept[-1] = p
                    continue
            kept.append(p)
        return cls(tuple(kept))


# ---------------------------------------------------------------------------
# box instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteHiderDistribution:
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if any(p < 0 for p in self.probs):
            raise ValueError("hiding probabilities must be nonnegative")
        if abs(math.fsum(self.probs) - 1.0) > PROB_TOL:
            raise ValueError(f"hiding probabilities sum to {math.fsum(self.probs)}, not 1")

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, j: int) -> float:
        return self.probs[j]


@dataclass(frozen=True)
class BoxInstance:
    """Search times per box, detection probability and the predicted set H.

    Box indices are 0-based.  ``q == 1`` is the perfect-detection game.
    """

    times: tuple[float, ...]
    q: float = 1.0
    prediction: frozenset[int] = field(default_factory=lambda: frozenset({0}))

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "prediction", frozenset(int(j) for j in self.prediction))
        object.__setattr__(self, "q", float(self.q))

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def complement(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.prediction

    @property
    def h_indices(self) -> list[int]:
        return sorted(self.prediction)

    @property
    def hc_indices(self) -> list[int]:
        return sorted(self.complement)

    @property
    def perfect(self) -> bool:
        return self.q == 1.0

    def times_of(self, subset: Iterable[int]) -> list[float]:
        return [self.times[j] for j in sorted(subset)]

    def to_dict(self) -> dict:
        return {"times": list(self.times), "q": self.q, "prediction": sorted(self.prediction)}


def validate_instance(inst: BoxInstance) -> BoxInstance:
    if inst.n < 2:
        raise InstanceError("need at least two boxes")
    if any(not math.isfinite(t) or t <= 0 for t in inst.times):
        raise InstanceError("nonpositive time")
    if not (0.0 < inst.q <= 1.0):
        raise InstanceError(f"detection probability q={inst.q} outside (0, 1]")
    if not inst.prediction:
        raise InstanceError("prediction must be nonempty")
    if any(j < 0 or j >= inst.n for j in inst.prediction):
        raise InstanceError("prediction index out of range")
    if len(inst.prediction) == inst.n:
        raise InstanceError("prediction must be proper subset")
    return inst


def make_instance(times: Sequence[float], q: float = 1.0, prediction: Iterable[int] = (0,)) -> BoxInstance:
    return validate_instance(BoxInstance(tuple(times), q, frozenset(prediction)))


def subset_totals(inst: BoxInstance) -> tuple[float, float, float, float]:
    """Return (t(H), t(H^c), t(Y), sum of squared times)."""
    t_h = math.fsum(inst.times_of(inst.prediction))
    t_hc = math.fsum(inst.times_of(inst.complement))
    t2 = math.fsum(t * t for t in inst.times)
    return t_h, t_hc, t_h + t_hc, t2


def load_instance(path: str | Path) -> BoxInstance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def instance_from_dict(d: dict) -> BoxInstance:
    try:
        return make_instance(d["times"], d.get("q", 1.0), d["prediction"])
    except KeyError as exc:
        raise InstanceError(f"missing field {exc.args[0]!r}") from None


def save_instance(inst: BoxInstance, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh)
