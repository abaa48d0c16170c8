"""Fuzzy logic algebra and logic neurons (second network layer).

The t-norm is the algebraic product and the s-norm the probabilistic sum.
All operations broadcast over numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_EPS = 1e-12


class NeuronKind(str, enum.Enum):
    UNI = "uni"
    AND = "and"
    OR = "or"


class BoundaryMode(str, enum.Enum):
    MAX = "max"
    MIN = "min"


def _check_unit(*values):
    for v in values:
        a = np.asarray(v, dtype=float)
        if np.any(~np.isfinite(a)) or np.any(a < -_EPS) or np.any(a > 1 + _EPS):
            raise ValueError(f"inputs must lie in [0, 1], got {v!r}")


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def t_norm(x, y):
    _check_unit(x, y)
    return _scalar(np.multiply(x, y))


def s_norm(x, y):
    _check_unit(x, y)
    return _scalar(np.add(x, y) - np.multiply(x, y))


@dataclass(frozen=True)
class Uninorm:
    g: float
    boundary_mode: BoundaryMode = BoundaryMode.MAX

    def __post_init__(self):
        if not 0.0 <= self.g <= 1.0:
            raise ValueError(f"identity element must lie in [0, 1], got {self.g}")
        object.__setattr__(self, "boundary_mode", BoundaryMode(self.boundary_mode))

    def __call__(self, x, y):
        return uninorm_eval(self, x, y)


def _uninorm(x, y, g, mode: BoundaryMode):
    """Unchecked uninorm; ``g`` may be an array broadcastable against x, y."""
    x, y, g = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(g, float))
    lower = (x <= g) & (y <= g)
    upper = (x >= g) & (y >= g)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # g * T(x/g, y/g) with the product t-norm
        low_val = np.where(g > 0, x * y / np.where(g > 0, g, 1.0), 0.0)
        cg = 1.0 - g
        safe = np.where(cg > 0, cg, 1.0)
        xs, ys = (x - g) / safe, (y - g) / safe
        up_val = np.where(cg > 0, g + cg * (xs + ys - xs * ys), 1.0)
    mixed = np.maximum(x, y) if mode is BoundaryMode.MAX else np.minimum(x, y)
    # on the diagonal corner x = y = g both branches agree on g
    return np.where(lower, low_val, np.where(upper, up_val, mixed))


def uninorm_eval(u: Uninorm, x, y):
    _check_unit(x, y)
    return _scalar(_uninorm(x, y, u.g, u.boundary_mode))


def weighted_transform(w, a, g):
    """h(w, a) = w*a + (1 - w)*g: full weight passes ``a``, zero weight yields ``g``."""
    _check_unit(w, a, g)
    return _scalar(_weighted(w, a, g))


def _weighted(w, a, g):
    return w * a + (1.0 - w) * g


@dataclass(frozen=True)
class LogicNeuron:
    kind: NeuronKind
    antecedents: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    g: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", NeuronKind(self.kind))
        ants = tuple((int(j), int(m)) for j, m in self.antecedents)
        object.__setattr__(self, "antecedents", ants)
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not ants:
            raise ValueError("a neuron needs at least one antecedent")
        if len(ants) != len(self.weights):
            raise ValueError("weights and antecedents must have equal length")
        if len(set(ants)) != len(ants):
            raise ValueError("antecedent pairs must be distinct")
        _check_unit(self.weights, self.g)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "antecedents": [list(a) for a in self.antecedents],
            "weights": list(self.weights),
            "g": self.g,
        }

    @classmethod
    def from_dict(cls, d) -> "LogicNeuron":
        return cls(d["kind"], tuple(tuple(a) for a in d["antecedents"]), tuple(d["weights"]), d["g"])


def _gather(neuron: LogicNeuron, memberships: np.ndarray) -> np.ndarray:
    memberships = np.asarray(memberships, dtype=float)
    n_feat, n_sets = memberships.shape[-2:]
    for j, m in neuron.antecedents:
        if not (0 <= j < n_feat and 0 <= m < n_sets):
            raise ValueError(f"antecedent ({j}, {m}) out of range for membership shape {memberships.shape[-2:]}")
    feats = [j for j, _ in neuron.antecedents]
    sets = [m for _, m in neuron.antecedents]
    return memberships[..., feats, sets]


def _fold_uninorm(b: np.ndarray, g, mode: BoundaryMode) -> np.ndarray:
    # left-to-right over the last axis; the mixed branch breaks associativity
    acc = b[..., 0]
    for i in range(1, b.shape[-1]):
        acc = _uninorm(acc, b[..., i], g, mode)
    return acc


def unineuron_eval(neuron: LogicNeuron, memberships, boundary_mode: BoundaryMode = BoundaryMode.MAX):
    a = _gather(neuron, memberships)
    b = _weighted(np.asarray(neuron.weights), a, neuron.g)
    return _scalar(_fold_uninorm(b, neuron.g, BoundaryMode(boundary_mode)))


def andneuron_eval(neuron: LogicNeuron, memberships):
    a = _gather(neuron, memberships)
    w = np.asarray(neuron.weights)
    return _scalar(np.prod(a + w - a * w, axis=-1))


def orneuron_eval(neuron: LogicNeuron, memberships):
    a = _gather(neuron, memberships)
    w = np.asarray(neuron.weights)
    return _scalar(1.0 - np.prod(1.0 - a * w, axis=-1))


def neuron_eval(neuron: LogicNeuron, memberships, boundary_mode: BoundaryMode = BoundaryMode.MAX):
    if neuron.kind is NeuronKind.UNI:
        return unineuron_eval(neuron, memberships, boundary_mode)
    if neuron.kind is NeuronKind.AND:
        return andneuron_eval(neuron, memberships)
    return orneuron_eval(neuron, memberships)


def activations(
    neurons: Sequence[LogicNeuron],
    memberships: np.ndarray,
    boundary_mode: BoundaryMode = BoundaryMode.MAX,
) -> np.ndarray:
    """Evaluate every neuron on a batch of membership matrices (K x N x M) -> (K x L).

    Neurons sharing kind and arity are evaluated together.
    """
    memberships = np.asarray(memberships, dtype=float)
    if memberships.ndim == 2:
        memberships = memberships[None]
    K = memberships.shape[0]
    out = np.empty((K, len(neurons)))
    mode = BoundaryMode(boundary_mode)
    groups: dict = {}
    for idx, nrn in enumerate(neurons):
        groups.setdefault((nrn.kind, len(nrn.antecedents)), []).append(idx)
    n_feat, n_sets = memberships.shape[1:]
    for (kind, _), idxs in groups.items():
        ants = np.array([neurons[i].antecedents for i in idxs])  # L x n x 2
        if ants[..., 0].max() >= n_feat or ants[..., 1].max() >= n_sets or ants.min() < 0:
            raise ValueError("neuron antecedents out of range for membership shape")
        a = memberships[:, ants[..., 0], ants[..., 1]]  # K x L x n
        w = np.array([neurons[i].weights for i in idxs])
        if kind is NeuronKind.UNI:
            g = np.array([neurons[i].g for i in idxs])
            b = _weighted(w, a, g[:, None])
            z = _fold_uninorm(b, g, mode)
        elif kind is NeuronKind.AND:
            z = np.prod(a + w - a * w, axis=-1)
        else:
            z = 1.0 - np.prod(1.0 - a * w, axis=-1)
        out[:, idxs] = z
    return out
