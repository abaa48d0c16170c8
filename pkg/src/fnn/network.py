"""Regularized fuzzy neural network: candidate neurons, Bolasso pruning, ELM output layer."""

from __future__ import annotations

import itertools
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, StandardizationStats, derive_seed, standardize
from .fuzzification import FuzzyPartition, build_partition, fuzzify
from .linalg import least_squares_solve
from .logic import BoundaryMode, LogicNeuron, NeuronKind, activations
from .selection import BolassoResult, bolasso_supports, consensus

log = logging.getLogger(__name__)

MODEL_SCHEMA = "fnn-model/1"
MAX_RANDOM_CANDIDATES = 500
FULL_GRID_MAX_FEATURES = 6

# seed streams
_CANDIDATES, _BOLASSO = 1, 2


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    M: int = 2
    lc_cap: int = 200
    b: int = 16
    rho: float = 0.6
    alpha: float = 0.01
    neuron_kind: NeuronKind = NeuronKind.UNI
    boundary_mode: BoundaryMode = BoundaryMode.MAX
    cv_folds: int = 10
    lambda_rule: str = "min"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "neuron_kind", NeuronKind(self.neuron_kind))
        object.__setattr__(self, "boundary_mode", BoundaryMode(self.boundary_mode))
        if self.M < 2:
            raise ValueError("M must be at least 2")
        if self.lc_cap < 1:
            raise ValueError("lc_cap must be at least 1")
        if self.b < 1:
            raise ValueError("b must be at least 1")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")
        if self.lambda_rule not in ("min", "1se"):
            raise ValueError("lambda_rule must be 'min' or '1se'")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["neuron_kind"] = self.neuron_kind.value
        d["boundary_mode"] = self.boundary_mode.value
        return d

    @classmethod
    def from_dict(cls, d) -> "ModelConfig":
        return cls(**d)


@dataclass(frozen=True)
class TrainedModel:
    config: ModelConfig
    partition: FuzzyPartition
    neurons: tuple[LogicNeuron, ...]
    v: np.ndarray
    stats: StandardizationStats
    feature_names: tuple[str, ...]
    report: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.v) != len(self.neurons) + 1:
            raise ValueError("v must have one more entry than there are neurons")

    @property
    def n_features(self) -> int:
        return self.partition.n_features

    def hidden(self, X_std) -> np.ndarray:
        """Selected-neuron activations (K x L_s) for standardized inputs."""
        X_std = np.atleast_2d(np.asarray(X_std, dtype=float))
        if not self.neurons:
            return np.empty((X_std.shape[0], 0))
        return activations(self.neurons, fuzzify(self.partition, X_std), self.config.boundary_mode)


def leaky_relu(z, alpha: float = 0.01):
    out = np.maximum(alpha * np.asarray(z, dtype=float), z)
    return float(out) if np.ndim(out) == 0 else out


def generate_candidates(
    partition: FuzzyPartition,
    K: int,
    seed: int,
    kind: NeuronKind = NeuronKind.UNI,
) -> list[LogicNeuron]:
    """Candidate neurons over all features.

    Up to six features: one neuron per combination of fuzzy sets (M**N).
    Beyond that: min(2K, 500) neurons, each picking one random set per feature.
    Weights and identity element are uniform on [0, 1] per neuron.
    """
    N, M = partition.n_features, partition.n_sets
    rng = np.random.default_rng(seed)
    if N <= FULL_GRID_MAX_FEATURES:
        combos = np.array(list(itertools.product(range(M), repeat=N)), dtype=int).reshape(-1, N)
    else:
        combos = rng.integers(0, M, size=(min(2 * K, MAX_RANDOM_CANDIDATES), N))
    L = combos.shape[0]
    W = rng.uniform(0.0, 1.0, size=(L, N))
    g = rng.uniform(0.0, 1.0, size=L)
    feats = tuple(range(N))
    return [
        LogicNeuron(kind, tuple(zip(feats, combos[i].tolist())), tuple(W[i].tolist()), float(g[i]))
        for i in range(L)
    ]


def screen_candidates(act, cap: int) -> np.ndarray:
    """Indices of the ``cap`` highest-variance activation columns, in ascending order."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    act = np.asarray(act, dtype=float)
    L = act.shape[1]
    if L <= cap:
        return np.arange(L)
    var = act.var(axis=0)
    order = np.lexsort((np.arange(L), -var))  # variance desc, then index asc
    return np.sort(order[:cap])


def _design(act) -> np.ndarray:
    return np.column_stack([np.ones(act.shape[0]), act])


@dataclass
class _Prepared:
    """Everything in training that does not depend on ``b`` or ``rho``."""

    config: ModelConfig
    data: Dataset
    stats: StandardizationStats
    partition: FuzzyPartition
    candidates: list
    act: np.ndarray
    screened: np.ndarray
    timings: dict


def _prepare(data: Dataset, config: ModelConfig) -> _Prepared:
    t0 = time.perf_counter()
    if len(data) < 2:
        raise TrainingError("need at least two training samples")
    if data.stats is None:
        std_data, stats = standardize(data)
    else:
        std_data, stats = data, data.stats
    partition = build_partition(std_data.X, config.M)
    cands = generate_candidates(partition, len(data), derive_seed(config.seed, _CANDIDATES), config.neuron_kind)
    act = activations(cands, fuzzify(partition, std_data.X), config.boundary_mode)
    screened = screen_candidates(act, config.lc_cap)
    timings = {"prepare_seconds": time.perf_counter() - t0}
    return _Prepared(config, std_data, stats, partition, cands, act, screened, timings)


def _bootstrap_supports(prep: _Prepared, b: int):
    y = prep.data.y.astype(float)
    Z = _design(prep.act[:, prep.screened])
    t0 = time.perf_counter()
    if np.unique(y).size < 2:
        # constant target: the lasso path is empty in every replication
        supports = np.zeros((b, prep.screened.size), dtype=bool)
        lams = np.zeros(b)
    else:
        supports, lams = bolasso_supports(
            Z, y, b, prep.config.cv_folds, derive_seed(prep.config.seed, _BOLASSO),
            rule=prep.config.lambda_rule,
        )
    prep.timings["bolasso_seconds"] = time.perf_counter() - t0
    return supports, lams


def _finalize(prep: _Prepared, supports, lams, b: int, rho: float) -> TrainedModel:
    config = replace(prep.config, b=b, rho=rho)
    t0 = time.perf_counter()
    bol: BolassoResult = consensus(supports, rho, b, lams)
    selected = prep.screened[bol.consensus_support]
    y = prep.data.y.astype(float)
    warnings_ = []
    if selected.size == 0:
        v = np.array([y.mean()])
        warnings_.append("empty consensus support; bias-only model")
        log.warning("empty consensus support (b=%d, rho=%.2f); falling back to a bias-only model", b, rho)
    else:
        v = least_squares_solve(_design(prep.act[:, selected]), y)
    timings = dict(prep.timings, output_seconds=time.perf_counter() - t0)
    report = {
        "L": len(prep.candidates),
        "L_c": int(prep.screened.size),
        "L_s": int(selected.size),
        "screened": prep.screened.tolist(),
        "selected": selected.tolist(),
        "mean_activations": prep.act[:, selected].mean(axis=0).tolist(),
        "bolasso": bol.to_dict(),
        "warnings": warnings_,
        "timings": timings,
    }
    return TrainedModel(
        config=config,
        partition=prep.partition,
        neurons=tuple(prep.candidates[i] for i in selected),
        v=v,
        stats=prep.stats,
        feature_names=prep.data.feature_names,
        report=report,
    )


def train(data: Dataset, config: ModelConfig) -> TrainedModel:
    """Fit the network on ``data`` (raw features unless ``data.stats`` is set)."""
    prep = _prepare(data, config)
    supports, lams = _bootstrap_supports(prep, config.b)
    return _finalize(prep, supports, lams, config.b, config.rho)


def train_family(data: Dataset, config: ModelConfig, settings: Sequence[tuple[int, float]]) -> dict:
    """Train one model per ``(b, rho)`` setting, sharing the bootstrap replications.

    Each returned model equals ``train(data, replace(config, b=b, rho=rho))``.
    """
    settings = list(settings)
    prep = _prepare(data, config)
    b_max = max(b for b, _ in settings)
    supports, lams = _bootstrap_supports(prep, b_max)
    return {(b, rho): _finalize(prep, supports, lams, b, rho) for b, rho in settings}


def score_batch(model: TrainedModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    H = model.hidden(model.stats.apply(X))
    f = model.v[0] + H @ model.v[1:]
    return leaky_relu(f, model.config.alpha)


def score(model: TrainedModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("score expects one feature vector")
    return float(score_batch(model, x[None])[0])


def predict_batch(model: TrainedModel, X) -> np.ndarray:
    return np.where(score_batch(model, X) >= 0, 1, -1)


def predict(model: TrainedModel, x) -> int:
    return 1 if score(model, x) >= 0 else -1


# -- serialization ---------------------------------------------------------

_VOLATILE_REPORT_KEYS = ("timings",)


def model_to_dict(model: TrainedModel, include_timings: bool = False) -> dict:
    report = {k: v for k, v in model.report.items() if include_timings or k not in _VOLATILE_REPORT_KEYS}
    return {
        "schema": MODEL_SCHEMA,
        "config": model.config.to_dict(),
        "feature_names": list(model.feature_names),
        "stats": model.stats.to_dict(),
        "partition": model.partition.to_list(),
        "neurons": [n.to_dict() for n in model.neurons],
        "v": model.v.tolist(),
        "report": report,
    }


def model_from_dict(d: dict) -> TrainedModel:
    if d.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"unsupported model schema {d.get('schema')!r}")
    return TrainedModel(
        config=ModelConfig.from_dict(d["config"]),
        partition=FuzzyPartition.from_list(d["partition"]),
        neurons=tuple(LogicNeuron.from_dict(n) for n in d["neurons"]),
        v=np.asarray(d["v"], dtype=float),
        stats=StandardizationStats.from_dict(d["stats"]),
        feature_names=tuple(d["feature_names"]),
        report=d.get("report", {}),
    )


def dumps_model(model: TrainedModel, include_timings: bool = False) -> str:
    return json.dumps(model_to_dict(model, include_timings), indent=1, sort_keys=True) + "\n"


def loads_model(text: str) -> TrainedModel:
    return model_from_dict(json.loads(text))


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())
