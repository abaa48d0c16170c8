"""Human-readable IF/THEN rules from a trained network."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .logic import NeuronKind
from .network import TrainedModel

CONSEQUENT_NAME = "SQL Injection Attack"

_CONNECTIVE = {NeuronKind.UNI: "and", NeuronKind.AND: "and", NeuronKind.OR: "and-or"}
# word placed between antecedents in the text form
_JOIN_WORD = {"and": "and", "and-or": "or"}

_NUM = r"-?\d+\.\d+"
RULE_PATTERN = re.compile(
    r"^(?P<index>\d+)\. If (?P<body>\([^()]+ is [^()]+\)(?: (?:and|or) \([^()]+ is [^()]+\))*)"
    rf" with certainly (?P<certainty>{_NUM}) then \({re.escape(CONSEQUENT_NAME)} is (?P<consequent>{_NUM})\)$"
)


@dataclass(frozen=True)
class FuzzyRule:
    antecedents: tuple[tuple[str, str, float], ...]
    certainty: float
    consequent: float
    connective: str = "and"

    def __post_init__(self):
        if not self.antecedents:
            raise ValueError("a rule needs at least one antecedent")
        if self.connective not in _JOIN_WORD:
            raise ValueError(f"unknown connective {self.connective!r}")
        if not (0.0 <= self.consequent <= 1.0):
            raise ValueError(f"consequent {self.consequent} outside [0, 1]")
        if not math.isfinite(self.certainty):
            raise ValueError("certainty must be finite")

    def to_dict(self) -> dict:
        return {
            "antecedents": [{"feature": f, "label": lab, "weight": w} for f, lab, w in self.antecedents],
            "certainty": self.certainty,
            "consequent": self.consequent,
            "connective": self.connective,
        }

    @classmethod
    def from_dict(cls, d) -> "FuzzyRule":
        ants = tuple((a["feature"], a["label"], float(a["weight"])) for a in d["antecedents"])
        return cls(ants, float(d["certainty"]), float(d["consequent"]), d["connective"])


def humanize(name: str) -> str:
    """``levelDifference`` -> ``level Difference``; underscores become spaces."""
    return re.sub(r"(?<=[a-z0-9])(?=[A-Z])", " ", name).replace("_", " ")


def extract_rules(model: TrainedModel, data: Optional[Dataset] = None) -> list[FuzzyRule]:
    """One rule per selected neuron, in model order.

    Consequents are mean activations over ``data``; raw features are
    standardized with the model's statistics unless ``data.stats`` says they
    already are.  Without ``data`` the training-set means stored in the model
    report are used.
    """
    if not model.neurons:
        return []
    if data is not None:
        X = data.X if data.stats is not None else model.stats.apply(data.X)
        mean_act = model.hidden(X).mean(axis=0)
    elif "mean_activations" in model.report:
        mean_act = np.asarray(model.report["mean_activations"], dtype=float)
    else:
        raise ValueError("model carries no activation summary; pass the training data")
    mean_act = np.clip(mean_act, 0.0, 1.0)
    rules = []
    for l, neuron in enumerate(model.neurons):
        ants = tuple(
            (model.feature_names[i], model.partition.per_feature[i][m].label, float(w))
            for (i, m), w in zip(neuron.antecedents, neuron.weights)
        )
        rules.append(FuzzyRule(ants, float(model.v[l + 1]), float(mean_act[l]), _CONNECTIVE[neuron.kind]))
    return rules


def render_rule(rule: FuzzyRule, index: int, decimals: int = 4) -> str:
    if decimals < 1:
        raise ValueError("decimals must be >= 1")
    word = f" {_JOIN_WORD[rule.connective]} "
    body = word.join(f"({humanize(f)} is {lab})" for f, lab, _ in rule.antecedents)
    cert = f"{rule.certainty:.{decimals}f}"
    if cert.startswith("-") and float(cert) == 0.0:
        cert = cert[1:]
    cons = f"{rule.consequent:.{decimals}f}"
    return f"{index}. If {body} with certainly {cert} then ({CONSEQUENT_NAME} is {cons})"


def render_rules(rules, decimals: int = 4) -> str:
    return "".join(render_rule(r, i, decimals) + "\n" for i, r in enumerate(rules, start=1))


def rules_to_json(rules) -> str:
    return json.dumps([r.to_dict() for r in rules], indent=1) + "\n"


def rules_from_json(text: str) -> list[FuzzyRule]:
    return [FuzzyRule.from_dict(d) for d in json.loads(text)]
