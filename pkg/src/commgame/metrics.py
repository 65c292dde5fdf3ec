"""Language-informativeness metrics over greedy evaluation logs.

All estimators are plug-in (empirical histogram) quantities in nats by
default: mutual information between discrete symbol lists, the per-round
coordination / consistency scores, and the entropy of an agent's outgoing
token tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EvalLog:
    """Per-episode records of one greedy evaluation pass."""

    questions: np.ndarray   # (N, T) int
    answers: np.ndarray     # (N, T) int
    predictions: np.ndarray  # (N, 2) int
    correct: np.ndarray     # (N,) bool
    greedy: bool = True

    def __post_init__(self):
        if not (len(self.questions) == len(self.answers)
                == len(self.predictions) == len(self.correct)):
            raise ValueError("ragged evaluation log")

    @property
    def rounds(self) -> int:
        return self.questions.shape[1]


@dataclass
class MetricsReport:
    accuracy: float
    ic: float
    sc: float
    entropy_q: float
    entropy_a: float

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "ic": self.ic, "sc": self.sc,
                "entropy_q": self.entropy_q, "entropy_a": self.entropy_a}


def _scale(base) -> float:
    return 1.0 if base is None else 1.0 / np.log(base)


def empirical_mi(xs, ys, base=None) -> float:
    """Plug-in mutual information of two equal-length discrete symbol lists.

    Sum over observed joint cells of p(x,y) * log[p(x,y) / (p(x) p(y))];
    nats unless a log base is given. Always >= 0 up to rounding.
    """
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    if xs.shape != ys.shape:
        raise ValueError("length mismatch")
    if xs.size == 0:
        raise ValueError("empty input")
    _, xi = np.unique(xs, return_inverse=True)
    _, yi = np.unique(ys, return_inverse=True)
    nx, ny = xi.max() + 1, yi.max() + 1
    joint = np.bincount(xi * ny + yi, minlength=nx * ny).reshape(nx, ny)
    p = joint / joint.sum()
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nz = p > 0
    mi = float(np.sum(p[nz] * np.log(p[nz] / (px @ py)[nz])))
    return max(mi, 0.0) * _scale(base)


def _tuple_symbols(rows: np.ndarray) -> np.ndarray:
    """Encode each row of discrete symbols as one joint symbol."""
    _, inv = np.unique(rows, axis=0, return_inverse=True)
    return inv


def _require_greedy(log: EvalLog):
    if not log.greedy:
        raise ValueError("metrics are defined over greedy evaluation logs only")


def instantaneous_coordination(log: EvalLog, base=None,
                               granularity: str = "round") -> float:
    """MI between the answerer's messages and the questioner's guesses.

    Default: mean of MI(a_t, w_i) over every round t and guess i (2T terms).
    granularity='tuple' uses the joint answer tuple instead (2 terms).
    """
    _require_greedy(log)
    if len(log.answers) == 0:
        raise ValueError("empty log")
    return _message_action_mi(log.answers, log.predictions, base, granularity)


def speaker_consistency(log: EvalLog, base=None,
                        granularity: str = "round") -> float:
    """MI between the questioner's own messages and its guesses (same scheme)."""
    _require_greedy(log)
    if len(log.questions) == 0:
        raise ValueError("empty log")
    return _message_action_mi(log.questions, log.predictions, base, granularity)


def _message_action_mi(messages, predictions, base, granularity) -> float:
    if granularity == "tuple":
        sym = _tuple_symbols(messages)
        terms = [empirical_mi(sym, predictions[:, i], base) for i in (0, 1)]
    elif granularity == "round":
        terms = [empirical_mi(messages[:, t], predictions[:, i], base)
                 for t in range(messages.shape[1]) for i in (0, 1)]
    else:
        raise ValueError(f"unknown granularity {granularity!r}")
    return float(np.mean(terms))


def message_entropy(log: EvalLog, agent: str = "Q", base=None) -> float:
    """Entropy of the empirical distribution of an agent's outgoing tuple
    (m_1, ..., m_T) across episodes."""
    _require_greedy(log)
    rows = {"Q": log.questions, "A": log.answers}.get(agent.upper())
    if rows is None:
        raise ValueError("agent must be 'Q' or 'A'")
    if len(rows) == 0:
        raise ValueError("empty log")
    _, counts = np.unique(rows, axis=0, return_counts=True)
    p = counts / counts.sum()
    return max(float(-(p * np.log(p)).sum()) * _scale(base), 0.0)


def report(log: EvalLog, base=None) -> MetricsReport:
    return MetricsReport(
        accuracy=float(np.mean(log.correct)),
        ic=instantaneous_coordination(log, base),
        sc=speaker_consistency(log, base),
        entropy_q=message_entropy(log, "Q", base),
        entropy_a=message_entropy(log, "A", base),
    )
