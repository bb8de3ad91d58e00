"""Linear P300 scoring model and the adaptive online decision rule.

Training is the Gaussian-prior MAP estimate of a linear regressor (ridge
form) on round-averaged feature vectors labelled +1 (target) / -1
(nontarget).  The normal equations are solved in mean form,

    w = (Xc' Xc / n + lambda I)^-1 (Xc' yc / n),

with the bias fitted on centered data and left unpenalized.  The mean form
makes the fit invariant to duplicating the training set.

Online, button scores are recomputed after every completed round from the
cumulative round averages; a button is selected once the gap between the
two best scores exceeds the threshold (0.2) or the round cap (10) is hit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ParameterError, TrainingError
from .eeg import EegRecording
from .pipeline import AveragedFeature, featurize
from .stimulus import StimulusSchedule

DEFAULT_THRESHOLD = 0.2
DEFAULT_MAX_ROUNDS = 10
DEFAULT_REGULARIZATION = 1.0


@dataclass
class P300Decoder:
    """Trained linear scoring model."""

    weights: np.ndarray
    bias: float
    regularization: float
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.regularization <= 0:
            raise ParameterError(
                f"regularization must be positive, got {self.regularization}"
            )


@dataclass
class Decision:
    """Outcome of one decision point: a selection or a request to continue."""

    selected: int | None  # button id, or None to continue
    scores: np.ndarray  # per-button confidence scores, index = button id
    rounds_used: int

    @property
    def gap(self) -> float:
        top = np.sort(self.scores)[::-1]
        return float(top[0] - top[1]) if top.size >= 2 else float("inf")


@dataclass
class TrialResult:
    """Final selection of one online trial."""

    button_id: int
    rounds_used: int
    scores: np.ndarray
    gap: float


def _as_values(feature) -> np.ndarray:
    values = getattr(feature, "values", feature)
    return np.asarray(values, dtype=float).reshape(-1)


def train(
    examples,
    regularization: float = DEFAULT_REGULARIZATION,
    training_meta: dict | None = None,
) -> P300Decoder:
    """Fit the scoring model.

    Args:
        examples: iterable of (feature, label) with label in {+1, -1};
            features may be FeatureVector/AveragedFeature or plain arrays.
        regularization: ridge strength lambda (> 0).
        training_meta: optional bookkeeping stored on the decoder
            (n_trials, n_rounds, seed).

    Returns:
        P300Decoder with fitted weights and bias.
    """
    if regularization <= 0:
        raise ParameterError(f"regularization must be positive, got {regularization}")
    pairs = list(examples)
    if len(pairs) < 2:
        raise TrainingError("need at least two training examples")
    X = np.stack([_as_values(f) for f, _ in pairs])
    y = np.array([float(label) for _, label in pairs])
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise TrainingError("labels must be +1 or -1")
    if np.unique(y).size < 2:
        raise TrainingError("training data contains a single class")

    n, dim = X.shape
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean
    gram = Xc.T @ Xc / n + regularization * np.eye(dim)
    weights = np.linalg.solve(gram, Xc.T @ yc / n)
    bias = float(y_mean - x_mean @ weights)
    return P300Decoder(
        weights=weights,
        bias=bias,
        regularization=regularization,
        training_meta=dict(training_meta or {}),
    )


def score(decoder: P300Decoder, feature) -> float:
    """Confidence score weights . values + bias."""
    values = _as_values(feature)
    if values.size != decoder.weights.size:
        raise ParameterError(
            f"feature dimension {values.size} does not match decoder "
            f"dimension {decoder.weights.size}"
        )
    return float(decoder.weights @ values + decoder.bias)


def decide(
    decoder: P300Decoder,
    per_button: dict,
    threshold: float = DEFAULT_THRESHOLD,
    rounds_used: int = 1,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> Decision:
    """Apply the adaptive stopping rule to one round's averaged features.

    Selects the argmax button if (top score - second score) > threshold, or
    unconditionally once rounds_used reaches max_rounds; otherwise asks for
    another round.  Score ties resolve to the lowest button index.
    """
    if not per_button:
        raise ParameterError("per_button map is empty")
    if threshold < 0:
        raise ParameterError(f"threshold must be >= 0, got {threshold}")
    buttons = sorted(per_button)
    if buttons != list(range(len(buttons))):
        raise ParameterError("per_button must cover button ids 0..n-1")
    scores = np.array([score(decoder, per_button[b]) for b in buttons])

    best = int(np.argmax(scores))  # first max -> lowest index on ties
    if scores.size >= 2:
        gap = float(scores[best] - np.partition(scores, -2)[-2])
    else:
        gap = float("inf")
    if gap > threshold or rounds_used >= max_rounds:
        return Decision(selected=best, scores=scores, rounds_used=rounds_used)
    return Decision(selected=None, scores=scores, rounds_used=rounds_used)


def run_online_trial(
    decoder: P300Decoder,
    recording: EegRecording,
    schedule: StimulusSchedule,
    threshold: float = DEFAULT_THRESHOLD,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> TrialResult:
    """Decode one selection from a prerecorded block.

    After each completed round R the per-button averages over rounds 1..R
    are rescored; the first Selected decision is returned.  The schedule
    must contain at least max_rounds rounds so a forced decision is always
    possible.
    """
    if max_rounds < 1:
        raise ParameterError(f"max_rounds must be >= 1, got {max_rounds}")
    if schedule.rounds < max_rounds:
        raise ConsistencyError(
            f"schedule has {schedule.rounds} rounds, need at least {max_rounds}"
        )
    features = featurize(recording, schedule)
    n_buttons = schedule.n_buttons
    dim = features[0].values.size
    if dim != decoder.weights.size:
        raise ConsistencyError(
            f"feature dimension {dim} does not match decoder "
            f"dimension {decoder.weights.size}"
        )

    # Cumulative per-button sums let each round reuse the previous ones.
    sums = np.zeros((n_buttons, dim))
    for rounds_used in range(1, max_rounds + 1):
        for k in range((rounds_used - 1) * n_buttons, rounds_used * n_buttons):
            sums[features[k].button_id] += features[k].values
        averages = {
            b: AveragedFeature(
                values=sums[b] / rounds_used, button_id=b, rounds_used=rounds_used
            )
            for b in range(n_buttons)
        }
        decision = decide(decoder, averages, threshold, rounds_used, max_rounds)
        if decision.selected is not None:
            return TrialResult(
                button_id=decision.selected,
                rounds_used=rounds_used,
                scores=decision.scores,
                gap=decision.gap,
            )
    raise AssertionError("unreachable: max_rounds forces a selection")


def save_decoder(decoder: P300Decoder, path) -> None:
    """Persist as JSON: {lambda, bias, weights, training_meta}."""
    doc = {
        "lambda": decoder.regularization,
        "bias": decoder.bias,
        "weights": [float(w) for w in decoder.weights],
        "training_meta": decoder.training_meta,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_decoder(path) -> P300Decoder:
    """Read a decoder written by save_decoder."""
    from .errors import FormatError

    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    try:
        return P300Decoder(
            weights=np.array(doc["weights"], dtype=float),
            bias=float(doc["bias"]),
            regularization=float(doc["lambda"]),
            training_meta=dict(doc.get("training_meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: missing or malformed field ({exc})") from exc
