"""ML-attack susceptibility: per-interpretation feed-forward response
predictors trained with mini-batch SGD, plus the sweep that locates the
training-set sizes where prediction beats chance or reaches 65% accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import beta

from .encoding import TOTAL_BITS, Interpretation


class TrainingDivergedError(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"non-finite loss at training step {step}")
        self.step = step


@dataclass(frozen=True)
class AttackConfig:
    hidden_sizes: tuple[int, ...] = (64, 64)
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 50
    train_sizes: tuple[int, ...] = (100, 1_000, 3_000, 10_000, 30_000, 100_000)
    holdout_size: int = 20_000
    seed: int = 0
    features: str = "bits"  # or "observables": raw (ex2, dphi) decoded from codes

    def __post_init__(self):
        if self.holdout_size < 1 or any(s < 1 for s in self.train_sizes):
            raise ValueError("all split sizes must be at least 1")
        if self.features not in ("bits", "observables"):
            raise ValueError("features must be 'bits' or 'observables'")


@dataclass
class SweepEntry:
    train_size: int
    accuracy: float
    lower_bound: float
    beats_chance: bool


@dataclass
class AttackResult:
    entries: list[SweepEntry]
    n_chance: int | None
    n_65: int | None


class PredictorModel:
    """Fully connected net: rectifier hidden layers, per-bit logistic
    outputs. Weights start Glorot-uniform from the given stream."""

    def __init__(self, sizes: list[int], rng: np.random.Generator):
        self.sizes = list(sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Returns per-bit probabilities and the post-activation cache."""
        cache = [x]
        h = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if i < len(self.weights) - 1:
                h = np.maximum(z, 0.0)
            else:
                h = 1.0 / (1.0 + np.exp(-z))
            cache.append(h)
        return h, cache

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def gradients(self, x: np.ndarray, y: np.ndarray):
        """Analytic gradients of the mean per-bit cross-entropy."""
        probs, cache = self.forward(x)
        n = x.shape[0] * probs.shape[1]
        delta = (probs - y) / n  # sigmoid + BCE
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = cache[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (cache[i] > 0.0)
        return grads_w, grads_b

    def loss(self, x: np.ndarray, y: np.ndarray) -> float:
        probs = np.clip(self.predict_proba(x), 1e-12, 1.0 - 1e-12)
        return float(-np.mean(y * np.log(probs) + (1.0 - y) * np.log(1.0 - probs)))


def challenge_features(codes: np.ndarray, mode: str = "bits") -> np.ndarray:
    """Map 24-bit challenge codes to network inputs: either the bits as
    +/-1 values, or the decoded (ex2, dphi) observables."""
    codes = np.asarray(codes, dtype=np.uint32)
    if mode == "bits":
        return code_bits(codes) * 2.0 - 1.0
    if mode == "observables":
        frac = (codes >> np.uint32(12)).astype(np.float64) / 4096.0
        phase_bits = codes & np.uint32(0xFFF)
        dphi = (phase_bits >> np.uint32(9)).astype(np.float64) + (
            phase_bits & np.uint32(0x1FF)
        ).astype(np.float64) / 512.0
        return np.column_stack([frac, dphi])
    raise ValueError(f"unknown feature mode {mode!r}")


def code_bits(codes: np.ndarray) -> np.ndarray:
    """24-bit codes to a float {0,1} matrix, bit 0 (MSB) in column 0."""
    codes = np.asarray(codes, dtype=np.uint32)
    shifts = np.uint32(TOTAL_BITS - 1) - np.arange(TOTAL_BITS, dtype=np.uint32)
    return ((codes[:, np.newaxis] >> shifts) & np.uint32(1)).astype(np.float64)


def train_predictor(x: np.ndarray, y: np.ndarray, cfg: AttackConfig) -> PredictorModel:
    """Mini-batch SGD (with momentum) on mean per-bit cross-entropy.
    Deterministic for a fixed config seed."""
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    rng = np.random.default_rng(cfg.seed)
    sizes = [x.shape[1], *cfg.hidden_sizes, y.shape[1]]
    model = PredictorModel(sizes, rng)
    vel_w = [np.zeros_like(w) for w in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]
    n = x.shape[0]
    step = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            gw, gb = model.gradients(x[idx], y[idx])
            for i in range(len(model.weights)):
                vel_w[i] = cfg.momentum * vel_w[i] - cfg.learning_rate * gw[i]
                vel_b[i] = cfg.momentum * vel_b[i] - cfg.learning_rate * gb[i]
                model.weights[i] += vel_w[i]
                model.biases[i] += vel_b[i]
                if not (np.all(np.isfinite(model.weights[i])) and np.all(np.isfinite(model.biases[i]))):
                    raise TrainingDivergedError(step)
            step += 1
    return model


def evaluate_predictor(model: PredictorModel, x: np.ndarray, y: np.ndarray) -> float:
    """Fraction of correctly predicted bits (threshold 0.5) on a holdout."""
    if x.shape[0] == 0:
        raise ValueError("empty holdout")
    preds = model.predict_proba(x) >= 0.5
    return float(np.mean(preds == (y >= 0.5)))


def gradient_check(model: PredictorModel, x: np.ndarray, y: np.ndarray, step: float = 1e-5) -> float:
    """Maximum relative error between analytic gradients and central finite
    differences over every parameter."""
    if x.shape[0] == 0:
        raise ValueError("empty sample")
    grads_w, grads_b = model.gradients(x, y)
    worst = 0.0
    for params, grads in ((model.weights, grads_w), (model.biases, grads_b)):
        for p, g in zip(params, grads):
            flat = p.ravel()
            gflat = g.ravel()
            for j in range(flat.shape[0]):
                orig = flat[j]
                flat[j] = orig + step
                hi = model.loss(x, y)
                flat[j] = orig - step
                lo = model.loss(x, y)
                flat[j] = orig
                numeric = (hi - lo) / (2.0 * step)
                scale = max(abs(gflat[j]), abs(numeric), 1e-8)
                worst = max(worst, abs(gflat[j] - numeric) / scale)
    return worst


def binomial_lower_bound(successes: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided Clopper-Pearson lower bound on a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("invalid binomial counts")
    if successes == 0:
        return 0.0
    return float(beta.ppf(1.0 - confidence, successes, trials - successes + 1))


def susceptibility_sweep(interp: Interpretation, cfg: AttackConfig) -> AttackResult:
    """Train/evaluate at each requested training-set size on disjoint seeded
    splits; report accuracy, the 99% lower bound, and the derived
    chance/65% thresholds."""
    n = interp.responses.shape[0]
    if max(cfg.train_sizes) + cfg.holdout_size > n:
        raise ValueError(
            f"dataset has {n} CRPs; need {max(cfg.train_sizes) + cfg.holdout_size}"
        )
    split_rng = np.random.default_rng(cfg.seed)
    perm = split_rng.permutation(n)
    holdout_idx = perm[: cfg.holdout_size]
    x_all = challenge_features(interp.challenge_codes, cfg.features)
    y_all = code_bits(interp.responses)
    x_hold, y_hold = x_all[holdout_idx], y_all[holdout_idx]

    entries = []
    for size in cfg.train_sizes:
        train_idx = perm[cfg.holdout_size : cfg.holdout_size + size]
        model = train_predictor(x_all[train_idx], y_all[train_idx], cfg)
        acc = evaluate_predictor(model, x_hold, y_hold)
        n_bits = cfg.holdout_size * y_all.shape[1]
        lb = binomial_lower_bound(round(acc * n_bits), n_bits)
        entries.append(SweepEntry(size, acc, lb, lb > 0.5))

    n_chance = next((e.train_size for e in entries if e.beats_chance), None)
    n_65 = next((e.train_size for e in entries if e.accuracy >= 0.65), None)
    return AttackResult(entries=entries, n_chance=n_chance, n_65=n_65)
