"""Offline-trained surrogate for the joint power optimization.

A small fully connected network (6 or 7 inputs, 10 hidden tanh units, 2 tanh
outputs) learns the map from channel statistics to the grid-search optimum
(alpha*, beta*), replacing the online exhaustive search with a constant-time
feed-forward pass.  Training is batch Levenberg-Marquardt on the mean squared
error of the scaled outputs, with an exact analytic Jacobian.

Dataset files are CSV with the fixed header below; model files are JSON.
Labeling parallelizes over grid points with an ordered reduction, training is
deterministic for a fixed seed, and prediction is pure and thread-safe.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import product
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import bep, optim
from .errors import DomainError, ModelFormatError, ValidationError
from .model import ChannelParams, LinkFading

__all__ = [
    "DATASET_HEADER",
    "DatasetGrid",
    "DatasetRecord",
    "TrainConfig",
    "SurrogateModel",
    "generate_dataset",
    "write_dataset",
    "read_dataset",
    "dataset_digest",
    "split_dataset",
    "train",
    "predict",
    "feedforward_op_count",
    "save_model",
    "load_model",
]

DATASET_HEADER = "m_sr,m_sd,m_rd,omega_sr,omega_sd,omega_rd,rho_t_db,alpha_star,beta_star"

HIDDEN_UNITS = 10
ALPHA_CLAMP = (0.005, 0.495)
BETA_CLAMP = (0.01, 0.99)
_OUT_LO = np.array([0.0, 0.0])
_OUT_HI = np.array([0.5, 1.0])

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DatasetRecord:
    m_sr: float
    m_sd: float
    m_rd: float
    omega_sr: float
    omega_sd: float
    omega_rd: float
    rho_t_db: float
    alpha_star: float
    beta_star: float

    def channel(self) -> ChannelParams:
        return ChannelParams(
            sr=LinkFading(self.m_sr, self.omega_sr),
            sd=LinkFading(self.m_sd, self.omega_sd),
            rd=LinkFading(self.m_rd, self.omega_rd),
        )


@dataclass(frozen=True)
class DatasetGrid:
    """Cross-product label grid with an optional deterministic decimation.

    Enumeration order is the nested loop (rho, m_sr, m_sd, m_rd, omega_sr,
    omega_sd, omega_rd); ``max_records`` keeps an evenly strided subset of
    that ordering.  Spreads must be positive: a zero-spread link is unusable
    and its optimum undefined.
    """

    m_sr_values: tuple[float, ...]
    m_sd_values: tuple[float, ...]
    m_rd_values: tuple[float, ...]
    omega_sr_values: tuple[float, ...]
    omega_sd_values: tuple[float, ...]
    omega_rd_values: tuple[float, ...]
    rho_db_values: tuple[float, ...]
    max_records: int | None = None

    def __post_init__(self):
        for name in (
            "m_sr_values",
            "m_sd_values",
            "m_rd_values",
            "omega_sr_values",
            "omega_sd_values",
            "omega_rd_values",
            "rho_db_values",
        ):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValidationError(name, "grid axis is empty")
            if name.startswith("omega") and any(v <= 0 for v in values):
                raise ValidationError(name, "spreads must be > 0")
            if name.startswith("m_") and any(v < 0.5 for v in values):
                raise ValidationError(name, "shapes must be >= 0.5")
        if self.max_records is not None and self.max_records < 1:
            raise ValidationError("max_records", f"must be >= 1, got {self.max_records}")

    @classmethod
    def uniform(
        cls,
        m_values,
        omega_values,
        rho_db_values,
        max_records: int | None = None,
    ) -> "DatasetGrid":
        m = tuple(float(v) for v in m_values)
        o = tuple(float(v) for v in omega_values)
        return cls(m, m, m, o, o, o, tuple(float(v) for v in rho_db_values), max_records)

    def combos(self) -> list[tuple[float, float, float, float, float, float, float]]:
        full = [
            (rho, m_sr, m_sd, m_rd, o_sr, o_sd, o_rd)
            for rho in self.rho_db_values
            for m_sr in self.m_sr_values
            for m_sd in self.m_sd_values
            for m_rd in self.m_rd_values
            for o_sr in self.omega_sr_values
            for o_sd in self.omega_sd_values
            for o_rd in self.omega_rd_values
        ]
        if self.max_records is None or len(full) <= self.max_records:
            return full
        keep = np.round(np.linspace(0, len(full) - 1, self.max_records)).astype(int)
        return [full[i] for i in keep]


def _label_one(args) -> DatasetRecord:
    (rho, m_sr, m_sd, m_rd, o_sr, o_sd, o_rd), grid_spec = args
    ch = ChannelParams(sr=LinkFading(m_sr, o_sr), sd=LinkFading(m_sd, o_sd), rd=LinkFading(m_rd, o_rd))
    r = optim.grid_search_analytic(ch, rho, grid_spec)
    return DatasetRecord(m_sr, m_sd, m_rd, o_sr, o_sd, o_rd, rho, r.alpha_star, r.beta_star)


def generate_dataset(
    grid: DatasetGrid,
    opt_grid: optim.GridSpec = optim.GridSpec(),
    workers: int = 1,
) -> list[DatasetRecord]:
    """Label every grid combination with its grid-search optimum."""
    combos = grid.combos()
    if not combos:
        raise DomainError("dataset grid is empty")
    tasks = [(combo, opt_grid) for combo in combos]
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=workers) as pool:
            return pool.map(_label_one, tasks)
    return [_label_one(t) for t in tasks]


def write_dataset(records: list[DatasetRecord], path: str | Path) -> None:
    lines = [DATASET_HEADER]
    for r in records:
        lines.append(
            ",".join(
                repr(v)
                for v in (
                    r.m_sr, r.m_sd, r.m_rd,
                    r.omega_sr, r.omega_sd, r.omega_rd,
                    r.rho_t_db, r.alpha_star, r.beta_star,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset(path: str | Path) -> list[DatasetRecord]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != DATASET_HEADER:
        raise ValidationError("dataset", f"unexpected header in {path}")
    records = []
    for line in lines[1:]:
        values = [float(v) for v in line.split(",")]
        if len(values) != 9:
            raise ValidationError("dataset", f"malformed row: {line!r}")
        records.append(DatasetRecord(*values))
    return records


def dataset_digest(records: list[DatasetRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        h.update(
            ",".join(
                repr(v)
                for v in (
                    r.m_sr, r.m_sd, r.m_rd,
                    r.omega_sr, r.omega_sd, r.omega_rd,
                    r.rho_t_db, r.alpha_star, r.beta_star,
                )
            ).encode()
        )
        h.update(b"\n")
    return h.hexdigest()


def split_dataset(records: list[DatasetRecord], seed: int) -> tuple[list[DatasetRecord], list[DatasetRecord]]:
    """Seeded 90/10 shuffle split (disjoint and exhaustive)."""
    n = len(records)
    if n < 10:
        raise DomainError(f"need at least 10 records to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_test = int(round(0.1 * n))
    test_idx = set(order[:n_test].tolist())
    train = [records[i] for i in range(n) if i not in test_idx]
    test = [records[i] for i in sorted(test_idx)]
    return train, test


@dataclass(frozen=True)
class TrainConfig:
    """Levenberg-Marquardt settings; defaults follow the reference recipe."""

    min_gradient: float = 1e-7
    mu_init: float = 1e-3
    mu_decrease: float = 0.1
    mu_increase: float = 10.0
    mu_max: float = 1e10
    stop_mse_delta: float = 1e-5
    max_epochs: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("min_gradient", "mu_init", "mu_decrease", "mu_increase", "mu_max", "stop_mse_delta"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs", f"must be >= 1, got {self.max_epochs}")


@dataclass(frozen=True)
class SurrogateModel:
    """Feed-forward net with tanh on hidden and output layers, plus the
    input normalization and output scaling needed to use it standalone."""

    layer_sizes: tuple[int, int, int]
    w1: np.ndarray  # (hidden, n_in)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (2, hidden)
    b2: np.ndarray  # (2,)
    x_min: np.ndarray  # (n_in,)
    x_max: np.ndarray  # (n_in,)
    out_lo: np.ndarray = field(default_factory=lambda: _OUT_LO.copy())
    out_hi: np.ndarray = field(default_factory=lambda: _OUT_HI.copy())
    activation: str = "tansig"
    metadata: dict = field(default_factory=dict)

    @property
    def n_in(self) -> int:
        return self.layer_sizes[0]

    def normalize(self, features: np.ndarray) -> np.ndarray:
        span = self.x_max - self.x_min
        span = np.where(span > 0, span, 1.0)
        return 2.0 * (features - self.x_min) / span - 1.0

    def forward_scaled(self, x_norm: np.ndarray) -> np.ndarray:
        hidden = np.tanh(x_norm @ self.w1.T + self.b1)
        return np.tanh(hidden @ self.w2.T + self.b2)

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        """Raw feature vector(s) -> (alpha_hat, beta_hat), clamped valid."""
        features = np.asarray(features, dtype=float)
        single = features.ndim == 1
        x = np.atleast_2d(features)
        if x.shape[1] != self.n_in:
            raise DomainError(f"model expects {self.n_in} features, got {x.shape[1]}")
        t = self.forward_scaled(self.normalize(x))
        y = self.out_lo + (t + 1.0) / 2.0 * (self.out_hi - self.out_lo)
        y[:, 0] = np.clip(y[:, 0], *ALPHA_CLAMP)
        y[:, 1] = np.clip(y[:, 1], *BETA_CLAMP)
        return y[0] if single else y


def _features_of(record: DatasetRecord, n_in: int) -> list[float]:
    base = [record.m_sr, record.m_sd, record.m_rd, record.omega_sr, record.omega_sd, record.omega_rd]
    if n_in == 7:
        base.append(record.rho_t_db)
    return base


def _design(records: list[DatasetRecord], n_in: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([_features_of(r, n_in) for r in records], dtype=float)
    y = np.array([[r.alpha_star, r.beta_star] for r in records], dtype=float)
    return x, y


def _scale_targets(y: np.ndarray) -> np.ndarray:
    return 2.0 * (y - _OUT_LO) / (_OUT_HI - _OUT_LO) - 1.0


def _pack(w1, b1, w2, b2) -> np.ndarray:
    return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])


def _unpack(theta: np.ndarray, n_in: int):
    h = HIDDEN_UNITS
    i = 0
    w1 = theta[i : i + h * n_in].reshape(h, n_in); i += h * n_in
    b1 = theta[i : i + h]; i += h
    w2 = theta[i : i + 2 * h].reshape(2, h); i += 2 * h
    b2 = theta[i : i + 2]
    return w1, b1, w2, b2


def _forward(theta: np.ndarray, x: np.ndarray, n_in: int):
    w1, b1, w2, b2 = _unpack(theta, n_in)
    a1 = np.tanh(x @ w1.T + b1)
    y = np.tanh(a1 @ w2.T + b2)
    return y, a1


def network_jacobian(theta: np.ndarray, x: np.ndarray, n_in: int) -> np.ndarray:
    """d(outputs)/d(weights) for every sample: shape (n_samples*2, n_params).

    Rows are ordered sample-major then output, matching the flattened
    residual vector used by the trainer.
    """
    w1, b1, w2, b2 = _unpack(theta, n_in)
    n = x.shape[0]
    h = HIDDEN_UNITS
    a1 = np.tanh(x @ w1.T + b1)          # (n, h)
    y = np.tanh(a1 @ w2.T + b2)          # (n, 2)
    dy = 1.0 - y**2                      # (n, 2)
    da1 = 1.0 - a1**2                    # (n, h)

    # back-propagated sensitivity of output o to hidden pre-activation j
    s = dy[:, :, None] * w2[None, :, :] * da1[:, None, :]   # (n, 2, h)

    j_w1 = s[:, :, :, None] * x[:, None, None, :]           # (n, 2, h, n_in)
    j_b1 = s                                                # (n, 2, h)
    j_w2 = dy[:, :, None, None] * a1[:, None, None, :] * np.eye(2)[None, :, :, None]  # (n, 2, 2, h)
    j_b2 = dy[:, :, None] * np.eye(2)[None, :, :]           # (n, 2, 2)

    jac = np.concatenate(
        [
            j_w1.reshape(n, 2, h * n_in),
            j_b1.reshape(n, 2, h),
            j_w2.reshape(n, 2, 2 * h),
            j_b2.reshape(n, 2, 2),
        ],
        axis=2,
    )
    return jac.reshape(n * 2, -1)


def _init_theta(n_in: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    w1 = rng.uniform(-1, 1, (HIDDEN_UNITS, n_in)) / np.sqrt(n_in)
    b1 = rng.uniform(-1, 1, HIDDEN_UNITS) / np.sqrt(n_in)
    w2 = rng.uniform(-1, 1, (2, HIDDEN_UNITS)) / np.sqrt(HIDDEN_UNITS)
    b2 = rng.uniform(-1, 1, 2) / np.sqrt(HIDDEN_UNITS)
    return _pack(w1, b1, w2, b2)


def _pearson_pooled(pred: np.ndarray, target: np.ndarray) -> float:
    p = pred.ravel()
    t = target.ravel()
    if np.std(p) == 0.0 or np.std(t) == 0.0:
        return 0.0
    return float(np.corrcoef(p, t)[0, 1])


def train(
    ds_train: list[DatasetRecord],
    ds_test: list[DatasetRecord],
    cfg: TrainConfig = TrainConfig(),
    mode: str = "6in",
    dataset_hash: str | None = None,
) -> SurrogateModel:
    """Batch Levenberg-Marquardt fit of the scaled-output MSE.

    Per epoch: assemble the exact Jacobian, solve the damped normal equations
    (JtJ + mu I) step = Jt r, accept only strict improvements (mu shrinks by
    mu_decrease on success, grows by mu_increase on rejection).  Stops on
    gradient norm, mu overflow, epoch budget, or two consecutive epochs
    improving MSE by less than stop_mse_delta.
    """
    if mode not in ("6in", "7in"):
        raise DomainError(f"mode must be '6in' or '7in', got {mode!r}")
    if not ds_train or not ds_test:
        raise DomainError("train and test splits must both be non-empty")
    n_in = 6 if mode == "6in" else 7

    x_train_raw, y_train = _design(ds_train, n_in)
    x_test_raw, y_test = _design(ds_test, n_in)
    x_min = x_train_raw.min(axis=0)
    x_max = x_train_raw.max(axis=0)
    span = np.where(x_max - x_min > 0, x_max - x_min, 1.0)
    x_train = 2.0 * (x_train_raw - x_min) / span - 1.0
    x_test = 2.0 * (x_test_raw - x_min) / span - 1.0
    t_train = _scale_targets(y_train)
    t_test = _scale_targets(y_test)

    theta = _init_theta(n_in, cfg.seed)
    n_params = theta.size
    identity = np.eye(n_params)

    def mse(th, x, t):
        y, _ = _forward(th, x, n_in)
        return float(np.mean((y - t) ** 2))

    mu = cfg.mu_init
    current = mse(theta, x_train, t_train)
    history = [current]
    stop_reason = "max_epochs"
    small_improvements = 0

    for _ in range(cfg.max_epochs):
        y, _ = _forward(theta, x_train, n_in)
        residual = (y - t_train).ravel()
        jac = network_jacobian(theta, x_train, n_in)
        gradient = jac.T @ residual
        if np.max(np.abs(gradient)) < cfg.min_gradient:
            stop_reason = "min_gradient"
            break
        jtj = jac.T @ jac
        accepted = False
        while mu <= cfg.mu_max:
            try:
                step = np.linalg.solve(jtj + mu * identity, gradient)
            except np.linalg.LinAlgError:
                mu *= cfg.mu_increase
                continue
            candidate = theta - step
            candidate_mse = mse(candidate, x_train, t_train)
            if candidate_mse < current:
                theta = candidate
                improvement = current - candidate_mse
                current = candidate_mse
                mu = max(mu * cfg.mu_decrease, 1e-20)
                accepted = True
                break
            mu *= cfg.mu_increase
        if not accepted:
            stop_reason = "mu_overflow"
            break
        history.append(current)
        if improvement < cfg.stop_mse_delta:
            small_improvements += 1
            if small_improvements >= 2:
                stop_reason = "mse_plateau"
                break
        else:
            small_improvements = 0

    w1, b1, w2, b2 = _unpack(theta, n_in)
    y_test_pred, _ = _forward(theta, x_test, n_in)
    test_mse = float(np.mean((y_test_pred - t_test) ** 2))
    metadata = {
        "mode": mode,
        "train_mse": current,
        "test_mse": test_mse,
        "regression_r": _pearson_pooled(y_test_pred, t_test),
        "dataset_hash": dataset_hash,
        "epochs": len(history) - 1,
        "stop_reason": stop_reason,
        "seed": cfg.seed,
        "mse_history": history,
        "rho_t_db": None,
    }
    rhos = {r.rho_t_db for r in ds_train}
    if mode == "6in" and len(rhos) == 1:
        metadata["rho_t_db"] = rhos.pop()
    return SurrogateModel(
        layer_sizes=(n_in, HIDDEN_UNITS, 2),
        w1=w1.copy(),
        b1=b1.copy(),
        w2=w2.copy(),
        b2=b2.copy(),
        x_min=x_min,
        x_max=x_max,
        metadata=metadata,
    )


def predict(model: SurrogateModel, ch: ChannelParams, rho_t_db: float | None = None) -> tuple[float, float]:
    """Constant-time (alpha_hat, beta_hat) for a channel condition.

    Seven-input models require ``rho_t_db``; six-input models ignore it (they
    are trained per operating SNR).
    """
    features = [ch.sr.m, ch.sd.m, ch.rd.m, ch.sr.omega, ch.sd.omega, ch.rd.omega]
    if model.n_in == 7:
        if rho_t_db is None:
            raise DomainError("7-input model requires rho_t_db")
        features.append(float(rho_t_db))
    out = model.predict_features(np.array(features))
    return float(out[0]), float(out[1])


def feedforward_op_count(model: SurrogateModel) -> dict:
    """Arithmetic cost of one online prediction."""
    n_in, hidden, n_out = model.layer_sizes
    if hidden < 1 or n_out < 1 or n_in < 1:
        raise DomainError(f"degenerate layer sizes {model.layer_sizes}")
    weight_mults = n_in * hidden + hidden * n_out
    bias_adds = hidden + n_out
    activations = hidden + n_out
    return {
        "weight_mults": weight_mults,
        "bias_adds": bias_adds,
        "activations": activations,
        "total": weight_mults + bias_adds + activations,
    }


def save_model(model: SurrogateModel, path: str | Path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "layer_sizes": list(model.layer_sizes),
        "activation": model.activation,
        "w1": model.w1.tolist(),
        "b1": model.b1.tolist(),
        "w2": model.w2.tolist(),
        "b2": model.b2.tolist(),
        "x_min": model.x_min.tolist(),
        "x_max": model.x_max.tolist(),
        "out_lo": model.out_lo.tolist(),
        "out_hi": model.out_hi.tolist(),
        "metadata": model.metadata,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_model(path: str | Path) -> SurrogateModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"unreadable model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {doc.get('format_version')!r} in {path}"
        )
    try:
        layer_sizes = tuple(int(v) for v in doc["layer_sizes"])
        model = SurrogateModel(
            layer_sizes=layer_sizes,
            w1=np.array(doc["w1"], dtype=float),
            b1=np.array(doc["b1"], dtype=float),
            w2=np.array(doc["w2"], dtype=float),
            b2=np.array(doc["b2"], dtype=float),
            x_min=np.array(doc["x_min"], dtype=float),
            x_max=np.array(doc["x_max"], dtype=float),
            out_lo=np.array(doc["out_lo"], dtype=float),
            out_hi=np.array(doc["out_hi"], dtype=float),
            activation=doc["activation"],
            metadata=doc["metadata"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file {path}: {exc}") from exc
    h = HIDDEN_UNITS
    n_in = model.n_in
    shapes = (model.w1.shape, model.b1.shape, model.w2.shape, model.b2.shape)
    if shapes != ((h, n_in), (h,), (2, h), (2,)):
        raise ModelFormatError(f"inconsistent weight shapes {shapes} in {path}")
    return model
