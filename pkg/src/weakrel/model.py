"""Model parameters and forward computations.

The learned state is:

  v       feature embeddings, one n_v vector per vocabulary feature
  v_star  context (output-side) feature embeddings used by negative sampling
  w       the n_z x n_v map from averaged feature space to mention space
  l       one n_z vector per labeling function (its proficient-subset
          direction: sigma(z . l_i) is the probability the function is
          reliable on context z)
  t       one n_z vector per label, None included at index 0
  phi1    P(annotation correct | context matched)
  phi0    P(annotation correct | context not matched), phi1 > phi0

A mention embedding is z = tanh(W . mean(v_i over the feature bag)); tanh
keeps every component strictly inside (-1, 1).  Dropout, when used during
training, masks the averaged feature vector with inverted scaling so that
inference needs no correction.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .features import FeatureVocab
from .supervision import LabelSpace

MODEL_MAGIC = b"REHS1"


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    if np.ndim(x) == 0:
        x = float(x)
        if x >= 0.0:
            return 1.0 / (1.0 + math.exp(-x))
        ex = math.exp(x)
        return ex / (1.0 + ex)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log_sigmoid(x):
    """log(sigmoid(x)) without overflow for large |x|."""
    if np.ndim(x) == 0:
        x = float(x)
        if x >= 0.0:
            return -math.log1p(math.exp(-x))
        return x - math.log1p(math.exp(x))
    x = np.asarray(x, dtype=np.float64)
    return np.where(
        x >= 0,
        -np.log1p(np.exp(-np.abs(x))),
        x - np.log1p(np.exp(-np.abs(x))),
    )


@dataclass
class Hyperparams:
    """Training settings.  pair_samples=None means the adaptive default of
    2*|bag| capped at 50 positive pairs per mention visit."""

    alpha: float = 0.025
    lambda1: float = 1.0
    lambda2: float = 1.0
    negatives: int = 5
    dropout: float = 0.5
    pair_samples: int | None = None
    epochs: int = 10
    seed: int = 13
    min_count: int = 2
    dim_v: int = 100
    dim_z: int = 50
    eta: float | None = None
    phi0: float | None = None
    phi1: float | None = None
    linear_decay: bool = False

    def validate(self):
        if self.alpha <= 0:
            raise ConfigError("learning rate alpha must be > 0")
        if self.negatives < 1:
            raise ConfigError("need at least one negative sample")
        if not (0.0 <= self.dropout < 1.0):
            raise ConfigError("dropout must be in [0, 1)")
        if self.min_count < 1:
            raise ConfigError("min_count must be >= 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigError("lambda weights must be nonnegative")
        if (self.phi0 is None) != (self.phi1 is None):
            raise ConfigError("phi0 and phi1 must be set together")
        if self.phi0 is not None:
            _check_phis(self.phi1, self.phi0)


def _check_phis(phi1, phi0):
    if not (0.0 < phi0 < 1.0 and 0.0 < phi1 < 1.0):
        raise ConfigError("phi0 and phi1 must lie in (0, 1)")
    if phi1 <= phi0:
        raise ConfigError("phi1 must exceed phi0")


@dataclass
class ModelParams:
    v: np.ndarray
    v_star: np.ndarray
    w: np.ndarray
    l: np.ndarray
    t: np.ndarray
    phi1: float
    phi0: float

    @property
    def n_features(self):
        return self.v.shape[0]

    @property
    def n_v(self):
        return self.v.shape[1]

    @property
    def n_z(self):
        return self.w.shape[0]

    @property
    def n_lfs(self):
        return self.l.shape[0]

    @property
    def n_labels(self):
        return self.t.shape[0]

    def validate(self):
        _check_phis(self.phi1, self.phi0)
        for name in ("v", "v_star", "w", "l", "t"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"non-finite entries in parameter {name}")
        if self.v_star.shape != self.v.shape:
            raise ConfigError("v and v_star shapes differ")
        if self.w.shape[1] != self.n_v:
            raise ConfigError("W width does not match feature dimension")
        if self.l.shape[1] != self.n_z or self.t.shape[1] != self.n_z:
            raise ConfigError("l/t width does not match mention dimension")

    def quantize(self):
        """Round every array through float32, the on-disk precision, so the
        in-memory model matches its serialized form bit-exactly."""
        for name in ("v", "v_star", "w", "l", "t"):
            arr = getattr(self, name)
            setattr(self, name, arr.astype(np.float32).astype(np.float64))
        return self


def init_params(n_features, n_lfs, n_relations, hyper: Hyperparams, rng) -> ModelParams:
    """Small symmetric uniform init; phi defaults to the random-guess rate
    1/(K+1) for phi0 and its complement for phi1."""
    n_v, n_z = hyper.dim_v, hyper.dim_z
    lim_v = 0.5 / n_v
    lim_z = 1.0 / np.sqrt(n_z)
    phi0 = hyper.phi0 if hyper.phi0 is not None else 1.0 / (n_relations + 1)
    phi1 = hyper.phi1 if hyper.phi1 is not None else 1.0 - phi0
    _check_phis(phi1, phi0)
    return ModelParams(
        v=rng.uniform(-lim_v, lim_v, size=(n_features, n_v)),
        v_star=rng.uniform(-lim_v, lim_v, size=(n_features, n_v)),
        w=rng.uniform(-lim_z, lim_z, size=(n_z, n_v)),
        l=rng.uniform(-lim_z, lim_z, size=(n_lfs, n_z)),
        t=rng.uniform(-lim_z, lim_z, size=(n_relations + 1, n_z)),
        phi1=phi1,
        phi0=phi0,
    )


def mention_forward(feature_ids, params: ModelParams, dropout_scale=None):
    """Return (a, z) where a is the (possibly masked) averaged feature
    embedding and z = tanh(W a).  dropout_scale is the pre-scaled mask
    mask/(1-p), or None outside training."""
    if len(feature_ids) == 0:
        raise ValueError("empty feature bag has no embedding")
    a = params.v[feature_ids].mean(axis=0)
    if dropout_scale is not None:
        a = a * dropout_scale
    z = np.tanh(params.w @ a)
    return a, z


def mention_embedding(feature_ids, params: ModelParams, dropout_mask=None, dropout_p=0.0):
    """Mention embedding z; with a binary dropout_mask the averaged feature
    vector is masked and rescaled by 1/(1-dropout_p) (inverted dropout)."""
    scale = None
    if dropout_mask is not None:
        scale = dropout_mask / (1.0 - dropout_p)
    _, z = mention_forward(feature_ids, params, scale)
    return z


def match_prob(z, l_i) -> float:
    """sigma(z . l_i): probability that the context z lies in the labeling
    function's proficient subset."""
    return float(sigmoid(float(np.dot(z, l_i))))


def type_distribution(z, t) -> np.ndarray:
    """Softmax of z . t_j over all labels (None included), computed with
    max-subtraction; sums to 1 within 1e-12."""
    scores = t @ z
    scores = scores - scores.max()
    ex = np.exp(scores)
    return ex / ex.sum()


def entropy_over_relations(p, renormalize=False) -> float:
    """Entropy of the relation entries of p (None excluded), with the
    0*log(0) := 0 convention.

    The literal formula sums -p_i log p_i over relations without
    renormalizing; pass renormalize=True to normalize the relation mass
    first (an alternative reading, not the default).
    """
    rel = np.asarray(p[1:], dtype=np.float64)
    if renormalize:
        total = rel.sum()
        if total <= 0.0:
            return 0.0
        rel = rel / total
    nz = rel[rel > 0.0]
    return float(-(nz * np.log(nz)).sum())


@dataclass
class Model:
    """A trained model together with everything needed to apply it."""

    params: ModelParams
    label_space: LabelSpace
    lf_names: tuple[str, ...]
    vocab: FeatureVocab


def _write_str(fh, s: str):
    data = s.encode("utf-8")
    fh.write(struct.pack("<I", len(data)))
    fh.write(data)


def _read_str(fh) -> str:
    (n,) = struct.unpack("<I", fh.read(4))
    return fh.read(n).decode("utf-8")


def save_model(model: Model, path):
    """Binary model file.

    Layout: magic "REHS1"; u32 LE n_v, n_z, |F|, M, K; K relation names,
    M labeling-function names and |F| vocabulary strings (each u32
    length-prefixed UTF-8); parameter arrays as little-endian float32 in the
    order v, v_star, W (row-major), l, t; then phi1, phi0 as float64.
    """
    p = model.params
    features = model.vocab.features
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(
            struct.pack(
                "<5I", p.n_v, p.n_z, p.n_features, p.n_lfs, model.label_space.k
            )
        )
        for name in model.label_space.relations:
            _write_str(fh, name)
        for name in model.lf_names:
            _write_str(fh, name)
        for feat in features:
            _write_str(fh, feat)
        for arr in (p.v, p.v_star, p.w, p.l, p.t):
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
        fh.write(struct.pack("<2d", p.phi1, p.phi0))


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise DataError(f"not a model file (bad magic {magic!r})")
        n_v, n_z, n_feat, n_lfs, k = struct.unpack("<5I", fh.read(20))
        relations = tuple(_read_str(fh) for _ in range(k))
        lf_names = tuple(_read_str(fh) for _ in range(n_lfs))
        features = [_read_str(fh) for _ in range(n_feat)]

        def read_arr(shape):
            count = int(np.prod(shape))
            raw = fh.read(4 * count)
            if len(raw) != 4 * count:
                raise DataError("truncated model file")
            return (
                np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)
            )

        v = read_arr((n_feat, n_v))
        v_star = read_arr((n_feat, n_v))
        w = read_arr((n_z, n_v))
        l = read_arr((n_lfs, n_z))
        t = read_arr((k + 1, n_z))
        phi1, phi0 = struct.unpack("<2d", fh.read(16))
    params = ModelParams(v, v_star, w, l, t, phi1, phi0)
    vocab = FeatureVocab({f: i for i, f in enumerate(features)}, None, 0)
    return Model(params, LabelSpace(relations), lf_names, vocab)
