"""Joint stochastic gradient training.

One pass visits a seeded random permutation of the labeled mentions.  Per
mention the step is:

  1. sample positive feature pairs from its bag and run skip-gram negative
     sampling updates on the feature embeddings (weight lambda1);
  2. draw a dropout mask, compute the mention embedding z;
  3. infer the true label o* by maximizing the truth-discovery likelihood;
  4. update the label vectors with the cross-entropy gradient (weight 1) and
     the proficiency vectors with the truth-likelihood gradient (weight
     lambda2), then backpropagate the combined z-gradient through tanh(W a)
     into W and the bag's feature embeddings.

Training is single-threaded and bit-deterministic given the seed: every
random draw comes from one generator in a fixed order.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import (
    Hyperparams,
    ModelParams,
    init_params,
    log_sigmoid,
    mention_forward,
    sigmoid,
    type_distribution,
)
from .truth import infer_true_label, jt_gradients, jt_local

logger = logging.getLogger(__name__)

PAIR_CAP = 50


class NoiseTable:
    """Negative-sampling noise distribution: P(f) proportional to
    count(f)^0.75, sampled by inverse CDF."""

    def __init__(self, counts, power=0.75):
        weights = np.asarray(counts, dtype=np.float64) ** power
        total = weights.sum()
        if total <= 0:
            raise ConfigError("noise table needs at least one positive count")
        self.probs = weights / total
        self.cum = np.cumsum(self.probs)
        self.cum[-1] = 1.0

    def sample(self, rng, size) -> np.ndarray:
        return np.searchsorted(self.cum, rng.random(size), side="right")


def sgns_objective(params: ModelParams, f_i, f_j, negatives) -> float:
    """log sigma(v_i . v*_j) + sum_k log sigma(-v_i . v*_k)."""
    vi = params.v[f_i]
    pos = log_sigmoid(float(np.dot(vi, params.v_star[f_j])))
    neg = log_sigmoid(-(params.v_star[negatives] @ vi)).sum()
    return float(pos + neg)


def sgns_gradients(params: ModelParams, f_i, f_j, negatives):
    """Ascent gradients of the objective above w.r.t. v_i, v*_j and each
    v*_k (rows of d_neg align with `negatives`)."""
    vi = params.v[f_i]
    vj = params.v_star[f_j]
    g_pos = 1.0 - sigmoid(float(np.dot(vi, vj)))
    s_neg = sigmoid(params.v_star[negatives] @ vi)
    d_vi = g_pos * vj - s_neg @ params.v_star[negatives]
    d_vj = g_pos * vi
    d_neg = -np.outer(s_neg, vi)
    return d_vi, d_vj, d_neg


def sgns_step(params: ModelParams, f_i, f_j, noise: NoiseTable, n_negatives, lr, rng,
              negatives=None) -> float:
    """Take one ascent step of size lr on the pair objective, drawing
    negatives from the noise table unless pre-drawn ones are supplied.
    Returns the pre-update objective value.  Self-pairs are skipped
    (objective 0).  All gradients are evaluated at the pre-update
    parameters, so repeated indices among the negatives accumulate."""
    if f_i == f_j:
        return 0.0
    if negatives is None:
        negatives = noise.sample(rng, n_negatives)
    v, v_star = params.v, params.v_star
    vi = v[f_i]
    vj = v_star[f_j]
    neg_rows = v_star[negatives]  # fancy indexing copies: pre-update snapshot
    pos_dot = float(vi @ vj)
    # scalar stable log sigma(x) and sigma(-x) = 1 - sigma(x)
    if pos_dot >= 0.0:
        lsp = -math.log1p(math.exp(-pos_dot))
        g_pos = 1.0 / (1.0 + math.exp(pos_dot))
    else:
        ex = math.exp(pos_dot)
        lsp = pos_dot - math.log1p(ex)
        g_pos = 1.0 / (1.0 + ex)
    neg_dots = neg_rows @ vi
    neg_ls = -np.logaddexp(0.0, neg_dots)  # log sigma(-d)
    value = lsp + neg_ls.sum()

    s_neg = np.exp(neg_dots + neg_ls)  # sigma(d)
    d_vi = g_pos * vj - s_neg @ neg_rows
    neg_updates = ((-lr) * s_neg)[:, None] * vi
    v_star[f_j] += (lr * g_pos) * vi
    for k in range(len(negatives)):
        v_star[negatives[k]] += neg_updates[k]
    v[f_i] += lr * d_vi
    return float(value)


def extraction_loss(z, t, target) -> float:
    """Cross-entropy -log p(target | z) under the label softmax."""
    scores = t @ z
    scores = scores - scores.max()
    return float(np.log(np.exp(scores).sum()) - scores[target])


def extraction_gradients(z, t, target):
    """Descent gradients of the cross-entropy: (d/dt, d/dz) with
    d/dt_j = (p_j - [j == target]) z and d/dz = sum_j (p_j - [j == target]) t_j."""
    p = type_distribution(z, t)
    residual = p.copy()
    residual[target] -= 1.0
    return np.outer(residual, z), residual @ t


def extraction_step(params: ModelParams, z, target, lr):
    """Update the label vectors; return (loss, d_loss/dz) computed from the
    pre-update parameters."""
    loss = extraction_loss(z, params.t, target)
    d_t, d_z = extraction_gradients(z, params.t, target)
    params.t -= lr * d_t
    return loss, d_z


def mention_gradients(w, a, z, upstream, bag_size, dropout_scale=None):
    """Backpropagate an upstream d_loss/dz through z = tanh(W a).

    Returns (d/dW, d/dv) where d/dv is the shared per-feature gradient:
    every feature in the bag contributed a/|bag| (after masking), so each
    receives the same 1/|bag| mask-scaled share.
    """
    d_wa = upstream * (1.0 - z * z)
    d_w = np.outer(d_wa, a)
    d_a = w.T @ d_wa
    if dropout_scale is not None:
        d_a = d_a * dropout_scale
    return d_w, d_a / bag_size


def backprop_mention(params: ModelParams, feature_ids, a, z, upstream, lr, dropout_scale=None):
    """Apply one descent step of size lr to W and each bag feature embedding."""
    d_w, d_v = mention_gradients(params.w, a, z, upstream, len(feature_ids), dropout_scale)
    params.w -= lr * d_w
    params.v[feature_ids] -= lr * d_v


@dataclass
class TrainReport:
    """Per-epoch loss means plus bookkeeping.  Losses are the minimized
    quantities: extraction is the cross-entropy per mention, truth is the
    negated truth likelihood per mention, embedding is the negated
    skip-gram objective per sampled pair."""

    epochs: list[dict] = field(default_factory=list)
    skipped_mentions: int = 0
    wall_time_s: float = 0.0

    def as_dict(self):
        return {
            "epochs": self.epochs,
            "skipped_mentions": self.skipped_mentions,
            "wall_time_s": round(self.wall_time_s, 3),
        }


def _sample_pairs(rng, n, count):
    """`count` ordered index pairs (i, j), i != j, uniform with replacement."""
    a = rng.integers(0, n, size=count)
    b = rng.integers(0, n - 1, size=count)
    b = b + (b >= a)
    return a, b


def train(bags, annotations, label_space, vocab, hyper: Hyperparams, n_lfs=None):
    """Optimize all parameters on the labeled mentions; returns
    (ModelParams, TrainReport).

    Labeled mentions with empty feature bags are dropped with a warning.
    n_lfs defaults to the highest firing function id plus one; pass the real
    count when some functions never fire.  The returned parameters are
    rounded to float32 precision so the model equals its serialized form
    bit-exactly.
    """
    hyper.validate()
    labeled = annotations.labeled_ids
    if not labeled:
        raise ConfigError("no labeled mentions: every labeling function abstained")
    usable = [mid for mid in labeled if len(bags[mid]) > 0]
    skipped = len(labeled) - len(usable)
    if skipped:
        logger.warning("dropping %d labeled mentions with empty feature bags", skipped)
    if not usable:
        raise ConfigError("all labeled mentions have empty feature bags")

    rng = np.random.default_rng(hyper.seed)
    if n_lfs is None:
        n_lfs = _n_lfs(annotations)
    params = init_params(len(vocab), n_lfs, label_space.k, hyper, rng)
    noise = NoiseTable(vocab.counts)
    report = TrainReport(skipped_mentions=skipped)
    keep_p = 1.0 - hyper.dropout
    total_visits = hyper.epochs * len(usable)
    visit = 0
    t0 = time.perf_counter()

    for epoch in range(hyper.epochs):
        order = rng.permutation(len(usable))
        ce_sum = 0.0
        jt_sum = 0.0
        je_sum = 0.0
        je_pairs = 0
        for idx in order:
            lr = hyper.alpha
            if hyper.linear_decay:
                lr = hyper.alpha * max(1e-4, 1.0 - visit / total_visits)
            visit += 1
            mid = usable[idx]
            ids = bags[mid].feature_ids
            ann = annotations.by_mention[mid]

            n = len(ids)
            n_pairs = hyper.pair_samples
            if n_pairs is None:
                n_pairs = min(2 * n, PAIR_CAP)
            if n >= 2 and n_pairs > 0:
                ai, bi = _sample_pairs(rng, n, n_pairs)
                negs = noise.sample(rng, n_pairs * hyper.negatives)
                negs = negs.reshape(n_pairs, hyper.negatives)
                sgns_lr = lr * hyper.lambda1
                id_list = ids.tolist()
                for k, (a_k, b_k) in enumerate(zip(ai.tolist(), bi.tolist())):
                    value = sgns_step(
                        params, id_list[a_k], id_list[b_k], noise,
                        hyper.negatives, sgns_lr, rng, negatives=negs[k],
                    )
                    je_sum -= value
                    je_pairs += 1

            scale = None
            if hyper.dropout > 0.0:
                scale = (rng.random(hyper.dim_v) < keep_p) / keep_p
            a, z = mention_forward(ids, params, scale)

            o_star = infer_true_label(ann, z, params)
            jt_value = jt_local(ann, z, params, o_star)
            d_z_jt, d_ls = jt_gradients(ann, z, params, o_star)
            ce, d_z_ce = extraction_step(params, z, o_star, lr)
            for lf_id, d_l in d_ls:
                params.l[lf_id] += lr * hyper.lambda2 * d_l
            upstream = d_z_ce - hyper.lambda2 * d_z_jt
            backprop_mention(params, ids, a, z, upstream, lr, scale)

            ce_sum += ce
            jt_sum -= jt_value
            if not (np.isfinite(ce) and np.isfinite(jt_value)):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}, mention {mid}: "
                    f"extraction={ce}, truth={-jt_value}"
                )

        stats = {
            "epoch": epoch,
            "extraction": ce_sum / len(usable),
            "truth": jt_sum / len(usable),
            "embedding": je_sum / je_pairs if je_pairs else 0.0,
        }
        report.epochs.append(stats)
        logger.info(
            "epoch %d: extraction %.4f truth %.4f embedding %.4f",
            epoch, stats["extraction"], stats["truth"], stats["embedding"],
        )
        for name in ("v", "v_star", "w", "l", "t"):
            if not np.all(np.isfinite(getattr(params, name))):
                raise RuntimeError(f"non-finite parameter {name} after epoch {epoch}")

    report.wall_time_s = time.perf_counter() - t0
    params.quantize()
    return params, report


def _n_lfs(annotations) -> int:
    top = -1
    for _, lf_id, _ in annotations.entries:
        top = max(top, lf_id)
    return top + 1


def infer_all_truth(bags, annotations, params: ModelParams):
    """Inference-time truth assignment for every labeled mention with a
    non-empty bag: (mention_id, o_star, candidates)."""
    out = []
    for mid in annotations.labeled_ids:
        if len(bags[mid]) == 0:
            continue
        _, z = mention_forward(bags[mid].feature_ids, params)
        ann = annotations.by_mention[mid]
        cands = sorted({label for _, label in ann})
        out.append((mid, infer_true_label(ann, z, params), cands))
    return out
