"""Context-aware true-label discovery for conflicting annotations.

For a mention with context embedding z and annotations {(lf_i, o_i)}, each
annotation contributes

    log( sigma(z . l_i) * phi1^d * (1-phi1)^(1-d)
         + (1 - sigma(z . l_i)) * phi0^d * (1-phi0)^(1-d) )

to the log likelihood of a candidate true label, where d = 1 iff o_i equals
the candidate.  A labeling function is trusted like a reliable source only
where sigma(z . l_i) is high, i.e. on contexts inside its proficient subset;
elsewhere it is treated as close to a random guesser.  The inferred label is
the arg max over candidates, ties broken toward the smallest label index
(None first).
"""

from __future__ import annotations

import math

import numpy as np

from .model import ModelParams, sigmoid


def _sigmas(annotations, z, params: ModelParams):
    """sigma(z . l_i) per annotation, in annotation order."""
    return [sigmoid(float(np.dot(z, params.l[lf_id]))) for lf_id, _ in annotations]


def _loglik(annotations, sigmas, candidate, phi1, phi0):
    total = 0.0
    for (_, label), s in zip(annotations, sigmas):
        if label == candidate:
            total += math.log(s * phi1 + (1.0 - s) * phi0)
        else:
            total += math.log(s * (1.0 - phi1) + (1.0 - s) * (1.0 - phi0))
    return total


def jt_local(annotations, z, params: ModelParams, candidate) -> float:
    """Log likelihood of `candidate` being the true label of a mention,
    summed over its annotations.  Finite for phi0, phi1 in (0, 1)."""
    if not annotations:
        raise ValueError("mention has no annotations")
    sigmas = _sigmas(annotations, z, params)
    return _loglik(annotations, sigmas, candidate, params.phi1, params.phi0)


def candidate_labels(annotations, params: ModelParams, restrict=True):
    """Distinct annotated labels, or the full label space with restrict=False."""
    if restrict:
        return sorted({label for _, label in annotations})
    return list(range(params.n_labels))


# scores closer than this are treated as ties; exact mathematical ties can
# differ by round-off depending on summation order
_TIE_EPS = 1e-9


def infer_true_label(annotations, z, params: ModelParams, restrict=True) -> int:
    """arg max of jt_local over the candidate set; ties (within round-off)
    break toward the smallest label index, None first."""
    sigmas = _sigmas(annotations, z, params)
    best_label = None
    best_score = -math.inf
    for cand in candidate_labels(annotations, params, restrict):
        score = _loglik(annotations, sigmas, cand, params.phi1, params.phi0)
        if score > best_score + _TIE_EPS:
            best_score = score
            best_label = cand
    return best_label


def jt_gradients(annotations, z, params: ModelParams, o_star):
    """Gradients of the per-mention log likelihood at the fixed label o_star.

    Returns (d/dz, [(lf_id, d/dl_i), ...]).  o_star is treated as a constant
    (alternating optimization).  For each annotation the scalar chain factor
    is (a - b) * s * (1 - s) / (s*a + (1-s)*b) with s = sigma(z . l_i) and
    (a, b) the phi factors selected by whether the annotation agrees with
    o_star.
    """
    phi1, phi0 = params.phi1, params.phi0
    dz = np.zeros_like(z)
    dls = []
    for (lf_id, label), s in zip(annotations, _sigmas(annotations, z, params)):
        if label == o_star:
            a, b = phi1, phi0
        else:
            a, b = 1.0 - phi1, 1.0 - phi0
        coef = (a - b) * s * (1.0 - s) / (s * a + (1.0 - s) * b)
        dz += coef * params.l[lf_id]
        dls.append((lf_id, coef * z))
    return dz, dls


def majority_vote(annotations) -> int:
    """One vote per annotation; ties broken toward the smallest label index.
    The context-free baseline the model is measured against."""
    counts: dict[int, int] = {}
    for _, label in annotations:
        counts[label] = counts.get(label, 0) + 1
    best = max(counts.values())
    return min(label for label, n in counts.items() if n == best)


def write_truth_tsv(assignments, label_space, path):
    """Export TSV: mention_id<TAB>inferred_label<TAB>candidates.

    `assignments` is an iterable of (mention_id, inferred_label,
    candidate_labels)."""
    with open(path, "w", encoding="utf-8") as fh:
        for mid, label, candidates in assignments:
            names = ",".join(label_space.name_of(c) for c in candidates)
            fh.write(f"{mid}\t{label_space.name_of(label)}\t{names}\n")
