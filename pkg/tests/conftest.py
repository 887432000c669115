import pytest

from weakrel.corpus import EntitySpan, Sentence
from weakrel.model import ModelParams


def build_sentence(sent_id, tokens, pos=None, entities=()):
    if pos is None:
        pos = ["NN"] * len(tokens)
    return Sentence(
        id=sent_id,
        tokens=tuple(tokens),
        pos=tuple(pos),
        entities=tuple(EntitySpan(*e) for e in entities),
    )


def random_params(rng, n_feat=6, n_lfs=3, k=3, n_v=5, n_z=4, phi1=0.8, phi0=0.2):
    return ModelParams(
        v=rng.normal(0, 0.5, size=(n_feat, n_v)),
        v_star=rng.normal(0, 0.5, size=(n_feat, n_v)),
        w=rng.normal(0, 0.5, size=(n_z, n_v)),
        l=rng.normal(0, 0.5, size=(n_lfs, n_z)),
        t=rng.normal(0, 0.5, size=(k + 1, n_z)),
        phi1=phi1,
        phi0=phi0,
    )


@pytest.fixture
def hussein_sentence():
    """The running example: two single-token entity mentions."""
    return build_sentence(
        "s0",
        ["Hussein", "was", "born", "in", "Amman"],
        ["NNP", "VBD", "VBN", "IN", "NNP"],
        entities=[(0, 1, 0), (4, 5, 4)],
    )
