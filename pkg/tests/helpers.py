"""Shared state builders for the test suite."""
from __future__ import annotations

import numpy as np

from qregion import build_state, random_pure_state
from qregion.statespec import BranchSpec, StateSpec


def ghz_state(labels=("A1", "A2", "R"), reference="R"):
    return build_state(StateSpec(family="ghz", labels=tuple(labels),
                                 dims=(2,) * len(labels),
                                 reference=reference))


def bell_state(labels=("A", "R"), reference="R"):
    return build_state(StateSpec(family="bell", labels=tuple(labels),
                                 dims=(2,) * len(labels),
                                 pair=tuple(labels[:2]),
                                 reference=reference))


def bell_with_spectator():
    """Bell pair on (A1, R) with A2 held in |0>."""
    return build_state(StateSpec(family="bell",
                                 labels=("A1", "A2", "R"), dims=(2, 2, 2),
                                 pair=("A1", "R"), reference="R"))


def bell_between_senders():
    """Bell pair between the two senders; the reference is trivial."""
    return build_state(StateSpec(family="bell",
                                 labels=("A1", "A2", "R"), dims=(2, 2, 1),
                                 pair=("A1", "A2"), reference="R"))


def product_state(labels=("A1", "A2", "R"), reference="R"):
    return build_state(StateSpec(family="product", labels=tuple(labels),
                                 dims=(2,) * len(labels),
                                 basis=(0,) * len(labels),
                                 reference=reference))


def random_sender_state(m, seed, d_ref=None):
    """Random pure state with m qubit senders and one reference."""
    d_ref = d_ref or 2 ** m
    labels = tuple(f"A{i + 1}" for i in range(m)) + ("R",)
    dims = (2,) * m + (d_ref,)
    return random_pure_state(labels, dims, seed)


def random_ket(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_mixture_spec(rng, labels, dims, branches=3):
    """Random separable mixture with explicit provenance branches."""
    weights = rng.dirichlet(np.ones(branches) * 2.0)
    weights = weights / weights.sum()
    brs = []
    for w in weights:
        kets = tuple(tuple(random_ket(rng, d)) for d in dims)
        brs.append(BranchSpec(float(w), kets))
    # force an exact unit sum against float drift
    total = sum(b.weight for b in brs)
    brs[-1] = BranchSpec(brs[-1].weight + (1.0 - total), brs[-1].kets)
    return StateSpec(family="mixture", labels=tuple(labels),
                     dims=tuple(dims), reference=labels[-1],
                     branches=tuple(brs))


def random_mixture_state(rng, labels=("X1", "X2"), dims=(2, 2), branches=3):
    return build_state(random_mixture_spec(rng, labels, dims, branches))
