import itertools

import numpy as np
import pytest

import qregion as qr
from qregion.sim import SimError
from qregion.statespec import BranchSpec, StateSpec

from helpers import bell_state, ghz_state, product_state, random_sender_state


def test_schedule_ghz():
    sch = qr.multiparty_schedule(ghz_state(), "R", ("A1", "A2"))
    assert sch.thresholds == pytest.approx((1.0, 0.5), abs=1e-8)
    assert sch.threshold("A1") == pytest.approx(1.0, abs=1e-8)


def test_schedule_product_state():
    sch = qr.multiparty_schedule(product_state(), "R", ("A2", "A1"))
    assert sch.thresholds == pytest.approx((0.0, 0.0), abs=1e-9)


def test_schedule_telescopes_and_matches_corners():
    for seed in range(6):
        state = random_sender_state(3, 40 + seed)
        rc = qr.region_constants(state, "R")
        for perm in itertools.permutations(rc.senders):
            sch = qr.multiparty_schedule(state, "R", perm)
            assert sum(sch.thresholds) \
                == pytest.approx(rc.value(rc.senders), abs=1e-8)
            pt = qr.corner_point(rc, perm)
            for sender in perm:
                assert abs(sch.threshold(sender)
                           - pt.rate(sender)) <= 1e-8


def test_schedule_rejects_bad_permutation():
    with pytest.raises(SimError):
        qr.multiparty_schedule(ghz_state(), "R", ("A1", "R"))


def test_haar_unitary_contracts():
    u = qr.haar_unitary(8, 123)
    assert np.abs(u @ u.conj().T - np.eye(8)).max() <= 1e-9
    again = qr.haar_unitary(8, 123)
    assert np.abs(u - again).max() == 0.0
    other = qr.haar_unitary(8, 124)
    assert np.abs(u - other).max() > 1e-3

    rho = np.diag([0.7, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0])
    rotated = u @ rho @ u.conj().T
    assert np.allclose(np.sort(np.linalg.eigvalsh(rotated)),
                       np.sort(np.diag(rho)), atol=1e-9)

    with pytest.raises(SimError):
        qr.haar_unitary(0, 1)
    with pytest.raises(SimError):
        qr.haar_unitary(512, 1)


def test_ncopy_grouping_adds_entropy():
    state = qr.random_pure_state(("A", "R"), (2, 2), 3)
    grouped = qr.ncopy_state(state, 3)
    assert grouped.dims == (8, 8)
    h1 = qr.entropy(state, {"A"})
    h3 = qr.entropy(grouped, {"A"})
    assert h3 == pytest.approx(3 * h1, abs=1e-9)


def test_typical_projection_maximally_mixed_is_identity():
    bell = bell_state()
    tp = qr.typical_projection(bell, "A", 3, 0.1)
    assert tp.typical_dim == 8
    assert tp.retained_probability == pytest.approx(1.0, abs=1e-9)
    assert np.abs(tp.projector - np.eye(8)).max() <= 1e-9


def test_typical_projection_pure_marginal():
    prod = product_state(("A", "R"))
    tp = qr.typical_projection(prod, "A", 4, 0.3)
    assert tp.typical_dim == 1
    assert tp.retained_probability == pytest.approx(1.0, abs=1e-12)


def test_typical_projection_binomial_oracle():
    spec = StateSpec(family="mixture", labels=("A", "R"), dims=(2, 2),
                     reference="R",
                     branches=(BranchSpec(1 / 3, ((1, 0), (1, 0))),
                               BranchSpec(2 / 3, ((0, 1), (0, 1)))))
    st = qr.build_state(spec)
    n, delta = 6, 0.5
    tp = qr.typical_projection(st, "A", n, delta)

    # independent oracle: binomial tail with the identical typicality rule
    ev = np.array([2 / 3, 1 / 3])  # descending, as the spectrum sorts
    logp = np.log2(ev)
    h = float(-(ev * logp).sum())
    import math
    expected = 0.0
    for j in range(n + 1):
        counts = np.array([n - j, j])
        if abs(-float(counts @ logp) / n - h) <= delta:
            expected += math.comb(n, j) * float(np.prod(ev ** counts))
    assert tp.retained_probability == pytest.approx(expected, abs=1e-12)


def test_typical_projection_warns_when_tight():
    spec = StateSpec(family="mixture", labels=("A", "R"), dims=(2, 2),
                     reference="R",
                     branches=(BranchSpec(0.75, ((1, 0), (1, 0))),
                               BranchSpec(0.25, ((0, 1), (0, 1)))))
    st = qr.build_state(spec)
    with pytest.warns(UserWarning, match="retains"):
        tp = qr.typical_projection(st, "A", 4, 0.2)
    assert tp.retained_probability < 0.5


def test_decoupling_bell_endpoints():
    bell = bell_state()
    curve = qr.decoupling_curve(bell, "A", "R", 1, [0.0, 1.0],
                                trials=4, seed=2)
    q0, q1 = curve.points
    assert q0.mean_dist == pytest.approx(0.75, abs=1e-12)
    assert q0.stderr_dist <= 1e-12
    assert q1.mean_dist <= 1e-9


def test_decoupling_monotone_bell_three_copies():
    bell = bell_state()
    curve = qr.decoupling_curve(bell, "A", "R", 3, [0, 1 / 3, 2 / 3, 1.0],
                                trials=50, seed=5)
    means = [p.mean_dist for p in curve.points]
    errs = [p.stderr_dist for p in curve.points]
    for i in range(len(means) - 1):
        slack = 2.0 * np.hypot(errs[i], errs[i + 1])
        assert means[i + 1] <= means[i] + slack


def test_decoupling_reproducible():
    state = qr.random_pure_state(("A", "R"), (2, 2), 6)
    kw = dict(n=2, grid=[0.0, 0.5, 1.0], trials=20, seed=77)
    a = qr.decoupling_curve(state, "A", "R", **kw)
    b = qr.decoupling_curve(state, "A", "R", **kw)
    assert a.to_csv() == b.to_csv()


def test_decoupling_invariant_under_fixed_prerotation():
    state = qr.random_pure_state(("A", "R"), (2, 2), 8)
    w = qr.haar_unitary(2, 99)
    pre = np.kron(w, np.eye(2))
    rotated = qr.MultipartyState(("A", "R"), (2, 2),
                                 pre @ state.op @ pre.conj().T)
    kw = dict(n=2, grid=[0.5], trials=150, seed=13)
    a = qr.decoupling_curve(state, "A", "R", **kw).points[0]
    b = qr.decoupling_curve(rotated, "A", "R", **kw).points[0]
    slack = 5.0 * np.hypot(a.stderr_dist, b.stderr_dist)
    assert abs(a.mean_dist - b.mean_dist) <= slack


def test_decoupling_with_typical_projection():
    bell = bell_state()
    curve = qr.decoupling_curve(bell, "A", "R", 3, [0.0, 1.0], trials=5,
                                seed=4, typical_delta=2.0)
    assert curve.retained_probability == pytest.approx(1.0, abs=1e-9)
    assert curve.points[1].mean_dist <= 1e-9


def test_decoupling_grid_notes_and_errors():
    bell = bell_state()
    curve = qr.decoupling_curve(bell, "A", "R", 2, [0.4], trials=2, seed=1)
    assert curve.points[0].sent_qubits == 0
    assert any("floored" in n for n in curve.notes)

    with pytest.raises(SimError):
        qr.decoupling_curve(bell, "A", "R", 1, [1.5], trials=2, seed=1)

    trit = qr.random_pure_state(("A", "R"), (3, 3), 0)
    with pytest.raises(SimError, match="qubit split"):
        qr.decoupling_curve(trit, "A", "R", 1, [1.0], trials=2, seed=1)


def test_decoupling_three_label_state():
    # classically correlated sender/reference pair inside a GHZ state:
    # at Q = 0 the joint-vs-product distance is 1/2 for any unitary
    g = ghz_state()
    curve = qr.decoupling_curve(g, "A1", "R", 1, [0.0, 1.0],
                                trials=6, seed=3)
    assert curve.points[0].mean_dist == pytest.approx(0.5, abs=1e-10)
    assert curve.points[0].stderr_dist <= 1e-12
    assert curve.points[1].mean_dist <= 1e-9


def test_decoupling_csv_format():
    bell = bell_state()
    curve = qr.decoupling_curve(bell, "A", "R", 1, [0.0, 1.0],
                                trials=3, seed=2)
    lines = curve.to_csv().strip().split("\n")
    assert lines[0] == "Q,trials,mean_dist,stderr_dist,mean_fid"
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "0"
