import numpy as np
import pytest

from gen import random_network

from netstab import gallery
from netstab.delays import dedelay, undelay
from netstab.errors import ConvergenceError, NetworkError
from netstab.expr import Interval, Var
from netstab.network import build_network, network_from_exprs
from netstab.sim import (
    conjugacy_check,
    find_fixed_point,
    iterate_orbit,
    verify_global_attraction,
)
from netstab.stability import analyze

R = Interval.whole()


def test_orbit_geometric():
    net = build_network([("x1", R)], [("x1", "0.5*x1")])
    traj = iterate_orbit(net, [[2.0]], 3)
    assert traj.states.ravel().tolist() == [2.0, 1.0, 0.5, 0.25]
    assert traj.steps == 3
    assert traj.diverged_at is None


def test_orbit_zero_fixed_point_of_delayed_pair():
    net = gallery.delayed_pair(0.5, 0.1, 1.0)
    traj = iterate_orbit(net, np.zeros((4, 2)), 20)
    assert np.abs(traj.states).max() == 0.0


def test_orbit_snapshot_indexing():
    net = build_network([("x1", R)], [("x1", "x1[-1] + 1")])
    traj = iterate_orbit(net, [[0.0], [10.0]], 2)
    assert traj.snapshot(-1) == [0.0]
    assert traj.snapshot(0) == [10.0]
    # x^1 reads x1[-1] = x^{-1} = 0; x^2 reads x^0 = 10
    assert traj.snapshot(1) == [1.0]
    assert traj.snapshot(2) == [11.0]


def test_orbit_divergence_flag():
    net = build_network([("x1", Interval(1, 10))], [("x1", "exp(x1)")])
    traj = iterate_orbit(net, [[5.0]], 50)
    assert traj.diverged_at is not None
    assert np.isfinite(traj.states).all()


def test_orbit_domain_exit_flag():
    net = build_network([("x1", Interval(-1, 1))], [("x1", "x1 + 1")])
    traj = iterate_orbit(net, [[0.5]], 3)
    assert traj.left_domain
    assert traj.steps == 3  # iteration continues on the real line


def test_orbit_rejects_bad_history():
    net = gallery.delayed_pair(0.5, 0.1, 1.0)
    with pytest.raises(NetworkError):
        iterate_orbit(net, np.zeros((2, 2)), 5)
    with pytest.raises(NetworkError):
        iterate_orbit(net, np.full((4, 2), np.nan), 5)


def test_orbit_repelling_fixed_point_moves_away():
    # the distributed pair's origin repels: the orbit leaves a 0.11 ball
    net = gallery.distributed_pair(eps=0.5, b=1.0)
    traj = iterate_orbit(net, [[0.0, 0.0], [0.1, 0.1]], 50)
    dists = np.abs(traj.states).max(axis=1)
    assert dists.max() > 0.12
    assert dists[-10:].max() > 0.02  # does not settle back to the origin


def test_orbit_csv():
    net = build_network([("x1", R)], [("x1", "0.5*x1")])
    csv = iterate_orbit(net, [[2.0]], 2).to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "step,x1"
    assert lines[1] == "0,2.0"
    assert lines[-1] == "2,0.5"


def test_fixed_point_linear():
    net = build_network([("x1", R)], [("x1", "0.5*x1 + 1")])
    fp = find_fixed_point(net, [0.0], tol=1e-12)
    assert fp[0] == pytest.approx(2.0, abs=1e-10)


def test_fixed_point_distributed_pair():
    net = gallery.distributed_pair()
    fp = find_fixed_point(net, [0.05, -0.03], tol=1e-11)
    assert np.abs(fp).max() < 1e-9


def test_fixed_point_odd_symmetry():
    net = gallery.undelayed_pair(0.5, 0.1, 1.0)
    fp = find_fixed_point(net, [0.4, -0.2], tol=1e-12)
    assert np.abs(fp).max() < 1e-10


def test_fixed_point_damping_handles_overshoot():
    # |f'| > 1 with sign flip: plain iteration oscillates, damping settles
    net = build_network([("x1", R)], [("x1", "-1.2*x1 + 1")])
    fp = find_fixed_point(net, [3.0], tol=1e-10)
    assert fp[0] == pytest.approx(1.0 / 2.2, abs=1e-8)


def test_fixed_point_cap(monkeypatch):
    monkeypatch.setenv("NETSTAB_MAX_ITERS", "5")
    net = build_network([("x1", R)], [("x1", "0.999*x1 + 1")])
    with pytest.raises(ConvergenceError):
        find_fixed_point(net, [0.0], tol=1e-14)


def test_fixed_points_of_delayed_and_undelayed_coincide():
    rng = np.random.default_rng(109)
    for _ in range(10):
        net = random_network(rng, 3, max_delay=2, amplitude=0.15, require_delay=True)
        guess = rng.uniform(-1, 1, 3)
        try:
            fp_d = find_fixed_point(net, guess, tol=1e-11)
            fp_u = find_fixed_point(undelay(net), fp_d, tol=1e-11)
        except ConvergenceError:
            continue
        assert np.abs(fp_d - fp_u).max() < 1e-8


def test_attraction_stable_pair():
    verdict = verify_global_attraction(
        gallery.undelayed_pair(0.5, 0.1, 1.0), trials=20, steps=5000, tol=1e-8, seed=0
    )
    assert verdict.converged
    assert verdict.final_diameter <= 1e-8
    assert verdict.witness is not None


def test_attraction_contraction_to_zero():
    net = build_network([("x1", R)], [("x1", "0.5*x1")])
    verdict = verify_global_attraction(net, trials=5, steps=2000, tol=1e-8, seed=1)
    assert verdict.converged
    assert abs(verdict.witness[0]) < 1e-8


def test_attraction_fails_on_repeller():
    verdict = verify_global_attraction(
        gallery.distributed_pair(), trials=10, steps=2000, tol=1e-8, seed=0
    )
    assert not verdict.converged


def test_attraction_seed_reproducible():
    net = gallery.undelayed_pair(0.5, 0.1, 1.0)
    a = verify_global_attraction(net, trials=5, steps=500, seed=3)
    b = verify_global_attraction(net, trials=5, steps=500, seed=3)
    assert a.to_json() == b.to_json()


def test_attraction_verdict_json():
    verdict = verify_global_attraction(
        gallery.undelayed_pair(0.5, 0.1, 1.0), trials=4, steps=1000, seed=0
    )
    data = verdict.to_json_dict()
    assert data["schema"] == "netstab-report/1"
    assert data["converged"] is True
    assert data["trials"] == 4


def test_conjugacy_trivial_on_undelayed():
    net = gallery.undelayed_pair(0.5, 0.1, 1.0)
    assert conjugacy_check(net, [[0.3, -0.4]], 50)


def test_conjugacy_delayed_pair():
    net = gallery.delayed_pair(0.5, 0.1, 1.0, c1=0.1)
    rng = np.random.default_rng(4)
    assert conjugacy_check(net, rng.uniform(-2, 2, (4, 2)), 100)


def test_conjugacy_negative_control():
    # corrupt the delay wiring: line(1,2) reads line(2,1) instead of line(1,1)
    net = gallery.delayed_pair(0.5, 0.1, 1.0)
    aug = dedelay(net)
    broken_updates = dict(aug.net.updates)
    broken_updates["x1_d2"] = Var("x2_d1", 0)
    broken = network_from_exprs(
        aug.net.nodes, aug.net.domains, broken_updates, run_normalize=False
    )

    rng = np.random.default_rng(5)
    history = rng.uniform(-2, 2, (4, 2))
    x0 = np.array([
        history[net.T - 1 - aug.projection[c][1], net.nodes.index(aug.projection[c][0])]
        for c in aug.coords
    ])
    good = iterate_orbit(aug.net, x0[None, :], 40)
    bad = iterate_orbit(broken, x0[None, :], 40)
    assert np.abs(good.states[:, :2] - bad.states[:, :2]).max() > 1e-6


def test_conjugacy_random_suite_small():
    rng = np.random.default_rng(113)
    for _ in range(20):
        net = random_network(
            rng, int(rng.integers(2, 5)), max_delay=3,
            amplitude=float(rng.choice([0.2, 0.6])), require_delay=True,
        )
        history = rng.uniform(-2, 2, (net.T, net.size))
        assert conjugacy_check(net, history, 100)


def test_stability_implies_empirical_attraction_small():
    rng = np.random.default_rng(127)
    done = 0
    while done < 8:
        net = random_network(rng, int(rng.integers(2, 5)), max_delay=2, amplitude=0.12)
        if analyze(net).rho >= 1 - 1e-3:
            continue
        verdict = verify_global_attraction(net, trials=10, steps=3000, tol=1e-6, seed=11)
        assert verdict.converged, net.name
        done += 1
