import numpy as np
import pytest

from scenes import single_object_scene, toy_two_clusters
from eventgne.events import synthesize, two_circle_scene
from eventgne.kinematics import Theta
from eventgne.solver import (
    EquilibriumResult,
    LevelConstraint,
    brute_force_oracle,
    solve_nlevel,
    verify_equilibrium,
)


def result_of(*strategies):
    strategies = [np.asarray(z, dtype=float) for z in strategies]
    return EquilibriumResult(strategies, [Theta(0.0, 0.0)] * len(strategies), [0.0] * len(strategies))


@pytest.fixture(scope="module")
def solved():
    es = synthesize(two_circle_scene(grid=(48, 32), radius=4.0, speed=3.0, noise_events=6), seed=2)
    return es, solve_nlevel(2, es)


def test_fresh_solve_passes(solved):
    es, res = solved
    rep = verify_equilibrium(res, es)
    assert rep.passed
    for name in ("box", "budget", "masking"):
        assert rep.check(name).passed
    assert {c.name for c in rep.checks} >= {"bit_flip:1", "bit_flip:2"}
    assert rep.summary().endswith("verdict: pass")


def test_all_ones_pair_fails_budget_and_masking():
    es = toy_two_clusters()
    rep = verify_equilibrium(result_of(np.ones(10), np.ones(10)), es, bit_flips=False)
    assert not rep.passed
    assert not rep.check("budget").passed and rep.check("budget").violations == list(range(10))
    assert rep.check("masking").violations == [{"player": 2, "events": list(range(10))}]
    assert rep.check("box").passed
    assert "FAIL budget" in rep.summary()


def test_box_violation_names_player_and_event():
    es = toy_two_clusters()
    z = np.zeros(10)
    z[:5] = 1.0
    z[7] = 1.2
    rep = verify_equilibrium(result_of(z), es, bit_flips=False)
    assert rep.check("box").violations == [{"player": 1, "events": [7]}]
    assert not rep.passed


def test_oracle_optimum_passes_bit_flip_check():
    es = single_object_scene()
    z, _ = brute_force_oracle(es, LevelConstraint.unconstrained(len(es)))
    rep = verify_equilibrium(result_of(z), es, strict=True)
    assert rep.passed and rep.check("bit_flip:1").passed


def test_strict_mode_counts_bit_flips():
    es = toy_two_clusters()
    z = np.zeros(10)
    z[:4] = 1.0  # one event of the first cluster left out
    rep = verify_equilibrium(result_of(z), es)
    flip = rep.check("bit_flip:1")
    assert not flip.passed and 4 in flip.violations
    assert rep.passed and "warn bit_flip:1" in rep.summary()
    assert not verify_equilibrium(result_of(z), es, strict=True).passed


def test_report_serializes():
    es = toy_two_clusters()
    d = verify_equilibrium(result_of(np.ones(10)), es).to_dict()
    assert d["passed"] is True and d["strict"] is False
    assert [c["name"] for c in d["checks"]] == ["box", "budget", "masking", "bit_flip:1"]


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError, match="entries"):
        verify_equilibrium(result_of(np.ones(9)), toy_two_clusters())
