import numpy as np
import pytest

from pframe.battery import (
    CSV_FIELDS,
    RunConfig,
    build_instance,
    random_frame,
    rows_to_csv,
    run_battery,
    summarize,
    trial_seed,
)
from pframe.errors import NotAFrame
from pframe.frame import frame_bounds
from pframe.perturb import Theorem


def test_random_frame_clears_lower_bound(rng):
    for dim in range(1, 6):
        mu = random_frame(rng, dim, dim + 2)
        assert frame_bounds(mu).lower > 1e-8
        assert abs(mu.masses.sum() - 1) <= 1e-12


def test_random_frame_gives_up_when_impossible(rng):
    with pytest.raises(NotAFrame):
        random_frame(rng, 3, 2)


@pytest.mark.parametrize(
    "kwargs",
    [{"trials": 0}, {"dims": (3, 2)}, {"atoms": (0, 4)}, {"scales": ()}, {"scales": (0.1, -1.0)}, {"seed": -1}],
)
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_build_instance_targets_perturbed_measure(rng):
    config = RunConfig()
    for theorem in Theorem:
        cert, perturbed = build_instance(theorem, rng, 1e-3, config)
        assert cert.theorem is theorem
        assert cert.target_digest == perturbed.digest()


def test_trial_seeds_distinct_and_stable():
    seeds = [trial_seed(3, t) for t in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [trial_seed(3, t) for t in range(100)]
    assert trial_seed(3, 0) != trial_seed(4, 0)


def test_battery_rows_sorted_and_sound():
    rows = run_battery(RunConfig(seed=2, trials=7))
    assert len(rows) == 7 * len(Theorem)
    order = [t.value for t in Theorem]
    keys = [(order.index(r["theorem"]), r["seed"]) for r in rows]
    assert keys == sorted(keys)
    summary = summarize(rows)
    assert all(s["violations"] == 0 and s["trials"] == 7 for s in summary.values())
    for r in rows:
        assert (r["verdict"] is None) != r["premise_ok"]


def test_battery_parallel_matches_serial():
    serial = rows_to_csv(run_battery(RunConfig(seed=9, trials=4)))
    parallel = rows_to_csv(run_battery(RunConfig(seed=9, trials=4, workers=2)))
    assert serial == parallel


def test_battery_corrupt_mode_flags_violations():
    rows = run_battery(RunConfig(seed=1, trials=3, corrupt=True))
    summary = summarize(rows)
    assert sum(s["violations"] for s in summary.values()) == sum(s["premise_ok"] for s in summary.values()) > 0


def test_csv_layout():
    text = rows_to_csv(run_battery(RunConfig(seed=0, trials=1)))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == len(CSV_FIELDS)
        assert cells[4] in ("true", "false")
    assert np.isfinite([float(line.split(",")[2]) for line in lines[1:]]).all()
