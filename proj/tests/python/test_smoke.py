# Copyright (c) 2026 The modlab authors
# Licensed under the Apache License, Version 2.0.
"""Smoke tests for the python surface of the C++ core."""

import json
import math

import numpy as np
import pytest

import modlab


def test_version_is_exposed():
    assert isinstance(modlab.__version__, str)
    assert modlab.__version__


def test_task_sampling():
    z = modlab.sample_continuous([1, 0, 1, 0], seed=3)
    z = np.asarray(z).ravel()
    assert z.shape == (4,)
    assert z[1] == 0.0 and z[3] == 0.0
    assert 0.5 < abs(z[0]) < 1.0 and 0.5 < abs(z[2]) < 1.0

    d = np.asarray(modlab.sample_discrete([1, 1, 0, 0])).ravel()
    assert d == pytest.approx([1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0])


def test_mask_enumeration_and_predicates():
    masks = modlab.enumerate_masks(4, 2)
    assert len(masks) == 4 + 6
    assert modlab.is_compositional(masks)
    assert modlab.is_connected(masks)
    assert not modlab.is_compositional([[1, 1, 0, 0]])


def test_presets_round_trip():
    train, ood = modlab.preset_masks("theory-discrete-connected", seed=0)
    assert modlab.is_connected(train)
    assert modlab.is_compositional(train)
    as_sets = {tuple(m) for m in train}
    assert all(tuple(m) not in as_sets for m in ood)


def test_forward_pass_shapes():
    shared, fast = modlab.init_model("maml", n=3, o=2, h=4, L=2, M=3, seed=1)
    x = np.random.default_rng(0).normal(size=(5, 3))
    y = modlab.student_forward("maml", 3, 2, 4, 2, 3, shared, fast, x)
    assert np.asarray(y).shape == (5, 2)


def test_linear_map_fit_recovers_rotation():
    rng = np.random.default_rng(1)
    z = rng.normal(size=(40, 3))
    f_true = rng.normal(size=(3, 3))
    f_hat = np.asarray(modlab.fit_linear_map(z @ f_true.T, z))
    assert np.allclose(f_hat, f_true, atol=1e-8)


def test_experiment_runs_end_to_end(tmp_path):
    cfg = {
        "experiment": "theory",
        "preset": "theory-discrete-connected",
        "b_outer": 2,
        "b_inner": 8,
        "n_outer": 4,
        "n_inner": 2,
        "lr_inner": 0.01,
        "lr_outer": 0.003,
        "log_every": 2,
        "seed": 11,
    }
    code, metrics = modlab.run_experiment(json.dumps(cfg), str(tmp_path / "run"))
    assert code == 0
    parsed = json.loads(metrics)
    assert "alignment" in parsed and "train_loss" in parsed
    assert (tmp_path / "run" / "metrics.json").exists()
    assert isinstance(modlab.config_hash(json.dumps(cfg)), str)


def test_theorem_check_passes(tmp_path):
    code, metrics = modlab.run_check(3, str(tmp_path / "check"))
    assert code == 0
    assert json.loads(metrics)["pass"] is True


def test_obs_dims():
    assert modlab.pref_obs_dim() == 250
    assert modlab.goal_obs_dim() == 847
