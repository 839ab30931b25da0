# Copyright (c) 2026 The modlab authors
# Licensed under the Apache License, Version 2.0.
"""Python surface of the modlab C++ core."""

from ._modlab import (  # noqa: F401
    __version__,
    config_hash,
    default_dims,
    enumerate_masks,
    fit_linear_map,
    goal_obs_dim,
    init_model,
    is_compositional,
    is_connected,
    module_alignment,
    pref_obs_dim,
    preset_masks,
    run_check,
    run_experiment,
    sample_continuous,
    sample_discrete,
    student_forward,
)
