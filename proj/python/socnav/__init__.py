"""Python bindings for the socnav crowd navigation library."""

from ._socnav import (
    ConfigError,
    InvalidActionError,
    World,
    action_space,
    action_speed,
    curriculum_rho_max,
    cvar,
    default_reward,
    discomfort_distance,
    epsilon_schedule,
    modified_reward,
    run_cli,
)

__all__ = [
    "ConfigError",
    "InvalidActionError",
    "World",
    "action_space",
    "action_speed",
    "curriculum_rho_max",
    "cvar",
    "default_reward",
    "discomfort_distance",
    "epsilon_schedule",
    "modified_reward",
    "run_cli",
]
