import numpy as np

from torusprony.cli import generate_separated_ensemble


def seeded_ensemble(seed: int, d: int, m: int, q_target: float):
    """Deterministic separated ensemble for a given seed."""
    return generate_separated_ensemble(d, m, q_target, np.random.default_rng(seed))
