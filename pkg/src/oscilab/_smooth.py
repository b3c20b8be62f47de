"""Smooth transition functions shared across the package.

Two families: a quintic polynomial smoothstep (C^2, cheap, used for spatial
cutoffs) and the classical exp(-1/t) partition step (C-infinity, used for
spectral windows where repeated functional calculus must not see kinks).
"""

import numpy as np


def smoothstep_quintic(t):
    """Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, 10t^3 - 15t^4 + 6t^5 between.

    C^2 across the junctions (first and second derivatives vanish at 0 and 1).
    """
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def smoothstep_quintic_prime(t):
    """Derivative of smoothstep_quintic with respect to t (zero outside [0,1])."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    d = tc * tc * (30.0 + tc * (-60.0 + 30.0 * tc))
    return np.where(inside, d, 0.0)


def cinf_step(t):
    """C-infinity unit step: 0 for t <= 0, 1 for t >= 1, smooth in between.

    Built from the standard exp(-1/t) mollifier pair, so every derivative
    vanishes at both junctions.
    """
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        ea = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        eb = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return ea / (ea + eb)


def spectral_bump(energy, lo, hi, margin):
    """C-infinity bump equal to 1 on [lo, hi] and 0 outside [lo-margin, hi+margin]."""
    energy = np.asarray(energy, dtype=float)
    return cinf_step((energy - (lo - margin)) / margin) * cinf_step(
        ((hi + margin) - energy) / margin
    )
