"""Deterministic low-discrepancy sample points shared by all checks."""

import numpy as np
from scipy.stats import qmc

__all__ = ["sample_points", "DEFAULT_SEED", "EXCLUSION_RADIUS"]

DEFAULT_SEED = 0xC0FFEE
EXCLUSION_RADIUS = 0.1


def sample_points(n=200, seed=DEFAULT_SEED, exclude_origin=True):
    """Low-discrepancy points in [-1,1]^3 x [0,1].

    Returns (t, x) with t of shape (n,) and x of shape (3, n).  A ball of
    radius 0.1 around x=0 is excluded so that isotropic fields ``phi(|x|)``
    and their derivatives stay smooth at every sample.
    """
    sampler = qmc.Halton(d=4, seed=seed)
    t_out = np.empty(0)
    x_out = np.empty((3, 0))
    while t_out.shape[0] < n:
        raw = sampler.random(2 * n)
        x = (2.0 * raw[:, :3] - 1.0).T
        t = raw[:, 3]
        if exclude_origin:
            keep = np.linalg.norm(x, axis=0) >= EXCLUSION_RADIUS
            x, t = x[:, keep], t[keep]
        t_out = np.concatenate([t_out, t])
        x_out = np.concatenate([x_out, x], axis=1)
    return t_out[:n].copy(), x_out[:, :n].copy()
