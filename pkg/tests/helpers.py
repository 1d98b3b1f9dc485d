"""Shared test oracles, independent of the code paths they check."""
from __future__ import annotations

import numpy as np

from robustsvm import grid_oracle


def zoom_grid_min(ds, norm, c, bounds=(-3.0, 3.0), res=33, stages=18):
    """Iterated grid oracle: an origin-containing first pass, then zoomed
    refinement boxes around the incumbent.  A stage whose argmin lands
    within two cells of its box boundary re-runs with a doubled radius, so
    the box tracks the minimizer of the convex objective instead of
    stranding in a shallow valley."""
    d = ds.dim + 1
    p, v = grid_oracle(ds, norm, c, bounds, res)
    radius = np.full(d, float(bounds[1] - bounds[0]) / 6.0)
    for _ in range(stages):
        attempts = 0
        while True:
            box = np.column_stack([p - radius, p + radius])
            cell = 2.0 * radius / (res - 1)
            cand_p, cand_v = grid_oracle(ds, norm, c, box, res, require_origin=False)
            near_edge = np.any(
                (cand_p - box[:, 0] <= 2.0 * cell) | (box[:, 1] - cand_p <= 2.0 * cell)
            )
            if cand_v < v:
                p, v = cand_p, cand_v
            if not near_edge or attempts >= 8:
                break
            radius = radius * 2.0
            attempts += 1
        radius = radius * (6.0 / (res - 1))
    return p, v
