"""Close-range smearing of a pair interaction over the Compton length."""

import logging
from typing import Sequence, Union

import numpy as np

from lattice import Grid, second_partial_array
from lattice.operators import Scheme

logger = logging.getLogger(__name__)


def darwin_correct(
    V: np.ndarray,
    grid: Grid,
    lambda_c: Union[float, Sequence[float]],
    scheme: Scheme = "central",
) -> np.ndarray:
    """``V + (lambda_c^2 / 12) lap V``.

    A sequence gives one Compton length per axis, so each particle's axes are
    smeared over its own length.
    """
    lengths = np.broadcast_to(np.asarray(lambda_c, dtype=float), (grid.dims,))
    V = np.asarray(V, dtype=float)
    if not np.any(lengths):
        return V.copy()
    correction = sum(lengths[a] ** 2 / 12.0 * second_partial_array(V, grid, a, scheme) for a in range(grid.dims) if lengths[a])
    logger.debug("Darwin correction: max |dV| = %.3e", float(np.max(np.abs(correction))))
    return V + correction
