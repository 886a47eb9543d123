import logging

import numpy as np
from pydantic import BaseModel

from app.core.errors import InvalidParameterError
from app.core.rng import SeedLike, as_generator
from app.core.stats import binomial_stderr, wilson_interval

logger = logging.getLogger(__name__)


class OrientedEstimate(BaseModel):
    p: float
    depth: int
    trials: int
    survived: int
    frequency: float
    stderr: float
    wilson: tuple


def oriented_bond_percolation(p: float, depth: int, trials: int, rng: SeedLike) -> OrientedEstimate:
    """
    Percolación orientada de enlaces en el primer cuadrante de Z², vectorizada sobre
    ensayos y por diagonales: sobrevive si algún sitio a distancia l1 = depth es alcanzado.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"p debe estar en [0, 1], recibido {p}")
    gen = as_generator(rng)
    alive = np.ones((trials, 1), dtype=bool)
    for k in range(depth):
        vertical = gen.random((trials, k + 1)) < p
        horizontal = gen.random((trials, k + 1)) < p
        nxt = np.zeros((trials, k + 2), dtype=bool)
        # el sitio i del nivel k es (i, k-i): vertical -> (i, k+1-i), horizontal -> (i+1, k-i)
        nxt[:, : k + 1] |= alive & vertical
        nxt[:, 1:] |= alive & horizontal
        alive = nxt
    survived = int(alive.any(axis=1).sum())
    freq = survived / trials if trials else 0.0
    logger.debug(f"Percolación orientada p={p}, profundidad {depth}: {survived}/{trials}")
    return OrientedEstimate(
        p=p,
        depth=depth,
        trials=trials,
        survived=survived,
        frequency=freq,
        stderr=binomial_stderr(survived, trials),
        wilson=wilson_interval(survived, trials),
    )
