import math
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import norm


def mean_stderr(values) -> Tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return 0.0, 0.0
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def binomial_stderr(k: int, n: int) -> float:
    if n <= 0:
        return 0.0
    p = k / n
    return math.sqrt(p * (1 - p) / n)


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Intervalo de Wilson para una frecuencia binomial k/n"""
    if n <= 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2)
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def ratio_stderr(num, den) -> Tuple[float, float]:
    """Cociente de medias mean(num)/mean(den) con error estándar por el método delta"""
    a = np.asarray(num, dtype=float)
    b = np.asarray(den, dtype=float)
    n = a.size
    ma, mb = a.mean(), b.mean()
    if mb == 0:
        return math.nan, math.nan
    ratio = ma / mb
    if n < 2:
        return float(ratio), 0.0
    cov = np.cov(a, b, ddof=1)
    var = (cov[0, 0] - 2 * ratio * cov[0, 1] + ratio * ratio * cov[1, 1]) / (mb * mb * n)
    return float(ratio), float(math.sqrt(max(var, 0.0)))


def isotonic_violation(values: Sequence[float], sigmas: Sequence[float]) -> float:
    """
    Mayor caída (en unidades de sigma) de una curva que debería ser no decreciente.

    Un valor <= 3 indica monotonía compatible con el ruido.
    """
    v = np.asarray(values, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    worst = 0.0
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            drop = v[i] - v[j]
            if drop > 0:
                scale = math.sqrt(s[i] ** 2 + s[j] ** 2) or 1e-12
                worst = max(worst, drop / scale)
    return worst


def crossing_point(xs, freqs, level: float = 0.5) -> float:
    """Interpolación lineal del punto donde una curva monótona alcanza `level`"""
    x = np.asarray(xs, dtype=float)
    f = np.maximum.accumulate(np.asarray(freqs, dtype=float))
    above = np.nonzero(f >= level)[0]
    if above.size == 0:
        return float(x[-1])
    i = int(above[0])
    if i == 0:
        return float(x[0])
    if f[i] == f[i - 1]:
        return float(x[i])
    t = (level - f[i - 1]) / (f[i] - f[i - 1])
    return float(x[i - 1] + t * (x[i] - x[i - 1]))
