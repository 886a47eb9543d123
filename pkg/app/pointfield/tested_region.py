import math
from collections import defaultdict
from typing import List, Optional

import numpy as np

from app.geometry.annulus import Annulus, Norm


class TestedRegion:
    """
    Unión de anillos A_ε(z, r) y bolas de radio `ball_radius` alrededor de los centros
    registrados. query(p) es cierto sii p cae en alguno de ellos.

    Mutación (add) exclusiva; las consultas entre mutaciones pueden ser concurrentes.
    """

    __test__ = False  # evita que pytest intente recolectarla

    def __init__(self, annulus: Annulus, ball_radius: Optional[float] = None):
        self.annulus = annulus
        self.ball_radius = annulus.ball_radius if ball_radius is None else float(ball_radius)
        self.cell = max(annulus.r, self.ball_radius, 1e-12)
        self._xy: List[tuple] = []
        self._annulus_flag: List[bool] = []
        self._ball_flag: List[bool] = []
        self._grid = defaultdict(list)
        self._round = annulus.norm == Norm.ROUND

    def __len__(self) -> int:
        return len(self._xy)

    @property
    def centers_annuli(self) -> List[tuple]:
        return [z for z, f in zip(self._xy, self._annulus_flag) if f]

    @property
    def centers_balls(self) -> List[tuple]:
        return [z for z, f in zip(self._xy, self._ball_flag) if f]

    def _cell(self, x: float, y: float):
        return int(math.floor(x / self.cell)), int(math.floor(y / self.cell))

    def add(self, z, annulus: bool = True, ball: bool = True) -> int:
        """Registra un centro; devuelve su identificador"""
        x, y = float(z[0]), float(z[1])
        idx = len(self._xy)
        self._xy.append((x, y))
        self._annulus_flag.append(annulus)
        self._ball_flag.append(ball)
        self._grid[self._cell(x, y)].append(idx)
        return idx

    def query(self, p, skip_annulus: Optional[int] = None) -> bool:
        """
        ¿Está p cubierto? `skip_annulus` ignora el anillo (no la bola) de ese centro,
        que es como se excluye al padre durante una exploración.
        """
        px, py = float(p[0]), float(p[1])
        cx, cy = self._cell(px, py)
        r_out, r_in = self.annulus.r, self.annulus.inner
        ball = self.ball_radius
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for idx in self._grid.get((gx, gy), ()):
                    zx, zy = self._xy[idx]
                    dx, dy = px - zx, py - zy
                    dist = math.hypot(dx, dy)
                    if self._ball_flag[idx] and dist <= ball:
                        return True
                    if self._annulus_flag[idx] and idx != skip_annulus:
                        n = dist if self._round else max(abs(dx), abs(dy))
                        if r_in <= n <= r_out:
                            return True
        return False

    def covered(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.array([self.query(p) for p in pts], dtype=bool)
