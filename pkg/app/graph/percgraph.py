import logging
from collections import deque
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.core.errors import InvalidParameterError, TopologyError
from app.geometry.annulus import Annulus, area, contains
from app.graph.dsu import DisjointSet
from app.pointfield.field import Box, PointField, Topology

logger = logging.getLogger(__name__)


@dataclass
class PercGraph:
    """Grafo G_A sobre un campo: x ~ y sii y - x ∈ A. Inmutable tras build_graph"""

    field: PointField
    annulus: Annulus
    dsu: DisjointSet
    degree: np.ndarray
    edges: Tuple[np.ndarray, np.ndarray]

    @property
    def n_points(self) -> int:
        return len(self.field)

    @property
    def n_edges(self) -> int:
        return int(len(self.edges[0]))


class ClusterStats(BaseModel):
    n_points: int = Field(..., ge=0)
    n_components: int = Field(..., ge=0)
    largest_size: int = Field(..., ge=0)
    largest_fraction: float = Field(..., ge=0, le=1)
    crossing_lr: bool
    crossing_bt: bool
    mean_degree: float = Field(..., ge=0)


def build_graph(field: PointField, a: Annulus) -> PercGraph:
    """Une en el DSU exactamente los pares del anillo y acumula los grados"""
    i, j = field.annulus_pairs(a)
    n = len(field)
    degree = np.bincount(i, minlength=n) + np.bincount(j, minlength=n)
    dsu = DisjointSet(n)
    dsu.union_pairs(i, j)
    dsu.find_all()
    logger.debug(f"Grafo construido: {n} puntos, {len(i)} aristas, {dsu.n_components} componentes")
    return PercGraph(field=field, annulus=a, dsu=dsu, degree=degree, edges=(i, j))


def component_labels(g: PercGraph) -> np.ndarray:
    """Etiquetas 0..k-1 por orden de primera aparición"""
    roots = g.dsu.find_all()
    if roots.size == 0:
        return roots.copy()
    _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    return rank[inverse]


def _crosses(labels: np.ndarray, low_side: np.ndarray, high_side: np.ndarray) -> bool:
    return bool(np.intersect1d(labels[low_side], labels[high_side]).size)


def cluster_stats(g: PercGraph, edge_margin: Optional[float] = None) -> ClusterStats:
    """
    Observables de tamaño finito. Hay cruce izquierda-derecha si una misma componente
    tiene un punto a distancia <= edge_margin del borde izquierdo y otro del derecho.
    """
    box = g.field.box
    if box.topology == Topology.TORUS:
        raise TopologyError("los cruces no están definidos en un toro")
    margin = g.annulus.r if edge_margin is None else float(edge_margin)
    n = g.n_points
    if n == 0:
        return ClusterStats(
            n_points=0, n_components=0, largest_size=0, largest_fraction=0.0,
            crossing_lr=False, crossing_bt=False, mean_degree=0.0,
        )
    labels = component_labels(g)
    sizes = np.bincount(labels)
    pts = g.field.points
    (x0, y0), (x1, y1) = box.origin, box.upper
    return ClusterStats(
        n_points=n,
        n_components=int(sizes.size),
        largest_size=int(sizes.max()),
        largest_fraction=float(sizes.max() / n),
        crossing_lr=_crosses(labels, pts[:, 0] <= x0 + margin, pts[:, 0] >= x1 - margin),
        crossing_bt=_crosses(labels, pts[:, 1] <= y0 + margin, pts[:, 1] >= y1 - margin),
        mean_degree=float(g.degree.mean()),
    )


def brute_force_components(field: PointField, a: Annulus) -> np.ndarray:
    """Oráculo: BFS sobre la adyacencia completa O(N²); etiquetas por primera aparición"""
    pts = field.points
    n = len(pts)
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels
    disp = field.box.displacement(pts[None, :, :] - pts[:, None, :])
    adj = contains(a, disp)
    adj = np.asarray(adj, dtype=bool).reshape(n, n)
    np.fill_diagonal(adj, False)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = current
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in np.nonzero(adj[v] & (labels < 0))[0]:
                labels[w] = current
                queue.append(int(w))
        current += 1
    return labels


def scale_field(field: PointField, factor: float) -> PointField:
    """Escala coordenadas, caja y celda por `factor`; la intensidad cambia en factor⁻²"""
    if factor <= 0:
        raise InvalidParameterError("el factor de escala debe ser > 0")
    box = Box(
        origin=(field.box.origin[0] * factor, field.box.origin[1] * factor),
        width=field.box.width * factor,
        height=field.box.height * factor,
        topology=field.box.topology,
    )
    intensity = None if field.intensity is None else field.intensity / (factor * factor)
    return PointField(
        box=box,
        points=field.points * factor,
        cell_size=field.cell_size * factor,
        seed=field.seed,
        intensity=intensity,
    )


def expected_degree(a: Annulus, intensity: float = 1.0) -> float:
    """|A| es el número esperado de vecinos de un punto a intensidad 1"""
    return area(a) * intensity
