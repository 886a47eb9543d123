"""
Exploración de un enlace orientado x → y con respecto a (P, Q).

Fase 1: desde cada x_i ∈ P se explora el campo como un proceso de ramificación con
tope K por generación durante T generaciones. Fase 2: desde los puntos x_i″ que
aterrizaron en el cuadrado objetivo se hacen crecer los conjuntos V_i.
Los candidatos de un nodo se examinan en orden lexicográfico (x, y), así que el
resultado depende solo de los puntos examinados y de la secuencia del generador.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.spatial import cKDTree

from app.core.errors import InitializationError, PreconditionError
from app.core.rng import SeedLike, as_generator
from app.geometry.annulus import Annulus, contains
from app.graph.dsu import DisjointSet
from app.pointfield.field import PointField
from app.pointfield.tested_region import TestedRegion
from app.renorm.lattice import Bond, Site, bond_rectangle, in_rect, middle_square, site_center, target_square
from app.renorm.params import RenormParams

logger = logging.getLogger(__name__)

_EMPTY = np.empty((0, 2))


@dataclass
class BondOutcome:
    bond: Bond
    open: bool
    P_prime: np.ndarray
    Q_prime: np.ndarray
    P_prime_idx: np.ndarray
    Q_prime_idx: np.ndarray
    X: int = 0
    generations: int = 0
    examined: int = 0
    centers_added: int = 0
    note: Optional[str] = None

    def summary(self) -> dict:
        return {
            "bond": self.bond.label,
            "open": self.open,
            "P_prime": int(len(self.P_prime)),
            "Q_prime": int(len(self.Q_prime)),
            "X": self.X,
            "generations": self.generations,
        }


class BondReport(BaseModel):
    violations: Dict[str, List[str]]

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def count(self) -> int:
        return sum(len(v) for v in self.violations.values())


@dataclass
class _Node:
    center_id: int
    index: int


@dataclass
class _Exploration:
    field: PointField
    annulus: Annulus
    region: TestedRegion
    safe: Tuple[float, float, float, float]
    consumed: Set[int] = field(default_factory=set)
    examined: int = 0

    def candidates(self, index: int) -> np.ndarray:
        pts = self.field.points
        found = self.field.annulus_neighbors(pts[index], self.annulus, exclude=index)
        found = np.array([c for c in found.tolist() if c not in self.consumed], dtype=np.int64)
        if found.size == 0:
            return found
        order = np.lexsort((pts[found, 1], pts[found, 0]))
        return found[order]

    def grow(self, parents: List[_Node], cap: Optional[int], gen: np.random.Generator) -> List[_Node]:
        """
        Una generación: candidatos no consumidos de cada padre, en orden; un candidato
        es admisible si no está cubierto (ignorando el anillo de su padre) ni choca con
        otro hijo ya admitido en la misma generación. Con tope, se conservan `cap` al azar.
        """
        pts = self.field.points
        pending = TestedRegion(self.annulus, ball_radius=self.region.ball_radius)
        children: List[int] = []
        for parent in parents:
            for c in self.candidates(parent.index).tolist():
                self.consumed.add(c)
                self.examined += 1
                p = pts[c]
                if not in_rect(p, self.safe)[0]:
                    continue
                if self.region.query(p, skip_annulus=parent.center_id) or pending.query(p):
                    continue
                pending.add(p)
                children.append(c)
        if cap is not None and len(children) > cap:
            keep = np.sort(gen.choice(len(children), size=cap, replace=False))
            children = [children[k] for k in keep]
        return [_Node(self.region.add(pts[c]), c) for c in children]


def _as_points(values) -> np.ndarray:
    if values is None:
        return _EMPTY
    return np.asarray(values, dtype=float).reshape(-1, 2)


def _field_indices(field: PointField, points: np.ndarray) -> np.ndarray:
    """Índice del punto del campo que coincide exactamente con cada punto, o -1"""
    if len(points) == 0 or len(field) == 0:
        return np.full(len(points), -1, dtype=np.int64)
    dist, idx = cKDTree(field.points).query(points)
    return np.where(dist == 0.0, idx, -1).astype(np.int64)


def _check_preconditions(bond: Bond, P: np.ndarray, Q: np.ndarray, params: RenormParams):
    if len(P) and not in_rect(P, middle_square(bond.x, params.R)).all():
        raise PreconditionError(f"P no está contenido en el cuadrado medio de {bond.x}")
    both = np.vstack((P, Q))
    rho = params.separation
    if len(both) > 1:
        pairs = cKDTree(both).query_pairs(rho, output_type="ndarray")
        if len(pairs):
            gaps = np.hypot(*(both[pairs[:, 0]] - both[pairs[:, 1]]).T)
            if np.any((gaps < rho) | (gaps == 0.0)):
                raise PreconditionError(f"dos puntos de P ∪ Q están a menos de {rho:.4g}")


def bond_explore(
    field: PointField,
    bond: Bond,
    P,
    Q,
    params: RenormParams,
    rng: SeedLike,
) -> BondOutcome:
    """
    Construcción en dos fases del enlace abierto con respecto a P y Q.

    Args:
        field: Campo que cubre S_x ∪ S_y
        bond: Enlace orientado
        P: Puntos de partida, en el cuadrado medio de x
        Q: Puntos ya probados
        params: Parámetros de renormalización
        rng: Semilla o Generator (solo se usa para el tope y la elección uniforme en la generación T)

    Returns:
        BondOutcome con P′, Q′ y diagnósticos
    """
    P = _as_points(P)
    Q = _as_points(Q)
    _check_preconditions(bond, P, Q, params)
    gen = as_generator(rng)
    a = params.annulus
    R = params.R

    def closed(note=None, X=0, gens=0, q_idx=()):
        q_idx = np.asarray(list(q_idx), dtype=np.int64)
        return BondOutcome(
            bond=bond, open=False, P_prime=_EMPTY.copy(), Q_prime=field.points[q_idx].reshape(-1, 2),
            P_prime_idx=np.empty(0, dtype=np.int64), Q_prime_idx=q_idx, X=X, generations=gens, note=note,
        )

    if len(P) == 0:
        return closed("P vacío")

    region = TestedRegion(a, ball_radius=params.separation)
    for q in Q:
        region.add(q)
    p_nodes = [region.add(p) for p in P]
    p_idx = _field_indices(field, P)
    if np.any(p_idx < 0):
        raise PreconditionError("los puntos de P deben pertenecer al campo")
    explorer = _Exploration(field=field, annulus=a, region=region, safe=bond_rectangle(bond, R, inset=a.r))
    explorer.consumed.update(p_idx.tolist())
    explorer.consumed.update(int(i) for i in _field_indices(field, Q) if i >= 0)

    # fase 1
    target = target_square(bond.y, R)
    new_nodes: List[_Node] = []
    landed: List[_Node] = []
    for center_id, index in zip(p_nodes, p_idx.tolist()):
        generation = [_Node(center_id, index)]
        for _ in range(params.T):
            generation = explorer.grow(generation, params.cap, gen)
            new_nodes.extend(generation)
            if not generation:
                break
        if generation and params.T > 0:
            chosen = generation[int(gen.integers(len(generation)))]
            if in_rect(field.points[chosen.index], target)[0]:
                landed.append(chosen)

    X = len(landed)
    if X == 0:
        out = closed("ningún x_i alcanzó el cuadrado objetivo", q_idx=[nd.index for nd in new_nodes])
        out.examined, out.centers_added = explorer.examined, len(region) - len(Q) - len(P)
        return out

    # fase 2
    layers = [landed]
    steps = 0
    while len(layers[-1]) < params.n and steps < params.steps and layers[-1]:
        layers.append(explorer.grow(layers[-1], None, gen))
        new_nodes.extend(layers[-1])
        steps += 1

    last = layers[-1]
    last_ids = {nd.index for nd in last}
    q_idx = np.array([nd.index for nd in new_nodes if nd.index not in last_ids], dtype=np.int64)
    if len(last) >= params.n:
        last_idx = np.array([nd.index for nd in last], dtype=np.int64)
        pts = field.points[last_idx]
        order = np.lexsort((pts[:, 1], pts[:, 0]))[: params.n]
        pp_idx = last_idx[order]
        is_open = True
    else:
        pp_idx = np.empty(0, dtype=np.int64)
        is_open = False

    return BondOutcome(
        bond=bond,
        open=is_open,
        P_prime=field.points[pp_idx].reshape(-1, 2),
        Q_prime=field.points[q_idx].reshape(-1, 2),
        P_prime_idx=pp_idx,
        Q_prime_idx=q_idx,
        X=X,
        generations=steps,
        examined=explorer.examined,
        centers_added=len(region) - len(Q) - len(P),
        note=None if is_open else "V final con menos de n puntos",
    )


def verify_bond(outcome: BondOutcome, P, Q, params: RenormParams) -> BondReport:
    """Comprobación independiente de las cinco condiciones de un enlace con geometría exacta"""
    P = _as_points(P)
    Q = _as_points(Q)
    a = params.annulus
    R = params.R
    bond = outcome.bond
    pp, qp = _as_points(outcome.P_prime), _as_points(outcome.Q_prime)
    v: Dict[str, List[str]] = {k: [] for k in "abcde"}

    # (a)
    if len(pp) > params.n:
        v["a"].append(f"|P′| = {len(pp)} > n")
    if outcome.open != (len(pp) == params.n):
        v["a"].append("open no coincide con |P′| = n")
    outside = ~in_rect(pp, middle_square(bond.y, R)) if len(pp) else np.zeros(0, dtype=bool)
    for p in pp[outside]:
        v["a"].append(f"P′ fuera del cuadrado medio de y: {tuple(np.round(p, 6))}")

    # (b)
    if len(qp) > params.N:
        v["b"].append(f"|Q′| = {len(qp)} > N")
    if len(qp):
        for p in qp[~in_rect(qp, bond_rectangle(bond, R, inset=a.r))]:
            v["b"].append(f"Q′ a menos de r del borde de S_x ∪ S_y: {tuple(np.round(p, 6))}")

    # (c)
    everything = np.vstack((P, Q, pp, qp))
    rho = params.separation
    if len(everything) > 1:
        pairs = cKDTree(everything).query_pairs(rho, output_type="ndarray")
        for i, j in pairs:
            gap = float(np.hypot(*(everything[i] - everything[j])))
            if gap < rho or gap == 0.0:
                v["c"].append(f"puntos {i} y {j} a distancia {gap:.6g} < {rho:.6g}")

    # (d)
    fresh = np.vstack((pp, qp))
    if len(Q) and len(fresh):
        tree = cKDTree(Q)
        for k, hits in enumerate(tree.query_ball_point(fresh, a.r)):
            for h in hits:
                if contains(a, fresh[k] - Q[h]):
                    v["d"].append(f"punto nuevo {k} en el anillo de Q[{h}]")
                    break

    # (e)
    if len(pp):
        base = np.vstack((P, qp))
        dsu = DisjointSet(len(base))
        if len(base) > 1:
            for i, j in cKDTree(base).query_pairs(a.r, output_type="ndarray"):
                if contains(a, base[j] - base[i]):
                    dsu.union(int(i), int(j))
        anchored = {dsu.find(i) for i in range(len(P))}
        tree = cKDTree(base)
        for k, hits in enumerate(tree.query_ball_point(pp, a.r)):
            if not any(contains(a, pp[k] - base[h]) and dsu.find(h) in anchored for h in hits):
                v["e"].append(f"P′[{k}] no está unido a P a través de Q′")

    report = BondReport(violations=v)
    if not report.ok:
        logger.warning(f"⚠️ Enlace {bond.label}: {report.count()} violaciones")
    return report


def _anchors(site: Site, R: float, n: int) -> np.ndarray:
    """
    Centros de una rejilla impar sobre el cuadrado medio, del más cercano al centro
    del bloque al más lejano (empates en orden lexicográfico). Devuelve los n primeros.
    """
    side = int(math.ceil(math.sqrt(n)))
    side += 1 - side % 2
    x0, x1, y0, _ = middle_square(site, R)
    step = (x1 - x0) / side
    offsets = (np.arange(side) + 0.5) * step
    gx, gy = np.meshgrid(x0 + offsets, y0 + offsets, indexing="ij")
    grid = np.column_stack((gx.ravel(), gy.ravel()))
    order = np.argsort(np.hypot(*(grid - site_center(site, R)).T), kind="stable")
    return grid[order[:n]]


def select_initial_set(field: PointField, params: RenormParams, site: Site = (0, 0), n: Optional[int] = None) -> np.ndarray:
    """
    n puntos del campo repartidos por el cuadrado medio del sitio, a distancia >= r entre sí.

    Para cada ancla de la rejilla se toma el punto admisible más cercano; el primero es
    el más próximo al centro del bloque. Devuelve índices del campo en orden de exploración.
    """
    n = params.n if n is None else n
    pts = field.points
    inside = np.nonzero(in_rect(pts, middle_square(site, params.R)))[0] if len(pts) else np.empty(0, dtype=np.int64)
    gap = max(params.r, params.separation)
    chosen: List[int] = []
    for anchor in _anchors(site, params.R, n):
        order = inside[np.argsort(np.hypot(*(pts[inside] - anchor).T), kind="stable")]
        for idx in order.tolist():
            if all(np.hypot(*(pts[idx] - pts[c])) >= gap for c in chosen):
                chosen.append(idx)
                break
        else:
            raise InitializationError(f"solo {len(chosen)} de {n} puntos separados en el cuadrado medio de {site}")
    return np.array(chosen, dtype=np.int64)


class LocalityReport(BaseModel):
    identical: bool
    kept_points: int
    total_points: int


def locality_mask(field: PointField, outcome: BondOutcome, P, Q, params: RenormParams) -> np.ndarray:
    """(S_x ∪ S_y) ∩ ⋃_{z ∈ P ∪ Q′} A(z) \\ ⋃_{z ∈ Q} A(z)"""
    a = params.annulus
    pts = field.points
    keep = in_rect(pts, bond_rectangle(outcome.bond, params.R))
    centers = np.vstack((_as_points(P), _as_points(outcome.Q_prime)))
    near = np.zeros(len(pts), dtype=bool)
    Q = _as_points(Q)
    blocked = np.zeros(len(pts), dtype=bool)
    if len(pts) == 0:
        return keep
    tree = cKDTree(pts)
    for z in centers:
        hits = np.asarray(tree.query_ball_point(z, a.r), dtype=np.int64)
        if hits.size:
            near[hits[contains(a, pts[hits] - z)]] = True
    for z in Q:
        hits = np.asarray(tree.query_ball_point(z, a.r), dtype=np.int64)
        if hits.size:
            blocked[hits[contains(a, pts[hits] - z)]] = True
    return keep & near & ~blocked


def replay_outcome_locality(field: PointField, bond: Bond, P, Q, params: RenormParams, seed: int) -> LocalityReport:
    """Repite la exploración tras borrar todos los puntos fuera de la región examinada"""
    first = bond_explore(field, bond, P, Q, params, seed)
    mask = locality_mask(field, first, P, Q, params)
    # los puntos de P deben seguir en el campo reducido
    p_idx = _field_indices(field, _as_points(P))
    mask[p_idx[p_idx >= 0]] = True
    reduced = field.subset(mask)
    second = bond_explore(reduced, bond, P, Q, params, seed)
    same = (
        first.open == second.open
        and first.X == second.X
        and np.array_equal(first.P_prime, second.P_prime)
        and np.array_equal(first.Q_prime, second.Q_prime)
    )
    return LocalityReport(identical=bool(same), kept_points=int(mask.sum()), total_points=len(field))
