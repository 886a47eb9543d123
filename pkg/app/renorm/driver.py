import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Set, Union

import numpy as np

from app.core.errors import PreconditionError
from app.core.rng import SeedLike, as_generator, child_seed
from app.graph.percgraph import build_graph, component_labels
from app.pointfield.field import Box, PointField, sample_poisson
from app.renorm.bond import BondOutcome, bond_explore, select_initial_set, verify_bond
from app.renorm.lattice import Site, block, bond_order, bond_rectangle, in_rect, lattice_box
from app.renorm.params import RenormParams

logger = logging.getLogger(__name__)

FieldSource = Union[PointField, Callable[[Box, np.random.Generator], PointField]]


@dataclass
class LatticeTrace:
    depth: int
    rows: List[dict] = field(default_factory=list)
    reached: Set[Site] = field(default_factory=lambda: {(0, 0)})
    P_sites: Dict[Site, np.ndarray] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)
    violations: int = 0
    budget_ok: bool = True
    coupling_ok: Optional[bool] = None

    @property
    def open_fraction(self) -> float:
        """Fracción de enlaces abiertos entre los evaluados con la regla (b)"""
        tested = [row for row in self.rows if row["rule"] == "b"]
        if not tested:
            return 0.0
        return sum(row["open"] for row in tested) / len(tested)

    def summary(self) -> dict:
        return {
            "depth": self.depth,
            "bonds": len(self.rows),
            "rule_b": sum(row["rule"] == "b" for row in self.rows),
            "open_fraction": self.open_fraction,
            "reached": sorted(list(s) for s in self.reached),
            "max_level_reached": max(sum(s) for s in self.reached),
            "violations": self.violations,
            "budget_ok": self.budget_ok,
            "coupling_ok": self.coupling_ok,
            "flags": self.flags,
        }


def _resolve_field(source: FieldSource, depth: int, params: RenormParams, gen: np.random.Generator) -> PointField:
    if isinstance(source, PointField):
        return source
    if source is None:
        box = lattice_box(depth, params.R)
        return sample_poisson(box, params.intensity, child_seed(gen), annulus=params.annulus)
    return source(lattice_box(depth, params.R), gen)


def _count_in_block(points: np.ndarray, site: Site, R: float) -> int:
    return int(in_rect(points, block(site, R)).sum()) if len(points) else 0


def coupling_check(field: PointField, params: RenormParams, trace: LatticeTrace, P_idx: Dict[Site, np.ndarray]) -> bool:
    """
    Cada punto de P_x de un sitio alcanzado está unido a algún punto de P_(0,0) en el
    grafo G_A real restringido a los bloques procesados.
    """
    sites = set(trace.P_sites) | {s for row in trace.rows for s in (tuple(row["x"]), tuple(row["y"]))}
    mask = np.zeros(len(field), dtype=bool)
    for s in sites:
        mask |= in_rect(field.points, block(s, params.R))
    kept = np.nonzero(mask)[0]
    position = -np.ones(len(field), dtype=np.int64)
    position[kept] = np.arange(kept.size)
    labels = component_labels(build_graph(field.subset(mask), params.annulus))
    origin_labels = set(labels[position[P_idx[(0, 0)]]].tolist())
    for site in trace.reached:
        idx = P_idx.get(site)
        if idx is None:
            continue
        if any(labels[position[i]] not in origin_labels for i in idx.tolist()):
            logger.error(f"❌ P_{site} no está conectado a P_(0,0)")
            return False
    return True


def lattice_run(
    field_source: Optional[FieldSource],
    depth: int,
    params: RenormParams,
    rng: SeedLike,
    strict: bool = False,
    paranoid: bool = True,
    check_coupling: bool = True,
    trace_path: Optional[Path] = None,
) -> LatticeTrace:
    """
    Procesa los enlaces en orden canónico hasta la profundidad dada manteniendo Q_i y P_x.

    Args:
        field_source: PointField, función (caja, generador) -> PointField, o None para muestrear
        depth: Radio l1 de la red procesada
        params: Parámetros de renormalización
        rng: Semilla o Generator; cada enlace obtiene una semilla hija registrada en la traza
        strict: Rechaza ejecutar si alguna bandera de restricción es falsa
        paranoid: Verifica cada resultado con verify_bond
        check_coupling: Comprueba al final la conexión real de los P_x con P_(0,0)
        trace_path: Fichero JSON lines para la traza

    Returns:
        LatticeTrace
    """
    flags = params.flags()
    if strict and not all(flags.values()):
        failed = [k for k, ok in flags.items() if not ok]
        raise PreconditionError(f"modo estricto: restricciones incumplidas {failed}")
    if not all(flags.values()):
        logger.warning(f"⚠️ Modo exploratorio: restricciones incumplidas {[k for k, ok in flags.items() if not ok]}")

    trace = LatticeTrace(depth=depth, flags=flags)
    if depth <= 0:
        return trace

    gen = as_generator(rng)
    field_ = _resolve_field(field_source, depth, params, gen)
    origin_idx = select_initial_set(field_, params, (0, 0))
    P_idx: Dict[Site, np.ndarray] = {(0, 0): origin_idx}
    trace.P_sites[(0, 0)] = field_.points[origin_idx]

    Q_points = np.empty((0, 2))
    processed: Dict[Site, int] = {}
    sink = trace_path.open("w", encoding="utf-8") if trace_path else None
    try:
        for order, bond in enumerate(bond_order(depth)):
            row = {"order": order, "bond": bond.label, "x": list(bond.x), "y": list(bond.y)}
            budget = {}
            for s in (bond.x, bond.y):
                count = _count_in_block(Q_points, s, params.R)
                budget[str(s)] = {"count": count, "limit": processed.get(s, 0) * params.N}
                if count > processed.get(s, 0) * params.N:
                    trace.budget_ok = False
            row["budget"] = budget

            if bond.x not in trace.reached:
                row.update(rule="a", open=True, trivially_open=True, P_prime=0, Q_prime=0, Q=0)
            else:
                P = trace.P_sites[bond.x]
                in_bond = in_rect(Q_points, bond_rectangle(bond, params.R)) if len(Q_points) else np.zeros(0, dtype=bool)
                Q = Q_points[in_bond]
                if len(Q) and len(P):
                    # Q = Q_i ∩ (S_x ∪ S_y) \ P_x
                    is_p = (Q[:, None, :] == P[None, :, :]).all(axis=2).any(axis=1)
                    Q = Q[~is_p]
                if len(Q) > 3 * params.N:
                    trace.budget_ok = False
                seed = child_seed(gen)
                outcome: BondOutcome = bond_explore(field_, bond, P, Q, params, seed)
                row.update(
                    rule="b", open=outcome.open, trivially_open=False, seed=seed,
                    P_prime=int(len(outcome.P_prime)), Q_prime=int(len(outcome.Q_prime)), Q=int(len(Q)),
                    X=outcome.X, generations=outcome.generations,
                )
                if paranoid:
                    report = verify_bond(outcome, P, Q, params)
                    trace.violations += report.count()
                    row["violations"] = report.count()
                if outcome.open:
                    trace.reached.add(bond.y)
                    if bond.y not in trace.P_sites:
                        trace.P_sites[bond.y] = outcome.P_prime
                        P_idx[bond.y] = outcome.P_prime_idx
                Q_points = np.vstack((Q_points, outcome.Q_prime, outcome.P_prime))
                logger.info(
                    f"Enlace {order} {bond.label}: {'abierto' if outcome.open else 'cerrado'} "
                    f"(X={outcome.X}, |Q′|={len(outcome.Q_prime)}, |Q|={len(Q)})"
                )
            for s in (bond.x, bond.y):
                processed[s] = processed.get(s, 0) + 1
            row["flags"] = flags
            trace.rows.append(row)
            if sink:
                sink.write(json.dumps(row) + "\n")
    finally:
        if sink:
            sink.close()

    if check_coupling:
        trace.coupling_ok = coupling_check(field_, params, trace, P_idx)
    logger.info(f"Red hasta profundidad {depth}: {len(trace.reached)} sitios alcanzados, fracción abierta {trace.open_fraction:.3f}")
    return trace
