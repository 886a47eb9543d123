import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence

from tqdm import tqdm

from app.core.config import settings

logger = logging.getLogger(__name__)


def run_trials(fn: Callable[..., Any], tasks: Sequence[Any], workers: int = 1, desc: str = "trials") -> List[Any]:
    """
    Ejecuta `fn(task)` para cada tarea y devuelve los resultados en el orden de las tareas.

    Cada tarea lleva su propia semilla derivada, así que el número de workers no
    altera los resultados. `fn` debe ser importable a nivel de módulo cuando workers > 1.
    """
    progress = settings.show_progress
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tqdm(tasks, desc=desc, disable=not progress)]

    logger.info(f"Lanzando {len(tasks)} {desc} en {workers} procesos")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (workers * 4))
        return list(tqdm(pool.map(fn, tasks, chunksize=chunk), total=len(tasks), desc=desc, disable=not progress))
