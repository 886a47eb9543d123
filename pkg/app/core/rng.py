"""
Derivación de flujos aleatorios reproducibles.

Cada ensayo obtiene su propia semilla a partir de (semilla maestra, etiqueta del
experimento, índice), de modo que la concurrencia no puede reordenar la aleatoriedad.
"""
import hashlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator, None]


def _label_words(label: str):
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def derive_seed(master: int, label: str, index: int = 0) -> int:
    """Semilla entera de 63 bits para (master, label, index)"""
    seq = np.random.SeedSequence([int(master) & 0xFFFFFFFF, *_label_words(label), int(index)])
    return int(seq.generate_state(1, dtype=np.uint64)[0]) >> 1


def stream(master: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, label, index))


def as_generator(rng: SeedLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def child_seed(rng: np.random.Generator) -> int:
    """Extrae una semilla entera de un generador (para sub-flujos que deben registrarse)"""
    return int(rng.integers(0, 2**63 - 1))
