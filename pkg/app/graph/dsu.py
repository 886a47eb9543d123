import numpy as np


class DisjointSet:
    """Bosque de conjuntos disjuntos sobre 0..n-1 (unión por tamaño, compresión de caminos)"""

    def __init__(self, n: int):
        self.parents = np.arange(n, dtype=np.int64)
        self.sizes = np.ones(n, dtype=np.int64)
        self.n_components = n

    def __len__(self) -> int:
        return len(self.parents)

    def find(self, index: int) -> int:
        parents = self.parents
        root = int(index)
        while parents[root] != root:
            root = int(parents[root])
        # compresión
        node = int(index)
        while parents[node] != root:
            nxt = int(parents[node])
            parents[node] = root
            node = nxt
        return root

    def union(self, a: int, b: int) -> bool:
        a = self.find(a)
        b = self.find(b)
        if a == b:
            return False
        if self.sizes[a] < self.sizes[b]:
            a, b = b, a
        self.parents[b] = a
        self.sizes[a] += self.sizes[b]
        self.n_components -= 1
        return True

    def union_pairs(self, left, right) -> int:
        merged = 0
        for a, b in zip(np.asarray(left).tolist(), np.asarray(right).tolist()):
            merged += self.union(a, b)
        return merged

    def find_all(self) -> np.ndarray:
        """Raíz de cada elemento; deja el bosque totalmente comprimido"""
        a = self.parents
        b = a[a]
        while (a != b).any():
            a = b
            b = a[a]
        self.parents = a
        return a

    def component_sizes(self) -> np.ndarray:
        roots = self.find_all()
        return self.sizes[np.unique(roots)]
