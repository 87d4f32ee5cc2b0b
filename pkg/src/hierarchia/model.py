from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError
from .tensor import MAX_SIDE, LabeledOperator, embed, permutation_matrix

HERMITIAN_TOL = 1e-12


def swap_matrix(d: int) -> np.ndarray:
    return permutation_matrix([1, 0], d)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Identical d-level particles with one-body ``h`` and pair potential ``phi``.

    The n-particle Hamiltonian is sum_j h(j) + epsilon * sum_{j1<j2} phi(j1, j2).
    Units have hbar = 1.
    """

    d: int
    h: np.ndarray
    phi: np.ndarray
    epsilon: float = 1.0
    n_max: int = 4
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        phi = np.asarray(self.phi, dtype=complex)
        d = int(self.d)
        if d < 2:
            raise DomainError("d must be >= 2")
        if h.shape != (d, d):
            raise DomainError(f"h must be {d}x{d}, got {h.shape}")
        if phi.shape != (d * d, d * d):
            raise DomainError(f"phi must be {d * d}x{d * d}, got {phi.shape}")
        if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL:
            raise DomainError("h is not Hermitian")
        if np.max(np.abs(phi - phi.conj().T)) > HERMITIAN_TOL:
            raise DomainError("phi is not Hermitian")
        sw = swap_matrix(d)
        if np.max(np.abs(sw @ phi @ sw - phi)) > HERMITIAN_TOL:
            raise DomainError("phi is not symmetric under exchange of the two particles")
        if self.epsilon < 0:
            raise DomainError("epsilon must be nonnegative")
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")
        if d**self.n_max > MAX_SIDE:
            raise CapacityError(f"d^n_max = {d ** self.n_max} exceeds {MAX_SIDE}")
        h.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def with_epsilon(self, epsilon: float) -> ModelSpec:
        return ModelSpec(self.d, self.h, self.phi, epsilon, self.n_max)

    def with_n_max(self, n_max: int) -> ModelSpec:
        return ModelSpec(self.d, self.h, self.phi, self.epsilon, n_max)

    def check_capacity(self, n: int) -> None:
        if n > self.n_max:
            raise CapacityError(f"{n} particles exceed n_max = {self.n_max}")

    # one- and two-body pieces as labeled operators
    def one_body(self, j: int) -> LabeledOperator:
        return LabeledOperator((j,), self.d, self.h)

    def pair(self, j1: int, j2: int, coupled: bool = True) -> LabeledOperator:
        """phi(j1, j2), multiplied by epsilon when ``coupled``."""
        c = self.epsilon if coupled else 1.0
        return LabeledOperator((j1, j2), self.d, c * self.phi)

    def hamiltonian_matrix(self, n: int) -> np.ndarray:
        key = ("H", n)
        if key not in self._cache:
            labels = tuple(range(1, n + 1))
            H = np.zeros((self.d**n, self.d**n), dtype=complex)
            for j in labels:
                H += embed(self.one_body(j), labels).matrix
            for a in labels:
                for b in labels:
                    if a < b:
                        H += embed(self.pair(a, b), labels).matrix
            self._cache[key] = H
        return self._cache[key]

    def _eigh(self, n: int):
        key = ("eig", n)
        if key not in self._cache:
            self._cache[key] = np.linalg.eigh(self.hamiltonian_matrix(n))
        return self._cache[key]

    def unitary_matrix(self, n: int, t: float) -> np.ndarray:
        """exp(-i t H_n) on labels 1..n, from the Hermitian eigendecomposition."""
        key = ("U", n, float(t))
        if key not in self._cache:
            lam, V = self._eigh(n)
            self._cache[key] = (V * np.exp(-1j * t * lam)) @ V.conj().T
        return self._cache[key]

    def group_unitary(self, subset, universe, t: float, blocks=None) -> np.ndarray:
        """exp(-i t H_subset) embedded into ``universe``.

        With ``blocks`` (a partition of a superset of ``subset`` into label
        tuples) the interaction between different blocks is switched off, so
        the result is the product of the groups of subset-within-block.
        """
        subset = tuple(sorted(subset))
        universe = tuple(sorted(universe))
        bkey = None if blocks is None else tuple(sorted(tuple(sorted(b)) for b in blocks))
        key = ("G", subset, universe, float(t), bkey)
        if key in self._cache:
            return self._cache[key]
        if bkey is None:
            pieces = [subset]
        else:
            covered = set().union(*map(set, bkey)) if bkey else set()
            if not set(subset) <= covered:
                raise DomainError("decoupling blocks must cover the subset")
            pieces = [tuple(x for x in subset if x in b) for b in bkey]
            pieces = [p for p in pieces if p]
        U = np.eye(self.d ** len(universe), dtype=complex)
        for piece in pieces:
            self.check_capacity(len(piece))
            op = LabeledOperator(piece, self.d, self.unitary_matrix(len(piece), t))
            U = U @ embed(op, universe).matrix
        self._cache[key] = U
        return U
