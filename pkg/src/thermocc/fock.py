"""Sparse Jordan-Wigner fermion operators on a finite set of modes.

Mode ordering is the caller's choice; operators carry the full parity
string over all lower-numbered modes, so any consistent ordering gives a
faithful representation of the canonical anticommutation relations.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = ["FockSpace"]

_ID2 = sp.identity(2, format="csr", dtype=complex)
_Z = sp.csr_matrix(np.diag([1.0, -1.0]).astype(complex))
# occupation basis per mode: index 0 = empty, 1 = occupied
_LOWER = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class FockSpace:
    """2^n_modes-dimensional fermionic Fock space with cached JW operators."""

    def __init__(self, n_modes: int):
        if n_modes > 20:
            raise ValueError(f"refusing Fock space with {n_modes} modes (dim 2^{n_modes})")
        self.n_modes = n_modes
        self.dim = 2 ** n_modes
        self._ann = {}

    def annihilation(self, mode: int) -> sp.csr_matrix:
        if mode not in self._ann:
            factors = [_Z] * mode + [_LOWER] + [_ID2] * (self.n_modes - mode - 1)
            op = factors[0]
            for f in factors[1:]:
                op = sp.kron(op, f, format="csr")
            self._ann[mode] = op
        return self._ann[mode]

    def creation(self, mode: int) -> sp.csr_matrix:
        return self.annihilation(mode).conj().T.tocsr()

    def number(self, mode: int) -> sp.csr_matrix:
        a = self.annihilation(mode)
        return (a.conj().T @ a).tocsr()

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, format="csr", dtype=complex)
