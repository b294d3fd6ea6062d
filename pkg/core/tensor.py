"""
Dense tensor substrate
Kronecker products, partial traces, Hermitian spectra and entropies on labeled qudit spaces.
The first subsystem is the most significant digit of a basis index.
"""
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import xlogy

from core.errors import TensorError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
ZERO_CLAMP = 1e-14


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Square complex operator on a tensor product of qudit subsystems"""
    dims: Tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise TensorError(f"Subsystem dimensions must be >= 2, got {dims}")
        size = math.prod(dims)
        data = np.array(self.data, dtype=complex)
        if data.ndim == 1 and data.size == size * size:
            data = data.reshape(size, size)
        if data.shape != (size, size):
            raise TensorError(f"Data of shape {data.shape} does not match dims {dims} (expected {size}x{size})")
        data.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "ComplexMatrix":
        return cls(tuple(dims), np.eye(math.prod(dims)))

    @classmethod
    def diagonal(cls, values: Sequence[float], dims: Sequence[int] = None) -> "ComplexMatrix":
        values = np.asarray(values)
        return cls(tuple(dims) if dims is not None else (len(values),), np.diag(values))

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def dagger(self) -> "ComplexMatrix":
        return ComplexMatrix(self.dims, self.data.conj().T)

    def hermitian_defect(self) -> float:
        """Largest entrywise deviation from Hermiticity"""
        if self.size == 0:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.data))

    def _check_dims(self, other: "ComplexMatrix"):
        if self.dims != other.dims:
            raise TensorError(f"Subsystem dimensions differ: {self.dims} vs {other.dims}")

    def __add__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_dims(other)
        return ComplexMatrix(self.dims, self.data + other.data)

    def __sub__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_dims(other)
        return ComplexMatrix(self.dims, self.data - other.data)

    def __mul__(self, scalar: complex) -> "ComplexMatrix":
        return ComplexMatrix(self.dims, self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexMatrix":
        return ComplexMatrix(self.dims, -self.data)

    def __matmul__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_dims(other)
        return ComplexMatrix(self.dims, self.data @ other.data)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted descending, eigenvectors as paired columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T

    def support_projector(self, threshold: float, cluster_tol: float = 1e-8) -> np.ndarray:
        """
        Projector onto eigenvectors whose eigenvalue exceeds threshold.
        Eigenvalues within cluster_tol of each other are kept or dropped together,
        so the result does not depend on the basis chosen inside a degenerate cluster.
        """
        n = len(self.eigenvalues)
        selected = np.zeros(n, dtype=bool)
        start = 0
        while start < n:
            stop = start + 1
            while stop < n and self.eigenvalues[stop - 1] - self.eigenvalues[stop] <= cluster_tol:
                stop += 1
            if np.mean(self.eigenvalues[start:stop]) > threshold:
                selected[start:stop] = True
            start = stop
        vectors = self.eigenvectors[:, selected]
        return vectors @ vectors.conj().T


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return ComplexMatrix(a.dims + b.dims, np.kron(a.data, b.data))


def kron_all(mats: Iterable[ComplexMatrix]) -> ComplexMatrix:
    mats = list(mats)
    if not mats:
        raise TensorError("kron_all needs at least one operand")
    return reduce(kron, mats)


def ket_projector(amps: np.ndarray, dims: Sequence[int]) -> ComplexMatrix:
    """|ψ⟩⟨ψ| for an amplitude vector on the given subsystems"""
    amps = np.asarray(amps, dtype=complex)
    return ComplexMatrix(tuple(dims), np.outer(amps, amps.conj()))


def _check_indices(indices: Iterable[int], n: int) -> List[int]:
    indices = [int(i) for i in indices]
    for i in indices:
        if not 0 <= i < n:
            raise TensorError(f"Subsystem index {i} out of range for {n} subsystems")
    if len(set(indices)) != len(indices):
        raise TensorError(f"Repeated subsystem index in {indices}")
    return indices


def partial_trace(m: ComplexMatrix, keep: Iterable[int]) -> ComplexMatrix:
    """
    Trace out every subsystem not in keep.
    Kept subsystems stay in their original order; an empty keep-set yields the 1x1 trace.
    """
    n = m.n_subsystems
    kept = sorted(_check_indices(keep, n))
    tensor = m.data.reshape(m.dims + m.dims)
    current = n
    for index in reversed(range(n)):
        if index in kept:
            continue
        tensor = np.trace(tensor, axis1=index, axis2=index + current)
        current -= 1
    kept_dims = tuple(m.dims[i] for i in kept)
    size = math.prod(kept_dims)
    return ComplexMatrix(kept_dims, tensor.reshape(size, size))


def permute_subsystems(m: ComplexMatrix, order: Sequence[int]) -> ComplexMatrix:
    """Reorder subsystems so that new subsystem j is old subsystem order[j]"""
    n = m.n_subsystems
    order = _check_indices(order, n)
    if len(order) != n:
        raise TensorError(f"Permutation {order} does not cover {n} subsystems")
    tensor = m.data.reshape(m.dims + m.dims)
    tensor = tensor.transpose(list(order) + [n + i for i in order])
    return ComplexMatrix(tuple(m.dims[i] for i in order), tensor.reshape(m.size, m.size))


def embed_in_place(reduced: ComplexMatrix, factors: Dict[int, ComplexMatrix], dims: Sequence[int]) -> ComplexMatrix:
    """
    Place `reduced` on the subsystems not named in `factors` (in order) and each factor
    on its own slot, returning an operator on the full ordered space `dims`.
    """
    dims = tuple(dims)
    n = len(dims)
    slots = _check_indices(factors.keys(), n)
    kept = [i for i in range(n) if i not in factors]
    if reduced.dims != tuple(dims[i] for i in kept):
        raise TensorError(f"Reduced operator dims {reduced.dims} do not fit slots {kept} of {dims}")
    for slot in slots:
        if factors[slot].dims != (dims[slot],):
            raise TensorError(f"Factor for slot {slot} has dims {factors[slot].dims}, expected ({dims[slot]},)")
    if not kept:
        combined = kron_all(factors[s] for s in sorted(slots)) * reduced.data[0, 0]
        return combined
    placement = kept + sorted(slots)
    combined = kron_all([reduced] + [factors[s] for s in sorted(slots)])
    return permute_subsystems(combined, [placement.index(j) for j in range(n)])


def _symmetrized(m: ComplexMatrix) -> np.ndarray:
    defect = m.hermitian_defect()
    scale = max(1.0, float(np.max(np.abs(m.data))) if m.size else 1.0)
    if defect > HERMITIAN_TOL * scale:
        raise TensorError(f"Matrix is not Hermitian (defect {defect:.3e})")
    return 0.5 * (m.data + m.data.conj().T)


def eigh(m: ComplexMatrix) -> Spectrum:
    """Hermitian eigendecomposition, eigenvalues descending"""
    values, vectors = linalg.eigh(_symmetrized(m))
    return Spectrum(values[::-1].copy(), vectors[:, ::-1].copy())


def eigvalsh(m: ComplexMatrix) -> np.ndarray:
    """Eigenvalues only, descending"""
    return linalg.eigvalsh(_symmetrized(m))[::-1].copy()


def eigvalsh_batch(stack: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a stack of Hermitian matrices with shape (..., n, n)"""
    stack = np.asarray(stack)
    stack = 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))
    return np.linalg.eigvalsh(stack)


def trace_norm(m: ComplexMatrix) -> float:
    return float(np.sum(np.abs(eigvalsh(m))))


def purity(m: ComplexMatrix) -> float:
    return float(np.real(np.trace(m.data @ m.data)))


def entropy_from_eigenvalues(values: np.ndarray, log_base: float = math.e, axis: int = -1) -> np.ndarray:
    """-Σ λ log λ along axis with 0·log 0 = 0; eigenvalues below 1e-14 count as zero"""
    values = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    values = np.where(values < ZERO_CLAMP, 0.0, values)
    return -np.sum(xlogy(values, values), axis=axis) / math.log(log_base)


def vn_entropy(rho: ComplexMatrix, log_base: float = math.e) -> float:
    trace = rho.trace()
    if abs(trace - 1.0) > TRACE_TOL:
        raise TensorError(f"Density operator trace {trace.real:.12f} deviates from 1")
    return float(entropy_from_eigenvalues(eigvalsh(rho), log_base))
