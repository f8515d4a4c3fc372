"""Spin-1/2 chain states, blocks and reduced density matrices.

Encoding contract
-----------------
A basis index ``b`` of an ``N``-site chain stores site ``s`` in bit ``s``
(site 0 is the lowest bit); a clear bit is spin up, a set bit is spin down.

Inside a block the local index is built the other way round: the *first*
site of the block is the most significant bit. For the block ``(4, 5)``
the local basis is ``|uu>, |ud>, |du>, |dd>`` with the first letter
referring to site 4. Joint blocks are concatenations, so a two-block RDM
is ordered ``mu * dim(B) + nu`` exactly like :func:`spinorder.linalg.kron`.

All operators are bosonic spin operators; sites commute.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import CapacityError, InvalidInputError
from .linalg import as_hermitian

MAX_SITES = 24
MAX_BLOCK_SITES = 8
NORM_TOL = 1e-10
TRACE_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)
for _m in (SIGMA_X, SIGMA_Y, SIGMA_Z, IDENTITY_2):
    _m.setflags(write=False)

PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class SpinBasis:
    n_sites: int

    def __post_init__(self):
        if not isinstance(self.n_sites, (int, np.integer)) or self.n_sites < 1:
            raise InvalidInputError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        if self.n_sites > MAX_SITES:
            raise CapacityError(f"n_sites={self.n_sites} exceeds the supported maximum {MAX_SITES}")

    @property
    def dim(self):
        return 1 << self.n_sites


@dataclass(frozen=True)
class Block:
    """Ordered list of distinct sites.

    Use :meth:`contiguous` for the usual run of adjacent sites; on a ring
    it wraps around, e.g. ``Block.contiguous(15, 2, 16).sites == (15, 0)``.
    """

    sites: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise InvalidInputError("a block needs at least one site")
        if len(set(sites)) != len(sites):
            raise InvalidInputError(f"block sites must be distinct, got {sites}")
        if min(sites) < 0:
            raise InvalidInputError(f"negative site index in {sites}")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def contiguous(cls, start, size, n_sites):
        return cls(tuple((start + k) % n_sites for k in range(size)))

    @property
    def size(self):
        return len(self.sites)

    @property
    def dim(self):
        return 1 << len(self.sites)

    def check(self, n_sites):
        if max(self.sites) >= n_sites:
            raise InvalidInputError(f"block {self.sites} does not fit on {n_sites} sites")
        return self

    def overlaps(self, other):
        return bool(set(self.sites) & set(other.sites))

    def __add__(self, other):
        if self.overlaps(other):
            raise InvalidInputError(f"blocks {self.sites} and {other.sites} overlap")
        return Block(self.sites + other.sites)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over the ``2**N`` computational basis."""

    basis: SpinBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).ravel()
        if amps.size != self.basis.dim:
            raise InvalidInputError(
                f"expected {self.basis.dim} amplitudes for {self.basis.n_sites} sites, got {amps.size}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidInputError(f"state is not normalized (<psi|psi> = {norm2!r})")
        # accepted within tolerance; stored exactly normalized so RDM traces are 1 to rounding
        amps /= np.sqrt(norm2)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize=False):
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        n = amps.size.bit_length() - 1
        if amps.size < 2 or (1 << n) != amps.size:
            raise InvalidInputError(f"amplitude count {amps.size} is not a power of two")
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0.0:
                raise InvalidInputError("cannot normalize the zero vector")
            amps = amps / nrm
        return cls(SpinBasis(n), amps)

    @classmethod
    def product(cls, spins):
        """Basis state from a sequence of 0 (up) / 1 (down), site 0 first."""
        idx = sum(int(b) << s for s, b in enumerate(spins))
        amps = np.zeros(1 << len(spins), dtype=np.complex128)
        amps[idx] = 1.0
        return cls(SpinBasis(len(spins)), amps)

    @property
    def n_sites(self):
        return self.basis.n_sites

    def tensor(self):
        """Amplitudes as an ``(2,) * N`` array; axis ``a`` is site ``N - 1 - a``."""
        return self.amplitudes.reshape((2,) * self.n_sites)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced density matrix of `sites` (local ordering, see module docs)."""

    matrix: np.ndarray
    sites: tuple
    n_sites: int

    def __post_init__(self):
        m = as_hermitian(self.matrix)
        if m.shape[0] != 1 << len(self.sites):
            raise InvalidInputError(f"matrix of shape {m.shape} does not match {len(self.sites)} sites")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidInputError(f"density matrix trace is {tr!r}, not 1")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def block(self):
        return Block(self.sites)


def _block_axes(state, block):
    n = state.n_sites
    block.check(n)
    front = [n - 1 - s for s in block.sites]
    rest = [a for a in range(n) if a not in front]
    return front, rest


def _as_state(state):
    if isinstance(state, StateVector):
        return state
    return StateVector.from_amplitudes(state)


def partial_trace(state, block):
    """Reduced density matrix of `block` for the pure state `state`.

    Raises
    ------
    CapacityError
        If the block has more than ``MAX_BLOCK_SITES`` sites.
    """
    state = _as_state(state)
    if block.size > MAX_BLOCK_SITES:
        raise CapacityError(f"block of {block.size} sites exceeds the {MAX_BLOCK_SITES}-site limit")
    front, rest = _block_axes(state, block)
    a = np.transpose(state.tensor(), front + rest).reshape(block.dim, -1)
    rho = a @ a.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, block.sites, state.n_sites)


def joint_rdm(state, a, b):
    """RDM of the union of two disjoint blocks, ordered ``A (x) B``."""
    state = _as_state(state)
    if a.overlaps(b):
        raise InvalidInputError(f"blocks {a.sites} and {b.sites} overlap")
    return partial_trace(state, a + b)


def reduce_rdm(rho, dims, keep):
    """Partial trace of a density matrix on a tensor product of factors.

    Parameters
    ----------
    rho : array_like
        Matrix on ``dims[0] (x) dims[1] (x) ...`` (first factor most significant).
    dims : sequence of int
    keep : sequence of int
        Factor indices to keep, in output order.
    """
    rho = np.asarray(rho)
    dims = list(dims)
    k = len(dims)
    t = rho.reshape(dims + dims)
    trace_out = [i for i in range(k) if i not in keep]
    perm = list(keep) + trace_out + [k + i for i in keep] + [k + i for i in trace_out]
    t = np.transpose(t, perm)
    dk = int(np.prod([dims[i] for i in keep]))
    dt = int(np.prod([dims[i] for i in trace_out])) if trace_out else 1
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def apply_local_operator(state, op, block):
    """Apply `op` on the sites of `block` (identity elsewhere).

    Returns the raw (generally unnormalized) amplitude array of length
    ``2**N``; `state` may be a :class:`StateVector` or such an array.
    """
    if isinstance(state, StateVector):
        n = state.n_sites
        psi = state.amplitudes
    else:
        psi = np.asarray(state, dtype=np.complex128).ravel()
        n = psi.size.bit_length() - 1
        if (1 << n) != psi.size:
            raise InvalidInputError(f"amplitude count {psi.size} is not a power of two")
    block.check(n)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (block.dim, block.dim):
        raise InvalidInputError(f"operator shape {op.shape} does not match block of {block.size} sites")
    front = [n - 1 - s for s in block.sites]
    rest = [a for a in range(n) if a not in front]
    perm = front + rest
    t = np.transpose(psi.reshape((2,) * n), perm).reshape(block.dim, -1)
    t = (op @ t).reshape((2,) * n)
    return np.transpose(t, np.argsort(perm)).reshape(-1)


def local_operator(spec):
    """Operator matrix from a product of named single-site Pauli factors.

    ``local_operator("zz")`` is sigma^z (x) sigma^z on a two-site block;
    ``"i"`` is the identity.
    """
    factors = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z, "i": IDENTITY_2}
    m = np.ones((1, 1), dtype=np.complex128)
    for ch in spec:
        m = np.kron(m, factors[ch])
    return m


def sigma_dot_sigma():
    """sigma_1 . sigma_2 on a two-site block."""
    return sum(np.kron(p, p) for p in (SIGMA_X, SIGMA_Y, SIGMA_Z))
