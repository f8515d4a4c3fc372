"""Block-block mutual information, MI profiles and the overlap (P) matrix."""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError
from .hilbert import MAX_BLOCK_SITES, Block, joint_rdm, reduce_rdm
from .linalg import eigh, entropy_bits, kron

DEFAULT_MI_THRESHOLD = 1e-3


def _matrix(rho):
    return getattr(rho, "matrix", rho)


def von_neumann_entropy(rho):
    """Entropy in bits of a density matrix (or :class:`DensityMatrix`)."""
    lam = eigh(_matrix(rho)).eigenvalues
    return entropy_bits(np.clip(lam, 0.0, None) / np.clip(lam, 0.0, None).sum())


def mutual_information_from_rdms(rho_a, rho_b, rho_ab):
    """``S(A) + S(B) - S(AB)`` in bits."""
    return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(rho_ab)


def mutual_information(state, a, b):
    """Mutual information (bits) between two disjoint blocks of a pure state."""
    rho_ab = joint_rdm(state, a, b)
    m = rho_ab.matrix
    rho_a = reduce_rdm(m, [a.dim, b.dim], [0])
    rho_b = reduce_rdm(m, [a.dim, b.dim], [1])
    return mutual_information_from_rdms(rho_a, rho_b, rho_ab)


@dataclass(frozen=True)
class MIProfile:
    """MI between ``Block(anchor, m)`` and ``Block(anchor + r, m)`` for each r."""

    block_size: int
    anchor: int
    distances: tuple
    values: tuple
    threshold: float
    verdict: str

    @property
    def long_distance_value(self):
        return self.values[-1]

    def as_rows(self):
        return [(self.block_size, r, v) for r, v in zip(self.distances, self.values)]


def default_distances(n_sites, block_size):
    """``r = m, ..., floor(N/2)``: blocks never overlap on the ring."""
    return tuple(range(block_size, n_sites // 2 + 1))


def mi_profile(state, block_size, anchor=0, distances=None, threshold=DEFAULT_MI_THRESHOLD):
    """MI versus distance for contiguous blocks of `block_size` sites.

    The verdict is ``"non-vanishing"`` when the MI at the largest distance
    exceeds `threshold`, ``"vanishing"`` otherwise.
    """
    n = state.n_sites
    if distances is None:
        distances = default_distances(n, block_size)
    distances = tuple(int(r) for r in distances)
    if not distances:
        raise InvalidInputError(f"no admissible distance for blocks of {block_size} on {n} sites")
    if 2 * block_size > MAX_BLOCK_SITES:
        raise InvalidInputError(f"two blocks of {block_size} sites exceed the {MAX_BLOCK_SITES}-site joint limit")
    a = Block.contiguous(anchor, block_size, n)
    values = []
    for r in distances:
        if r < block_size or r > n - block_size:
            raise InvalidInputError(f"distance {r} makes blocks of {block_size} overlap on {n} sites")
        b = Block.contiguous(anchor + r, block_size, n)
        values.append(float(mutual_information(state, a, b)))
    verdict = "non-vanishing" if values[-1] > threshold else "vanishing"
    return MIProfile(block_size, anchor, distances, tuple(values), threshold, verdict)


@dataclass(frozen=True)
class BlockScan:
    """Outcome of the minimum-block-size search.

    `block_size` is None when no block up to the scanned maximum shows
    non-vanishing long-distance MI. `profiles` holds one row per scanned
    size, so the table reads the same whichever direction it is scanned.
    """

    block_size: object
    profiles: tuple
    threshold: float
    long_distance: int

    @property
    def found(self):
        return self.block_size is not None


def min_block_scan(state, max_block=3, threshold=DEFAULT_MI_THRESHOLD, anchor=0):
    """Smallest block size whose MI at distance ``floor(N/2)`` exceeds `threshold`.

    Every size ``1..max_block`` is evaluated (full table); the returned
    size is the first hit in ascending order.
    """
    n = state.n_sites
    if max_block < 1 or 2 * max_block > MAX_BLOCK_SITES:
        raise InvalidInputError(f"max_block must be in [1, {MAX_BLOCK_SITES // 2}], got {max_block}")
    long_distance = n // 2
    profiles = []
    for m in range(1, max_block + 1):
        if m > long_distance:
            break
        profiles.append(mi_profile(state, m, anchor, default_distances(n, m), threshold))
    hit = next((p.block_size for p in profiles if p.verdict == "non-vanishing"), None)
    return BlockScan(hit, tuple(profiles), threshold, long_distance)


@dataclass(frozen=True, eq=False)
class PMatrix:
    """Squared overlaps between joint eigenvectors and product eigenvectors.

    ``matrix[(mu' nu'), (mu nu)] = |<phi_{mu nu} | phi_mu' phi_nu'>|**2``,
    rows indexed by product states (A-major), columns by joint
    eigenvectors in descending order of their eigenvalue.
    """

    matrix: np.ndarray
    p_a: np.ndarray
    p_b: np.ndarray
    q: np.ndarray

    def row_sums(self):
        return self.matrix.sum(axis=1)

    def column_sums(self):
        return self.matrix.sum(axis=0)

    def is_doubly_stochastic(self, tol=1e-10):
        m = self.matrix
        return bool(
            np.all(m >= -tol)
            and np.allclose(self.row_sums(), 1.0, atol=tol, rtol=0)
            and np.allclose(self.column_sums(), 1.0, atol=tol, rtol=0)
        )

    def is_permutation(self, tol=1e-8):
        m = self.matrix
        return bool(np.all((m < tol) | (m > 1 - tol)))


def p_matrix(rdm_a, rdm_b, rdm_joint, tol=1e-10):
    """Overlap-probability matrix between the joint and product eigenbases.

    Raises
    ------
    InvalidInputError
        On inconsistent dimensions, or if the result is not doubly
        stochastic within `tol` (which would indicate a broken eigenbasis).
    """
    ma, mb, mj = _matrix(rdm_a), _matrix(rdm_b), _matrix(rdm_joint)
    if mj.shape[0] != ma.shape[0] * mb.shape[0]:
        raise InvalidInputError(f"joint dimension {mj.shape[0]} != {ma.shape[0]} x {mb.shape[0]}")
    ea, eb, ej = eigh(ma), eigh(mb), eigh(mj)
    overlap = ej.eigenvectors.conj().T @ kron(ea.eigenvectors, eb.eigenvectors)
    p = PMatrix(np.abs(overlap.T) ** 2, ea.eigenvalues, eb.eigenvalues, ej.eigenvalues)
    if not p.is_doubly_stochastic(tol):
        raise InvalidInputError("overlap matrix is not doubly stochastic")
    return p


def mutual_information_from_p(pm):
    """MI from the relative-entropy form: spectra plus the overlap matrix.

    ``sum q log q - sum_{mu nu} q_{mu nu} sum_{mu' nu'} P[(mu' nu'), (mu nu)] log(p_mu' p_nu')``;
    an independent route to :func:`mutual_information_from_rdms`.
    """
    q = np.clip(pm.q, 0.0, None)
    pp = np.outer(np.clip(pm.p_a, 0.0, None), np.clip(pm.p_b, 0.0, None)).ravel()
    weight = pm.matrix * q[None, :]
    # a product mode outside the support of rho_a (x) rho_b carries only rounding-level
    # weight; the floor keeps weight * log(pp) at that level instead of producing inf
    logpp = np.log2(np.maximum(pp, 1e-300))
    cross = -np.sum(weight * logpp[:, None])
    qpos = q[q > 0]
    return float(np.sum(qpos * np.log2(qpos)) + cross)
