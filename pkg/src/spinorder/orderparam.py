"""Order operators built from entanglement spectra, correlations and modes.

Operators act on a block of ``m`` sites in the local ordering of
:mod:`spinorder.hilbert`. They are written with Pauli matrices.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError
from .hilbert import (
    Block,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    StateVector,
    apply_local_operator,
    joint_rdm,
    partial_trace,
    reduce_rdm,
    sigma_dot_sigma,
)
from .linalg import as_hermitian, eigh, expectation, kron

DEFAULT_RANK_EPS = 1e-10
DEFAULT_OFFDIAG_EPS = 1e-8
CORRELATION_EPS = 1e-10


def _matrix(rho):
    return getattr(rho, "matrix", rho)


def rank_of(rdm, eps=DEFAULT_RANK_EPS):
    """Number of eigenvalues of `rdm` above `eps`."""
    return int(np.sum(eigh(_matrix(rdm)).eigenvalues > eps))


@dataclass(frozen=True, eq=False)
class OrderOperator:
    """Hermitian operator on a block, with the mode data it was built from.

    `basis` holds the block eigenvectors used as local modes; `weights` is
    set for diagonal operators (one real weight per mode).
    """

    matrix: np.ndarray
    kind: str
    label: str = ""
    basis: np.ndarray = None
    weights: np.ndarray = None

    def __post_init__(self):
        m = as_hermitian(self.matrix)
        n = m.shape[0]
        if n & (n - 1):
            raise InvalidInputError(f"operator dimension {n} is not a power of two")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def block_size(self):
        return self.dim.bit_length() - 1


@dataclass(frozen=True)
class NoOrder:
    """Non-exceptional outcome: the spectra admit no operator of this type."""

    reason: str
    rank: int = 0

    found = False


@dataclass(frozen=True, eq=False)
class DiagonalOrderSpec:
    """Diagonal order operator ``O = sum_mu w_mu |phi_mu><phi_mu|``.

    Attributes
    ----------
    rank : int
        Number of modes with probability above the rank threshold.
    probabilities : ndarray
        Block spectrum ``p_mu`` (descending).
    groups : tuple of tuple of int
        Degenerate clusters among the ranked modes.
    weights : ndarray
        ``w_mu``; zero beyond the rank, ``max |w| = 1``.
    method : str
        ``"two-group"`` (unique traceless solution), ``"max-correlation"``
        (dominant eigenvector of the connected correlation matrix).
    reference_correlation : float
        Connected ``<O_i O_j> - <O_i><O_j>`` at the reference distance.
    admits_order : bool
        False when that correlation vanishes (within 1e-10).
    """

    rank: int
    probabilities: np.ndarray
    groups: tuple
    weights: np.ndarray
    method: str
    reference_correlation: float
    admits_order: bool
    operator: OrderOperator

    found = True

    def group_weights(self):
        return tuple(float(self.weights[g[0]]) for g in self.groups)


def _product_basis_diagonals(basis, rho_joint):
    """``q[mu, nu] = <phi_mu phi_nu| rho_joint |phi_mu phi_nu>``."""
    d = basis.shape[0]
    u = kron(basis, basis)
    return np.einsum("ik,ij,jk->k", u.conj(), rho_joint, u).real.reshape(d, d)


def connected_correlation_matrix(basis, rho_i, rho_joint):
    """Populations and the connected correlation matrix in the mode basis.

    Returns ``(p, p_j, q, c)`` with ``c[mu, nu] = q[mu, nu] - p[mu] p_j[nu]``,
    so that ``w @ c @ w`` is the connected correlation of the diagonal
    operator with weights ``w`` placed on both blocks.
    """
    rho_i = _matrix(rho_i)
    rho_joint = _matrix(rho_joint)
    d = basis.shape[0]
    if rho_joint.shape != (d * d, d * d):
        raise InvalidInputError(f"joint RDM shape {rho_joint.shape} does not match two blocks of dim {d}")
    rho_j = reduce_rdm(rho_joint, [d, d], [1])
    p = np.einsum("ik,ij,jk->k", basis.conj(), rho_i, basis).real
    p_j = np.einsum("ik,ij,jk->k", basis.conj(), rho_j, basis).real
    q = _product_basis_diagonals(basis, rho_joint)
    return p, p_j, q, q - np.outer(p, p_j)


def _dominant(c):
    """Eigenvector of the symmetric matrix `c` with the largest |eigenvalue|."""
    dec = eigh(0.5 * (c + c.T))
    lam = dec.eigenvalues
    k = int(np.flatnonzero(np.abs(lam) >= np.abs(lam).max() - 1e-14)[0])
    return dec.eigenvectors[:, k].real


def construct_diagonal(rdm_i, rdm_joint, eps=DEFAULT_RANK_EPS):
    """Diagonal order operator from the block spectrum.

    Weights live on the ``rank`` modes with ``p_mu > eps``. They satisfy
    ``sum w_mu p_mu = 0`` and ``max |w_mu| = 1``; the weight averaged over
    the largest-probability group is negative (first non-zero weight
    positive when that average vanishes).

    * two probability groups: equal weights per group, unique solution;
    * one group (fully degenerate spectrum): per-mode dominant eigenvector
      of the connected correlation matrix, shifted to be traceless;
    * more groups: the same, with weights tied inside each group.

    Returns
    -------
    DiagonalOrderSpec or NoOrder
        NoOrder when the block RDM has rank 1 (no correlation possible).
    """
    rho_i = _matrix(rdm_i)
    rho_joint = _matrix(rdm_joint)
    spec = eigh(rho_i)
    p_all = spec.eigenvalues
    rank = int(np.sum(p_all > eps))
    if rank <= 1:
        return NoOrder("rank-1 block density matrix: no correlation between blocks", rank)
    basis = np.asarray(spec.eigenvectors)
    _, _, _, c_full = connected_correlation_matrix(basis, rho_i, rho_joint)
    live = np.arange(rank)
    c = c_full[np.ix_(live, live)]
    p = p_all[:rank]
    groups = [tuple(i for i in g if i < rank) for g in spec.groups]
    groups = [g for g in groups if g]

    if len(groups) == 2:
        method = "two-group"
        mass = [p[list(g)].sum() for g in groups]
        w = np.empty(rank)
        w[list(groups[0])] = -1.0
        w[list(groups[1])] = mass[0] / mass[1]
    else:
        method = "max-correlation"
        if len(groups) == 1:
            w = _dominant(c)
        else:
            ind = np.zeros((rank, len(groups)))
            for k, g in enumerate(groups):
                ind[list(g), k] = 1.0 / np.sqrt(len(g))
            w = ind @ _dominant(ind.T @ c @ ind)
        # the connected correlation is blind to a constant shift: use it to make w traceless
        w = w - (w @ p) / p.sum()

    scale = np.abs(w).max()
    if scale < 1e-12:
        return NoOrder("spectra admit no traceless diagonal operator", rank)
    w = w / scale
    lead = w[list(groups[0])].mean()
    if lead > 1e-12:
        w = -w
    elif abs(lead) <= 1e-12:
        first = w[np.flatnonzero(np.abs(w) > 1e-12)[0]]
        if first < 0:
            w = -w
    weights = np.zeros(len(p_all))
    weights[:rank] = w
    corr = float(weights @ c_full @ weights)
    matrix = (basis * weights) @ basis.conj().T
    op = OrderOperator(matrix, "diagonal", "diagonal", basis=basis, weights=weights)
    return DiagonalOrderSpec(
        rank=rank,
        probabilities=p_all,
        groups=tuple(groups),
        weights=weights,
        method=method,
        reference_correlation=corr,
        admits_order=abs(corr) > CORRELATION_EPS,
        operator=op,
    )


@dataclass(frozen=True)
class OffDiagonalPair:
    """Mode pair with its two coherence elements in the joint RDM.

    ``exchange = <a+_mu a_nu (x) a+_nu a_mu>`` and
    ``pairing = <a+_mu a_nu (x) a+_mu a_nu>``.
    """

    mu: int
    nu: int
    exchange: complex
    pairing: complex

    @property
    def strength(self):
        return max(abs(self.exchange), abs(self.pairing))


def detect_offdiagonal_pairs(rdm_a, rdm_b, rdm_joint, eps=DEFAULT_OFFDIAG_EPS):
    """Mode pairs ``(mu < nu)`` with a coherence element above `eps`.

    Both blocks are expressed in the eigenbasis of `rdm_a`, i.e. the same
    operator is placed on both blocks.
    """
    ma, mb, mj = _matrix(rdm_a), _matrix(rdm_b), _matrix(rdm_joint)
    d = ma.shape[0]
    if mb.shape != ma.shape or mj.shape != (d * d, d * d):
        raise InvalidInputError("inconsistent block dimensions")
    basis = np.asarray(eigh(ma).eigenvectors)
    u = kron(basis, basis)
    t = (u.conj().T @ mj @ u).reshape(d, d, d, d)
    pairs = []
    for mu in range(d):
        for nu in range(mu + 1, d):
            pair = OffDiagonalPair(mu, nu, complex(t[nu, mu, mu, nu]), complex(t[nu, nu, mu, mu]))
            if pair.strength > eps:
                pairs.append(pair)
    return pairs


@dataclass(frozen=True, eq=False)
class OffDiagonalOrderSpec:
    """Off-diagonal operators on the detected pairs.

    ``x_operator = sum (|mu><nu| + |nu><mu|)`` and
    ``y_operator = sum (-i|mu><nu| + i|nu><mu|)``; for the single-site pair
    (up, down) these are sigma^x and sigma^y. A complex weight
    ``w = x + i y`` on a pair gives ``x X - y Y``.
    """

    pairs: tuple
    x_operator: OrderOperator
    y_operator: OrderOperator
    operator: OrderOperator

    found = True


def construct_offdiagonal(pairs, basis, weights=None):
    """Hermitian, traceless operators from mode pairs.

    Parameters
    ----------
    pairs : sequence of OffDiagonalPair or (mu, nu)
    basis : ndarray
        Mode eigenvectors as columns (eigenbasis of the block RDM).
    weights : sequence of complex, optional
        One weight per pair, default 1.
    """
    pairs = tuple(pairs)
    if not pairs:
        return NoOrder("no off-diagonal coherence between blocks")
    basis = np.asarray(basis, dtype=np.complex128)
    d = basis.shape[0]
    idx = [(p.mu, p.nu) if isinstance(p, OffDiagonalPair) else (int(p[0]), int(p[1])) for p in pairs]
    if weights is None:
        weights = [1.0] * len(idx)
    if len(weights) != len(idx):
        raise InvalidInputError("need one weight per pair")
    gx = np.zeros((d, d), dtype=np.complex128)
    gy = np.zeros((d, d), dtype=np.complex128)
    gw = np.zeros((d, d), dtype=np.complex128)
    for (mu, nu), w in zip(idx, weights):
        if mu == nu:
            raise InvalidInputError(f"pair ({mu}, {nu}) is not off-diagonal")
        gx[mu, nu] += 1.0
        gx[nu, mu] += 1.0
        gy[mu, nu] += -1j
        gy[nu, mu] += 1j
        gw[mu, nu] += w
        gw[nu, mu] += np.conj(w)

    def rotate(g):
        return basis @ g @ basis.conj().T

    return OffDiagonalOrderSpec(
        pairs=pairs,
        x_operator=OrderOperator(rotate(gx), "offdiagonal-x", "offdiagonal_x", basis=basis),
        y_operator=OrderOperator(rotate(gy), "offdiagonal-y", "offdiagonal_y", basis=basis),
        operator=OrderOperator(rotate(gw), "offdiagonal", "offdiagonal", basis=basis),
    )


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    """Two-point function of one block operator versus distance.

    `connected` is ``<O_i O_j> - <O_i><O_j>`` from the joint RDM; `full`
    is ``<O_i O_j>``. `state_route` holds the same full correlation
    computed on the whole state vector, and `route_deviation` the largest
    difference between the two routes. For diagonal operators
    `contraction_q` re-derives ``<O_i O_j>`` from the joint spectrum and
    overlap matrix, and `contraction_p` is the variant contracted with
    product populations ``p_mu' p_nu'`` (reported, not asserted).
    """

    label: str
    block_size: int
    anchor: int
    distances: tuple
    connected: tuple
    full: tuple
    local_i: tuple
    local_j: tuple
    state_route: tuple = ()
    route_deviation: float = float("nan")
    contraction_q: tuple = ()
    contraction_p: tuple = ()
    meta: dict = field(default_factory=dict)


def _contractions(weights, basis, rho_joint):
    d = basis.shape[0]
    dec = eigh(rho_joint)
    overlap = dec.eigenvectors.conj().T @ kron(basis, basis)
    pm = np.abs(overlap.T) ** 2  # rows: product modes (mu nu), cols: joint eigenvectors
    ww = np.outer(weights, weights).ravel()
    via_q = float(ww @ (pm @ dec.eigenvalues))
    p = np.einsum("ik,ij,jk->k", basis.conj(), reduce_rdm(rho_joint, [d, d], [0]), basis).real
    via_p = float(np.outer(p, p).ravel() @ pm @ ww)
    return via_q, via_p


def correlation_profile(state, op, anchor=0, distances=None, cross_check=True, label=None):
    """Correlation of a block operator between ``anchor`` and ``anchor + r``.

    Parameters
    ----------
    op : OrderOperator or array_like
        Hermitian matrix on ``m`` sites.
    distances : sequence of int, optional
        Defaults to ``m, ..., floor(N/2)``.
    cross_check : bool
        Also evaluate the correlation on the full state vector.
    """
    if not isinstance(state, StateVector):
        state = StateVector.from_amplitudes(state)
    if not isinstance(op, OrderOperator):
        op = OrderOperator(op, "custom", label or "custom")
    n = state.n_sites
    m = op.block_size
    if distances is None:
        distances = tuple(range(m, n // 2 + 1))
    distances = tuple(int(r) for r in distances)
    a = Block.contiguous(anchor, m, n)
    rho_i = partial_trace(state, a)
    conn, full, loc_i, loc_j, route, cq, cp = [], [], [], [], [], [], []
    o = op.matrix
    for r in distances:
        if r < m or r > n - m:
            raise InvalidInputError(f"distance {r} makes blocks of {m} sites overlap on {n} sites")
        b = Block.contiguous(anchor + r, m, n)
        rho = joint_rdm(state, a, b).matrix
        both = expectation(kron(o, o), rho)
        oi = expectation(o, reduce_rdm(rho, [op.dim, op.dim], [0]))
        oj = expectation(o, reduce_rdm(rho, [op.dim, op.dim], [1]))
        full.append(both)
        loc_i.append(oi)
        loc_j.append(oj)
        conn.append(both - oi * oj)
        if cross_check:
            phi = apply_local_operator(apply_local_operator(state, o, b), o, a)
            route.append(float(np.vdot(state.amplitudes, phi).real))
        if op.weights is not None and op.basis is not None:
            q_val, p_val = _contractions(op.weights, op.basis, rho)
            cq.append(q_val)
            cp.append(p_val)
    deviation = float(np.max(np.abs(np.subtract(route, full)))) if route else float("nan")
    return CorrelationProfile(
        label=label or op.label,
        block_size=m,
        anchor=anchor,
        distances=distances,
        connected=tuple(conn),
        full=tuple(full),
        local_i=tuple(loc_i),
        local_j=tuple(loc_j),
        state_route=tuple(route),
        route_deviation=deviation,
        contraction_q=tuple(cq),
        contraction_p=tuple(cp),
        meta={"local_expectation_anchor": expectation(o, rho_i.matrix)},
    )


@dataclass(frozen=True)
class ModeResult:
    """Dominant momentum of a correlation profile.

    `k` is None (and `found` False) for an all-zero profile. `wavelength`
    is ``2 pi / k``, None when ``k = 0`` (infinite wavelength).
    """

    k: object
    wavelength: object
    momenta: tuple
    magnitudes: tuple
    distances: tuple
    found: bool


def extract_mode(profile, values=None, zero_tol=1e-12):
    """Argmax of the discrete Fourier magnitude of ``C(r)`` over ``k in [0, pi]``.

    Takes a :class:`CorrelationProfile` (its connected part) or two
    sequences ``(distances, values)``. Distances must be consecutive
    integers, at least four of them. With an odd count the shortest
    distance is dropped so that ``k = pi`` lies on the momentum grid
    ``2 pi j / R``. Ties go to the smaller ``k``.
    """
    if values is None:
        distances, values = profile.distances, profile.connected
    else:
        distances = profile
    r = np.asarray(distances, dtype=int)
    c = np.asarray(values, dtype=float)
    if r.size != c.size:
        raise InvalidInputError("distances and values differ in length")
    if r.size < 4:
        raise InvalidInputError(f"need at least 4 distances for a mode, got {r.size}")
    if np.any(np.diff(r) != 1):
        raise InvalidInputError("distances must be consecutive integers")
    if r.size % 2:
        r, c = r[1:], c[1:]
    big_r = r.size
    momenta = 2 * np.pi * np.arange(big_r // 2 + 1) / big_r
    amps = np.abs(np.exp(-1j * np.outer(momenta, r)) @ c)
    used = tuple(int(x) for x in r)
    if np.max(np.abs(c)) < zero_tol:
        return ModeResult(None, None, tuple(momenta), tuple(amps), used, False)
    best = int(np.flatnonzero(amps >= amps.max() * (1 - 1e-12))[0])
    k = float(momenta[best])
    wavelength = None if best == 0 else float(2 * np.pi / k)
    return ModeResult(k, wavelength, tuple(float(x) for x in momenta), tuple(float(x) for x in amps), used, True)


def named_operator(name):
    """Preset block operators: sigma_x, sigma_y, sigma_z, dimer (1 + 2/3 s.s)."""
    key = name.strip().lower()
    table = {
        "sigma_x": SIGMA_X,
        "sigma_y": SIGMA_Y,
        "sigma_z": SIGMA_Z,
        "dimer": np.eye(4) + (2.0 / 3.0) * sigma_dot_sigma(),
    }
    if key not in table:
        raise InvalidInputError(f"unknown operator {name!r}; choose from {sorted(table)}")
    return OrderOperator(np.array(table[key]), "named", key)


def reference_distance(n_sites, block_size):
    """Largest multiple of the block size not exceeding ``floor(N/2)``."""
    r = (n_sites // 2) // block_size * block_size
    if r < block_size:
        raise InvalidInputError(f"{n_sites} sites leave no room for two blocks of {block_size}")
    return r
