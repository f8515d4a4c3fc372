"""Dense Hermitian linear algebra used by the RDM pipeline.

The matrices handled here are small (block density matrices, at most
256 x 256), so a self-contained cyclic Jacobi eigensolver is used instead
of LAPACK. It is deterministic: fixed sweep order, fixed eigenvector phase,
and a fixed ordering of degenerate eigenvalues.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, InvalidInputError

HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-9
NORMALIZATION_TOL = 1e-10
NEGATIVE_PROB_TOL = 1e-12
MAX_SWEEPS = 100


def as_hermitian(m, tol=HERMITIAN_TOL):
    """Return `m` as a complex square array after checking Hermiticity.

    The elementwise tolerance is scaled by ``max(1, max|m_ij|)``.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    err = float(np.max(np.abs(a - a.conj().T)))
    if err > tol * scale:
        raise InvalidInputError(f"matrix is not Hermitian (max |m - m^H| = {err:.3e})")
    return a


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : ndarray
        Real eigenvalues in descending order.
    eigenvectors : ndarray
        Orthonormal eigenvectors as columns, same order as `eigenvalues`.
    groups : tuple of tuple of int
        Indices of (near-)degenerate eigenvalues, ``|l_i - l_j| < 1e-9``.
        Individual vectors inside a group with more than one member are
        not unique; only the spanned subspace is.
    sweeps : int
        Number of Jacobi sweeps used.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    groups: tuple
    sweeps: int = 0

    @property
    def dim(self):
        return len(self.eigenvalues)

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _round_robin(n):
    """Pairings of a round-robin tournament on ``n`` players (circle method).

    Every unordered pair appears exactly once across the ``n - 1`` rounds
    (an odd ``n`` gets a bye player that is dropped).
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for k in range(m // 2):
            p, q = players[k], players[m - 1 - k]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        if pairs:
            pp, qq = zip(*sorted(pairs))
            rounds.append((np.array(pp), np.array(qq)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _offdiag_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _rows(m, p, q, f00, f01, f10, f11):
    """Rows p, q of `m` replaced by [[f00, f01], [f10, f11]] @ [row_p; row_q]."""
    rp, rq = m[p], m[q]
    m[p] = f00[:, None] * rp + f01[:, None] * rq
    m[q] = f10[:, None] * rp + f11[:, None] * rq
    return m


def _jacobi(a, max_sweeps=MAX_SWEEPS):
    n = a.shape[0]
    a = a.copy()
    vt = np.eye(n, dtype=np.complex128)
    if n == 1:
        return a.diagonal().real.copy(), vt, 0
    # absolute target; the floor keeps large-norm inputs above rounding level
    target = max(1e-12 * n, 1e-15 * n * float(np.linalg.norm(a)))
    rounds = _round_robin(n)
    for sweep in range(max_sweeps):
        if _offdiag_norm(a) < target:
            return a.diagonal().real.copy(), vt.T.copy(), sweep
        for p, q in rounds:
            apq = a[p, q]
            babs = np.abs(apq)
            active = babs > 1e-300
            if not np.any(active):
                continue
            app = a[p, p].real
            aqq = a[q, q].real
            safe = np.where(active, babs, 1.0)
            phase = np.where(active, apq / safe, 1.0)
            tau = (aqq - app) / (2.0 * safe)
            sgn = np.where(tau >= 0.0, 1.0, -1.0)
            t = np.where(active, sgn / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # unitary G = diag(1, e^{-i phi}) @ [[c, s], [-s, c]] on each (p, q);
            # A -> G^H A G computed as two row passes, G^H (G^H A)^H, since A = A^H
            ph = np.conj(phase)
            g00, g01, g10, g11 = c, s, -s * ph, c * ph
            a = _rows(a, p, q, g00, np.conj(g10), np.conj(g01), np.conj(g11))
            a = np.ascontiguousarray(a.conj().T)
            a = _rows(a, p, q, g00, np.conj(g10), np.conj(g01), np.conj(g11))
            a[p, q] = 0.0
            a[q, p] = 0.0
            # eigenvectors kept transposed: V^T -> G^T V^T
            vt = _rows(vt, p, q, g00, g10, g01, g11)
    off = _offdiag_norm(a)
    if off < target:
        return a.diagonal().real.copy(), vt.T.copy(), max_sweeps
    raise ConvergenceError(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})",
        residual=off,
        iterations=max_sweeps,
    )


def _fix_phase(v):
    """Make the largest-modulus component of each column real-positive."""
    v = v.copy()
    for k in range(v.shape[1]):
        mod = np.abs(v[:, k])
        i = int(np.flatnonzero(mod >= mod.max() - 1e-12)[0])
        v[:, k] *= np.conj(v[i, k]) / mod[i]
        v[i, k] = mod[i]
    return v


def _group(values, tol):
    groups, current = [], [0]
    for i in range(1, len(values)):
        if abs(values[i] - values[i - 1]) < tol:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    return groups


def eigh(m, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Eigenvalues are returned in descending order. Eigenvalues closer than
    ``DEGENERACY_TOL`` form a group; inside a group vectors keep the order
    of the diagonal position they converged to, so an already diagonal
    input returns the identity basis in index order.

    Raises
    ------
    InvalidInputError
        If `m` is not Hermitian within `tol`.
    """
    a = as_hermitian(m, tol)
    a = 0.5 * (a + a.conj().T)
    lam, v, sweeps = _jacobi(a)
    order = np.argsort(-lam, kind="stable")
    # inside near-degenerate runs, order by diagonal position
    groups = _group(lam[order], DEGENERACY_TOL)
    order = np.concatenate([np.sort(order[g]) for g in groups])
    lam = lam[order]
    v = _fix_phase(v[:, order])
    lam.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(
        eigenvalues=lam,
        eigenvectors=v,
        groups=tuple(tuple(int(i) for i in g) for g in _group(lam, DEGENERACY_TOL)),
        sweeps=sweeps,
    )


def entropy_bits(p):
    """Von Neumann (Shannon) entropy in bits of a probability spectrum.

    Tiny negative entries (``>= -1e-12``) are clamped to zero, and
    ``0 log 0`` is taken as 0.
    """
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        raise InvalidInputError("empty probability list")
    if np.any(p < -NEGATIVE_PROB_TOL):
        raise InvalidInputError(f"negative probability {p.min():.3e}")
    total = p.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidInputError(f"probabilities sum to {total!r}, not 1")
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def kron(a, b):
    """Tensor product with A-major ordering: index ``mu * dim(b) + nu``."""
    return np.kron(np.asarray(a), np.asarray(b))


def trace_product(m, rho):
    """Complex ``tr(rho @ m)`` without forming the product."""
    m = np.asarray(m)
    rho = np.asarray(rho)
    if m.shape != rho.shape or m.ndim != 2:
        raise InvalidInputError(f"dimension mismatch: operator {m.shape} vs state {rho.shape}")
    return complex(np.sum(rho * m.T))


def expectation(m, rho):
    """Real expectation value ``tr(rho m)`` of a Hermitian observable."""
    val = trace_product(m, rho)
    scale = max(1.0, float(np.max(np.abs(m))))
    if abs(val.imag) > 1e-10 * scale:
        raise InvalidInputError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return val.real
