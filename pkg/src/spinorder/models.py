"""Spin-chain Hamiltonians, a matrix-free Lanczos solver and reference states.

Hamiltonians use spin operators ``S = sigma / 2``; a bond ``(i, j, Jx, Jy, Jz)``
contributes ``Jx Sx_i Sx_j + Jy Sy_i Sy_j + Jz Sz_i Sz_j``.
"""

import json
import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, InvalidInputError
from .hilbert import MAX_SITES, SpinBasis, StateVector

BOUNDARIES = ("periodic", "open")


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    jx: float
    jy: float
    jz: float

    def as_list(self):
        return [self.i, self.j, self.jx, self.jy, self.jz]


@dataclass(frozen=True)
class SpinChainModel:
    """Spin-1/2 chain with an explicit list of two-site bonds."""

    n_sites: int
    bonds: tuple
    boundary: str = "periodic"
    name: str = "custom"

    def __post_init__(self):
        if not 2 <= self.n_sites <= MAX_SITES:
            raise InvalidInputError(f"n_sites must be in [2, {MAX_SITES}], got {self.n_sites}")
        if self.boundary not in BOUNDARIES:
            raise InvalidInputError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        bonds = []
        for b in self.bonds:
            if not isinstance(b, Bond):
                if len(b) != 5:
                    raise InvalidInputError(f"bond must be [i, j, Jx, Jy, Jz], got {b!r}")
                b = Bond(int(b[0]), int(b[1]), float(b[2]), float(b[3]), float(b[4]))
            if not (0 <= b.i < self.n_sites and 0 <= b.j < self.n_sites) or b.i == b.j:
                raise InvalidInputError(f"bond ({b.i}, {b.j}) is invalid on {self.n_sites} sites")
            bonds.append(b)
        object.__setattr__(self, "bonds", tuple(bonds))

    @property
    def conserves_sz(self):
        return all(b.jx == b.jy for b in self.bonds)

    def to_dict(self):
        return {
            "name": self.name,
            "n_sites": self.n_sites,
            "boundary": self.boundary,
            "bonds": [b.as_list() for b in self.bonds],
        }


def _chain_bonds(n, distance, coupling, boundary):
    jx, jy, jz = coupling
    last = n if boundary == "periodic" else n - distance
    return [Bond(i, (i + distance) % n, jx, jy, jz) for i in range(last)]


def heisenberg(n_sites, j=1.0, boundary="periodic"):
    return SpinChainModel(n_sites, tuple(_chain_bonds(n_sites, 1, (j, j, j), boundary)), boundary, "heisenberg")


def xxz(n_sites, delta, j=1.0, boundary="periodic"):
    bonds = _chain_bonds(n_sites, 1, (j, j, j * delta), boundary)
    return SpinChainModel(n_sites, tuple(bonds), boundary, f"xxz({delta:g})")


def majumdar_ghosh(n_sites, j1=1.0, j2=0.5, boundary="periodic"):
    bonds = _chain_bonds(n_sites, 1, (j1, j1, j1), boundary)
    bonds += _chain_bonds(n_sites, 2, (j2, j2, j2), boundary)
    return SpinChainModel(n_sites, tuple(bonds), boundary, "majumdar_ghosh")


_XXZ = re.compile(r"^xxz\(\s*([-+0-9.eE]+)\s*\)$")


def preset(name, n_sites, boundary="periodic"):
    """Expand a preset name (``heisenberg``, ``xxz(D)``, ``majumdar_ghosh``)."""
    key = name.strip().lower()
    if key == "heisenberg":
        return heisenberg(n_sites, boundary=boundary)
    if key in ("majumdar_ghosh", "majumdar-ghosh", "mg"):
        return majumdar_ghosh(n_sites, boundary=boundary)
    m = _XXZ.match(key)
    if m:
        return xxz(n_sites, float(m.group(1)), boundary=boundary)
    raise InvalidInputError(f"unknown model preset {name!r}")


def load_model(source, n_sites=None):
    """Model from a JSON document, a path to one, or a preset name.

    The document is ``{"n_sites": N, "bonds": [[i, j, Jx, Jy, Jz], ...],
    "boundary": "periodic" | "open"}``; ``{"preset": "xxz(0.5)", "n_sites": N}``
    is accepted too.
    """
    if isinstance(source, (str, os.PathLike)):
        text = str(source)
        if os.path.exists(text):
            with open(text) as fh:
                doc = json.load(fh)
        elif text.lstrip().startswith("{"):
            doc = json.loads(text)
        else:
            if n_sites is None:
                raise InvalidInputError(f"preset {text!r} needs a number of sites")
            return preset(text, n_sites)
    else:
        doc = dict(source)
    boundary = doc.get("boundary", "periodic")
    n = doc.get("n_sites", n_sites)
    if n is None:
        raise InvalidInputError("model document lacks n_sites")
    if n_sites is not None and int(n) != int(n_sites):
        raise InvalidInputError(f"model has {n} sites but {n_sites} were requested")
    if "preset" in doc:
        return preset(doc["preset"], int(n), boundary)
    if "bonds" not in doc:
        raise InvalidInputError("model document needs 'bonds' or 'preset'")
    return SpinChainModel(int(n), tuple(doc["bonds"]), boundary, doc.get("name", "custom"))


def sz_sector(n_sites, n_down):
    """Sorted basis indices with exactly `n_down` down spins."""
    if not 0 <= n_down <= n_sites:
        raise InvalidInputError(f"n_down={n_down} out of range for {n_sites} sites")
    states = np.arange(1 << n_sites, dtype=np.int64)
    counts = np.zeros_like(states)
    for s in range(n_sites):
        counts += (states >> s) & 1
    return states[counts == n_down]


class HamiltonianOperator:
    """Matrix-free action of a model Hamiltonian on a basis subset.

    Parameters
    ----------
    model : SpinChainModel
    n_down : int or None
        Restrict to the sector with this many down spins (requires
        ``Jx == Jy`` on every bond); None acts on all ``2**N`` states.
    """

    def __init__(self, model, n_down=None):
        self.model = model
        n = model.n_sites
        if n_down is None:
            self.states = np.arange(1 << n, dtype=np.int64)
        else:
            if not model.conserves_sz:
                raise InvalidInputError("model does not conserve Sz; sector restriction impossible")
            self.states = sz_sector(n, n_down)
        self.n_down = n_down
        lookup = np.full(1 << n, -1, dtype=np.int64)
        lookup[self.states] = np.arange(self.states.size)
        self.diagonal = np.zeros(self.states.size)
        self.hops = []
        for b in model.bonds:
            bi = (self.states >> b.i) & 1
            bj = (self.states >> b.j) & 1
            self.diagonal += 0.25 * b.jz * (1 - 2 * bi) * (1 - 2 * bj)
            mask = (1 << b.i) | (1 << b.j)
            for sel, coef in ((bi != bj, 0.25 * (b.jx + b.jy)), (bi == bj, 0.25 * (b.jx - b.jy))):
                if coef == 0.0:
                    continue
                src = np.flatnonzero(sel)
                tgt = lookup[self.states[src] ^ mask]
                self.hops.append((src, tgt, coef))

    @property
    def dim(self):
        return self.states.size

    def matvec(self, v):
        out = self.diagonal * v
        for src, tgt, coef in self.hops:
            # each bond maps basis states one-to-one, so targets are unique per term
            out[tgt] += coef * v[src]
        return out

    def to_dense(self):
        h = np.zeros((self.dim, self.dim))
        h[np.arange(self.dim), np.arange(self.dim)] = self.diagonal
        for src, tgt, coef in self.hops:
            h[tgt, src] += coef
        return h

    def embed(self, v):
        full = np.zeros(1 << self.model.n_sites, dtype=np.complex128)
        full[self.states] = v
        return full


def apply_hamiltonian(model, v):
    """``H |v>`` on the full ``2**N`` basis (unnormalized amplitude array)."""
    if isinstance(v, StateVector):
        v = v.amplitudes
    v = np.asarray(v)
    if v.shape != (1 << model.n_sites,):
        raise InvalidInputError(f"vector of shape {v.shape} does not match {model.n_sites} sites")
    return HamiltonianOperator(model).matvec(v.astype(np.complex128))


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    energy: float
    state: StateVector
    iterations: int
    residual: float
    n_down: object = None
    sector_dim: int = 0
    restarts: int = 0
    meta: dict = field(default_factory=dict)


def default_sector(model):
    """Sz = 0 for even-N, Sz-conserving models with non-negative couplings, else None."""
    if (
        model.n_sites % 2 == 0
        and model.conserves_sz
        and all(b.jx >= 0 and b.jz >= 0 for b in model.bonds)
    ):
        return model.n_sites // 2
    return None


def _fix_sign(x):
    mod = np.abs(x)
    i = int(np.flatnonzero(mod >= mod.max() - 1e-12)[0])
    return x * (np.conj(x[i]) / mod[i])


def lanczos_ground_state(model, tol=1e-10, max_iter=3000, seed=0, sector="auto", krylov_dim=60):
    """Lowest eigenpair by explicitly restarted Lanczos with full reorthogonalization.

    Each cycle builds at most `krylov_dim` Krylov vectors from the current
    guess (first cycle: a seeded Gaussian vector), then restarts from the
    Ritz vector. `max_iter` bounds the total number of matrix-vector
    products. Convergence means ``||H x - E x|| <= tol``.

    Parameters
    ----------
    sector : "auto", int or None
        Number of down spins to restrict to; "auto" uses :func:`default_sector`.

    Raises
    ------
    ConvergenceError
        If the residual is still above `tol` after `max_iter` products.
    """
    n_down = default_sector(model) if sector == "auto" else sector
    op = HamiltonianOperator(model, n_down)
    dim = op.dim
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    kmax = max(1, min(krylov_dim, dim))
    total = 0
    restarts = 0
    best = math.inf
    while True:
        basis = np.zeros((kmax, dim))
        basis[0] = v
        alphas, betas = [], []
        y = np.ones(1)
        for j in range(kmax):
            w = op.matvec(basis[j])
            total += 1
            a = float(basis[j] @ w)
            alphas.append(a)
            w -= a * basis[j]
            if j > 0:
                w -= betas[-1] * basis[j - 1]
            for _ in range(2):
                w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
            b = float(np.linalg.norm(w))
            t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            theta, vecs = np.linalg.eigh(t)
            y = vecs[:, 0]
            if b * abs(y[-1]) < 0.1 * tol or b < 1e-13 or j + 1 == kmax or total >= max_iter:
                break
            betas.append(b)
            basis[j + 1] = w / b
        x = basis[: len(alphas)].T @ y
        x /= np.linalg.norm(x)
        hx = op.matvec(x)
        total += 1
        energy = float(x @ hx)
        residual = float(np.linalg.norm(hx - energy * x))
        best = min(best, residual)
        if residual <= tol:
            break
        if total >= max_iter:
            raise ConvergenceError(
                f"Lanczos did not reach residual {tol:g} in {total} products (best {best:.3e})",
                residual=best,
                iterations=total,
            )
        v = x
        restarts += 1
    x = _fix_sign(x)
    state = StateVector(SpinBasis(model.n_sites), op.embed(x))
    return GroundStateResult(
        energy=energy,
        state=state,
        iterations=total,
        residual=residual,
        n_down=n_down,
        sector_dim=dim,
        restarts=restarts,
    )


def _covering(n, pairs):
    """Product of singlets [i, j] = (|u_i d_j> - |d_i u_j>)/sqrt(2) over `pairs`."""
    h = len(pairs)
    choices = (np.arange(1 << h)[:, None] >> np.arange(h)) & 1
    ii = np.array([1 << i for i, _ in pairs])
    jj = np.array([1 << j for _, j in pairs])
    # choice 0: i up, j down (bit j set, +); choice 1: i down, j up (bit i set, -)
    idx = np.where(choices == 1, ii, jj).sum(axis=1)
    sign = np.where(choices.sum(axis=1) % 2 == 0, 1.0, -1.0)
    amps = np.zeros(1 << n)
    amps[idx] = sign * 2.0 ** (-h / 2)
    return amps


def _check_even(n, what):
    if n < 4 or n % 2:
        raise InvalidInputError(f"{what} needs an even number of sites >= 4, got {n}")


def ghz_state(n):
    """(|uu...u> + |dd...d>) / sqrt(2)."""
    if n < 2:
        raise InvalidInputError(f"GHZ state needs at least 2 sites, got {n}")
    amps = np.zeros(1 << n)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return StateVector(SpinBasis(n), amps)


def neel_ghz_state(n):
    """(|udud...> + |dudu...>) / sqrt(2), site 0 first."""
    _check_even(n, "Neel-GHZ state")
    odd = sum(1 << s for s in range(1, n, 2))
    amps = np.zeros(1 << n)
    amps[odd] = amps[odd ^ ((1 << n) - 1)] = 1 / np.sqrt(2)
    return StateVector(SpinBasis(n), amps)


def dimer_coverings(n):
    """The two nearest-neighbour singlet coverings of an `n`-site ring."""
    _check_even(n, "dimer covering")
    first = [(i, i + 1) for i in range(0, n, 2)]
    second = [(n - 1, 0)] + [(i, i + 1) for i in range(1, n - 2, 2)]
    return _covering(n, first), _covering(n, second)


def dimer_superposition(n):
    """Normalized sum of the two dimer coverings.

    The coverings overlap by ``<psi2|psi1> = 2**(1 - n/2)``, so the norm is
    fixed numerically rather than with a plain 1/sqrt(2).
    """
    a, b = dimer_coverings(n)
    psi = a + b
    return StateVector(SpinBasis(n), psi / np.linalg.norm(psi))


def polarized_state(n):
    """All spins up."""
    return StateVector.product([0] * n)
