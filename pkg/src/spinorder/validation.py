"""Input validation helpers for state vectors and estimator inputs."""

import numpy as np

from .exceptions import InvalidInputError
from .hilbert import StateVector


def check_state(x, normalize=False):
    """Coerce `x` to a :class:`StateVector`.

    Accepts a StateVector, a 1-D amplitude array, or a 2-D array with a
    single row.
    """
    if isinstance(x, StateVector):
        return x
    a = np.asarray(x)
    if a.ndim == 2 and a.shape[0] == 1:
        a = a[0]
    if a.ndim != 1:
        raise InvalidInputError(f"expected a single state, got array of shape {a.shape}")
    if not np.issubdtype(a.dtype, np.number):
        raise InvalidInputError(f"amplitudes must be numeric, got dtype {a.dtype}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("amplitudes contain non-finite values")
    return StateVector.from_amplitudes(a, normalize=normalize)


def check_states(x, n_sites=None):
    """Coerce `x` to a list of StateVectors on a common number of sites.

    `x` may be one state (see :func:`check_state`), a 2-D array with one
    state per row, or a sequence of states.
    """
    if isinstance(x, StateVector):
        states = [x]
    else:
        if isinstance(x, (list, tuple)) and any(isinstance(s, StateVector) for s in x):
            items = list(x)
        else:
            a = np.asarray(x)
            items = [a] if a.ndim == 1 else list(a)
        if not items:
            raise InvalidInputError("no states given")
        states = [check_state(s) for s in items]
    sizes = {s.n_sites for s in states}
    if len(sizes) != 1:
        raise InvalidInputError(f"states have different site counts {sorted(sizes)}")
    if n_sites is not None and sizes != {n_sites}:
        raise InvalidInputError(f"expected states on {n_sites} sites, got {sizes.pop()}")
    return states


def check_positive(name, value, allow_zero=False):
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        raise InvalidInputError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value!r}")
    return value
