"""Estimator front end: learn block order operators from one state.

:class:`OrderParameterFinder` runs the full detection chain on a pure
state passed to :meth:`~OrderParameterFinder.fit`:

1. minimum block size from mutual information;
2. block spectrum and rank;
3. diagonal and off-diagonal order operators;
4. correlation profiles of those operators;
5. dominant mode of each profile.

``transform`` then evaluates the learned operators' connected correlation
at the reference distance on other states of the same size.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .hilbert import Block, joint_rdm, partial_trace
from .linalg import eigh, expectation, kron
from .mi import min_block_scan
from .orderparam import (
    NoOrder,
    construct_diagonal,
    construct_offdiagonal,
    correlation_profile,
    detect_offdiagonal_pairs,
    extract_mode,
    reference_distance,
)
from .validation import check_positive, check_state, check_states

LONG_RANGE_ORDER = "long-range order"
ALGEBRAIC = "long-range correlation (algebraic decay)"
NO_ORDER = "no long-range order"


def classify_mi_decay(distances, values, threshold, saturation_ratio=0.8):
    """Verdict from the tail of an MI profile.

    The MI at the largest distance is compared with the MI at a
    distance of the same parity roughly halfway back. A ratio of at least
    `saturation_ratio` reads as saturation (long-range order), a smaller one
    as decay. A tail below `threshold` is no order.

    Returns
    -------
    verdict : str
    ratio : float or None
    """
    r = list(distances)
    v = list(values)
    if v[-1] <= threshold:
        return NO_ORDER, None
    r_max = r[-1]
    r_mid = r_max - 2 * (r_max // 4)
    if r_mid not in r or r_mid == r_max:
        return LONG_RANGE_ORDER, None
    ratio = v[-1] / v[r.index(r_mid)]
    return (LONG_RANGE_ORDER if ratio >= saturation_ratio else ALGEBRAIC), float(ratio)


class OrderParameterFinder(TransformerMixin, BaseEstimator):
    """Find order operators of a spin-chain state from its block RDMs.

    Parameters
    ----------
    max_block : int, default=3
        Largest block size tried in the mutual-information scan.
    mi_threshold : float, default=1e-3
        MI (bits) above which the long-distance MI counts as non-vanishing.
    rank_eps : float, default=1e-10
        Eigenvalues above this count towards the rank of the block RDM.
    offdiag_eps : float, default=1e-8
        Coherence magnitude above which a mode pair is detected.
    anchor : int, default=0
        First site of the reference block.
    saturation_ratio : float, default=0.8
        Tail ratio separating saturating from decaying MI.

    Attributes
    ----------
    n_sites_ : int
    block_scan_ : BlockScan
    block_size_ : int or None
        None when no block size up to `max_block` shows long-range MI.
    reference_distance_ : int or None
    spectrum_ : EigenDecomposition or None
        Spectrum and modes of the reference block RDM.
    diagonal_ : DiagonalOrderSpec or NoOrder
    offdiagonal_pairs_ : list of OffDiagonalPair
    offdiagonal_ : OffDiagonalOrderSpec or NoOrder
    operators_ : dict
        Label to :class:`OrderOperator` for every learned operator.
    profiles_ : dict
        Label to :class:`CorrelationProfile`.
    cross_correlation_ : dict or None
        ``<O^x O^x>``, ``<O^y O^y>`` and ``<O^x O^y>`` (connected) at the
        reference distance.
    modes_ : dict
        Label to :class:`ModeResult` (None when the profile is too short).
    verdict_ : str
    saturation_ratio_value_ : float or None
    """

    def __init__(
        self,
        max_block=3,
        mi_threshold=1e-3,
        rank_eps=1e-10,
        offdiag_eps=1e-8,
        anchor=0,
        saturation_ratio=0.8,
    ):
        self.max_block = max_block
        self.mi_threshold = mi_threshold
        self.rank_eps = rank_eps
        self.offdiag_eps = offdiag_eps
        self.anchor = anchor
        self.saturation_ratio = saturation_ratio

    def fit(self, X, y=None):
        """Learn order operators from the state `X`."""
        state = check_state(X)
        check_positive("mi_threshold", self.mi_threshold, allow_zero=True)
        check_positive("rank_eps", self.rank_eps)
        check_positive("offdiag_eps", self.offdiag_eps)
        n = state.n_sites
        self.n_sites_ = n
        self.block_scan_ = min_block_scan(state, self.max_block, self.mi_threshold, self.anchor)
        self.block_size_ = self.block_scan_.block_size
        self.operators_ = {}
        self.profiles_ = {}
        self.modes_ = {}
        self.cross_correlation_ = None
        self.offdiagonal_pairs_ = []
        if self.block_size_ is None:
            self.reference_distance_ = None
            self.spectrum_ = None
            reason = f"no block up to {self.max_block} sites has long-range mutual information"
            self.diagonal_ = NoOrder(reason)
            self.offdiagonal_ = NoOrder(reason)
            self.verdict_, self.saturation_ratio_value_ = NO_ORDER, None
            return self

        m = self.block_size_
        r = reference_distance(n, m)
        self.reference_distance_ = r
        a = Block.contiguous(self.anchor, m, n)
        b = Block.contiguous(self.anchor + r, m, n)
        rho_i = partial_trace(state, a)
        rho_j = partial_trace(state, b)
        rho_ij = joint_rdm(state, a, b)
        self.spectrum_ = eigh(rho_i.matrix)

        self.diagonal_ = construct_diagonal(rho_i, rho_ij, self.rank_eps)
        if self.diagonal_.found:
            self.operators_["diagonal"] = self.diagonal_.operator
        self.offdiagonal_pairs_ = detect_offdiagonal_pairs(rho_i, rho_j, rho_ij, self.offdiag_eps)
        self.offdiagonal_ = construct_offdiagonal(self.offdiagonal_pairs_, self.spectrum_.eigenvectors)
        if self.offdiagonal_.found:
            ox, oy = self.offdiagonal_.x_operator, self.offdiagonal_.y_operator
            self.operators_["offdiagonal_x"] = ox
            self.operators_["offdiagonal_y"] = oy
            self.cross_correlation_ = {
                "xx": _connected(rho_ij.matrix, ox.matrix, ox.matrix),
                "yy": _connected(rho_ij.matrix, oy.matrix, oy.matrix),
                "xy": _connected(rho_ij.matrix, ox.matrix, oy.matrix),
            }

        for label, op in self.operators_.items():
            prof = correlation_profile(state, op, self.anchor, label=label)
            self.profiles_[label] = prof
            self.modes_[label] = extract_mode(prof) if len(prof.distances) >= 4 else None

        mi = self.block_scan_.profiles[m - 1]
        self.verdict_, self.saturation_ratio_value_ = classify_mi_decay(
            mi.distances, mi.values, self.mi_threshold, self.saturation_ratio
        )
        return self

    @property
    def order_found_(self):
        """True when some learned operator has a non-zero long-distance correlation."""
        check_is_fitted(self, "verdict_")
        if self.block_size_ is None:
            return False
        diag = self.diagonal_.found and self.diagonal_.admits_order
        return bool(diag or self.offdiagonal_.found)

    def transform(self, X):
        """Connected correlation of each learned operator at the reference distance.

        Returns
        -------
        ndarray of shape (n_states, n_operators)
            Columns follow :meth:`get_feature_names_out`.
        """
        check_is_fitted(self, "verdict_")
        states = check_states(X, self.n_sites_)
        labels = list(self.operators_)
        out = np.zeros((len(states), len(labels)))
        if not labels:
            return out
        m, r, n = self.block_size_, self.reference_distance_, self.n_sites_
        a = Block.contiguous(self.anchor, m, n)
        b = Block.contiguous(self.anchor + r, m, n)
        for i, s in enumerate(states):
            rho = joint_rdm(s, a, b).matrix
            for j, label in enumerate(labels):
                o = self.operators_[label].matrix
                out[i, j] = _connected(rho, o, o)
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "verdict_")
        return np.array([f"C_{label}" for label in self.operators_], dtype=object)


def _connected(rho_joint, o_a, o_b):
    d = o_a.shape[0]
    t = rho_joint.reshape(d, d, d, d)
    rho_a = np.einsum("ajbj->ab", t)
    rho_b = np.einsum("jajb->ab", t)
    return expectation(kron(o_a, o_b), rho_joint) - expectation(o_a, rho_a) * expectation(o_b, rho_b)
