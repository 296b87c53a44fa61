"""scikit-learn style wrappers around the functional core.

The encoder and channel are transformers and the decoder is a predictor,
so the three compose in a :class:`sklearn.pipeline.Pipeline`.  ``fit`` only
builds the code tree; there is nothing to learn from data.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from rmlist.channel import modulate, trial_rng
from rmlist.code_tree import ParameterError, tree_from_spec
from rmlist.decoder import ListSchedule, list_decode
from rmlist.encoder import encode
from rmlist.validation import check_bits, check_evidence, check_llr, check_sigma

OUTPUTS = ("evidence", "llr", "y")


class _CodeMixin:
    """Shared construction of the code tree from estimator parameters."""

    def _code_spec(self):
        spec = {
            "type": self.code,
            "m": self.m,
            "r": self.r,
            "termination": self.termination,
        }
        if self.code == "quad":
            spec["ordering"] = self.ordering
        if self.freezing is not None:
            spec["freezing"] = list(self.freezing)
        if self.freeze_leading:
            spec["freeze_leading"] = self.freeze_leading
        return spec

    def _build(self):
        self.tree_ = tree_from_spec(self._code_spec())
        self.n_ = self.tree_.n
        self.k_ = self.tree_.k


class RMEncoder(_CodeMixin, TransformerMixin, BaseEstimator):
    """Map rows of information bits to codewords.

    Parameters
    ----------
    m, r : int
        Length ``2**m`` and order of the underlying code.
    code : {"rm", "quad"}
    termination : {"partial", "full"}
    ordering : {"standard", "chained"}
        Only used for ``code="quad"``.
    freezing : sequence of int, optional
        Per-leaf frozen prefix lengths.
    freeze_leading : int
        Freeze this many leading information bits.
    """

    def __init__(self, m=4, r=1, code="rm", termination="partial", ordering="standard", freezing=None, freeze_leading=0):
        self.m = m
        self.r = r
        self.code = code
        self.termination = termination
        self.ordering = ordering
        self.freezing = freezing
        self.freeze_leading = freeze_leading

    def fit(self, X=None, y=None):
        self._build()
        self.n_features_in_ = self.k_
        return self

    def transform(self, X):
        check_is_fitted(self, "tree_")
        return encode(self.tree_, check_bits(X, self.k_, name="information bits"))


class AWGNChannel(TransformerMixin, BaseEstimator):
    """BPSK over additive white Gaussian noise.

    Row ``i`` of the input gets the noise of trial ``i`` under ``seed``, so
    the same input always gets the same noise.  ``output`` selects channel
    values ``y``, LLRs ``2y/sigma**2`` or evidence ``tanh(y/sigma**2)``.
    """

    def __init__(self, sigma=1.0, seed=None, output="evidence"):
        self.sigma = sigma
        self.seed = seed
        self.output = output

    def fit(self, X=None, y=None):
        self.sigma_ = check_sigma(self.sigma)
        if self.output not in OUTPUTS:
            raise ParameterError(f"output must be one of {OUTPUTS}, got {self.output!r}")
        self.seed_ = int(np.random.SeedSequence().entropy % 2**63) if self.seed is None else int(self.seed)
        return self

    def transform(self, X):
        check_is_fitted(self, "seed_")
        cw = check_bits(X, name="codewords")
        rows = np.atleast_2d(cw)
        noise = np.stack([trial_rng(self.seed_, i).standard_normal(rows.shape[1]) for i in range(len(rows))])
        y = modulate(rows) + self.sigma_ * noise
        if self.output == "llr":
            y = 2.0 * y / self.sigma_**2
        elif self.output == "evidence":
            y = np.tanh(y / self.sigma_**2)
        return y if cw.ndim == 2 else y[0]


class RecursiveListDecoder(_CodeMixin, BaseEstimator):
    """Recursive soft-decision list decoder.

    ``input`` says whether ``X`` holds evidence ``Pr{0} - Pr{1}`` or LLRs.
    ``score`` is the fraction of blocks decoded correctly.
    """

    def __init__(
        self,
        m=4,
        r=1,
        code="rm",
        termination="partial",
        ordering="standard",
        freezing=None,
        freeze_leading=0,
        L=1,
        full_leaf_factor=1,
        input="evidence",
    ):
        self.m = m
        self.r = r
        self.code = code
        self.termination = termination
        self.ordering = ordering
        self.freezing = freezing
        self.freeze_leading = freeze_leading
        self.L = L
        self.full_leaf_factor = full_leaf_factor
        self.input = input

    def fit(self, X=None, y=None):
        if self.input not in ("evidence", "llr"):
            raise ParameterError(f"input must be 'evidence' or 'llr', got {self.input!r}")
        self._build()
        self.schedule_ = ListSchedule(L=self.L, full_leaf_factor=self.full_leaf_factor)
        self.n_features_in_ = self.n_
        return self

    def decode(self, X):
        check_is_fitted(self, "tree_")
        if self.input == "llr":
            return list_decode(self.tree_, check_llr(X, self.n_), self.schedule_, llr=True)
        return list_decode(self.tree_, check_evidence(X, self.n_), self.schedule_)

    def predict(self, X):
        return self.decode(X).info

    def predict_codeword(self, X):
        return self.decode(X).codeword

    def score(self, X, y):
        info = np.atleast_2d(self.predict(X))
        truth = np.atleast_2d(check_bits(y, self.k_, name="information bits"))
        return float(np.mean((info == truth).all(axis=1)))
