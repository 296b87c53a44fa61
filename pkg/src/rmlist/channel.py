"""Antipodal modulation, AWGN, and soft evidence.

Bit 0 is sent as +1 and bit 1 as -1.  Evidence is ``eps = 2*Pr{bit=0|y} - 1``;
for ``y ~ N(+-1, sigma^2)`` that is ``tanh(y / sigma^2)``, and the matching
log-likelihood ratio ``log Pr{0|y}/Pr{1|y}`` is ``2*y / sigma^2``.
"""

import math
from dataclasses import dataclass

import numpy as np

from rmlist.code_tree import ParameterError
from rmlist.validation import check_bits, check_sigma


@dataclass(frozen=True)
class ChannelParams:
    """Noise level of a unit-energy antipodal AWGN channel.

    ``snr_db`` is Es/N0 = 1/(2 sigma^2); Eb/N0 divides that by the code rate.
    """

    sigma: float

    def __post_init__(self):
        check_sigma(self.sigma)

    @classmethod
    def from_snr_db(cls, snr_db):
        return cls(math.sqrt(1.0 / (2.0 * 10 ** (snr_db / 10))))

    @classmethod
    def from_ebno_db(cls, ebno_db, rate):
        if not rate > 0:
            raise ParameterError("Eb/N0 needs a positive code rate")
        return cls(math.sqrt(1.0 / (2.0 * rate * 10 ** (ebno_db / 10))))

    @property
    def variance(self):
        return self.sigma**2

    @property
    def snr_db(self):
        return 10 * math.log10(1.0 / (2.0 * self.variance))

    def ebno_db(self, rate):
        if not rate > 0:
            return math.nan
        return self.snr_db - 10 * math.log10(rate)


def _sigma(params):
    return params.sigma if isinstance(params, ChannelParams) else check_sigma(params)


def modulate(cw):
    return 1.0 - 2.0 * check_bits(cw, name="codeword").astype(float)


def trial_rng(seed, trial):
    """Independent generator for one trial, keyed by ``(seed, trial)``.

    Philox is counter based, so stream ``trial`` does not depend on how many
    other trials were drawn before it or by which worker.
    """
    if seed < 0 or trial < 0:
        raise ParameterError("seed and trial index must be non-negative")
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, int(trial), 0, 0]))


def awgn(x, params, rng):
    """Add i.i.d. N(0, sigma^2) noise to ``x`` using ``rng``."""
    x = np.asarray(x, dtype=float)
    return x + _sigma(params) * rng.standard_normal(x.shape)


def to_llr(y, params):
    return 2.0 * np.asarray(y, dtype=float) / _sigma(params) ** 2


def to_evidence(y, params):
    return np.tanh(np.asarray(y, dtype=float) / _sigma(params) ** 2)


def bsc_evidence(p, hard):
    """Evidence for a binary symmetric channel that is correct with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    hard = check_bits(hard, name="received bits")
    return (2.0 * p - 1.0) * (1.0 - 2.0 * hard.astype(float))
