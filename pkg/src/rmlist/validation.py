"""Input checks shared by the functional API and the estimators."""

import numpy as np

from rmlist.code_tree import ParameterError


def check_bits(x, length=None, name="bits"):
    """Return ``x`` as a uint8 array of 0/1 values, checking the last axis."""
    arr = np.asarray(x)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8)
    if arr.ndim == 0 or arr.ndim > 2:
        raise ParameterError(f"{name} must be a 1-D or 2-D array, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ParameterError(f"{name} must contain only 0 and 1")
    if length is not None and arr.shape[-1] != length:
        raise ParameterError(f"{name} has length {arr.shape[-1]}, expected {length}")
    return arr.astype(np.uint8, copy=False)


def check_evidence(eps, length=None):
    """Return tanh-domain evidence as a float array with values in [-1, 1]."""
    arr = np.asarray(eps, dtype=float)
    if arr.ndim == 0 or arr.ndim > 2:
        raise ParameterError(f"evidence must be a 1-D or 2-D array, got shape {arr.shape}")
    if np.isnan(arr).any() or (np.abs(arr) > 1).any():
        raise ParameterError("evidence values must lie in [-1, 1]")
    if length is not None and arr.shape[-1] != length:
        raise ParameterError(f"evidence has length {arr.shape[-1]}, expected {length}")
    return arr


def check_llr(llr, length=None):
    arr = np.asarray(llr, dtype=float)
    if arr.ndim == 0 or arr.ndim > 2:
        raise ParameterError(f"LLRs must be a 1-D or 2-D array, got shape {arr.shape}")
    if np.isnan(arr).any():
        raise ParameterError("LLRs must not be NaN")
    if length is not None and arr.shape[-1] != length:
        raise ParameterError(f"LLR vector has length {arr.shape[-1]}, expected {length}")
    return arr


def check_sigma(sigma):
    sigma = float(sigma)
    if not sigma > 0 or not np.isfinite(sigma):
        raise ParameterError(f"sigma must be positive and finite, got {sigma}")
    return sigma
