""" Scaling function in frequency and space

The scaling function is the infinite product

    phi^(xi) = prod_{j>=0} m0(2^-j xi),

so |phi^(xi)|^2 = |sin(2 pi xi) / (2 pi xi)|^(2K) * prod |q(2^-j xi)|^2. In
space the cascade uses the refinement equation phi(x) = 2 sum h_n phi(2x-n),
whose solution has Fourier transform phi^(xi/2).
"""

import math
from collections import namedtuple

import numpy as np
import pandas as pd

from conelet import check
from conelet.errors import HypothesisError, ParameterError
from conelet.filter_design import (
    FilterParams,
    eval_m0_sq,
    eval_m1_sq,
    halfband_power,
    lower_product,
)


ScalingProfile = namedtuple("ScalingProfile", "params poly J_trunc support")

SampledFunction = namedtuple("SampledFunction", "x values")

DEFAULT_J_TRUNC = 40
# below this the first order tail of prod q(2^-j xi) is exact to double precision
TAIL_SCALE = 2.0 ** -30
# beyond this the product is extended until 2^-j |xi| <= 2^-24
EXTENDED_DOMAIN = 2.0 ** 16
ULP_TOLERANCE = 4 * np.finfo(float).eps


def make_profile(params, J_trunc=DEFAULT_J_TRUNC):
    """Bundle the half band polynomial and truncation depth of a filter

    Args:
        params (FilterParams): filter parameters
        J_trunc (int): number of factors in the frequency product

    Returns:
        profile (ScalingProfile)
    """
    if J_trunc < 1:
        raise ParameterError("J_trunc must be >= 1")
    poly = halfband_power(params)
    return ScalingProfile(params, poly, J_trunc, (0, params.K + params.L - 1))


def phi_hat_sq(profile, xi):
    """Squared modulus of the scaling function spectrum

    Factors are multiplied until J_trunc of them are in, or earlier once
    every remaining factor equals 1 to 4 ulp. For |xi| > 2^16 the product is
    extended past J_trunc so its last factor is taken at 2^-j |xi| <= 2^-24.

    Args:
        profile (ScalingProfile): filter and truncation depth
        xi (float or numpy.ndarray): frequencies

    Returns:
        value (float or numpy.ndarray): prod_j |m0(2^-j xi)|^2, in [0, 1]

    Example:
        >>> phi_hat_sq(make_profile(FilterParams(1, 1)), 0.0)
        1.0
    """
    xi = np.abs(np.asarray(xi, dtype=float))
    value = np.ones_like(xi)
    top = float(xi.max()) if xi.size else 0.0
    depth = profile.J_trunc
    if top > EXTENDED_DOMAIN:
        depth = max(depth, int(math.ceil(math.log2(top))) + 24)

    scale = 1.0
    for _ in range(depth):
        factor = eval_m0_sq(profile.poly, scale * xi)
        value = value * factor
        if scale * top <= 0.25 and np.all(np.abs(factor - 1.0) <= ULP_TOLERANCE):
            break
        scale *= 0.5
    value = np.clip(value, 0.0, 1.0)
    if value.ndim == 0:
        return float(value)
    return value


def psi_radial_sq(profile, xi1):
    """The xi1 factor |m1(4 xi1)|^2 |phi^(xi1)|^2 of |psi^|^2."""
    return eval_m1_sq(profile.poly, 4 * np.asarray(xi1, dtype=float)) * phi_hat_sq(profile, xi1)


def psi_hat_sq(profile, xi1, xi2):
    """Squared modulus of the shearlet generator spectrum

    psi^(xi) = m1(4 xi1) phi^(xi1) phi^(2 xi2).

    Args:
        profile (ScalingProfile): filter and truncation depth
        xi1, xi2 (float or numpy.ndarray): frequencies, broadcast together

    Returns:
        value (float or numpy.ndarray)
    """
    xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
    value = psi_radial_sq(profile, xi1) * phi_hat_sq(profile, 2 * xi2)
    if np.ndim(value) == 0:
        return float(value)
    return value


def psi_upper_envelope(env, xi1, xi2):
    """Decay envelope of |psi^|

    min(1, |q xi1|^alpha) min(1, |q' xi1|^-gamma) min(1, |r xi2|^-gamma),
    evaluated in log space.

    Args:
        env (FeasibilityEnvelope): decay constants
        xi1, xi2 (float or numpy.ndarray): frequencies, broadcast together

    Returns:
        value (float or numpy.ndarray)
    """
    xi1 = np.abs(np.asarray(xi1, dtype=float))
    xi2 = np.abs(np.asarray(xi2, dtype=float))
    with np.errstate(divide="ignore"):
        log_value = (
            np.minimum(env.alpha * np.log(env.q * xi1), 0.0)
            + np.minimum(-env.gamma * np.log(env.qprime * xi1), 0.0)
            + np.minimum(-env.gamma * np.log(env.r * xi2), 0.0)
        )
    value = np.exp(log_value)
    if value.ndim == 0:
        return float(value)
    return value


def phi_hat(filt, xi):
    """Complex scaling function spectrum of a spectral factor

    Uses m0(xi) = ((1 + e^{-2 pi i xi}) / 2)^K q(xi); the binomial part
    telescopes to e^{-2 pi i K xi} sinc(2 xi)^K and the product of q is
    closed by its first order tail exp(a1 xi 2^{-J+1}), a1 = -2 pi i sum n q_n.

    Args:
        filt (LowpassFilter): spectral factor
        xi (float or numpy.ndarray): frequencies

    Returns:
        value (complex or numpy.ndarray)
    """
    xi = np.asarray(xi, dtype=float)
    value = np.exp(-2j * np.pi * filt.K * xi) * np.sinc(2 * xi) ** filt.K
    q = np.asarray(filt.root_taps, dtype=float)
    slope = -2j * np.pi * float(np.dot(np.arange(q.size), q))

    top = float(np.abs(xi).max()) if xi.size else 0.0
    scale = 1.0
    while scale * top >= TAIL_SCALE and q.size > 1:
        value = value * np.polyval(q[::-1], np.exp(-2j * np.pi * scale * xi))
        scale *= 0.5
    value = value * np.exp(slope * xi * 2 * scale)
    if value.ndim == 0:
        return complex(value)
    return value


def phi_lower_bound(params, J0):
    """Lower bound of |phi^|^2 on [-1/6, 1/6]

    Args:
        params (FilterParams): filter parameters
        J0 (int): number of explicit factors

    Returns:
        bound (float): prod_{j<J0} |m0(2^-j/6)|^2 * exp(-2^(-J0+2) C1)

    Raises:
        HypothesisError: if |m0|^2 is not concave on (0, 1/6) or
            2^-J0 C1 > 1/2
    """
    check.require(check.concavity(params), "lower bound of the scaling function")
    poly = halfband_power(params)
    C1 = 1.0 - float(eval_m0_sq(poly, 1.0 / 6.0))
    if J0 < 1 or 2.0 ** -J0 * C1 > 0.5:
        raise HypothesisError("2^-J0 C1 <= 1/2", f"J0 = {J0}")
    return lower_product(poly, J0)


def phi_upper_envelope(params, env, xi):
    """Decay envelope of |phi^|^2

    Args:
        params (FilterParams): filter parameters, Kprime included
        env (FeasibilityEnvelope): constants built for the same parameters
        xi (float or numpy.ndarray): frequencies

    Returns:
        value (float or numpy.ndarray): min(1, C2 |2 pi xi|^(-2 gamma) *
            product), evaluated as min(1, (q'|xi|)^(-2 gamma)) in log space

    Raises:
        HypothesisError: if the envelope hypotheses fail
    """
    check.require(check.envelope(params), "decay envelope")
    if (env.K, env.L, env.kprime) != (params.K, params.L, params.Kprime):
        raise ParameterError("envelope was built for different filter parameters")
    xi = np.abs(np.asarray(xi, dtype=float))
    with np.errstate(divide="ignore"):
        log_value = -2 * env.gamma * np.log(env.qprime * xi)
    value = np.exp(np.minimum(log_value, 0.0))
    if value.ndim == 0:
        return float(value)
    return value


def cascade_phi(filt, levels):
    """Sample the scaling function on a dyadic grid

    Values at the integers come from the eigenvector of the refinement
    matrix T_ij = 2 h_{2i-j} for the eigenvalue 1, normalised to sum 1; each
    level then halves the spacing through v_l[k] = 2 sum_n h_n v_{l-1}[k - n 2^(l-1)].

    Args:
        filt (LowpassFilter): spectral factor
        levels (int): number of refinement levels

    Returns:
        samples (SampledFunction): x = 2^-levels * {0, ..., (K+L-1) 2^levels}
            and the values of phi there

    Example:
        >>> cascade_phi(haar, 1).values
        array([1., 1., 0.])
    """
    if levels < 1:
        raise ParameterError("levels must be >= 1")
    taps = np.asarray(filt.taps, dtype=float)
    length = taps.size - 1
    values = _integer_values(taps)

    for level in range(1, levels + 1):
        shift = 2 ** (level - 1)
        refined = np.zeros(length * 2 ** level + 1)
        index = np.arange(refined.size)
        for n, h in enumerate(taps):
            source = index - n * shift
            valid = (source >= 0) & (source < values.size)
            refined[valid] += 2 * h * values[source[valid]]
        values = refined

    x = np.arange(values.size) / 2.0 ** levels
    return SampledFunction(x, values)


def riesz_band(profile, grid=None, terms=64):
    """Range of sum_k |phi^(xi + k)|^2 over a grid of [0, 1)

    Args:
        profile (ScalingProfile): filter and truncation depth
        grid (numpy.ndarray): sample points, 256 points of [0, 1) by default
        terms (int): translates summed on each side

    Returns:
        band (tuple): (min, max) of the periodised sum
    """
    if grid is None:
        grid = np.arange(256) / 256.0
    shifts = np.arange(-terms, terms + 1)
    total = phi_hat_sq(profile, np.add.outer(np.asarray(grid, dtype=float), shifts)).sum(axis=1)
    return float(total.min()), float(total.max())


def envelope_table(profile, env, xi, J0=None):
    """Frequency samples with both bounds, one row per frequency

    Args:
        profile (ScalingProfile): filter and truncation depth
        env (FeasibilityEnvelope): decay constants
        xi (numpy.ndarray): frequencies
        J0 (int): depth of the lower bound, env.J0 by default

    Returns:
        table (pandas.DataFrame): xi, phi_hat_sq, lower (zero outside
            [-1/6, 1/6]) and upper
    """
    xi = np.asarray(xi, dtype=float)
    params = FilterParams(env.K, env.L, env.kprime)
    lower = phi_lower_bound(params, env.J0 if J0 is None else J0)
    return pd.DataFrame({
        "xi": xi,
        "phi_hat_sq": phi_hat_sq(profile, xi),
        "lower": np.where(np.abs(xi) <= 1.0 / 6.0, lower, 0.0),
        "upper": phi_upper_envelope(params, env, xi),
    })


def cascade_table(filt, levels):
    """Cascade samples as a two column table (x, phi)."""
    samples = cascade_phi(filt, levels)
    return pd.DataFrame({"x": samples.x, "phi": samples.values})


def _integer_values(taps):
    length = taps.size - 1
    if length == 1:
        # box function: right continuous indicator of [0, 1)
        return np.array([1.0, 0.0])
    # phi vanishes at both ends of its support
    interior = np.arange(1, length)
    rows = 2 * interior[:, None] - interior[None, :]
    valid = (rows >= 0) & (rows <= length)
    matrix = np.where(valid, 2 * taps[np.clip(rows, 0, length)], 0.0)
    eigenvalues, eigenvectors = np.linalg.eig(matrix)
    vector = np.real(eigenvectors[:, np.argmin(np.abs(eigenvalues - 1.0))])
    values = np.zeros(length + 1)
    values[1:-1] = vector / vector.sum()
    return values
