""" Maximally flat low pass filters and feasibility constants

The squared magnitude of the low pass filter is

    |m0(xi)|^2 = P(sin^2(pi xi)),
    P(y) = (1-y)^K * sum_{n<L} C(K-1+n, n) y^n,

flat of order K at xi = 1/2 and of order L at xi = 0. The band pass filter
satisfies |m1(xi)|^2 = |m0(xi + 1/2)|^2 and the reduced filter m~0 replaces
the power K of the cosine by K'.
"""

import math
import sys
import warnings
from collections import namedtuple
from fractions import Fraction

import mpmath as mp
import numpy as np

from conelet import check
from conelet.errors import (
    DegreeTooLargeError,
    FactorizationError,
    HypothesisError,
    NonnegativityError,
)


FilterParams = namedtuple("FilterParams", "K L Kprime", defaults=(0,))

HalfbandPolynomial = namedtuple("HalfbandPolynomial", "K L coeffs exact")

LowpassFilter = namedtuple("LowpassFilter", "taps root_taps K L")

FeasibilityEnvelope = namedtuple(
    "FeasibilityEnvelope",
    "alpha gamma q qprime r C1 C2 J0 J1 K L kprime product certifying",
)

# working precision of the root finder, in decimal digits
FACTORIZATION_DPS = 40
DEFAULT_J1 = 40
MAX_DEGREE = 400
J0_TOLERANCE = 1e-6


def halfband_power(params):
    """Expand the maximally flat half band polynomial

    Args:
        params (FilterParams): only K and L are used

    Returns:
        poly (HalfbandPolynomial): coefficients of P(y) in increasing powers
            of y, exact integers in ``exact`` and doubles in ``coeffs``

    Raises:
        ParameterError: if K < 1 or L < 1
        DegreeTooLargeError: if a coefficient does not fit in a double

    Example:
        >>> halfband_power(FilterParams(2, 2)).coeffs
        array([ 1.,  0., -3.,  2.])
    """
    K, L = params.K, params.L
    check.require([v for v in check.basic(FilterParams(K, L, 0)) if "K'" not in v])
    if K + L - 1 > MAX_DEGREE:
        raise DegreeTooLargeError(f"degree too large: K+L-1 = {K + L - 1} > {MAX_DEGREE}")

    falling = [(-1) ** i * math.comb(K, i) for i in range(K + 1)]
    exact = tuple(_convolve(falling, _q_coefficients(K, L)))
    try:
        coeffs = np.array([float(c) for c in exact])
    except OverflowError:
        raise DegreeTooLargeError(f"degree too large: K={K}, L={L} overflows a double")
    if max(abs(c) for c in exact) > sys.float_info.max:
        raise DegreeTooLargeError(f"degree too large: K={K}, L={L} overflows a double")
    return HalfbandPolynomial(K, L, coeffs, exact)


def eval_m0_sq(poly, xi):
    """Evaluate |m0(xi)|^2 = P(sin^2(pi xi))

    The factored form cos^(2K) * Q(sin^2) is used; the expanded coefficients
    cancel catastrophically for large K.

    Args:
        poly (HalfbandPolynomial): the half band polynomial
        xi (float or numpy.ndarray): frequencies

    Returns:
        value (float or numpy.ndarray): values clipped to [0, 1]
    """
    value = np.clip(_cos_power_times_q(poly.K, poly.L, poly.K, xi), 0.0, 1.0)
    if value.ndim == 0:
        return float(value)
    return value


def eval_m1_sq(poly, xi):
    """Evaluate |m1(xi)|^2 = |m0(xi + 1/2)|^2."""
    return eval_m0_sq(poly, np.asarray(xi, dtype=float) + 0.5)


def eval_tilde_m0_sq(params, xi):
    """Evaluate the reduced filter |m~0(xi)|^2

    Args:
        params (FilterParams): K, L and the reduced power Kprime (K' = K
            reproduces |m0|^2)
        xi (float or numpy.ndarray): frequencies

    Returns:
        value (float or numpy.ndarray): (cos pi xi)^(2K') *
            sum_n C(K-1+n, n) (sin pi xi)^(2n)
    """
    if not 0 <= params.Kprime <= params.K:
        raise HypothesisError("0 <= K' <= K")
    return _cos_power_times_q(params.K, params.L, params.Kprime, xi)


def compute_C2(params):
    """Upper bound of max |m~0|^2

    Each term of the sum is maximised separately; 0^0 is taken as 1.

    Args:
        params (FilterParams): filter parameters

    Returns:
        C2 (float): sum_n C(K-1+n, n) (K'/(K'+n))^K' (n/(K'+n))^n

    Example:
        >>> compute_C2(FilterParams(2, 2, 0))
        3.0
    """
    K, L, Kp = params.K, params.L, params.Kprime
    if not 0 <= Kp < K:
        raise HypothesisError("0 <= K' < K")
    terms = []
    for n in range(L):
        binom = float(math.comb(K - 1 + n, n))
        if Kp + n == 0:
            terms.append(binom)
            continue
        a = Kp / (Kp + n)
        b = n / (Kp + n)
        terms.append(binom * a ** Kp * b ** n)
    return math.fsum(terms)


def cosine_coefficients(params):
    """Exact cosine series of |m~0|^2

    With w = exp(2 pi i xi), cos^2(pi xi) = (2 + w + 1/w)/4 and
    sin^2(pi xi) = (2 - w - 1/w)/4, so |m~0|^2 is a Laurent polynomial in w
    with rational coefficients.

    Args:
        params (FilterParams): filter parameters

    Returns:
        coefficients (list): Fractions h(n) for n = -D..D, D = K'+L-1
    """
    K, L, Kp = params.K, params.L, params.Kprime
    degree = Kp + L - 1
    cos_part = _power([1, 2, 1], Kp)
    total = [0] * (2 * degree + 1)
    sin_part = [1]
    for n in range(L):
        term = _convolve(cos_part, sin_part)
        weight = math.comb(K - 1 + n, n) * 4 ** (L - 1 - n)
        offset = degree - (len(term) - 1) // 2
        for i, value in enumerate(term):
            total[offset + i] += weight * value
        sin_part = _convolve(sin_part, [-1, 2, -1])
    denominator = 4 ** degree
    return [Fraction(value, denominator) for value in total]


def first_absolute_moment(params):
    """sum_n |h(n)| |n| of the cosine coefficients, as a float."""
    coefficients = cosine_coefficients(params)
    degree = (len(coefficients) - 1) // 2
    moment = sum(abs(h) * abs(i - degree) for i, h in enumerate(coefficients))
    return float(moment)


def spectral_factorize(poly):
    """Minimum phase spectral factor of the half band polynomial

    The K-fold root y = 1 gives the factor ((1 + v)/2)^K, v = exp(-2 pi i xi).
    The L-1 roots of Q(y) = sum C(K-1+n, n) y^n are found and polished in
    extended precision and mapped to z = w - sqrt(w^2 - 1), w = 1 - 2y, the
    root of z + 1/z = 2w inside the unit disc.

    Args:
        poly (HalfbandPolynomial): the half band polynomial

    Returns:
        filt (LowpassFilter): K+L real taps with sum 1, and the L taps of the
            minimum phase factor q

    Raises:
        NonnegativityError: if P dips below zero on the check grid
        FactorizationError: if the magnitude round trip misses tolerance

    Example:
        >>> spectral_factorize(halfband_power(FilterParams(1, 1))).taps
        array([0.5, 0.5])
    """
    K, L = poly.K, poly.L
    tolerance = factorization_tolerance(K, L)
    grid = np.linspace(0.0, 0.5, 2049)
    target = eval_m0_sq(poly, grid)
    if target.min() < -tolerance:
        raise NonnegativityError(f"nonnegativity violated: min P = {target.min():.3e}")

    with mp.workdps(FACTORIZATION_DPS):
        root_taps = _minimum_phase_factor(K, L)
        binomial = [mp.mpf(math.comb(K, i)) / mp.mpf(2) ** K for i in range(K + 1)]
        taps = _convolve(binomial, root_taps)
        total = mp.fsum(taps)
        taps = np.array([float(t / total) for t in taps])
        root_taps = np.array([float(t) for t in root_taps])

    response = np.abs(np.polyval(taps[::-1], np.exp(-2j * np.pi * grid))) ** 2
    residual = float(np.max(np.abs(response - target)))
    if residual > tolerance:
        raise FactorizationError(
            f"factorization failed: residual {residual:.3e} > {tolerance:.1e}"
        )
    return LowpassFilter(taps, root_taps, K, L)


def factorization_tolerance(K, L):
    """Round trip tolerance: 1e-10 up to K+L = 30, 1e-8 beyond."""
    return 1e-10 if K + L <= 30 else 1e-8


def feasibility_envelope(params, J1=DEFAULT_J1, J0_margin=None, strict=True):
    """Constants of the three factor decay envelope

    Args:
        params (FilterParams): K, L and the split parameter Kprime
        J1 (int): number of explicit factors in the q' product
        J0_margin (int): extra depth added to the smallest admissible J0;
            None selects the convergence rule (J0 grows until five more
            levels change the lower Calderon bound by less than 1e-6)
        strict (bool): raise when the envelope hypotheses fail; otherwise
            warn and flag the envelope as non certifying

    Returns:
        env (FeasibilityEnvelope): alpha, gamma, q, q', r, C1, C2, J0, J1

    Raises:
        HypothesisError: if strict and a hypothesis fails

    Example:
        >>> env = feasibility_envelope(FilterParams(39, 18, 27))
        >>> env.alpha
        12
    """
    check.require(check.basic(params))
    if J1 < 1:
        raise HypothesisError("J1 >= 1")
    violations = check.envelope(params)
    if violations and strict:
        check.require(violations, "envelope")
    if violations:
        warnings.warn(
            f"envelope hypotheses violated ({', '.join(violations)}); constants are not certifying"
        )

    poly = halfband_power(params)
    C1 = 1.0 - float(eval_m0_sq(poly, 1.0 / 6.0))
    C2 = compute_C2(params)
    alpha = params.K - params.Kprime
    gamma = alpha - 0.5 * math.log2(C2)

    depths = 2.0 ** -np.arange(J1)
    log_product = math.fsum(np.log(eval_tilde_m0_sq(params, depths / (2 * np.pi))))
    log_product += 2.0 ** (-J1 + 1) * first_absolute_moment(params)
    product = math.exp(log_product)

    q = 4 * math.pi * C2 ** (1.0 / (2 * alpha))
    qprime = 2 * math.pi * math.exp(-(math.log(C2) + log_product) / (2 * gamma))
    J0 = choose_J0(poly, margin=J0_margin)
    return FeasibilityEnvelope(
        alpha=alpha,
        gamma=gamma,
        q=q,
        qprime=qprime,
        r=2 * qprime,
        C1=C1,
        C2=C2,
        J0=J0,
        J1=J1,
        K=params.K,
        L=params.L,
        kprime=params.Kprime,
        product=product,
        certifying=not violations,
    )


def choose_J0(poly, margin=None):
    """Depth of the scaling function lower bound

    Args:
        poly (HalfbandPolynomial): the half band polynomial
        margin (int): levels added to the smallest J0 with 2^-J0 C1 <= 1/2;
            None applies the convergence rule

    Returns:
        J0 (int)
    """
    C1 = 1.0 - float(eval_m0_sq(poly, 1.0 / 6.0))
    J0 = 1
    while 2.0 ** -J0 * C1 > 0.5:
        J0 += 1
    if margin is not None:
        return J0 + margin
    while J0 < 200:
        now = lower_product(poly, J0)
        later = lower_product(poly, J0 + 5)
        if abs(later ** 2 - now ** 2) <= J0_TOLERANCE * later ** 2:
            break
        J0 += 1
    return J0


def lower_product(poly, J0):
    """prod_{j<J0} |m0(2^-j/6)|^2 * exp(-2^(-J0+2) (1 - |m0(1/6)|^2))."""
    depths = 2.0 ** -np.arange(J0) / 6.0
    C1 = 1.0 - float(eval_m0_sq(poly, 1.0 / 6.0))
    return float(np.prod(eval_m0_sq(poly, depths))) * math.exp(-(2.0 ** (-J0 + 2)) * C1)


def filter_to_dict(filt, poly, env=None):
    """Filter export layout

    Args:
        filt (LowpassFilter): spectral factor
        poly (HalfbandPolynomial): its half band polynomial
        env (FeasibilityEnvelope): optional envelope

    Returns:
        record (dict): K, L, Kprime, taps, P_coeffs and envelope (None when
            no envelope is given)
    """
    envelope = None
    if env is not None:
        envelope = {
            "alpha": env.alpha,
            "gamma": env.gamma,
            "q": env.q,
            "qprime": env.qprime,
            "r": env.r,
            "C1": env.C1,
            "C2": env.C2,
            "J0": env.J0,
            "J1": env.J1,
            "certifying": env.certifying,
        }
    return {
        "K": filt.K,
        "L": filt.L,
        "Kprime": None if env is None else env.kprime,
        "taps": [float(t) for t in filt.taps],
        "P_coeffs": [float(c) for c in poly.coeffs],
        "envelope": envelope,
    }


def _cos_power_times_q(K, L, power, xi):
    xi = np.asarray(xi, dtype=float)
    y = np.sin(np.pi * xi) ** 2
    cos_sq = np.cos(np.pi * xi) ** 2
    q = np.zeros_like(y)
    for c in reversed(_q_coefficients(K, L)):
        q = q * y + float(c)
    value = cos_sq ** power * q
    if value.ndim == 0:
        return float(value)
    return value


def _q_coefficients(K, L):
    return [math.comb(K - 1 + n, n) for n in range(L)]


def _minimum_phase_factor(K, L):
    """Taps of q, in mpmath numbers, normalised to q(0) = 1."""
    if L == 1:
        return [mp.mpf(1)]
    coefficients = [mp.mpf(c) for c in reversed(_q_coefficients(K, L))]
    derivative = [c * (len(coefficients) - 1 - i) for i, c in enumerate(coefficients[:-1])]
    roots = mp.polyroots(coefficients, maxsteps=400, extraprec=4 * FACTORIZATION_DPS)

    zeros = []
    for y in roots:
        for _ in range(8):
            step = mp.polyval(coefficients, y) / mp.polyval(derivative, y)
            y -= step
            if abs(step) <= mp.eps * max(1, abs(y)):
                break
        w = 1 - 2 * y
        z = w - mp.sqrt(w * w - 1)
        if abs(z) > 1:
            z = 1 / z
        zeros.append(z)

    # prod (1 - z_r v) in increasing powers of v
    factor = [mp.mpc(1)]
    for z in zeros:
        factor = _convolve(factor, [mp.mpc(1), -z])
    taps = [mp.re(c) for c in factor]
    imaginary = max(abs(mp.im(c)) for c in factor)
    total = mp.fsum(taps)
    if imaginary > mp.mpf(10) ** (-FACTORIZATION_DPS // 2) * max(abs(t) for t in taps):
        raise FactorizationError("factorization failed: complex roots are not paired")
    return [t / total for t in taps]


def _convolve(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _power(base, exponent):
    out = [1]
    for _ in range(exponent):
        out = _convolve(out, base)
    return out
