""" Closed form frame bounds for compactly supported shearlet systems

A feasible shearlet system is certified by sandwiching its frame bounds,

    (L_inf - R(c)) / |det M_c| <= A <= B <= (L_sup + R(c)) / |det M_c|,

where L_inf and L_sup bound the Calderon sum Phi(xi, 0) on the cone and R(c)
collects the interference between translates on the lattice M_c Z^2.
"""

import functools
import math
from collections import namedtuple
from fractions import Fraction
from functools import partial

import numpy as np
import pandas as pd
from scipy.special import zeta

from conelet import check
from conelet.errors import (
    DivergenceError,
    GammaPrimeRangeError,
    HypothesisError,
    NoAdmissiblePairError,
    NotCertifiableError,
    ParameterError,
)
from conelet.filter_design import (
    DEFAULT_J1,
    FilterParams,
    choose_J0,
    eval_m0_sq,
    feasibility_envelope,
    halfband_power,
)
from conelet.scaling_function import make_profile, phi_hat_sq, phi_lower_bound, psi_radial_sq
from conelet.workers import pool_map


ShearSet = namedtuple("ShearSet", "kind values", defaults=((),))

FeasibleParamSet = namedtuple(
    "FeasibleParamSet",
    "p mu shears c scale_base",
    defaults=(1, 0.5, ShearSet("integers"), (1.0, 1.0), 2.0),
)

RemainderBound = namedtuple(
    "RemainderBound", "value gamma_prime T1 T2 T3 D1 D2 C_gamma C_gamma_prime sectors"
)

FrameCertificate = namedtuple(
    "FrameCertificate",
    [
        "K",
        "L",
        "kprime_pair",
        "c",
        "plane",
        "J0",
        "J1",
        "gamma_L",
        "gamma_R",
        "L_inf_tilde",
        "L_sup_tilde",
        "R_tilde",
        "gamma_prime",
        "T1",
        "T2",
        "T3",
        "D1_val",
        "D2_val",
        "C_of_gamma",
        "C_of_gamma_prime",
        "sectors",
        "A_low",
        "B_high",
        "ratio",
        "valid",
    ],
)

KprimeSearch = namedtuple("KprimeSearch", "pair certificate scanned")

# (K, L, c1, c2, K' for L_sup, K' for R, printed B/A)
TABLE1_ROWS = (
    (39, 18, 1.00, 0.40, 27, 17, 37.1204),
    (39, 18, 1.00, 0.30, 27, 15, 32.0208),
    (39, 18, 1.00, 0.25, 27, 15, 31.9105),
    (39, 18, 1.00, 0.15, 27, 15, 31.9019),
    (39, 18, 1.00, 0.10, 27, 15, 31.9019),
    (39, 19, 0.90, 0.40, 27, 18, 44.5359),
    (39, 19, 0.90, 0.30, 27, 16, 28.4307),
    (39, 19, 0.90, 0.25, 27, 15, 28.0983),
    (39, 19, 0.90, 0.20, 27, 15, 28.0699),
    (39, 19, 0.90, 0.15, 27, 15, 28.0683),
)

GAMMA_PRIME_POINTS = 64
GAMMA_PRIME_MARGIN = 1e-3

# grid of the shear sum supremum: v = |(S x)_2| and offsets u in [0, v)
SHEAR_V_MIN = 0.05
SHEAR_V_MAX = 16.0
SHEAR_V_POINTS = 160
SHEAR_U_POINTS = 48
SHEAR_TAIL = 64.0

# Calderon sum: rows below this radial weight and shears with |eta2| above
# the window contribute less than 1e-20 and are skipped
RADIAL_FLOOR = 1e-20
ETA2_WINDOW = 4.0


def check_param_set(param_set):
    """Validate a feasible parameter set

    Args:
        param_set (FeasibleParamSet): p, mu, shears, sampling vector c and
            the base of the scales a_j = scale_base^-j

    Raises:
        ParameterError: on out of range values
        HypothesisError: if a_{j+p}/a_j exceeds mu, c1 < c2 or the shear
            set breaks 0 in K_j or |s_k| <= a_j^(-1/2) + 1
    """
    p, mu, shears, c, base = param_set
    if p < 1 or int(p) != p:
        raise ParameterError(f"p must be a positive integer, got {p}")
    if not 0 < mu < 1:
        raise ParameterError(f"mu must lie in (0, 1), got {mu}")
    if base <= 1:
        raise ParameterError(f"scale base must be > 1, got {base}")
    # a_j = 2^-j with p = 1 and mu = 1/2 sits on the boundary and is admitted
    if base ** -p > mu * (1 + 1e-12):
        raise HypothesisError("a_{j+p}/a_j < mu", f"{base}^-{p} > {mu}")
    c1, c2 = c
    if not (np.isfinite(c1) and np.isfinite(c2)) or c2 <= 0:
        raise ParameterError(f"sampling constants must be positive, got {tuple(c)}")
    if c1 < c2:
        raise HypothesisError("c1 >= c2")
    if shears.kind == "finite":
        if 0 not in shears.values:
            raise HypothesisError("0 in K_j")
        if max(abs(s) for s in shears.values) > 2:
            raise HypothesisError("|s_k| <= a_j^(-1/2) + 1")
    elif shears.kind != "integers":
        raise ParameterError(f"unknown shear set kind {shears.kind!r}")


def shear_sum_constant(shears, gamma):
    """Upper estimate of the shear density constant C(gamma)

    C(gamma) bounds sup_{u, v} min(1, |v|) sum_k min(1, |u + s_k v|^-gamma).
    The supremum is taken over a grid with an analytic tail added; values
    are cached per shear set and gamma.

    Args:
        shears (ShearSet): "integers" (s_k = k) or a finite set of shears
        gamma (float): decay exponent, > 1

    Returns:
        C (float)

    Raises:
        DivergenceError: if gamma <= 1 or the tail bound dominates the
            explicit partial sum

    Example:
        >>> shear_sum_constant(ShearSet("finite", (0,)), 4.0)
        1.0
    """
    values = tuple(sorted(float(s) for s in shears.values))
    return _shear_sum(shears.kind, values, float(gamma))


@functools.lru_cache(maxsize=4096)
def _shear_sum(kind, values, gamma):
    if gamma <= 1:
        raise DivergenceError(f"diverged: shear sum needs gamma > 1, got {gamma}")
    if kind == "integers":
        return _integer_shear_sum(gamma)
    if kind == "finite":
        return _finite_shear_sum(np.array(values), gamma)
    raise ParameterError(f"unknown shear set kind {kind!r}")


def _shear_grid():
    breakpoints = 1.0 / np.arange(1, int(round(1 / SHEAR_V_MIN)) + 1)
    return np.unique(np.r_[np.geomspace(SHEAR_V_MIN, SHEAR_V_MAX, SHEAR_V_POINTS), breakpoints])


def _integer_shear_sum(gamma):
    T = SHEAR_TAIL
    best = 0.0
    for v in _shear_grid():
        u = v * np.arange(SHEAR_U_POINTS) / SHEAR_U_POINTS
        k = np.arange(math.floor(-T / v) - 1, math.ceil(T / v) + 1)
        distance = np.abs(u[:, None] + k[None, :] * v)
        with np.errstate(divide="ignore"):
            terms = np.where(distance <= T, np.minimum(1.0, distance ** -gamma), 0.0)
        explicit = terms.sum(axis=1).max()
        tail = 2 * (T ** -gamma + T ** (1 - gamma) / ((gamma - 1) * v))
        if tail > explicit:
            raise DivergenceError(
                f"diverged: shear sum tail {tail:.3e} exceeds partial sum {explicit:.3e} at gamma {gamma}"
            )
        best = max(best, min(1.0, v) * (explicit + tail))
    below_grid = 2 + 2 / (gamma - 1) + 3 * SHEAR_V_MIN
    above_grid = 1 + zeta(gamma) * (SHEAR_V_MAX ** -gamma + (SHEAR_V_MAX / 2) ** -gamma)
    return float(max(best, below_grid, above_grid))


def _finite_shear_sum(shears, gamma):
    spread = float(np.abs(shears).max())
    best = 0.0
    for v in _shear_grid():
        reach = spread * v + 2
        u = np.unique(np.r_[np.linspace(-reach, reach, 513), -shears * v])
        distance = np.abs(u[:, None] + shears[None, :] * v)
        with np.errstate(divide="ignore"):
            total = np.minimum(1.0, distance ** -gamma).sum(axis=1).max()
        best = max(best, min(1.0, v) * total)
    below_grid = SHEAR_V_MIN * shears.size
    gaps = np.diff(shears)
    above_grid = 1.0
    if gaps.size:
        above_grid = min(shears.size, 1 + (shears.size - 1) * (gaps.min() * SHEAR_V_MAX / 2) ** -gamma)
    return float(max(best, below_grid, above_grid))


def lsup_bound(env, p=1, mu=0.5, mode="regular", shears=ShearSet("integers")):
    """Upper bound of the Calderon sum

    Args:
        env (FeasibilityEnvelope): decay constants
        p (int): scale growth step
        mu (float): scale growth ratio
        mode (str): "regular" for s_k = k, "general" for any shear set
        shears (ShearSet): used by the general mode

    Returns:
        bound (float): p * constant * (ceil(log_{1/mu}(q/q')) +
            1/(1 - mu^(2 alpha - 1)) + 1/(1 - mu^(2 gamma))), the constant
            being q/r (2 + 2/(2 gamma - 1)) + 1 or q/r C(2 gamma)
    """
    if not env.alpha > env.gamma:
        raise ParameterError("alpha > gamma")
    if mode == "regular":
        constant = env.q / env.r * (2 + 2 / (2 * env.gamma - 1)) + 1
    elif mode == "general":
        constant = env.q / env.r * shear_sum_constant(shears, 2 * env.gamma)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    bracket = (
        _log_count(env, mu)
        + 1 / (1 - mu ** (2 * env.alpha - 1))
        + 1 / (1 - mu ** (2 * env.gamma))
    )
    return p * constant * bracket


def linf_bound(params, J0):
    """Lower bound |m0(1/6)|^2 * phi_lower_bound(J0)^2 of the Calderon sum."""
    poly = halfband_power(params)
    return float(eval_m0_sq(poly, 1.0 / 6.0)) * phi_lower_bound(params, J0) ** 2


def d_constants(h):
    """Lattice sums of the remainder estimate

    Args:
        h (float): decay exponent, > 2

    Returns:
        (D1, D2) (tuple): 2(1 + 1/(h-1)) + 4/(h-1) (1 + 1/(h-2)) and the
            same with 6 in place of the leading 2

    Example:
        >>> d_constants(4)
        (4.666666666666667, 10.0)
    """
    if not h > 2:
        raise ParameterError(f"h out of range: {h} <= 2")
    shared = 4 / (h - 1) * (1 + 1 / (h - 2))
    return 2 * (1 + 1 / (h - 1)) + shared, 6 * (1 + 1 / (h - 1)) + shared


def r_bound(env, param_set, gamma_prime, capped=True):
    """Remainder estimate R~(c) for one gamma'

    Args:
        env (FeasibilityEnvelope): decay constants
        param_set (FeasibleParamSet): p, mu, shears and c = (c1, c2)
        gamma_prime (float): in (1, gamma - 2)
        capped (bool): count min(ceil(c1/c2), 2) lattice sectors in the
            T2 term; False counts ceil(c1/c2), a looser bound that the
            printed ratio table follows

    Returns:
        bound (RemainderBound): T1 D1(gamma) + sectors T2
            D2(gamma - gamma') + T3 (D1(gamma) + D2(gamma)) and its parts

    Raises:
        GammaPrimeRangeError: if gamma' is outside (1, gamma - 2)
        DivergenceError: if a shear sum constant diverges
    """
    check_param_set(param_set)
    p, mu, shears, (c1, c2), _ = param_set
    alpha, gamma, q, qprime, r = env.alpha, env.gamma, env.q, env.qprime, env.r
    if not alpha > gamma:
        raise ParameterError("alpha > gamma")
    if not 1 < gamma_prime < gamma - 2:
        raise GammaPrimeRangeError(
            f"gamma_prime out of range: {gamma_prime} not in (1, {gamma - 2})"
        )

    def geometric(exponent):
        return 1 / (1 - mu ** exponent)

    count = _log_count(env, mu)
    C_gamma = shear_sum_constant(shears, gamma)
    C_gamma_prime = shear_sum_constant(shears, gamma_prime)

    T1 = (
        p * (q / r * C_gamma)
        * (count + geometric(gamma) + geometric(alpha - gamma))
        * (2 * c1 / qprime) ** gamma
    )
    T2 = (
        p * (q / r * C_gamma_prime)
        * (
            2 * count
            + geometric(gamma_prime)
            + geometric(alpha - gamma_prime)
            + geometric(gamma)
            + geometric(alpha - gamma)
        )
        * (2 * q * c2 / (qprime * r)) ** (gamma - gamma_prime)
    )
    T3 = p * (q / r * C_gamma) * geometric(gamma) * (2 * c1 / qprime) ** gamma

    D1, D2 = d_constants(gamma)
    D2_split = d_constants(gamma - gamma_prime)[1]
    sectors = sector_count(c1, c2, capped)
    value = T1 * D1 + sectors * T2 * D2_split + T3 * (D1 + D2)
    return RemainderBound(value, gamma_prime, T1, T2, T3, D1, D2_split, C_gamma, C_gamma_prime, sectors)


def sector_count(c1, c2, capped=True):
    """Multiplier of the T2 term, ceil(c1/c2) capped at 2 unless capped is False

    The ratio is taken on the decimal values as written, so c = (0.9, 0.3)
    counts 3 sectors.

    Example:
        >>> sector_count(1.0, 0.4), sector_count(1.0, 0.4, capped=False)
        (2, 3)
    """
    sectors = math.ceil(Fraction(repr(float(c1))) / Fraction(repr(float(c2))))
    return min(sectors, 2) if capped else sectors


def gamma_prime_grid(gamma, points=GAMMA_PRIME_POINTS):
    """Log spaced gamma' in (1 + 1e-3, gamma - 2 - 1e-3)."""
    low = 1 + GAMMA_PRIME_MARGIN
    high = gamma - 2 - GAMMA_PRIME_MARGIN
    if not high > low:
        raise GammaPrimeRangeError(f"gamma_prime out of range: gamma = {gamma} leaves no room")
    return np.geomspace(low, high, points)


def best_remainder(env, param_set, points=GAMMA_PRIME_POINTS, capped=True):
    """Smallest remainder estimate over the gamma' grid

    Grid points whose shear sum diverges are skipped; ties keep the smaller
    gamma'. ``capped`` is passed to r_bound.

    Returns:
        bound (RemainderBound)

    Raises:
        DivergenceError: if every grid point diverges
    """
    best = None
    for gamma_prime in gamma_prime_grid(env.gamma, points):
        try:
            bound = r_bound(env, param_set, float(gamma_prime), capped)
        except DivergenceError:
            continue
        if best is None or bound.value < best.value:
            best = bound
    if best is None:
        raise DivergenceError("diverged: no gamma' in the grid gives a finite remainder")
    return best


def certify(
    params,
    kprime_pair,
    param_set=FeasibleParamSet(),
    J0=None,
    J1=DEFAULT_J1,
    gamma_points=GAMMA_PRIME_POINTS,
    plane="cone",
    require_valid=False,
    capped=True,
):
    """Certify frame bounds of the compactly supported shearlet system

    The first K' of the pair builds the envelope behind L~_sup, the second
    the one behind R~(c). R~ is minimised over the gamma' grid.

    Args:
        params (FilterParams): K and L (Kprime is ignored)
        kprime_pair (tuple): (K' for L_sup, K' for R)
        param_set (FeasibleParamSet): p, mu, shears and sampling vector
        J0 (int): depth of the scaling function lower bound, None for the
            convergence rule
        J1 (int): depth of the decay envelope product
        gamma_points (int): size of the gamma' grid
        plane (str): "cone" for L^2 of the horizontal cone, "full" for the
            union of both cones and the low pass part
        require_valid (bool): raise instead of returning an invalid
            certificate
        capped (bool): sector count of the remainder, see r_bound

    Returns:
        certificate (FrameCertificate): valid is True when R~ < L~_inf;
            ratio is infinite otherwise

    Raises:
        HypothesisError: if an envelope hypothesis fails for either K'
        NotCertifiableError: if require_valid and R~ >= L~_inf

    Example:
        >>> certify(FilterParams(39, 18), (27, 15), FeasibleParamSet(c=(1.0, 0.15))).ratio
    """
    check.require([v for v in check.basic(params) if "K'" not in v])
    check_param_set(param_set)
    if plane not in ("cone", "full"):
        raise ParameterError(f"unknown plane {plane!r}")
    p, mu, shears, (c1, c2), _ = param_set
    K, L = params.K, params.L
    kprime_L, kprime_R = kprime_pair

    env_L = feasibility_envelope(FilterParams(K, L, kprime_L), J1=J1)
    env_R = feasibility_envelope(FilterParams(K, L, kprime_R), J1=J1)
    if J0 is None:
        J0 = env_L.J0
    linf = linf_bound(FilterParams(K, L), J0)
    mode = "regular" if shears.kind == "integers" else "general"
    lsup = lsup_bound(env_L, p, mu, mode, shears)
    remainder = best_remainder(env_R, param_set, gamma_points, capped)
    R = remainder.value

    if plane == "full":
        lsup = 1 + 2 * lsup
        if c1 <= env_R.qprime / 4:
            R = 8 * float(zeta(env_R.gamma - 1)) * (2 * c1 / env_R.qprime) ** env_R.gamma + 2 * R
        else:
            # the low pass interference estimate needs c1 <= q'/4
            R = math.inf

    valid = R < linf
    det = c1 * c2
    A_low = (linf - R) / det
    B_high = (lsup + R) / det
    certificate = FrameCertificate(
        K=K,
        L=L,
        kprime_pair=(kprime_L, kprime_R),
        c=(c1, c2),
        plane=plane,
        J0=J0,
        J1=J1,
        gamma_L=env_L.gamma,
        gamma_R=env_R.gamma,
        L_inf_tilde=linf,
        L_sup_tilde=lsup,
        R_tilde=R,
        gamma_prime=remainder.gamma_prime,
        T1=remainder.T1,
        T2=remainder.T2,
        T3=remainder.T3,
        D1_val=remainder.D1,
        D2_val=remainder.D2,
        C_of_gamma=remainder.C_gamma,
        C_of_gamma_prime=remainder.C_gamma_prime,
        sectors=remainder.sectors,
        A_low=A_low,
        B_high=B_high,
        ratio=B_high / A_low if valid else math.inf,
        valid=valid,
    )
    if require_valid and not valid:
        raise NotCertifiableError(
            f"not certifiable: R~ = {R:.6g} >= L~_inf = {linf:.6g} for c = ({c1}, {c2})",
            certificate,
        )
    return certificate


def numeric_calderon(
    params,
    param_set=FeasibleParamSet(),
    xi1_points=64,
    t_points=65,
    j_max=None,
    xi1_max=64.0,
):
    """Direct evaluation of the Calderon sum on cone samples

    Phi(xi, 0) = sum_j sum_k |psi^(S_k^T A_j xi)|^2 with
    psi^(xi) = m1(4 xi1) phi^(xi1) phi^(2 xi2), on xi1 log spaced in
    [1, xi1_max] and xi2 = t xi1, t in [-1, 1]. Diagnostic only.

    Args:
        params (FilterParams): K and L
        param_set (FeasibleParamSet): scales and shears (c is unused)
        xi1_points (int): samples of xi1
        t_points (int): samples of the slope t
        j_max (int): last scale, by default ten past the one mapping
            xi1_max to 1
        xi1_max (float): largest xi1

    Returns:
        (inf_est, sup_est) (tuple): grid minimum and maximum
    """
    check_param_set(param_set)
    base = float(param_set.scale_base)
    profile = make_profile(FilterParams(params.K, params.L))
    xi1 = np.geomspace(1.0, xi1_max, xi1_points)
    xi2 = np.outer(xi1, np.linspace(-1.0, 1.0, t_points))
    if j_max is None:
        j_max = int(math.ceil(math.log(xi1_max) / math.log(base))) + 10

    total = np.zeros_like(xi2)
    for j in range(j_max + 1):
        scale = base ** -j
        eta1 = scale * xi1
        radial = psi_radial_sq(profile, eta1)
        rows = radial > RADIAL_FLOOR
        if not rows.any():
            continue
        weight = radial[rows][:, None]
        slope = eta1[rows][:, None]
        offset = math.sqrt(scale) * xi2[rows]
        contribution = np.zeros_like(offset)
        for s in shears_at(param_set.shears, scale):
            eta2 = s * slope + offset
            window = np.abs(eta2) <= ETA2_WINDOW
            if window.any():
                contribution[window] += phi_hat_sq(profile, 2 * eta2[window])
        total[rows] += weight * contribution
    return float(total.min()), float(total.max())


def kprime_search(
    params,
    param_set=FeasibleParamSet(),
    J0=None,
    J1=DEFAULT_J1,
    gamma_points=GAMMA_PRIME_POINTS,
    threads=1,
    progress=False,
    capped=True,
):
    """Scan admissible (K' for L_sup, K' for R) pairs for the best ratio

    L~_sup depends only on the first K' and R~ only on the second, so each
    is computed once per K' and the pairs are combined afterwards. Ties keep
    the smaller pair.

    Args:
        params (FilterParams): K and L
        param_set (FeasibleParamSet): p, mu, shears and sampling vector
        J0 (int): depth of the lower bound, None for the convergence rule
        J1 (int): depth of the decay envelope product
        gamma_points (int): size of the gamma' grid
        threads (int): worker processes
        progress (bool): show progress bars
        capped (bool): sector count of the remainder, see r_bound

    Returns:
        search (KprimeSearch): best pair, its certificate and a table of
            every scanned pair with its ratio

    Raises:
        NoAdmissiblePairError: if no pair gives a valid certificate
    """
    check_param_set(param_set)
    K, L = params.K, params.L
    candidates = [
        kprime
        for kprime in range(0, min(check.max_kprime(params), K - 1) + 1)
        if not check.envelope(FilterParams(K, L, kprime))
    ]
    if not candidates:
        raise NoAdmissiblePairError(f"no admissible pair: no K' passes the envelope hypotheses for K={K}, L={L}")
    if J0 is None:
        J0 = choose_J0(halfband_power(FilterParams(K, L)))
    linf = linf_bound(FilterParams(K, L), J0)

    sups = pool_map(
        partial(_lsup_worker, K=K, L=L, param_set=param_set, J1=J1),
        candidates,
        threads=threads,
        progress=progress,
        desc="L_sup",
    )
    remainders = pool_map(
        partial(_remainder_worker, K=K, L=L, param_set=param_set, J1=J1, gamma_points=gamma_points, capped=capped),
        candidates,
        threads=threads,
        progress=progress,
        desc="R(c)",
    )

    scanned = []
    best = None
    for kprime_L, lsup in zip(candidates, sups):
        for kprime_R, R in zip(candidates, remainders):
            if R is None or not R < linf:
                continue
            ratio = (lsup + R) / (linf - R)
            scanned.append({"kprime_L": kprime_L, "kprime_R": kprime_R, "ratio": ratio})
            if best is None or ratio < best[0]:
                best = (ratio, kprime_L, kprime_R)
    if best is None:
        raise NoAdmissiblePairError(
            f"no admissible pair: every remainder reaches L~_inf for c = {tuple(param_set.c)}"
        )
    pair = (best[1], best[2])
    certificate = certify(params, pair, param_set, J0=J0, J1=J1, gamma_points=gamma_points, capped=capped)
    return KprimeSearch(pair, certificate, pd.DataFrame(scanned, columns=["kprime_L", "kprime_R", "ratio"]))


def table1(J0=None, J1=DEFAULT_J1, gamma_points=GAMMA_PRIME_POINTS, threads=1, progress=False, capped=False):
    """Recompute the printed frame bound ratios

    The printed ratios count ceil(c1/c2) lattice sectors in the remainder,
    so ``capped`` defaults to False here.

    Returns:
        table (pandas.DataFrame): K, L, c1, c2, kprime_L, kprime_R, ratio,
            printed_ratio and relative_deviation, one row per printed row
    """
    rows = pool_map(
        partial(_table1_worker, J0=J0, J1=J1, gamma_points=gamma_points, capped=capped),
        TABLE1_ROWS,
        threads=threads,
        progress=progress,
        desc="Table rows",
    )
    return pd.DataFrame(rows)


def convergence_sweep(
    params,
    kprime_pair,
    param_set=FeasibleParamSet(),
    gamma_points=GAMMA_PRIME_POINTS,
    step=5,
    digits=6,
    max_rounds=8,
    capped=True,
):
    """Deepen J0 and J1 until the ratio is stable

    Starting from the J0 rule and J1 = 40, both depths grow by ``step``
    until two consecutive ratios agree to ``digits`` significant digits.
    ``capped`` is passed to certify.

    Returns:
        (certificate, history) (tuple): the last certificate and a table of
            J0, J1 and ratio per round
    """
    J0 = choose_J0(halfband_power(FilterParams(params.K, params.L)))
    J1 = DEFAULT_J1
    history = []
    previous = None
    for _ in range(max_rounds):
        certificate = certify(
            params, kprime_pair, param_set, J0=J0, J1=J1, gamma_points=gamma_points, capped=capped
        )
        history.append({"J0": J0, "J1": J1, "ratio": certificate.ratio})
        if previous is not None and _agree(previous.ratio, certificate.ratio, digits):
            break
        previous = certificate
        J0 += step
        J1 += step
    return certificate, pd.DataFrame(history)


def certificate_to_dict(certificate):
    """Certificate export layout; infinite values become None."""
    record = certificate._asdict()
    record["kprime_pair"] = list(certificate.kprime_pair)
    record["c"] = list(certificate.c)
    for key, value in record.items():
        if isinstance(value, float) and not math.isfinite(value):
            record[key] = None
        elif isinstance(value, (np.floating, np.bool_)):
            record[key] = value.item()
    return record


def _log_count(env, mu):
    return max(0, math.ceil(math.log(env.q / env.qprime) / math.log(1 / mu)))


def shears_at(shears, scale):
    if shears.kind == "integers":
        extent = math.ceil(scale ** -0.5)
        return range(-extent, extent + 1)
    return shears.values


def _agree(a, b, digits):
    if not (math.isfinite(a) and math.isfinite(b)):
        return a == b
    return abs(a - b) <= 0.5 * 10 ** (1 - digits) * abs(b)


def _lsup_worker(kprime, K, L, param_set, J1):
    env = feasibility_envelope(FilterParams(K, L, kprime), J1=J1)
    mode = "regular" if param_set.shears.kind == "integers" else "general"
    return lsup_bound(env, param_set.p, param_set.mu, mode, param_set.shears)


def _remainder_worker(kprime, K, L, param_set, J1, gamma_points, capped):
    env = feasibility_envelope(FilterParams(K, L, kprime), J1=J1)
    try:
        return best_remainder(env, param_set, gamma_points, capped).value
    except (DivergenceError, GammaPrimeRangeError):
        return None


def _table1_worker(row, J0, J1, gamma_points, capped):
    K, L, c1, c2, kprime_L, kprime_R, printed = row
    certificate = certify(
        FilterParams(K, L),
        (kprime_L, kprime_R),
        FeasibleParamSet(c=(c1, c2)),
        J0=J0,
        J1=J1,
        gamma_points=gamma_points,
        capped=capped,
    )
    return {
        "K": K,
        "L": L,
        "c1": c1,
        "c2": c2,
        "kprime_L": kprime_L,
        "kprime_R": kprime_R,
        "ratio": certificate.ratio,
        "printed_ratio": printed,
        "relative_deviation": certificate.ratio / printed - 1,
    }
