""" Functions to check parameter hypotheses
"""

from fractions import Fraction

from conelet.errors import HypothesisError


def basic(params):
    """Check the ranges every filter operation needs

    Args:
        params (FilterParams): filter parameters

    Returns:
        violations (list): violated conditions as text, empty if none
    """
    violations = []
    if params.K < 1:
        violations.append("K >= 1")
    if params.L < 1:
        violations.append("L >= 1")
    if not 0 <= params.Kprime < params.K:
        violations.append("0 <= K' < K")
    return violations


def construction_band(params):
    """Check if parameters are construction grade

    The frame construction needs L >= 10 and 3L/2 <= K <= 3L-2.

    Args:
        params (FilterParams): filter parameters

    Returns:
        violations (list): violated conditions as text, empty if none

    Example:
        >>> check.construction_band(FilterParams(3, 18))
        ['3L/2 <= K']
    """
    violations = []
    if params.L < 10:
        violations.append("L >= 10")
    if 2 * params.K < 3 * params.L:
        violations.append("3L/2 <= K")
    if params.K > 3 * params.L - 2:
        violations.append("K <= 3L-2")
    return violations


def envelope(params):
    """Check the hypotheses of the scaling function decay envelope

    Args:
        params (FilterParams): filter parameters, Kprime included

    Returns:
        violations (list): violated conditions as text, empty if none
    """
    K, L, Kp = params.K, params.L, params.Kprime
    violations = []
    if L < 6:
        violations.append("L >= 6")
    if K < L + 1:
        violations.append("L+1 <= K")
    if K > 3 * L - 2:
        violations.append("K <= 3L-2")
    if Fraction(K - Kp, Kp + L - 1) < Fraction(1, 4):
        violations.append("(K-K')/(K'+L-1) >= 1/4")
    return violations


def concavity(params):
    """Check that |m0|^2 is concave on (0, 1/6)

    The Haar case K = L = 1 is concave (cos^2) and passes.

    Args:
        params (FilterParams): filter parameters

    Returns:
        violations (list): violated conditions as text, empty if none
    """
    if params.K + params.L - 2 <= 0:
        return []
    if 4 * (params.L - 1) < params.K + params.L - 2:
        return ["(L-1)/(K+L-2) >= 1/4"]
    return []


def max_kprime(params):
    """Largest K' allowed by the envelope hypothesis, i.e. floor((4K-L+1)/5)."""
    return (4 * params.K - params.L + 1) // 5


def require(violations, detail=""):
    """Raise on the first violated condition

    Args:
        violations (list): output of one of the checks above
        detail (str): context added to the message

    Raises:
        HypothesisError: if any condition is violated
    """
    if violations:
        raise HypothesisError(violations[0], detail)
