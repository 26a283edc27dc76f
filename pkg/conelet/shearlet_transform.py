""" Digital cone-adapted shearlet transform on periodic square images

Every subband is a filter sampled on the N x N DFT grid followed by a
decimation onto its translation lattice. Continuum frequencies map to DFT
frequencies nu (cycles per pixel) as xi = u nu with u = 2^(j_max - 3), which
puts the peak of the finest band at Nyquist.
"""

import math
from collections import namedtuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from conelet import __version__
from conelet.errors import (
    CGStalledError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NumericalError,
    ParameterError,
    ScaleOverflowError,
)
from conelet.filter_design import FilterParams
from conelet.frame_certification import (
    ETA2_WINDOW,
    RADIAL_FLOOR,
    FeasibleParamSet,
    check_param_set,
    shears_at,
)
from conelet.scaling_function import DEFAULT_J_TRUNC, make_profile, phi_hat_sq, psi_radial_sq


Subband = namedtuple("Subband", "cone j k step filter")

CGInfo = namedtuple("CGInfo", "iterations residual")

ALIASES = (-1, 0, 1)
STEP_TOLERANCE = 1e-9
MAX_CG_ITERATIONS = 1000
MIN_POWER_ITERATIONS = 50


class CoefficientSet(namedtuple("CoefficientSet", "header index arrays")):
    """Coefficients of every subband with the echo of the system

    ``index`` lists (cone, j, k) per subband in canonical order: low-pass,
    then the horizontal cone, then the vertical cone, each by scale and
    shear. ``arrays`` holds one decimated grid per subband.
    """

    __slots__ = ()

    @property
    def shapes(self):
        return tuple(a.shape for a in self.arrays)

    @property
    def count(self):
        return sum(a.size for a in self.arrays)

    def flatten(self):
        """All coefficients in (cone, j, k, m) order, m in row-major order."""
        return np.concatenate([a.ravel() for a in self.arrays])

    def unflatten(self, vector):
        """New set with the same layout holding ``vector``."""
        vector = np.asarray(vector, dtype=float)
        if vector.size != self.count:
            raise DimensionMismatchError(
                f"dimension mismatch: {vector.size} values for {self.count} coefficients"
            )
        bounds = np.cumsum([0] + [a.size for a in self.arrays])
        arrays = tuple(
            vector[start:stop].reshape(shape)
            for start, stop, shape in zip(bounds[:-1], bounds[1:], self.shapes)
        )
        return self._replace(arrays=arrays)


class SubbandSystem:
    """Filters on the DFT grid, each followed by a rectangular decimation

    A subband with step (s1, s2) keeps every s1-th row and s2-th column of
    its filtered image scaled by sqrt(s1 s2), so the diagonal of the frame
    operator in frequency is sum |filter|^2 whatever the decimation.

    Args:
        size (int): image side N
        subbands (list of Subband): filters in canonical order
        header (dict): echo of the construction, copied into every
            coefficient set
    """

    def __init__(self, size, subbands, header):
        self.size = size
        self.subbands = tuple(subbands)
        self.header = dict(header, size=size, conelet_version=__version__)
        self.index = tuple((b.cone, b.j, b.k) for b in self.subbands)

    def __len__(self):
        return len(self.subbands)

    @property
    def shapes(self):
        return tuple((self.size // b.step[0], self.size // b.step[1]) for b in self.subbands)

    def describe(self):
        """Header plus the subband index table, as stored in coefficient files"""
        return dict(
            self.header,
            subbands=[
                {"cone": b.cone, "j": b.j, "k": b.k, "step": list(b.step), "shape": list(shape)}
                for b, shape in zip(self.subbands, self.shapes)
            ],
        )


class ShearletSystem(SubbandSystem):
    """Cone-adapted shearlet system of a maximally flat filter pair

    psi^(xi) = m1(4 xi1) phi^(xi1) phi^(2 xi2) is sampled as
    psi^(2^-j xi1, k 2^-j xi1 + 2^-j/2 xi2) for the horizontal cone, the
    vertical cone swaps coordinates, and the low-pass is
    phi^(xi1) phi^(xi2). Filters are zero phase (moduli, periodized over the
    neighbouring aliases and symmetrised on the grid), so coefficients of
    real images are real.

    Args:
        params (FilterParams): K and L of the filter
        param_set (FeasibleParamSet): shears and sampling vector c
        size (int): image side, a power of two
        j_max (int): number of scales, log2(size) - 3 by default
        J_trunc (int): depth of the scaling function product
    """

    def __init__(self, params, param_set=FeasibleParamSet(), size=128, j_max=None, J_trunc=DEFAULT_J_TRUNC):
        check_param_set(param_set)
        if param_set.scale_base != 2:
            raise ParameterError("the digital system needs dyadic scales (scale_base 2)")
        if size < 2 or size & (size - 1):
            raise ParameterError(f"image size must be a power of two, got {size}")
        if j_max is None:
            j_max = max(1, int(math.log2(size)) - 3)
        if j_max < 1:
            raise ParameterError(f"j_max must be >= 1, got {j_max}")
        if 2 ** j_max > size:
            raise ScaleOverflowError(f"scale overflow: 2^{j_max} exceeds N = {size}")

        self.params = FilterParams(params.K, params.L)
        self.param_set = param_set
        self.j_max = j_max
        self.unit = 2.0 ** (j_max - 3)
        profile = make_profile(self.params, J_trunc)
        c1, c2 = (float(c) for c in param_set.c)

        low_step = _integer_step(size, c1 * self.unit)
        low_step = (low_step, low_step) if low_step else (1, 1)
        subbands = [Subband("lowpass", 0, 0, low_step, _lowpass_filter(profile, size, self.unit))]
        horizontal = []
        for j in range(j_max):
            for k in shears_at(param_set.shears, 2.0 ** -j):
                filt = _shearlet_filter(profile, size, self.unit, j, k)
                step = _lattice_step(size, self.unit, c1, c2, j, k)
                horizontal.append(Subband("h", j, k, step, filt))
        subbands.extend(horizontal)
        subbands.extend(
            Subband("v", b.j, b.k, b.step[::-1], np.ascontiguousarray(b.filter.T)) for b in horizontal
        )

        header = {
            "kind": "shearlet",
            "K": params.K,
            "L": params.L,
            "j_max": j_max,
            "c": [c1, c2],
            "shears": {"kind": param_set.shears.kind, "values": [float(s) for s in param_set.shears.values]},
            "J_trunc": J_trunc,
        }
        super().__init__(size, subbands, header)


def build_system(params, param_set=FeasibleParamSet(), size=128, j_max=None, J_trunc=DEFAULT_J_TRUNC):
    """Sample a cone-adapted shearlet system on the size x size DFT grid

    Args:
        params (FilterParams): K and L
        param_set (FeasibleParamSet): shears and sampling vector
        size (int): image side N, a power of two
        j_max (int): number of scales
        J_trunc (int): depth of the scaling function product

    Returns:
        system (ShearletSystem)

    Raises:
        ScaleOverflowError: if 2^j_max exceeds N

    Example:
        >>> len(build_system(FilterParams(39, 18), size=64, j_max=3))
        27
    """
    return ShearletSystem(params, param_set, size, j_max, J_trunc)


def subband_count(j_max):
    """1 + 2 sum_j (2 ceil(2^(j/2)) + 1) for the integer shear set"""
    return 1 + 2 * sum(2 * math.ceil(2 ** (j / 2)) + 1 for j in range(j_max))


def analyze(system, image):
    """Shearlet coefficients of an image

    Args:
        system (SubbandSystem): the frame
        image (numpy.ndarray): N x N real image

    Returns:
        coeffs (CoefficientSet)

    Raises:
        DimensionMismatchError: if the image does not match the system
    """
    image = np.asarray(image, dtype=float)
    if image.shape != (system.size, system.size):
        raise DimensionMismatchError(
            f"dimension mismatch: image {image.shape}, system {system.size} x {system.size}"
        )
    spectrum = np.fft.fft2(image)
    arrays = []
    for band in system.subbands:
        values = np.fft.ifft2(spectrum * np.conj(band.filter)).real
        s1, s2 = band.step
        if s1 > 1 or s2 > 1:
            values = values[::s1, ::s2] * math.sqrt(s1 * s2)
        arrays.append(values)
    return CoefficientSet(system.header, system.index, tuple(arrays))


def adjoint(system, coeffs):
    """Synthesis operator, the exact adjoint of analyze

    Args:
        system (SubbandSystem): the frame
        coeffs (CoefficientSet): coefficients with the layout of the system

    Returns:
        image (numpy.ndarray)

    Raises:
        DimensionMismatchError: if header, index or shapes differ from the
            system
    """
    _check_layout(system, coeffs)
    size = system.size
    spectrum = np.zeros((size, size), dtype=complex)
    for band, values in zip(system.subbands, coeffs.arrays):
        s1, s2 = band.step
        if s1 > 1 or s2 > 1:
            grid = np.zeros((size, size))
            grid[::s1, ::s2] = values * math.sqrt(s1 * s2)
            values = grid
        spectrum += np.fft.fft2(values) * band.filter
    return np.fft.ifft2(spectrum).real


def frame_operator(system):
    """S = adjoint o analyze on flattened images, as a scipy LinearOperator"""
    size = system.size

    def matvec(x):
        image = np.reshape(x, (size, size))
        return adjoint(system, analyze(system, image)).ravel()

    return LinearOperator((size * size, size * size), matvec=matvec, rmatvec=matvec, dtype=float)


def reconstruct(system, coeffs, tol=1e-8, maxiter=MAX_CG_ITERATIONS, info=False):
    """Invert the frame operator by conjugate gradients

    Solves S f = adjoint(coeffs) to a relative residual of ``tol``.

    Args:
        system (SubbandSystem): the frame
        coeffs (CoefficientSet): coefficients
        tol (float): relative residual
        maxiter (int): iteration limit
        info (bool): also return a CGInfo

    Returns:
        image (numpy.ndarray), or (image, CGInfo) when info is set

    Raises:
        CGStalledError: if the iteration limit is hit
    """
    size = system.size
    rhs = adjoint(system, coeffs).ravel()
    if not np.any(rhs):
        image = np.zeros((size, size))
        return (image, CGInfo(0, 0.0)) if info else image
    solution, stats = _solve(frame_operator(system), rhs, tol, maxiter)
    image = solution.reshape(size, size)
    return (image, stats) if info else image


def numeric_frame_bounds(system, iters=MIN_POWER_ITERATIONS, seed=0, tol=1e-8):
    """Extreme eigenvalues of the frame operator

    lambda_max by power iteration, lambda_min by inverse power iteration
    with warm started CG solves. Both are Rayleigh quotients of the last
    iterate, so lambda_max is from below and lambda_min from above.

    Args:
        system (SubbandSystem): the frame
        iters (int): iterations of each method, >= 50
        seed (int): seed of the random start vectors
        tol (float): relative residual of the inner solves

    Returns:
        (lambda_min, lambda_max) (tuple)

    Raises:
        NotPositiveDefiniteError: if a Rayleigh quotient is not positive
    """
    if iters < MIN_POWER_ITERATIONS:
        raise ParameterError(f"iters must be >= {MIN_POWER_ITERATIONS}, got {iters}")
    operator = frame_operator(system)
    rng = np.random.default_rng(seed)
    n = operator.shape[0]

    x = _unit(rng.standard_normal(n))
    for _ in range(iters):
        x = _unit(operator.matvec(x))
    lambda_max = float(x @ operator.matvec(x))
    if lambda_max <= 0:
        raise NotPositiveDefiniteError(f"not positive definite: Rayleigh quotient {lambda_max:.3e}")

    x = _unit(rng.standard_normal(n))
    lambda_min = None
    for _ in range(iters):
        guess = None if lambda_min is None else x / lambda_min
        y, _ = _solve(operator, x, tol, MAX_CG_ITERATIONS, guess)
        x = _unit(y)
        quotient = float(x @ operator.matvec(x))
        if quotient <= 0:
            raise NotPositiveDefiniteError(f"not positive definite: Rayleigh quotient {quotient:.3e}")
        if lambda_min is not None and abs(quotient - lambda_min) <= 1e-9 * quotient:
            lambda_min = quotient
            break
        lambda_min = quotient
    return lambda_min, lambda_max


def frequency_coverage(system):
    """sum over subbands of |filter|^2 on the DFT grid

    This is the diagonal of the frame operator in frequency; for an
    undecimated system its extreme values are the frame bounds.
    """
    total = np.zeros((system.size, system.size))
    for band in system.subbands:
        total += np.abs(band.filter) ** 2
    return total


def coverage_range(system):
    """Minimum and maximum of frequency_coverage away from the DC bin"""
    total = frequency_coverage(system)
    away = np.ones(total.shape, dtype=bool)
    away[0, 0] = False
    return float(total[away].min()), float(total[away].max())


def _check_layout(system, coeffs):
    if coeffs.header != system.header or tuple(coeffs.index) != system.index:
        raise DimensionMismatchError("dimension mismatch: coefficients belong to another system")
    if coeffs.shapes != system.shapes:
        raise DimensionMismatchError("dimension mismatch: coefficient grid shapes differ from the system")


def _solve(operator, rhs, tol, maxiter, guess=None):
    iterations = []
    solution, status = cg(
        operator, rhs, x0=guess, rtol=tol, maxiter=maxiter, callback=lambda _: iterations.append(1)
    )
    residual = float(np.linalg.norm(rhs - operator.matvec(solution)) / np.linalg.norm(rhs))
    if status > 0:
        raise CGStalledError(residual, len(iterations))
    if status < 0:
        raise NumericalError(f"CG broke down (status {status})")
    return solution, CGInfo(len(iterations), residual)


def _unit(x):
    return x / np.linalg.norm(x)


def _integer_step(size, value):
    step = round(value)
    if step < 1 or abs(value - step) > STEP_TOLERANCE * max(1.0, value) or size % step:
        return None
    return int(step)


def _lattice_step(size, unit, c1, c2, j, k):
    # lattice spanned by (c1 2^-j u, 0) and (k c2 2^-j u, c2 2^-j/2 u) in pixels
    s1 = _integer_step(size, c1 * 2.0 ** -j * unit)
    s2 = _integer_step(size, c2 * 2.0 ** (-j / 2) * unit)
    if s1 is None or s2 is None:
        return (1, 1)
    shift = k * c2 * 2.0 ** -j * unit / s1
    if abs(shift - round(shift)) > STEP_TOLERANCE * max(1.0, abs(shift)):
        return (1, 1)
    return (s1, s2)


def _symmetrize(values):
    flip = (-np.arange(values.shape[0])) % values.shape[0]
    return 0.5 * (values + values[np.ix_(flip, flip)])


def _lowpass_filter(profile, size, unit):
    nu = np.fft.fftfreq(size)
    profile_1d = sum(np.sqrt(phi_hat_sq(profile, unit * (nu + n))) for n in ALIASES)
    return _symmetrize(np.outer(profile_1d, profile_1d))


def _shearlet_filter(profile, size, unit, j, k):
    nu = np.fft.fftfreq(size)
    values = np.zeros((size, size))
    for n1 in ALIASES:
        eta1 = 2.0 ** -j * unit * (nu + n1)
        radial = psi_radial_sq(profile, eta1)
        rows = np.flatnonzero(radial > RADIAL_FLOOR)
        if not rows.size:
            continue
        amplitude = np.sqrt(radial[rows])[:, None]
        sheared = k * eta1[rows][:, None]
        for n2 in ALIASES:
            eta2 = sheared + 2.0 ** (-j / 2) * unit * (nu + n2)[None, :]
            window = np.abs(eta2) <= ETA2_WINDOW
            if not window.any():
                continue
            angular = np.zeros(eta2.shape)
            angular[window] = np.sqrt(phi_hat_sq(profile, 2 * eta2[window]))
            values[rows] += amplitude * angular
    return _symmetrize(values)
