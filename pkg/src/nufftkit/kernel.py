"""Exponential-of-semicircle spreading kernel and deconvolution factors.

The spreading kernel is ``phi(z) = exp(beta*(sqrt(1 - z^2) - 1))`` on
``|z| <= 1`` and zero outside.  Its width ``w`` (in fine-grid cells) and
shape ``beta`` are selected from the requested tolerance; its Fourier
transform, evaluated by quadrature, yields the correction factors that
undo the spreading convolution on the output modes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelParams",
    "select_kernel_params",
    "eval_kernel",
    "kernel_fourier",
    "build_correction_factors",
]

# Width clamp: covers tolerances from 1e-1 down to 1e-12 (and a little
# beyond) while guarding degenerate requests near 1.
MIN_WIDTH = 2
MAX_WIDTH = 16

# Requested tolerances below this are meaningless in single precision.
SINGLE_EPS_FLOOR = 1e-6

# Fixed quadrature order for the kernel Fourier transform.  After the
# z = sin(theta) substitution the integrand is entire, so 100 nodes give
# spectral (well below 1e-13 relative) accuracy for all supported beta.
QUAD_NODES = 100

_REAL_DTYPES = {"single": np.float32, "double": np.float64}
_COMPLEX_DTYPES = {"single": np.complex64, "double": np.complex128}


@dataclass(frozen=True)
class KernelParams:
    """Spreading-kernel parameters tied to one plan geometry.

    Attributes:
        epsilon: effective requested tolerance (after any single-precision
            floor has been applied).
        w: kernel width in fine-grid cells.
        beta: kernel shape parameter, ``2.30 * w``.
        alpha: per-axis rescale factors ``w * pi / n_i`` (axis 1 first).
        precision: ``"single"`` or ``"double"``.
    """

    epsilon: float
    w: int
    beta: float
    alpha: tuple[float, ...]
    precision: str

    @property
    def real_dtype(self):
        return _REAL_DTYPES[self.precision]

    @property
    def complex_dtype(self):
        return _COMPLEX_DTYPES[self.precision]

    @property
    def halo(self) -> int:
        """Cells a footprint can extend beyond its bin per side: ceil(w/2)."""
        return (self.w + 1) // 2


def _check_precision(precision: str) -> str:
    if precision not in _REAL_DTYPES:
        raise ValueError(
            f"precision must be 'single' or 'double', got {precision!r}"
        )
    return precision


def tolerance_to_width(epsilon: float, precision: str = "double") -> tuple[float, int, float]:
    """Map a tolerance to (effective epsilon, width, beta).

    Width is ``ceil(log10(1/epsilon)) + 1`` clamped to [2, 16]; beta is
    ``2.30 * w``.  Single-precision tolerances below 1e-6 are clamped up
    with a warning since they sit below single rounding.
    """
    _check_precision(precision)
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or not (0.0 < epsilon < 1.0):
        raise ValueError(f"tolerance must lie in (0, 1), got {epsilon}")
    if precision == "single" and epsilon < SINGLE_EPS_FLOOR:
        warnings.warn(
            f"tolerance {epsilon:g} is below single-precision rounding; "
            f"clamping to {SINGLE_EPS_FLOOR:g}",
            stacklevel=2,
        )
        epsilon = SINGLE_EPS_FLOOR
    w = int(np.ceil(np.log10(1.0 / epsilon))) + 1
    w = min(max(w, MIN_WIDTH), MAX_WIDTH)
    return epsilon, w, 2.30 * w


def select_kernel_params(epsilon, grid, precision: str = "double") -> KernelParams:
    """Select kernel width, shape and per-axis rescale factors.

    Args:
        epsilon: requested relative tolerance in (0, 1).
        grid: a sized ``GridSpec`` (fine-grid sizes already fixed).
        precision: ``"single"`` or ``"double"``.
    """
    epsilon, w, beta = tolerance_to_width(epsilon, precision)
    alpha = tuple(w * np.pi / n for n in grid.fine)
    return KernelParams(
        epsilon=epsilon, w=w, beta=beta, alpha=alpha, precision=precision
    )


def eval_kernel(beta: float, z):
    """Evaluate the spreading kernel ``exp(beta*(sqrt(1-z^2)-1))``.

    Total function: returns 0 outside ``|z| <= 1`` (including arguments
    that land marginally above 1 through rounding).  Accepts scalars or
    arrays; the result is in [0, 1].
    """
    z = np.asarray(z, dtype=np.float64)
    inside = np.abs(z) <= 1.0
    t = np.where(inside, 1.0 - z * z, 0.0)
    # sqrt argument is clipped at 0 so exact endpoints give exp(-beta)
    vals = np.where(inside, np.exp(beta * (np.sqrt(t) - 1.0)), 0.0)
    if vals.ndim == 0:
        return float(vals)
    return vals


def _gauss_legendre_nodes():
    """Quadrature rule for the transformed integrand, cached per process."""
    theta, wq = np.polynomial.legendre.leggauss(QUAD_NODES)
    theta = theta * (np.pi / 2)
    wq = wq * (np.pi / 2)
    return theta, wq


_THETA, _WQ = _gauss_legendre_nodes()


def kernel_fourier(beta: float, xi):
    """Fourier transform of the kernel: integral of phi(z)*cos(xi*z) on [-1, 1].

    Substituting ``z = sin(theta)`` removes the square-root endpoint
    singularity; the smooth integrand is then handled by a fixed
    Gauss-Legendre rule.  The result is real, even in xi, and positive
    over the frequency range sampled by the correction factors.

    Raises:
        ValueError: if the quadrature result underflows below the
            double-precision floor (correction factors would blow up).
    """
    xi = np.asarray(xi, dtype=np.float64)
    # integrand at z = sin(theta): phi(sin t) * cos(xi sin t) * cos t
    envelope = _WQ * np.cos(_THETA) * np.exp(beta * (np.cos(_THETA) - 1.0))
    vals = np.cos(np.multiply.outer(xi, np.sin(_THETA))) @ envelope
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals), initial=0.0) < (
        np.finfo(np.float64).tiny * 8
    ):
        raise ValueError(
            "kernel Fourier transform underflowed below the precision floor"
        )
    if vals.ndim == 0:
        return float(vals)
    return vals


def centered_freqs(n: int) -> np.ndarray:
    """Integer frequency grid: -n/2 <= k < n/2 (one-sided for even n)."""
    return np.arange(n, dtype=np.int64) - n // 2


def build_correction_factors(grid, params: KernelParams) -> np.ndarray:
    """Deconvolution multipliers over the centered output-mode grid.

    Entry at mode ``k`` equals ``(2/w)^d * prod_i phi_hat(alpha_i k_i)^-1``.
    The array is shaped like the mode array, ``(N_d, ..., N_1)`` with axis 1
    fastest (last), in the plan's real dtype.  All entries are strictly
    positive and even in each axis.
    """
    d = grid.dim
    floor = np.finfo(params.real_dtype).tiny * 100
    axis_ft = []
    for i in range(d):
        xi = params.alpha[i] * centered_freqs(grid.modes[i])
        ft = np.atleast_1d(kernel_fourier(params.beta, xi))
        if np.any(ft <= floor):
            raise ValueError(
                "kernel Fourier transform underflowed on axis "
                f"{i + 1}; correction factors would overflow"
            )
        axis_ft.append(ft)
    prod = axis_ft[-1]
    for ft in axis_ft[-2::-1]:
        prod = np.multiply.outer(prod, ft)
    values = (2.0 / params.w) ** d / prod
    return values.astype(params.real_dtype)
