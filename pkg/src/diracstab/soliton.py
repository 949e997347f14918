"""Closed-form line-soliton families of the two cubic Dirac models.

Both models admit an explicit standing-wave profile U(x) decaying like
exp(-mu*|x|) with mu = sqrt(1 - omega^2).  The massive Thirring family
exists for omega in (-1, 1), the massive Gross-Neveu (Soler) family for
omega in (0, 1).  Profiles, their analytic x-derivatives, and the residual
of the stationary first-order ODE are evaluated here; everything else in
the package consumes these functions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Frequency outside the model's existence interval."""


class ModelKind(enum.Enum):
    """The two supported cubic Dirac models."""

    MASSIVE_THIRRING = "mtm"
    GROSS_NEVEU = "gn"

    @property
    def omega_interval(self) -> tuple[float, float]:
        if self is ModelKind.MASSIVE_THIRRING:
            return (-1.0, 1.0)
        return (0.0, 1.0)

    def admits(self, omega: float) -> bool:
        lo, hi = self.omega_interval
        return lo < omega < hi


def _check_omega(model: ModelKind, omega: float) -> None:
    if not model.admits(omega):
        lo, hi = model.omega_interval
        raise DomainError(
            f"omega={omega} outside the admissible interval ({lo}, {hi}) "
            f"for model {model.value}"
        )


@dataclass(frozen=True)
class SolitonProfile:
    """Parameter bundle for one line soliton.

    Attributes
    ----------
    model : ModelKind
    omega : float
        Frequency, strictly inside the model's existence interval.
    mu : float
        Exponential decay rate sqrt(1 - omega^2).
    """

    model: ModelKind
    omega: float
    mu: float

    @classmethod
    def create(cls, model: ModelKind, omega: float) -> "SolitonProfile":
        _check_omega(model, omega)
        return cls(model=model, omega=float(omega), mu=float(np.sqrt(1.0 - omega**2)))


def _hyperbolic_parts(omega: float, mu: float, x):
    # Overflow-safe parametrization: with a = mu*|x|, s = sign(x) and
    # E = exp(-2a), cosh/sinh combinations become polynomials in E times
    # exp(a), and the shared exp(a) cancels against the denominator.
    x = np.asarray(x, dtype=float)
    a = mu * np.abs(x)
    s = np.sign(x)
    E = np.exp(-2.0 * a)
    damp = np.exp(-a)
    cp = np.sqrt(1.0 + omega)
    cm = np.sqrt(1.0 - omega)
    num = cp * (1.0 + E) - 1j * s * cm * (1.0 - E)
    return a, s, E, damp, num, cp, cm


def eval_profile(profile: SolitonProfile, x):
    """Evaluate the soliton U(x); accepts scalars or arrays, x = +-inf gives 0.

    Massive Thirring:
        U = sqrt(2)*mu*(sqrt(1+w)*cosh(mu x) - i*sqrt(1-w)*sinh(mu x))
            / (w + cosh(2 mu x))
    Gross-Neveu:
        U = mu*(sqrt(1+w)*cosh(mu x) - i*sqrt(1-w)*sinh(mu x))
            / (1 + w*cosh(2 mu x))
    """
    omega, mu = profile.omega, profile.mu
    scalar = np.isscalar(x) or (hasattr(x, "ndim") and getattr(x, "ndim") == 0)
    _, _, E, damp, num, _, _ = _hyperbolic_parts(omega, mu, x)
    if profile.model is ModelKind.MASSIVE_THIRRING:
        den = 1.0 + 2.0 * omega * E + E**2
        val = np.sqrt(2.0) * mu * damp * num / den
    else:
        den = 2.0 * E + omega * (1.0 + E**2)
        val = mu * damp * num / den
    return complex(val) if scalar else val


def eval_profile_derivative(profile: SolitonProfile, x):
    """Analytic dU/dx from differentiating the closed form (not a finite difference)."""
    omega, mu = profile.omega, profile.mu
    scalar = np.isscalar(x) or (hasattr(x, "ndim") and getattr(x, "ndim") == 0)
    _, s, E, damp, num, cp, cm = _hyperbolic_parts(omega, mu, x)
    # m is dU-numerator/(mu dx) up to the chain terms, g absorbs dE/dx
    m = s * cp * (1.0 - E) - 1j * cm * (1.0 + E)
    g = s * (1.0 - E**2)
    if profile.model is ModelKind.MASSIVE_THIRRING:
        den = 1.0 + 2.0 * omega * E + E**2
        val = np.sqrt(2.0) * mu**2 * damp * (m * den - 2.0 * num * g) / den**2
    else:
        den = 2.0 * E + omega * (1.0 + E**2)
        val = mu**2 * damp * (m * den - 2.0 * omega * num * g) / den**2
    return complex(val) if scalar else val


def ode_residual(profile: SolitonProfile, x):
    """|i U' - omega U + conj(U) - N(U)| of the stationary first-order ODE.

    The cubic term N(U) is |U|^2 U for massive Thirring and
    U |U|^2 + conj(U)^3 for Gross-Neveu.
    """
    u = eval_profile(profile, x)
    du = eval_profile_derivative(profile, x)
    if profile.model is ModelKind.MASSIVE_THIRRING:
        rhs = np.abs(u) ** 2 * u
    else:
        rhs = u * np.abs(u) ** 2 + np.conj(u) ** 3
    return np.abs(1j * du - profile.omega * u + np.conj(u) - rhs)


def algebraic_profile_mtm(x):
    """Read-only massive Thirring limit profile at omega = -1.

    The family degenerates into the algebraic decay
    U(x) = 2*(1 - 2ix)/(1 + 4x^2); exposed for testing and the CLI
    --allow-limit path only, never constructed via SolitonProfile.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros(arr.shape, dtype=complex)
    finite = np.isfinite(arr)
    xf = arr[finite]
    # decays like 1/x, so the infinite endpoints still map to 0
    out[finite] = 2.0 * (1.0 - 2j * xf) / (1.0 + 4.0 * xf**2)
    return complex(out[0]) if scalar else out
