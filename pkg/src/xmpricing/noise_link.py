"""Known noise distribution and the pricing machinery derived from it.

The buyer's latent valuation is ``mean utility + noise`` with the noise law
known to the seller.  Everything the pricing layer needs flows from that law:
the virtual valuation ``phi(u) = u - (1 - F(u)) / F'(u)``, its inverse, the
pricing map ``h(u) = u + phi_inverse(-u)``, expected revenue, and the
regularity constants that scale the L1 penalty of the estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidParameterError,
    NoRootError,
    UndefinedValuationError,
)

_BRACKET_CAP_FACTOR = 1e6  # hard cap on bracket width, in units of scale


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    """1 / (1 + exp(-z)) without overflow for large |z|."""
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _apply(fn, u):
    """Evaluate an array function on scalar or array input, preserving kind."""
    arr = np.asarray(u, dtype=float)
    res = fn(np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(res[0])
    return res.reshape(arr.shape)


@dataclass(frozen=True)
class NoiseModel:
    """A known noise law; only the logistic family ships.

    Parameters
    ----------
    kind : str
        Distribution family tag (currently always ``"logistic"``).
    scale : float
        Scale parameter; the logistic cdf is ``1 / (1 + exp(-u / scale))``.
    support_bound : float
        Nominal half-width of the noise support.  Metadata only: the
        analytic logistic is unbounded, the bound is used for reporting
        and for sizing evaluation ranges.
    """

    kind: str
    scale: float
    support_bound: float

    def cdf(self, u):
        return _apply(lambda z: _stable_sigmoid(z / self.scale), u)

    def sf(self, u):
        """Survival function 1 - cdf, computed without cancellation."""
        return _apply(lambda z: _stable_sigmoid(-z / self.scale), u)

    def pdf(self, u):
        s = self.scale
        return _apply(
            lambda z: _stable_sigmoid(z / s) * _stable_sigmoid(-z / s) / s, u
        )

    def pdf_prime(self, u):
        # f'(u) = f(u) * (1 - 2 F(u)) / scale for the logistic
        s = self.scale

        def fn(z):
            c = _stable_sigmoid(z / s)
            return (c * (1.0 - c) / s) * (1.0 - 2.0 * c) / s

        return _apply(fn, u)


def make_logistic(scale: float, support_bound: float) -> NoiseModel:
    """Build a logistic noise model with the given scale.

    ``support_bound`` is stored for metadata only; the analytic logistic has
    unbounded support, which keeps the virtual valuation defined everywhere.
    """
    if not (scale > 0):
        raise InvalidParameterError(f"scale must be positive, got {scale}")
    if not (support_bound > 0):
        raise InvalidParameterError(
            f"support_bound must be positive, got {support_bound}"
        )
    return NoiseModel(kind="logistic", scale=float(scale), support_bound=float(support_bound))


def virtual_valuation(model: NoiseModel, u):
    """phi(u) = u - (1 - F(u)) / F'(u).

    For the logistic the markup term reduces exactly to
    ``scale * (1 + exp(-u/scale))``; that form never divides by an
    underflowed density (it saturates to -inf far in the left tail, the
    correct limit direction for bracketing).  Clipped families would go
    through the generic ratio and raise where the density vanishes.
    """
    if model.kind == "logistic":
        s = model.scale
        with np.errstate(over="ignore"):
            markup = _apply(lambda z: s * (1.0 + np.exp(-z / s)), u)
        return u - markup
    dens = model.pdf(u)
    if np.any(np.asarray(dens) <= 0.0):
        raise UndefinedValuationError(
            "noise density vanishes at the requested point; "
            "virtual valuation undefined"
        )
    return u - model.sf(u) / dens


@dataclass(frozen=True)
class PriceMap:
    """Pricing map h derived from a noise model.

    ``price_cap`` is the unclipped value of h at the largest admissible mean
    utility (the upper end of ``domain_clip``); posted prices are clipped to
    ``[0, price_cap]``.  Optionally carries a uniform evaluation grid for
    interpolated pricing in large sweeps; by default every call solves the
    inversion exactly.
    """

    model: NoiseModel
    solver_tolerance: float
    domain_clip: tuple[float, float]
    price_cap: float
    grid_u: np.ndarray | None = None
    grid_h: np.ndarray | None = None


def inverse_phi(pm: PriceMap, v: float) -> float:
    """Solve phi(w) = v by geometric bracket expansion plus bisection.

    phi is strictly increasing (phi' = 1/F > 1 for the logistic), so
    bisection converges unconditionally; |phi(w) - v| <= solver_tolerance
    at return.
    """
    model = pm.model
    tol = pm.solver_tolerance
    half = 2.0 * model.scale  # initial bracket width 4 * scale
    cap = _BRACKET_CAP_FACTOR * model.scale
    lo, hi = v - half, v + half
    while virtual_valuation(model, lo) > v:
        half *= 2.0
        lo = v - half
        if 2.0 * half > cap:
            raise NoRootError("bracket expansion exceeded width cap (lower side)")
    half = 2.0 * model.scale
    while virtual_valuation(model, hi) < v:
        half *= 2.0
        hi = v + half
        if 2.0 * half > cap:
            raise NoRootError("bracket expansion exceeded width cap (upper side)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = virtual_valuation(model, mid)
        if abs(fm - v) <= tol:
            return mid
        if fm < v:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def unclipped_price(pm: PriceMap, mean_utility: float) -> float:
    """h(u) = u + phi_inverse(-u) with no cap applied."""
    if not math.isfinite(mean_utility):
        raise InvalidInputError(f"mean utility must be finite, got {mean_utility}")
    return mean_utility + inverse_phi(pm, -mean_utility)


def make_price_map(
    model: NoiseModel,
    utility_bound: float,
    solver_tolerance: float = 1e-9,
    interpolate: bool = False,
    grid_points: int = 4097,
) -> PriceMap:
    """Build a PriceMap whose cap is h evaluated at ``utility_bound``.

    With ``interpolate=True`` the map h is precomputed on a uniform grid over
    the clip domain and evaluated by linear interpolation (speed knob for
    large sweeps); the default solves the inversion exactly on every call.
    """
    if not (utility_bound > 0):
        raise InvalidParameterError(
            f"utility bound must be positive, got {utility_bound}"
        )
    probe = PriceMap(
        model=model,
        solver_tolerance=solver_tolerance,
        domain_clip=(-utility_bound, utility_bound),
        price_cap=math.inf,
    )
    cap = unclipped_price(probe, utility_bound)
    grid_u = grid_h = None
    if interpolate:
        grid_u = np.linspace(-utility_bound, utility_bound, grid_points)
        grid_h = np.array([unclipped_price(probe, float(u)) for u in grid_u])
    return PriceMap(
        model=model,
        solver_tolerance=solver_tolerance,
        domain_clip=(-utility_bound, utility_bound),
        price_cap=cap,
        grid_u=grid_u,
        grid_h=grid_h,
    )


def price_of(pm: PriceMap, mean_utility: float) -> float:
    """Revenue-maximizing price for the given mean utility, clipped to
    [0, price_cap]."""
    if pm.grid_u is not None and pm.grid_u[0] <= mean_utility <= pm.grid_u[-1]:
        raw = float(np.interp(mean_utility, pm.grid_u, pm.grid_h))
    else:
        raw = unclipped_price(pm, mean_utility)
    return min(max(raw, 0.0), pm.price_cap)


def expected_revenue(model: NoiseModel, mean_utility: float, price: float) -> float:
    """price * P(sale) = price * (1 - F(price - mean_utility))."""
    if price < 0:
        raise InvalidParameterError(f"price must be nonnegative, got {price}")
    return price * model.sf(price - mean_utility)


def regularity_constants(model: NoiseModel, P: float, W: float) -> tuple[float, float]:
    """Grid sup/inf of the first/second log-derivatives of F over |x| <= P+W.

    Returns ``(u_F, l_F)`` where u_F bounds the per-observation score
    magnitude (it scales the default L1 penalty) and l_F lower-bounds the
    log-likelihood curvature.  Grid evaluation keeps this family-agnostic;
    closed forms are used only in test oracles.
    """
    if not (P > 0 and W > 0):
        raise InvalidParameterError("P and W must be positive")
    r = P + W
    # step <= 1e-3 * (P + W) over [-r, r]
    grid = np.linspace(-r, r, 2001)
    c = model.cdf(grid)
    s = model.sf(grid)
    f = model.pdf(grid)
    fp = model.pdf_prime(grid)
    u_f = float(max(np.max(f / c), np.max(f / s)))
    neg_log2_cdf = (f * f - fp * c) / (c * c)
    neg_log2_sf = (fp * s + f * f) / (s * s)
    l_f = float(min(np.min(neg_log2_cdf), np.min(neg_log2_sf)))
    return u_f, l_f
