"""Market generation and interaction sampling.

A market is a mean-utility function over covariates, either a linear form
``x . beta`` under an L1 budget or a finite RBF kernel expansion under an
RKHS-norm budget.  A MarketSystem bundles the target market with K source
markets sharing the covariate law (uniform on [-1, 1]^d) and the noise
model.  Sale outcomes are Bernoulli with success probability
``1 - F(price - mean utility)``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .kernels import rbf_kernel, rkhs_norm
from .noise_link import NoiseModel, make_logistic, make_price_map, price_of

OFFLINE_PRICE_JITTER = 0.25  # half-width of the noisy-oracle price jitter
DEFAULT_NOISE_SCALE = 0.25  # ~96% of logistic mass inside [-1, 1]


@dataclass(frozen=True)
class LinearMarket:
    """Mean utility x . beta with ||beta||_1 <= l1_budget."""

    beta: np.ndarray
    l1_budget: float


@dataclass(frozen=True)
class KernelMarket:
    """Mean utility sum_j weights_j * exp(-gamma ||x - centers_j||^2)."""

    centers: np.ndarray
    weights: np.ndarray
    kernel_gamma: float
    hnorm_budget: float


Market = Union[LinearMarket, KernelMarket]


@dataclass(frozen=True)
class MarketSystem:
    target: Market
    sources: tuple[Market, ...]
    noise: NoiseModel
    covariate_dim: int


@dataclass(frozen=True)
class Observation:
    """One interaction record; the latent valuation is never stored."""

    market_index: int
    time: int
    x: np.ndarray
    price: float
    sale: int


def sample_covariate(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Independent coordinates uniform on [-1, 1]; satisfies ||x||_inf <= 1."""
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    return rng.uniform(-1.0, 1.0, size=dim)


def mean_utility(market: Market, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if isinstance(market, LinearMarket):
        if x.shape != market.beta.shape:
            raise InvalidInputError(
                f"covariate length {x.shape} does not match coefficients "
                f"{market.beta.shape}"
            )
        return float(x @ market.beta)
    if x.shape[-1] != market.centers.shape[1]:
        raise InvalidInputError(
            f"covariate length {x.shape[-1]} does not match centers "
            f"dimension {market.centers.shape[1]}"
        )
    k = rbf_kernel(x[None, :], market.centers, market.kernel_gamma)
    return float(k @ market.weights)


def utility_bound(market: Market) -> float:
    """Worst-case |mean utility| over the covariate domain.

    Linear: ||x||_inf <= 1 gives |x.beta| <= ||beta||_1 <= budget.
    Kernel: |g(x)| = |<g, K_x>| <= ||g||_H * sqrt(k(x,x)) <= budget for the
    RBF kernel whose diagonal is identically 1.
    """
    if isinstance(market, LinearMarket):
        return market.l1_budget
    return market.hnorm_budget


def system_utility_bound(system: MarketSystem) -> float:
    return max(
        utility_bound(system.target), *(utility_bound(m) for m in system.sources)
    )


def sample_outcome(
    market: Market,
    noise: NoiseModel,
    x: np.ndarray,
    price: float,
    rng: np.random.Generator,
) -> int:
    """Draw the binary sale indicator with one uniform variate."""
    if price < 0:
        raise InvalidParameterError(f"price must be nonnegative, got {price}")
    q = noise.sf(price - mean_utility(market, x))
    return int(rng.uniform() < q)


def build_linear_scenario(
    d: int,
    K: int,
    kind: str,
    W: float,
    sparsity_fraction: float,
    perturb_magnitude: float,
    rng: np.random.Generator,
    noise: NoiseModel | None = None,
) -> MarketSystem:
    """Target plus K linear sources under the sparse-difference similarity.

    The target coefficient vector is drawn uniform on [-1,1]^d and rescaled
    to ||beta||_1 = 0.9 W, leaving headroom for source perturbations.  With
    ``kind="sparse_diff"`` each source perturbs floor(sparsity_fraction * d)
    uniformly chosen coordinates by additive uniform noise; if that breaks
    the L1 budget the perturbation (not the whole vector) is shrunk back,
    which preserves the difference's support.
    """
    _require(d >= 1, f"d must be >= 1, got {d}")
    _require(K >= 1, f"K must be >= 1, got {K}")
    _require(0.0 <= sparsity_fraction <= 1.0, "sparsity_fraction must be in [0, 1]")
    if not (W > 0):
        raise InvalidParameterError(f"W must be positive, got {W}")
    if kind not in ("identical", "sparse_diff"):
        raise InvalidParameterError(f"unknown scenario kind {kind!r}")

    beta0 = rng.uniform(-1.0, 1.0, size=d)
    l1 = np.sum(np.abs(beta0))
    if l1 == 0.0:
        beta0[0] = 1.0
        l1 = 1.0
    beta0 *= 0.9 * W / l1
    target = LinearMarket(beta=beta0, l1_budget=W)

    sources = []
    s0 = int(np.floor(sparsity_fraction * d))
    shrunk = 0
    for _ in range(K):
        if kind == "identical":
            sources.append(LinearMarket(beta=beta0.copy(), l1_budget=W))
            continue
        delta = np.zeros(d)
        if s0 > 0:
            coords = rng.choice(d, size=s0, replace=False)
            delta[coords] = rng.uniform(
                -perturb_magnitude, perturb_magnitude, size=s0
            )
        beta_k = beta0 + delta
        if np.sum(np.abs(beta_k)) > W:
            norm_d = np.sum(np.abs(delta))
            shrink = (W - np.sum(np.abs(beta0))) / norm_d if norm_d > 0 else 0.0
            beta_k = beta0 + shrink * delta
            shrunk += 1
        sources.append(LinearMarket(beta=beta_k, l1_budget=W))
    if shrunk:
        warnings.warn(
            f"{shrunk} of {K} source perturbations shrunk to respect the L1 budget",
            RuntimeWarning,
            stacklevel=2,
        )
    return MarketSystem(
        target=target,
        sources=tuple(sources),
        noise=noise if noise is not None else make_logistic(DEFAULT_NOISE_SCALE, 1.0),
        covariate_dim=d,
    )


def build_rkhs_scenario(
    d: int,
    K: int,
    kind: str,
    R: float,
    diff_budget: float,
    gamma: float,
    n_centers: int,
    rng: np.random.Generator,
    noise: NoiseModel | None = None,
) -> MarketSystem:
    """Target plus K kernel sources under an RKHS-norm shift budget.

    The target is a random expansion over ``n_centers`` uniform covariates
    with Gaussian weights rescaled to RKHS norm exactly R.  Each
    sparse-difference source adds a fresh random expansion (over its own
    centers) whose norm is uniform in [0.5, 1] * diff_budget.
    """
    _require(d >= 1, f"d must be >= 1, got {d}")
    _require(K >= 1, f"K must be >= 1, got {K}")
    _require(n_centers >= 1, f"n_centers must be >= 1, got {n_centers}")
    _require(diff_budget >= 0, "diff_budget must be nonnegative")
    if not (R > 0):
        raise InvalidParameterError(f"R must be positive, got {R}")
    if not (gamma > 0):
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    if kind not in ("identical", "sparse_diff"):
        raise InvalidParameterError(f"unknown scenario kind {kind!r}")

    centers = rng.uniform(-1.0, 1.0, size=(n_centers, d))
    weights = rng.normal(size=n_centers)
    gram = rbf_kernel(centers, centers, gamma)
    norm = rkhs_norm(weights, gram)
    if norm == 0.0:
        weights[0] = 1.0
        norm = rkhs_norm(weights, gram)
    weights *= R / norm
    target = KernelMarket(
        centers=centers, weights=weights, kernel_gamma=gamma, hnorm_budget=R
    )

    sources = []
    for _ in range(K):
        if kind == "identical":
            sources.append(
                KernelMarket(
                    centers=centers.copy(),
                    weights=weights.copy(),
                    kernel_gamma=gamma,
                    hnorm_budget=R,
                )
            )
            continue
        d_centers = rng.uniform(-1.0, 1.0, size=(n_centers, d))
        d_weights = rng.normal(size=n_centers)
        d_gram = rbf_kernel(d_centers, d_centers, gamma)
        d_norm = rkhs_norm(d_weights, d_gram)
        goal = rng.uniform(0.5, 1.0) * diff_budget
        d_weights *= goal / d_norm if d_norm > 0 else 0.0
        sources.append(
            KernelMarket(
                centers=np.vstack([centers, d_centers]),
                weights=np.concatenate([weights, d_weights]),
                kernel_gamma=gamma,
                hnorm_budget=R + diff_budget,
            )
        )
    return MarketSystem(
        target=target,
        sources=tuple(sources),
        noise=noise if noise is not None else make_logistic(DEFAULT_NOISE_SCALE, 1.0),
        covariate_dim=d,
    )


def generate_offline_log(
    system: MarketSystem,
    n_per_source_total: int,
    price_rule: str,
    rng: np.random.Generator,
) -> list[Observation]:
    """Static source-market histories, split evenly across the K sources.

    ``uniform_random`` draws prices uniform on [0, price_cap];
    ``oracle_noisy`` posts each source's own optimal price plus uniform
    jitter on [-0.25, 0.25] (sources are assumed mature and near-optimal).
    """
    K = len(system.sources)
    _require(n_per_source_total >= K, "need at least one observation per source")
    if price_rule not in ("uniform_random", "oracle_noisy"):
        raise InvalidParameterError(f"unknown price rule {price_rule!r}")
    pm = make_price_map(system.noise, system_utility_bound(system))
    per = n_per_source_total // K
    extra = n_per_source_total - per * K
    log: list[Observation] = []
    for k, market in enumerate(system.sources, start=1):
        n_k = per + (1 if k <= extra else 0)
        for t in range(1, n_k + 1):
            x = sample_covariate(system.covariate_dim, rng)
            if price_rule == "uniform_random":
                price = rng.uniform(0.0, pm.price_cap)
            else:
                price = price_of(pm, mean_utility(market, x)) + rng.uniform(
                    -OFFLINE_PRICE_JITTER, OFFLINE_PRICE_JITTER
                )
                price = max(price, 0.0)
            sale = sample_outcome(market, system.noise, x, price, rng)
            log.append(
                Observation(market_index=k, time=t, x=x, price=price, sale=sale)
            )
    return log


def write_observations_csv(observations: list[Observation], path, dim: int) -> None:
    """Columns: market_index, time, x_0..x_{d-1}, price, sale."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["market_index", "time"]
            + [f"x_{j}" for j in range(dim)]
            + ["price", "sale"]
        )
        for obs in observations:
            writer.writerow(
                [obs.market_index, obs.time]
                + [format(v, ".12g") for v in obs.x]
                + [format(obs.price, ".12g"), obs.sale]
            )


def read_observations_csv(path) -> list[Observation]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        dim = len(header) - 4
        out = []
        for row in reader:
            out.append(
                Observation(
                    market_index=int(row[0]),
                    time=int(row[1]),
                    x=np.array([float(v) for v in row[2 : 2 + dim]]),
                    price=float(row[2 + dim]),
                    sale=int(row[3 + dim]),
                )
            )
    return out


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidParameterError(msg)
