"""Solvers over a gauge graph: LQA, gauge-forced LQA, and Metropolis SA.

LQA relaxes the annealing Hamiltonian over product states parameterized
by one angle per link, theta_i = (pi/2) * tanh(w_i), and runs momentum
gradient descent on the unbounded w. The gauge-forced variant appends,
each iteration, a descent step on the gauge penalty

    P(w) = sum_sites (prod_{l in site} x_l - 1)^2,    x_l = cos(theta_l),

which pulls the product state toward the +1 eigenspace of every gauge
operator. Spins are read out as s_i = sign(w_i) at the end.
"""

from __future__ import annotations

import time
import weakref
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionError, DivergenceError
from .graphs import GGraph
from .hubo import HuboPolynomial, evaluate

# Saturated runs (|tanh| = 1, zero gradient) can drift w linearly far past
# 1e6 while the spins stay frozen; the guard only needs to catch genuine
# blowups, which pass any threshold within a few iterations.
W_DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class AnnealerParams:
    """Hyperparameters for lqa_run / glqa_run.

    Defaults come from a coarse grid search on the benchmark families.
    Four-spin couplings make the symmetric point theta = 0 a degenerate
    trap (the plaquette force is cubic in the angles), so useful settings
    start with O(1) amplitudes, strong target weight, and momentum close
    to 1. B = 0 makes the gauge-forced solver identical to plain LQA.
    """

    n_iter: int = 1000
    gamma: float = 5.0
    eta: float = 0.15
    mu: float = 0.9995
    B: float = 0.08
    init_scale: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n_iter < 0:
            raise ValueError(f"n_iter must be >= 0, got {self.n_iter}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not 0 <= self.mu <= 1:
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")
        if self.B < 0:
            raise ValueError(f"B must be >= 0, got {self.B}")
        if not self.init_scale > 0:
            raise ValueError(f"init_scale must be positive, got {self.init_scale}")

    def replace(self, **kwargs) -> "AnnealerParams":
        from dataclasses import replace

        return replace(self, **kwargs)


@dataclass(frozen=True)
class SaSchedule:
    """Inverse-temperature ramp for simulated annealing."""

    beta_min: float = 0.1
    beta_max: float = 10.0
    kind: str = "geometric"

    def __post_init__(self):
        if not (0 <= self.beta_min <= self.beta_max and np.isfinite(self.beta_max)):
            raise ValueError(
                f"need 0 <= beta_min <= beta_max < inf, got "
                f"({self.beta_min}, {self.beta_max})"
            )
        if self.kind not in ("geometric", "linear"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "geometric" and self.beta_min == 0:
            raise ValueError("geometric schedule needs beta_min > 0")

    def betas(self, sweeps: int) -> np.ndarray:
        if sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {sweeps}")
        frac = np.arange(sweeps) / max(sweeps - 1, 1)
        if self.kind == "geometric":
            return self.beta_min * (self.beta_max / self.beta_min) ** frac
        return self.beta_min + (self.beta_max - self.beta_min) * frac


@dataclass
class SampleResult:
    energy: float
    spins: np.ndarray
    iterations_run: int
    wall_time: float


# ----------------------------------------------------------------------
# Vectorized per-set products over link values
# ----------------------------------------------------------------------

class _SetTable:
    """Link subsets as (m, k) index matrices, grouped by size.

    Sizes within 2 of each other share a group: short rows are padded
    with a sentinel column whose value is pinned to 1, which leaves both
    the row products and the exclusive products unchanged (the sentinel's
    own accumulator entry is sliced away)."""

    _PAD_SPREAD = 2

    def __init__(self, sets: tuple[tuple[int, ...], ...], coeffs, n_links: int):
        self.n_links = n_links
        by_size: dict[int, list[int]] = {}
        for i, s in enumerate(sets):
            by_size.setdefault(len(s), []).append(i)
        coeffs = np.asarray(coeffs, dtype=np.float64)
        self.groups = []
        sizes = sorted(by_size)
        while sizes:
            run = [k for k in sizes if k - sizes[0] <= self._PAD_SPREAD]
            sizes = sizes[len(run):]
            bucket = [i for k in run for i in by_size[k]]
            width = run[-1]
            idx = np.full((len(bucket), width), n_links, dtype=np.int64)
            for row, i in enumerate(bucket):
                idx[row, : len(sets[i])] = sets[i]
            self.groups.append((idx, coeffs[bucket]))

    def _extended(self, values: np.ndarray) -> np.ndarray:
        """Values with the sentinel slot appended (always 1)."""
        ext = np.empty(self.n_links + 1)
        ext[:-1] = values
        ext[-1] = 1.0
        return ext

    def weighted_product_sum(self, values: np.ndarray) -> float:
        """sum over sets of coeff * prod values."""
        ext = self._extended(values)
        total = 0.0
        for idx, c in self.groups:
            total += float(c @ np.prod(ext[idx], axis=1))
        return total

    def product_residual(self, values: np.ndarray) -> float:
        """sum over sets of (prod values - 1)^2."""
        ext = self._extended(values)
        total = 0.0
        for idx, _ in self.groups:
            total += float(((np.prod(ext[idx], axis=1) - 1.0) ** 2).sum())
        return total

    @staticmethod
    def _exclusive(vals: np.ndarray) -> np.ndarray:
        """excl[:, j] = product of the row excluding column j."""
        m, k = vals.shape
        left = np.ones_like(vals)
        right = np.ones_like(vals)
        if k > 1:
            np.cumprod(vals[:, :-1], axis=1, out=left[:, 1:])
            right[:, :-1] = np.cumprod(vals[:, :0:-1], axis=1)[:, ::-1]
        return left * right

    def accumulate_exclusive(self, values: np.ndarray, use_products_minus_one: bool = False) -> np.ndarray:
        """Per-link sums of weighted row products excluding that link.

        Weight per set is its coefficient, or (full product - 1) when
        ``use_products_minus_one`` is set (the gauge-penalty weight).
        """
        ext = self._extended(values)
        acc = np.zeros(self.n_links + 1)
        for idx, c in self.groups:
            vals = ext[idx]
            excl = self._exclusive(vals)
            if use_products_minus_one:
                weight = excl[:, 0] * vals[:, 0] - 1.0
            else:
                weight = c
            contrib = weight[:, None] * excl
            acc += np.bincount(idx.ravel(), weights=contrib.ravel(), minlength=self.n_links + 1)
        return acc[: self.n_links]


class _Compiled:
    """Per-graph arrays shared by the solvers."""

    def __init__(self, g: GGraph):
        self.n_links = g.n_links
        self.plaquettes = _SetTable(
            tuple(p.links for p in g.plaquettes),
            [p.coefficient for p in g.plaquettes],
            g.n_links,
        )
        self.sites = _SetTable(
            tuple(s.links for s in g.sites),
            np.ones(len(g.sites)),
            g.n_links,
        )
        self.polynomial: HuboPolynomial = g.to_polynomial()


_COMPILED_CACHE: dict[int, tuple[weakref.ref, _Compiled]] = {}


def _compiled(g: GGraph) -> _Compiled:
    entry = _COMPILED_CACHE.get(id(g))
    if entry is not None and entry[0]() is g:
        return entry[1]
    if len(_COMPILED_CACHE) > 64:
        for key in [k for k, (r, _) in _COMPILED_CACHE.items() if r() is None]:
            del _COMPILED_CACHE[key]
    comp = _Compiled(g)
    _COMPILED_CACHE[id(g)] = (weakref.ref(g), comp)
    return comp


# ----------------------------------------------------------------------
# Cost, gradient, gauge step
# ----------------------------------------------------------------------

def _angles(w: np.ndarray):
    # tanh and sech^2 are fully saturated beyond |w| = 30; clamping there
    # avoids cosh overflow without changing any value
    wc = np.clip(w, -30.0, 30.0)
    theta = (np.pi / 2) * np.tanh(wc)
    sech = 1.0 / np.cosh(wc)
    dtheta_dw = (np.pi / 2) * sech * sech
    return np.sin(theta), np.cos(theta), dtheta_dw


def _check_w(g: GGraph, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (g.n_links,):
        raise DimensionError(f"expected {g.n_links} parameters, got shape {w.shape}")
    return w


def lqa_cost(g: GGraph, w, t: float, gamma: float) -> float:
    """Product-state energy t*gamma*<Z> - (1-t)*<sum sigma_x> at angles
    theta = (pi/2)*tanh(w): z = sin(theta) enters the plaquette products,
    x = cos(theta) the transverse sum."""
    w = _check_w(g, w)
    if not 0 <= t <= 1:
        raise ValueError(f"t must be in [0, 1], got {t}")
    z, x, _ = _angles(w)
    comp = _compiled(g)
    return t * gamma * comp.plaquettes.weighted_product_sum(z) - (1 - t) * float(x.sum())


def lqa_grad(g: GGraph, w, t: float, gamma: float) -> np.ndarray:
    """Analytic gradient of lqa_cost with respect to w."""
    w = _check_w(g, w)
    if not 0 <= t <= 1:
        raise ValueError(f"t must be in [0, 1], got {t}")
    return _grad(_compiled(g), w, t, gamma)


def _grad(comp: _Compiled, w: np.ndarray, t: float, gamma: float) -> np.ndarray:
    z, x, dtheta_dw = _angles(w)
    excl = comp.plaquettes.accumulate_exclusive(z)
    return dtheta_dw * (t * gamma * x * excl + (1 - t) * z)


def gauge_step(g: GGraph, w, B: float) -> np.ndarray:
    """One synchronous descent step on the gauge penalty; the returned
    displacement equals -(B/2) * grad P(w)."""
    w = _check_w(g, w)
    return _gauge_step(_compiled(g), w, B)


def _gauge_step(comp: _Compiled, w: np.ndarray, B: float) -> np.ndarray:
    z, x, dtheta_dw = _angles(w)
    dx_dw = -z * dtheta_dw
    force = comp.sites.accumulate_exclusive(x, use_products_minus_one=True)
    return w - B * force * dx_dw


def gauge_penalty(g: GGraph, w) -> float:
    """P(w) = sum over sites of (prod x_l - 1)^2."""
    w = _check_w(g, w)
    _, x, _ = _angles(w)
    return _compiled(g).sites.product_residual(x)


# ----------------------------------------------------------------------
# Annealing runs
# ----------------------------------------------------------------------

def _spins_from_w(w: np.ndarray) -> np.ndarray:
    return np.where(w >= 0, 1, -1).astype(np.int8)  # sign(0) = +1


def _anneal(g: GGraph, params: AnnealerParams, use_gauge: bool) -> SampleResult:
    start = time.perf_counter()
    comp = _compiled(g)
    rng = np.random.default_rng(params.seed)
    w = rng.uniform(-params.init_scale, params.init_scale, g.n_links)
    nu = np.zeros(g.n_links)
    apply_gauge = use_gauge and params.B != 0 and len(g.sites) > 0
    for j in range(1, params.n_iter + 1):
        t = j / params.n_iter
        grad = _grad(comp, w, t, params.gamma)
        nu *= params.mu
        nu -= params.eta * grad
        w = w + nu
        if apply_gauge:
            w = _gauge_step(comp, w, params.B)
        if not np.isfinite(w).all() or np.abs(w).max() > W_DIVERGENCE_LIMIT:
            raise DivergenceError("annealer parameters diverged", iteration=j)
    spins = _spins_from_w(w)
    energy = evaluate(comp.polynomial, spins)
    return SampleResult(
        energy=energy,
        spins=spins,
        iterations_run=params.n_iter,
        wall_time=time.perf_counter() - start,
    )


def lqa_run(g: GGraph, params: AnnealerParams) -> SampleResult:
    """Momentum gradient descent on the annealing cost, t = j / n_iter."""
    return _anneal(g, params, use_gauge=False)


def glqa_run(g: GGraph, params: AnnealerParams) -> SampleResult:
    """lqa_run plus a gauge-penalty descent step after each update."""
    return _anneal(g, params, use_gauge=True)


# ----------------------------------------------------------------------
# Simulated annealing
# ----------------------------------------------------------------------

@njit(cache=True)
def _sa_kernel(n_links, plq_ptr, plq_links, lnk_ptr, lnk_plqs, coeffs, betas, seed):
    np.random.seed(seed)
    s = np.empty(n_links, dtype=np.int8)
    for i in range(n_links):
        s[i] = 1 if np.random.random() < 0.5 else -1
    n_plq = coeffs.shape[0]
    prods = np.empty(n_plq)
    for p in range(n_plq):
        pr = 1.0
        for q in range(plq_ptr[p], plq_ptr[p + 1]):
            pr *= s[plq_links[q]]
        prods[p] = pr
    energy = 0.0
    for p in range(n_plq):
        energy += coeffs[p] * prods[p]
    best_energy = energy
    best_s = s.copy()
    order = np.arange(n_links)
    for sweep in range(betas.shape[0]):
        beta = betas[sweep]
        for i in range(n_links - 1, 0, -1):  # Fisher-Yates
            j = np.random.randint(0, i + 1)
            order[i], order[j] = order[j], order[i]
        for oi in range(n_links):
            i = order[oi]
            delta = 0.0
            for q in range(lnk_ptr[i], lnk_ptr[i + 1]):
                delta -= 2.0 * coeffs[lnk_plqs[q]] * prods[lnk_plqs[q]]
            if delta <= 0.0 or np.random.random() < np.exp(-beta * delta):
                s[i] = -s[i]
                for q in range(lnk_ptr[i], lnk_ptr[i + 1]):
                    prods[lnk_plqs[q]] = -prods[lnk_plqs[q]]
                energy += delta
                if energy < best_energy:
                    best_energy = energy
                    best_s[:] = s
    return best_s


def _csr(sets: tuple[tuple[int, ...], ...], n_links: int):
    ptr = np.zeros(len(sets) + 1, dtype=np.int64)
    for i, s in enumerate(sets):
        ptr[i + 1] = ptr[i] + len(s)
    flat = np.fromiter((l for s in sets for l in s), dtype=np.int64, count=int(ptr[-1]))
    return ptr, flat


def sa_run(g: GGraph, sweeps: int, schedule: SaSchedule, seed: int) -> SampleResult:
    """Single-spin-flip Metropolis over the plaquette polynomial; one sweep
    proposes every link once in random order. Returns the best-seen
    configuration with its exactly re-evaluated energy."""
    start = time.perf_counter()
    betas = schedule.betas(sweeps)
    plq_sets = tuple(p.links for p in g.plaquettes)
    plq_ptr, plq_links = _csr(plq_sets, g.n_links)
    link_sets: list[list[int]] = [[] for _ in range(g.n_links)]
    for pi, p in enumerate(g.plaquettes):
        for l in p.links:
            link_sets[l].append(pi)
    lnk_ptr, lnk_plqs = _csr(tuple(tuple(x) for x in link_sets), g.n_links)
    coeffs = np.array([p.coefficient for p in g.plaquettes])
    spins = _sa_kernel(
        g.n_links, plq_ptr, plq_links, lnk_ptr, lnk_plqs, coeffs, betas,
        int(seed) % (2**32),
    )
    energy = evaluate(_compiled(g).polynomial, spins)
    return SampleResult(
        energy=energy,
        spins=spins,
        iterations_run=sweeps,
        wall_time=time.perf_counter() - start,
    )
