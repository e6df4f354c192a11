"""Dense state-vector simulation of the gauge Hamiltonian on small graphs.

The Hamiltonian acts on one qubit per link (basis index bit l = 0 means
sigma_z = +1 on link l):

    H = sum_p J_p prod_{l in p} sigma_z^l  -  coupling * sum_l sigma_x^l

Adiabatic sweeps interpolate H(t) = t*gamma*Z - (1-t)*sum_l sigma_x^l via
second-order Trotter steps, optionally interleaved with projective
measurements of the gauge operators (products of sigma_x over a site) to
hold the state in their +1 sector. Everything is dense and guarded to at
most 16 links; this module exists to validate the solvers, not to scale.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .errors import ConsistencyError, SizeGuardError
from .graphs import GGraph

MAX_SIM_LINKS = 16
_DENSE_DIM = 4096
_DEGENERACY_RTOL = 1e-9


@dataclass
class QuantumState:
    amplitudes: np.ndarray
    n_links: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n_links,):
            raise ValueError(
                f"amplitude array must have length 2^{self.n_links}, "
                f"got {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "QuantumState":
        return QuantumState(self.amplitudes.copy(), self.n_links)


def _guard(n_links: int):
    if n_links > MAX_SIM_LINKS:
        raise SizeGuardError(
            f"dense simulation limited to {MAX_SIM_LINKS} links, got {n_links}"
        )


def plus_state(n_links: int) -> QuantumState:
    """|+>^n, the ground state of -sum sigma_x and a +1 eigenstate of
    every gauge operator."""
    _guard(n_links)
    dim = 2**n_links
    return QuantumState(np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128), n_links)


def product_state(thetas) -> QuantumState:
    """Product state with per-link angle theta against the x axis:
    |theta> = cos(theta/2)|+> + sin(theta/2)|->, so <sigma_x> = cos(theta)
    and <sigma_z> = sin(theta)."""
    thetas = np.asarray(thetas, dtype=np.float64)
    _guard(thetas.shape[0])
    amps = np.ones(1, dtype=np.complex128)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for th in thetas:
        c, s = np.cos(th / 2), np.sin(th / 2)
        qubit = np.array([(c + s) * inv_sqrt2, (c - s) * inv_sqrt2], dtype=np.complex128)
        amps = (qubit[:, None] * amps[None, :]).reshape(-1)
    return QuantumState(amps, thetas.shape[0])


def _parity_diag(g: GGraph) -> np.ndarray:
    """Diagonal of the plaquette operator sum: D[b] = sum_p J_p (-1)^parity."""
    dim = 2**g.n_links
    codes = np.arange(dim, dtype=np.uint32)
    diag = np.zeros(dim)
    for p in g.plaquettes:
        mask = np.uint32(sum(1 << l for l in p.links))
        parity = np.bitwise_count(codes & mask) & np.uint32(1)
        diag += p.coefficient * (1.0 - 2.0 * parity)
    return diag


class _SimModel:
    """Cached per-graph arrays for the dense simulator."""

    def __init__(self, g: GGraph):
        _guard(g.n_links)
        self.n_links = g.n_links
        self.dim = 2**g.n_links
        self.z_diag = _parity_diag(g)
        codes = np.arange(self.dim, dtype=np.uint32)
        self.site_flips = [
            codes ^ np.uint32(sum(1 << l for l in s.links)) for s in g.sites
        ]
        self.ground_cache: dict[tuple[float, float], tuple[float, np.ndarray]] = {}


_MODEL_CACHE: dict[int, tuple[weakref.ref, _SimModel]] = {}


def _model(g: GGraph) -> _SimModel:
    entry = _MODEL_CACHE.get(id(g))
    if entry is not None and entry[0]() is g:
        return entry[1]
    if len(_MODEL_CACHE) > 16:
        for key in [k for k, (r, _) in _MODEL_CACHE.items() if r() is None]:
            del _MODEL_CACHE[key]
    model = _SimModel(g)
    _MODEL_CACHE[id(g)] = (weakref.ref(g), model)
    return model


def _flip_bit(psi: np.ndarray, link: int, n_links: int) -> np.ndarray:
    """Amplitudes with basis bit ``link`` flipped."""
    view = psi.reshape(2 ** (n_links - 1 - link), 2, 2**link)
    return view[:, ::-1, :].reshape(-1)


def _apply(model: _SimModel, psi: np.ndarray, z_weight: float, x_weight: float) -> np.ndarray:
    """(z_weight * Z - x_weight * sum_l sigma_x) |psi>."""
    out = (z_weight * model.z_diag) * psi
    if x_weight != 0.0:
        for l in range(model.n_links):
            out -= x_weight * _flip_bit(psi, l, model.n_links)
    return out


def apply_hamiltonian(g: GGraph, coupling: float, state: QuantumState) -> QuantumState:
    """Apply H = Z - coupling * sum sigma_x (not normalized: this is an
    operator application, not an evolution step)."""
    model = _model(g)
    return QuantumState(_apply(model, state.amplitudes, 1.0, coupling), g.n_links)


def expectation(g: GGraph, state: QuantumState, coupling: float) -> float:
    model = _model(g)
    val = np.vdot(state.amplitudes, _apply(model, state.amplitudes, 1.0, coupling))
    return float(val.real)


def annealing_expectation(g: GGraph, state: QuantumState, t: float, gamma: float) -> float:
    """<psi| t*gamma*Z - (1-t)*sum sigma_x |psi>; matches lqa_cost on
    product states."""
    model = _model(g)
    val = np.vdot(state.amplitudes, _apply(model, state.amplitudes, t * gamma, 1 - t))
    return float(val.real)


def gauge_expectation(g: GGraph, site_index: int, state: QuantumState) -> float:
    model = _model(g)
    psi = state.amplitudes
    return float(np.vdot(psi, psi[model.site_flips[site_index]]).real)


def gauge_measure(
    g: GGraph, site_index: int, state: QuantumState, rng: np.random.Generator
) -> tuple[int, QuantumState]:
    """Projective measurement of the site's gauge operator: sample the
    outcome from ||P_+ psi||^2, collapse, renormalize."""
    model = _model(g)
    psi = state.amplitudes
    flipped = psi[model.site_flips[site_index]]
    plus = 0.5 * (psi + flipped)
    p_plus = float(np.vdot(plus, plus).real)
    if not -1e-10 <= p_plus <= 1 + 1e-10:
        raise ConsistencyError(f"outcome probability {p_plus} outside [0, 1]")
    if rng.random() < p_plus:
        outcome, projected, norm = 1, plus, np.sqrt(p_plus)
    else:
        projected = 0.5 * (psi - flipped)
        outcome, norm = -1, np.sqrt(max(1.0 - p_plus, 0.0))
    if norm < 1e-12:
        raise ConsistencyError(f"collapse onto outcome {outcome} has zero weight")
    return outcome, QuantumState(projected / norm, g.n_links)


# ----------------------------------------------------------------------
# Ground states
# ----------------------------------------------------------------------

def _lowest_space(g: GGraph, z_weight: float, x_weight: float) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and an orthonormal basis of its eigenspace for
    z_weight * Z - x_weight * sum sigma_x (real symmetric)."""
    model = _model(g)
    key = (float(z_weight), float(x_weight))
    hit = model.ground_cache.get(key)
    if hit is not None:
        return hit
    if model.dim <= _DENSE_DIM:
        h = np.diag(z_weight * model.z_diag)
        rows = np.arange(model.dim)
        for l in range(model.n_links):
            h[rows, rows ^ (1 << l)] -= x_weight
        vals, vecs = np.linalg.eigh(h)
    else:
        op = scipy.sparse.linalg.LinearOperator(
            (model.dim, model.dim),
            matvec=lambda v: _apply(model, v, z_weight, x_weight),
            dtype=np.float64,
        )
        k = min(32, model.dim - 2)
        vals, vecs = scipy.sparse.linalg.eigsh(op, k=k, which="SA")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    e0 = float(vals[0])
    tol = _DEGENERACY_RTOL * max(1.0, abs(e0))
    span = vecs[:, vals <= e0 + tol]
    result = (e0, span)
    if len(model.ground_cache) < 4096:
        model.ground_cache[key] = result
    return result


def exact_ground(g: GGraph, coupling: float) -> tuple[float, int, np.ndarray]:
    """Lowest eigenpair of H = Z - coupling * sum sigma_x.

    Returns (energy, degeneracy, basis) where basis has one orthonormal
    column per ground state. Above the dense cutoff the degeneracy is
    capped by the number of iteratively computed eigenpairs.
    """
    energy, span = _lowest_space(g, 1.0, coupling)
    return energy, span.shape[1], span


def space_fidelity(state: QuantumState, basis: np.ndarray) -> float:
    """Squared projection of the state onto the span of the basis columns."""
    overlaps = basis.conj().T @ state.amplitudes
    f = float(np.vdot(overlaps, overlaps).real)
    if not -1e-10 <= f <= 1 + 1e-10:
        raise ConsistencyError(f"fidelity {f} outside [0, 1]")
    return min(max(f, 0.0), 1.0)


# ----------------------------------------------------------------------
# Adiabatic sweeps
# ----------------------------------------------------------------------

@dataclass
class SweepReport:
    """Per-step trace of an adiabatic sweep.

    ``fidelities`` hold the squared overlap with the instantaneous ground
    space (NaN on steps where recording was skipped); ``minus_outcomes``
    counts -1 gauge-measurement results, which flag states that left the
    +1 sector."""

    times: np.ndarray
    energies: np.ndarray
    fidelities: np.ndarray
    min_gauge: np.ndarray
    minus_outcomes: int
    measurements: int

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelities[-1])

    def to_csv(self) -> str:
        lines = ["t,energy,fidelity,min_gauge_expectation"]
        for t, e, f, m in zip(self.times, self.energies, self.fidelities, self.min_gauge):
            lines.append(f"{t!r},{e!r},{f!r},{m!r}")
        return "\n".join(lines) + "\n"


def adiabatic_sweep(
    g: GGraph,
    gamma: float,
    n_steps: int,
    dt_per_step: float,
    measure_every: int | None = None,
    seed: int = 0,
    fidelity_every: int = 1,
) -> SweepReport:
    """Trotterized sweep of H(t) = t*gamma*Z - (1-t)*sum sigma_x from
    |+>^n, with optional projective gauge measurements.

    Each step evolves for ``dt_per_step`` under the midpoint Hamiltonian
    (second order in dt) using a symmetric X/Z/X splitting; records are
    taken at the end-of-step schedule positions t_j = j/n_steps, so the
    final record is against the t = 1 target. ``measure_every = m``
    measures every site after each m-th step.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    model = _model(g)
    rng = np.random.default_rng(seed)
    psi = plus_state(g.n_links).amplitudes
    n = g.n_links
    times, energies, fidelities, min_gauge = [], [], [], []
    minus_outcomes = 0
    measurements = 0
    for j in range(1, n_steps + 1):
        t_mid = (j - 0.5) / n_steps
        half = 0.5 * dt_per_step * (1 - t_mid)
        c, s = np.cos(half), np.sin(half)
        for l in range(n):
            psi = c * psi + 1j * s * _flip_bit(psi, l, n)
        psi = psi * np.exp(-1j * dt_per_step * t_mid * gamma * model.z_diag)
        for l in range(n):
            psi = c * psi + 1j * s * _flip_bit(psi, l, n)
        if measure_every and j % measure_every == 0:
            state = QuantumState(psi, n)
            for v in range(len(g.sites)):
                outcome, state = gauge_measure(g, v, state, rng)
                measurements += 1
                if outcome == -1:
                    minus_outcomes += 1
            psi = state.amplitudes
        norm = float(np.linalg.norm(psi))
        if not np.isfinite(norm) or abs(norm - 1.0) > 1e-10:
            raise ConsistencyError(f"state norm drifted to {norm} at step {j}")
        t_rec = j / n_steps
        times.append(t_rec)
        state = QuantumState(psi, n)
        energies.append(annealing_expectation(g, state, t_rec, gamma))
        if j % fidelity_every == 0 or j == n_steps:
            _, basis = _lowest_space(g, t_rec * gamma, 1 - t_rec)
            fidelities.append(space_fidelity(state, basis))
        else:
            fidelities.append(np.nan)
        if g.sites:
            min_gauge.append(min(gauge_expectation(g, v, state) for v in range(len(g.sites))))
        else:
            min_gauge.append(np.nan)
    return SweepReport(
        times=np.array(times),
        energies=np.array(energies),
        fidelities=np.array(fidelities),
        min_gauge=np.array(min_gauge),
        minus_outcomes=minus_outcomes,
        measurements=measurements,
    )
