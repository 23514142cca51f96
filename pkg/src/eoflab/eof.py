"""Entanglement of formation: exact pieces and the ensemble minimizer.

The minimizer searches decompositions of rho through the isometry map: an
m x m unitary exp(i H) is built from m^2 real parameters, its first rank(rho)
columns feed `hjw_ensemble`, and the ensemble-average entanglement across the
requested cut is pushed down by L-BFGS-B with central finite differences.
Restart 0 starts from the zero parameter vector (the eigen-decomposition),
optional warm starts follow, and the remaining restarts draw their parameter
vectors from Gaussian streams seeded by (seed, restart index), so the whole
estimate is deterministic for fixed options.

Every value this module produces is an upper bound on the true EoF; only the
two-qubit closed form is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .ensembles import (
    Ensemble,
    hjw_ensemble,
    isometry_for_ensemble,
    support_decomposition,
)
from .qstate import (
    EIG_FLOOR,
    DensityMatrix,
    PureState,
    cut_permutation,
    eof_cut_entropy,
)

AUTO_ENSEMBLE_CAP = 16


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2(1-x)."""
    if not 0.0 <= x <= 1.0:
        if -1e-12 < x < 1.0 + 1e-12:
            x = min(max(x, 0.0), 1.0)
        else:
            raise ValueError(f"binary_entropy argument {x!r} outside [0, 1]")
    out = 0.0
    if x > 0.0:
        out -= x * math.log2(x)
    if x < 1.0:
        out -= (1.0 - x) * math.log2(1.0 - x)
    return out


def eof_pure(psi: PureState, cut: Iterable[int]) -> float:
    """Exact entanglement of a pure state across the cut (marginal entropy)."""
    return eof_cut_entropy(psi, cut)


def ensemble_average_entanglement(e: Ensemble, cut: Iterable[int]) -> float:
    """sum_i p_i E(psi_i) across the cut; an upper bound on EoF of mix(e)."""
    cut = tuple(cut)
    return float(sum(w * eof_pure(s, cut) for w, s in e))


_SIGMA_YY = np.array(
    [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ]
)


def concurrence_2q(rho: DensityMatrix) -> float:
    """Two-qubit concurrence from the spin-flip spectrum.

    The square roots of the eigenvalues of rho (Y x Y) rho* (Y x Y) are taken
    as the singular values of sqrt(rho) (Y x Y) sqrt(rho)*, which keeps the
    computation Hermitian throughout.
    """
    if rho.dims != (2, 2):
        raise ValueError(f"two-qubit closed form needs dims (2, 2), got {rho.dims}")
    w, v = np.linalg.eigh((rho.mat + rho.mat.conj().T) / 2)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    sq = np.linalg.svd(sqrt_rho @ _SIGMA_YY @ sqrt_rho.conj(), compute_uv=False)
    return float(max(0.0, sq[0] - sq[1] - sq[2] - sq[3]))


def eof_wootters_2q(rho: DensityMatrix) -> float:
    """Exact two-qubit EoF via the concurrence closed form."""
    c = concurrence_2q(rho)
    return binary_entropy((1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / 2.0)


@dataclass
class EofOptions:
    """Knobs for the decomposition search.

    ensemble_size "auto" resolves to min(rank^2, 16), never below the rank.
    """

    restarts: int = 20
    max_iterations: int = 500
    ensemble_size: int | str = "auto"
    gradient_step: float = 1e-5
    convergence_tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_step <= 0 or self.convergence_tol <= 0:
            raise ValueError("gradient_step and convergence_tol must be positive")
        if self.ensemble_size != "auto":
            self.ensemble_size = int(self.ensemble_size)
            if self.ensemble_size < 1:
                raise ValueError("ensemble_size must be >= 1 or 'auto'")


@dataclass
class EofEstimate:
    """Outcome of a minimization run.

    `value` is the smallest objective seen; nonconvergence is reported in
    `converged`, never raised.
    """

    value: float
    best_ensemble: Ensemble
    converged: bool
    restarts_used: int
    iterations: int
    restart_values: tuple[float, ...] = field(default=())


def _params_to_hermitian(x: np.ndarray, m: int) -> np.ndarray:
    """Map (..., m^2) real parameters to stacked Hermitian matrices."""
    x = np.asarray(x, dtype=float)
    k = m * (m - 1) // 2
    h = np.zeros(x.shape[:-1] + (m, m), dtype=np.complex128)
    if k:
        iu = np.triu_indices(m, 1)
        h[..., iu[0], iu[1]] = x[..., m:m + k] + 1j * x[..., m + k:]
        h = h + np.conj(np.swapaxes(h, -1, -2))
    rng = np.arange(m)
    h[..., rng, rng] = x[..., :m]
    return h


def _hermitian_to_params(h: np.ndarray) -> np.ndarray:
    """Inverse of _params_to_hermitian for a single matrix."""
    m = h.shape[0]
    iu = np.triu_indices(m, 1)
    off = h[iu]
    return np.concatenate([np.diagonal(h).real, off.real, off.imag])


def _unitaries(h: np.ndarray) -> np.ndarray:
    """exp(i h) for stacked Hermitian h."""
    w, v = np.linalg.eigh(h)
    phase = np.exp(1j * w)
    return np.einsum("...ij,...j,...kj->...ik", v, phase, v.conj())


class _DecompositionObjective:
    """Batched evaluation of sum_i p_i cost(psi_i) over the isometry chart."""

    def __init__(self, rho: DensityMatrix, cut, m: int,
                 member_cost: Callable[[np.ndarray], np.ndarray] | None):
        lam, vecs = support_decomposition(rho)
        self.rank = int(lam.size)
        self.m = m
        self.nparams = m * m
        self.basis = vecs * np.sqrt(lam)
        self.dims = rho.dims
        self.perm, self.d_left, self.d_right = cut_permutation(rho.dims, cut)
        self.member_cost = member_cost

    def isometry(self, x: np.ndarray) -> np.ndarray:
        return _unitaries(_params_to_hermitian(x, self.m))[:, : self.rank]

    def values(self, xs: np.ndarray) -> np.ndarray:
        """Objective for a (B, nparams) stack of parameter vectors."""
        u = _unitaries(_params_to_hermitian(xs, self.m))[..., :, : self.rank]
        raw = np.einsum("dj,bij->bdi", self.basis, u)        # (B, D, m) columns
        if self.member_cost is None:
            return self._entropy_values(raw)
        return self._generic_values(raw)

    def _entropy_values(self, raw: np.ndarray) -> np.ndarray:
        b = raw.shape[0]
        x = raw[:, self.perm, :]
        x = x.reshape(b, self.d_left, self.d_right, self.m).transpose(0, 3, 1, 2)
        s = np.linalg.svd(x.reshape(-1, self.d_left, self.d_right), compute_uv=False)
        lam2 = (s * s).reshape(b, self.m, -1)
        p = lam2.sum(axis=-1)
        p_safe = np.where(p > 1e-15, p, 1.0)
        mu = lam2 / p_safe[..., None]
        mask = (mu > EIG_FLOOR) & (p[..., None] > 1e-15)
        terms = np.where(mask, -lam2 * np.log2(np.where(mask, mu, 1.0)), 0.0)
        return terms.sum(axis=(-2, -1))

    def _generic_values(self, raw: np.ndarray) -> np.ndarray:
        b, d, m = raw.shape
        p = np.einsum("bdi,bdi->bi", raw.conj(), raw).real
        good = p > 1e-14
        norm = np.sqrt(np.where(good, p, 1.0))
        members = (raw / norm[:, None, :]).transpose(0, 2, 1).reshape(b * m, d)
        fallback = np.zeros(d, dtype=np.complex128)
        fallback[0] = 1.0
        members[~good.reshape(-1)] = fallback
        costs = np.asarray(self.member_cost(members), dtype=float).reshape(b, m)
        return np.where(good, p * costs, 0.0).sum(axis=-1)


def _complete_to_unitary(u: np.ndarray, m: int) -> np.ndarray:
    """Extend m' x r orthonormal columns (padded to m rows) to an m x m unitary."""
    r = u.shape[1]
    full = np.zeros((m, r), dtype=np.complex128)
    full[: u.shape[0], :] = u
    if r == m:
        return full
    proj = np.eye(m) - full @ full.conj().T
    w, v = np.linalg.eigh(proj)
    comp = v[:, w > 0.5]
    if comp.shape[1] != m - r:
        raise ValueError("could not complete isometry to a unitary")
    return np.hstack([full, comp])


def _params_for_ensemble(rho: DensityMatrix, e: Ensemble, m: int) -> np.ndarray:
    """Parameter vector whose unitary reproduces the given decomposition."""
    u = isometry_for_ensemble(rho, e)
    if u.shape[0] > m:
        raise ValueError(f"warm start has {u.shape[0]} members, ensemble size is {m}")
    w = _complete_to_unitary(u, m)
    t, z = scipy.linalg.schur(w, output="complex")
    theta = np.angle(np.diagonal(t))
    h = (z * theta) @ z.conj().T
    h = (h + h.conj().T) / 2
    return _hermitian_to_params(h)


def resolve_ensemble_size(rank: int, requested: int | str, warm_sizes: Sequence[int] = ()) -> int:
    """Apply the auto rule and the hard floors (rank, warm-start member count)."""
    if requested == "auto":
        m = min(rank * rank, AUTO_ENSEMBLE_CAP)
    else:
        m = int(requested)
        if m < rank:
            raise ValueError(f"ensemble_size {m} is below the state rank {rank}")
    return max(m, rank, *(int(s) for s in warm_sizes), 1)


def minimize_over_decompositions(
    rho: DensityMatrix,
    cut,
    opts: EofOptions | None = None,
    member_cost: Callable[[np.ndarray], np.ndarray] | None = None,
    warm_starts: Sequence[Ensemble] = (),
) -> EofEstimate:
    """Minimize sum_i p_i cost(psi_i) over decompositions of rho.

    member_cost None means the default cost, entanglement entropy across
    `cut`.  A custom member_cost receives a (N, dim) stack of normalized
    member vectors in the state's native subsystem order and returns N
    per-member costs; it must be bounded and continuous for the finite
    difference gradients to make sense.
    """
    opts = opts if opts is not None else EofOptions()
    cut = tuple(cut)
    lam, _ = support_decomposition(rho)
    rank = int(lam.size)
    m = resolve_ensemble_size(rank, opts.ensemble_size, [len(e) for e in warm_starts])
    obj = _DecompositionObjective(rho, cut, m, member_cost)
    n = obj.nparams
    delta = opts.gradient_step

    starts: list[np.ndarray] = [np.zeros(n)]
    for e in warm_starts:
        starts.append(_params_for_ensemble(rho, e, m))
    n_runs = max(opts.restarts, len(starts))
    for k in range(len(starts), n_runs):
        rng = np.random.default_rng([opts.seed, k])
        starts.append(rng.standard_normal(n))

    best_value = math.inf
    best_x = starts[0]
    best_run = (False, 0)
    restart_values: list[float] = []
    offsets = np.zeros((2 * n + 1, n))
    offsets[1: n + 1] = delta * np.eye(n)
    offsets[n + 1:] = -delta * np.eye(n)

    for x0 in starts:
        run_best = [math.inf, x0]

        def fun_and_grad(x, _run_best=run_best):
            fs = obj.values(x[None, :] + offsets)
            if fs[0] < _run_best[0]:
                _run_best[0] = float(fs[0])
                _run_best[1] = x.copy()
            grad = (fs[1: n + 1] - fs[n + 1:]) / (2.0 * delta)
            return float(fs[0]), grad

        res = scipy.optimize.minimize(
            fun_and_grad,
            x0,
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": opts.max_iterations,
                "ftol": opts.convergence_tol,
                "gtol": 1e-6,
            },
        )
        value, x_best_run = run_best
        restart_values.append(float(value))
        if value < best_value:
            best_value = float(value)
            best_x = x_best_run
            best_run = (bool(res.success), int(res.nit))

    ensemble = hjw_ensemble(rho, obj.isometry(best_x))
    return EofEstimate(
        value=float(best_value),
        best_ensemble=ensemble,
        converged=best_run[0],
        restarts_used=n_runs,
        iterations=best_run[1],
        restart_values=tuple(restart_values),
    )


def eof_minimize(
    rho: DensityMatrix,
    cut,
    opts: EofOptions | None = None,
    warm_starts: Sequence[Ensemble] = (),
) -> EofEstimate:
    """Numerical EoF upper bound across the cut via the decomposition search."""
    return minimize_over_decompositions(rho, cut, opts, None, warm_starts)
