"""Numerical verification of entropy relations and counterexample searches.

Deterministic checks of identities/inequalities return a CheckReport;
randomized searches for violations of open conjectures return a
ProbeResult.  Both serialize byte-identically for a given input, so runs
can be archived, diffed, and re-verified, and every reported candidate
violation carries enough data (`argmin`) to be recomputed from scratch
with `reevaluate_argmin`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Mapping, Sequence

import numpy as np

from .ensembles import (
    Ensemble,
    check_isometry,
    hjw_ensemble,
    product_ensemble,
    support_decomposition,
    flagged_state,
)
from .eof import (
    EofOptions,
    _SIGMA_YY,
    ensemble_average_entanglement,
    eof_minimize,
    eof_wootters_2q,
    minimize_over_decompositions,
)
from .qmat import ShapeError, as_cmatrix
from .qstate import (
    EIG_FLOOR,
    DensityMatrix,
    NormalizationError,
    PureState,
    _complex_to_pairs,
    _pairs_to_complex,
    partial_trace,
    payload_to_state,
    reduced_state,
    shannon_entropy,
    spectral_entropy,
    state_to_payload,
    tensor,
    von_neumann_entropy,
)
from .statezoo import (
    Case1Spec,
    Case2Spec,
    case1_conditional,
    case1_conditional_col,
    case1_state,
    case2_factor,
    complex_gaussian,
    random_isometry,
    werner_two_pair,
)

GAP_TOL = 1e-9

SEARCH_CAVEAT = (
    "A finite random search cannot prove a relation, only exhibit counterexamples. "
    "Gaps here are exact entropy evaluations, so a reproducible gap below -slack is "
    "a genuine violation of the conjectured inequality."
)

UPPER_BOUND_CAVEAT = (
    "Entanglement terms computed by minimization are upper bounds unless exact_terms "
    "is true, so each reported gap is a lower bound on the true gap: positive gaps "
    "are conservative evidence the relation holds, while a negative gap is only a "
    "candidate violation to be reproduced (it is conclusive when exact_terms is "
    "true, because then the subtracted terms are closed-form)."
)


def _plain(obj):
    """Recursively coerce report contents to JSON-serializable Python types."""
    if obj is None or isinstance(obj, (str, bool, int, float)):
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            raise TypeError("complex arrays must be encoded as [re, im] pairs first")
        return _plain(obj.tolist())
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


class _ReportSerialization:
    """Shared to_dict/to_json/to_csv for the report dataclasses."""

    _ITEM_FIELD = ""

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            out[f.name] = _plain(getattr(self, f.name))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        def cell(v):
            return v if isinstance(v, str) else json.dumps(v, sort_keys=True)

        d = self.to_dict()
        items = d.pop(self._ITEM_FIELD, [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "index", "field", "value"])
        name = d.pop("name")
        for key in sorted(d):
            w.writerow([name, "", key, cell(d[key])])
        for i, entry in enumerate(items):
            for key in sorted(entry):
                w.writerow([name, i, key, cell(entry[key])])
        return buf.getvalue()


@dataclass(frozen=True)
class CheckReport(_ReportSerialization):
    """Outcome of a deterministic numerical check.

    semantics says how `passed` was decided: "identity" (every residual
    within tol), "inequality" (every gap above -slack), "mixed" (both
    kinds of parts present), or "consistency" (independent estimates of
    one quantity agree within slack).  Unused aggregate fields are None.
    """

    name: str
    semantics: str
    samples: int
    seed: int | None
    tol: float | None
    slack: float | None
    min_gap: float | None
    max_abs_residual: float | None
    passed: bool
    per_sample: tuple = ()
    extra: dict = field(default_factory=dict)

    _ITEM_FIELD = "per_sample"


@dataclass(frozen=True)
class ProbeResult(_ReportSerialization):
    """Outcome of a randomized counterexample search for one relation.

    The most negative gap seen is `min_gap`; `argmin` holds the fully
    serialized instance that produced it, accepted by reevaluate_argmin.
    """

    name: str
    trials: int
    seed: int | None
    slack: float
    min_gap: float
    violation_found: bool
    argmin: dict
    caveat: str
    per_trial: tuple = ()
    extra: dict = field(default_factory=dict)
    semantics: str = "violation-search"

    _ITEM_FIELD = "per_trial"


# ---------------------------------------------------------------------------
# seeded samplers used inside checks (one generator per sample index)

def _rand_density(rng: np.random.Generator, dims, rank: int) -> DensityMatrix:
    dims = tuple(int(x) for x in dims)
    d = math.prod(dims)
    g = complex_gaussian(rng, (d, int(rank)))
    m = g @ g.conj().T
    return DensityMatrix(dims, m / float(np.trace(m).real))

def _rand_pure(rng: np.random.Generator, dims) -> PureState:
    dims = tuple(int(x) for x in dims)
    v = complex_gaussian(rng, (math.prod(dims),))
    return PureState(dims, v / np.linalg.norm(v))


# ---------------------------------------------------------------------------
# entropy identities and inequalities

def check_flagged_identity(samples: int = 100, dims=(2, 3, 4), members=(2, 3, 4),
                           seed: int = 0, tol: float = GAP_TOL) -> CheckReport:
    """S(sum_i p_i rho_i (x) |i><i|) = H(p) + sum_i p_i S(rho_i).

    Random mixed-state families over the given dimension and flag-count
    pools; the residual must vanish to working precision every time.
    """
    per = []
    worst = 0.0
    for k in range(samples):
        rng = np.random.default_rng([seed, k])
        m = int(rng.choice(members))
        d = int(rng.choice(dims))
        p = rng.dirichlet(np.ones(m))
        states = [_rand_density(rng, (d,), int(rng.integers(1, d + 1))) for _ in range(m)]
        lhs = von_neumann_entropy(flagged_state(p, states))
        rhs = shannon_entropy(p) + sum(
            float(w) * von_neumann_entropy(s) for w, s in zip(p, states)
        )
        resid = lhs - rhs
        worst = max(worst, abs(resid))
        per.append({"sample": k, "flags": m, "dim": d, "residual": float(resid)})
    return CheckReport(
        name="flagged-identity", semantics="identity", samples=samples, seed=seed,
        tol=tol, slack=None, min_gap=None, max_abs_residual=float(worst),
        passed=worst <= tol, per_sample=tuple(per),
    )


def check_strong_concavity(samples: int = 100, dims=(2, 3), members=(2, 3, 4),
                           seed: int = 0, tol: float = GAP_TOL) -> CheckReport:
    """Concavity family for mixtures of product states.

    Per sample, five gaps that must all be nonnegative:
      strong1      S(sum p rho_i (x) sigma_i) - sum p S(rho_i) - S(sum p sigma_i)
      strong2      the mirror image (entropies averaged on the second slot)
      concavity    S(sum p rho_i) - sum p S(rho_i)
      mix-upper    H(p) + sum p S(rho_i) - S(sum p rho_i)
      mix-pure     H(p) - S(sum p |phi_i><phi_i|)   (pure members only;
                   false for general mixed members, hence the restriction)
    strong1/strong2 sharpen concavity on product mixtures: the joint
    entropy dominates the averaged entropy of either slot plus the mixture
    entropy of the other (equality when the averaged slot is constant, or
    when the mixed slot's members are orthogonal flags).
    """
    per = []
    worst = math.inf
    for k in range(samples):
        rng = np.random.default_rng([seed, k])
        m = int(rng.choice(members))
        d1 = int(rng.choice(dims))
        d2 = int(rng.choice(dims))
        p = rng.dirichlet(np.ones(m))
        first = [_rand_density(rng, (d1,), int(rng.integers(1, d1 + 1))) for _ in range(m)]
        second = [_rand_density(rng, (d2,), int(rng.integers(1, d2 + 1))) for _ in range(m)]
        joint = DensityMatrix(
            (d1, d2),
            sum(float(w) * np.kron(a.mat, b.mat) for w, a, b in zip(p, first, second)),
        )
        mix1 = DensityMatrix((d1,), sum(float(w) * a.mat for w, a in zip(p, first)))
        mix2 = DensityMatrix((d2,), sum(float(w) * b.mat for w, b in zip(p, second)))
        s_joint = von_neumann_entropy(joint)
        avg1 = sum(float(w) * von_neumann_entropy(a) for w, a in zip(p, first))
        avg2 = sum(float(w) * von_neumann_entropy(b) for w, b in zip(p, second))
        pure = [_rand_pure(rng, (d2,)) for _ in range(m)]
        pure_mix = DensityMatrix(
            (d2,), sum(float(w) * np.outer(s.vec, s.vec.conj()) for w, s in zip(p, pure))
        )
        gaps = {
            "strong1": s_joint - avg1 - von_neumann_entropy(mix2),
            "strong2": s_joint - von_neumann_entropy(mix1) - avg2,
            "concavity": von_neumann_entropy(mix1) - avg1,
            "mix-upper": shannon_entropy(p) + avg1 - von_neumann_entropy(mix1),
            "mix-pure": shannon_entropy(p) - von_neumann_entropy(pure_mix),
        }
        low = min(gaps.values())
        worst = min(worst, low)
        entry = {"sample": k, "flags": m, "dims": [d1, d2], "gap": float(low)}
        entry.update({name: float(v) for name, v in gaps.items()})
        per.append(entry)
    return CheckReport(
        name="strong-concavity", semantics="inequality", samples=samples, seed=seed,
        tol=None, slack=tol, min_gap=float(worst), max_abs_residual=None,
        passed=worst >= -tol, per_sample=tuple(per),
    )


def ssa_gap(rho: DensityMatrix) -> float:
    """S(rho_12) + S(rho_23) - S(rho_123) - S(rho_2), nonnegative by SSA."""
    if len(rho.dims) != 3:
        raise ShapeError(f"need exactly 3 subsystems, got dims {rho.dims}")
    s123 = von_neumann_entropy(rho)
    s12 = von_neumann_entropy(partial_trace(rho, (0, 1)))
    s23 = von_neumann_entropy(partial_trace(rho, (1, 2)))
    s2 = von_neumann_entropy(partial_trace(rho, (1,)))
    return s12 + s23 - s123 - s2


def check_ssa(samples: int = 100, dims=(2, 2, 2), seed: int = 0,
              tol: float = GAP_TOL) -> CheckReport:
    """Strong subadditivity on tripartite reductions of random pure states.

    Each sample purifies a generic full-rank tripartite state (random
    four-party pure state, fourth subsystem as large as the first three
    combined).  A product family rho_12 (x) rho_3, where SSA is tight, is
    evaluated alongside and its |gap| recorded in extra.
    """
    dims = tuple(int(d) for d in dims)
    per = []
    worst = math.inf
    for k in range(samples):
        rng = np.random.default_rng([seed, k])
        psi = _rand_pure(rng, dims + (math.prod(dims),))
        gap = ssa_gap(reduced_state(psi, (0, 1, 2)))
        worst = min(worst, gap)
        per.append({"sample": k, "gap": float(gap)})
    equality = 0.0
    for k in range(10):
        rng = np.random.default_rng([seed, 10_000 + k])
        front = _rand_density(rng, dims[:2], int(rng.integers(1, dims[0] * dims[1] + 1)))
        back = _rand_density(rng, dims[2:], int(rng.integers(1, dims[2] + 1)))
        prod = DensityMatrix(dims, np.kron(front.mat, back.mat))
        equality = max(equality, abs(ssa_gap(prod)))
    return CheckReport(
        name="ssa", semantics="inequality", samples=samples, seed=seed,
        tol=None, slack=tol, min_gap=float(worst), max_abs_residual=None,
        passed=worst >= -tol and equality <= tol, per_sample=tuple(per),
        extra={"product_equality_residual": float(equality)},
    )


# ---------------------------------------------------------------------------
# doubled Schmidt family (four parties sharing one index pattern)

def _pair_eof(rho: DensityMatrix, warm: Sequence[Ensemble] = (),
              opts: EofOptions | None = None) -> tuple[float, bool]:
    """EoF of a two-subsystem state: closed form at qubit scale, else search."""
    if rho.dims == (2, 2):
        return eof_wootters_2q(rho), True
    return eof_minimize(rho, (0,), opts, warm_starts=warm).value, False


def check_case1(spec: Case1Spec, opts: EofOptions | None = None,
                tol: float = GAP_TOL, slack: float = 1e-3) -> CheckReport:
    """Identities and bounds for the doubled-Schmidt pure family.

    With the four parties grouped as pairs (A,A') vs (B,B'), the state's
    structure gives two exact conditional-entropy identities
        S(rho_AA') = S(rho_A)  + sum_a w_a S_E(row-conditional a)
        S(rho_AA') = S(rho_A') + sum_b w_b S_E(col-conditional b)
    and three inequalities that follow from them:
        S(rho_AA') >= S(rho_A)  + E_f(rho_A'B')
        S(rho_AA') >= S(rho_A') + E_f(rho_AB)
        S(rho_AA') >= E_f(rho_AB) + E_f(rho_A'B')
    E_f terms use the closed two-qubit form when applicable, otherwise the
    decomposition search warm-started from the conditional-state ensemble
    (whose average equals the identity's right side, so the computed gaps
    cannot go negative by more than the optimizer's own tolerance).
    """
    if opts is None:
        opts = EofOptions(restarts=8, seed=11)
    psi = case1_state(spec)
    rows = spec.row_weights
    cols = spec.col_weights
    s_aa = von_neumann_entropy(reduced_state(psi, (0, 2)))
    s_a = von_neumann_entropy(reduced_state(psi, (0,)))
    s_ap = von_neumann_entropy(reduced_state(psi, (2,)))

    cond_rows = [(float(w), case1_conditional(spec, a))
                 for a, w in enumerate(rows) if w > 1e-14]
    cond_cols = [(float(w), case1_conditional_col(spec, b))
                 for b, w in enumerate(cols) if w > 1e-14]
    avg_rows = sum(w * von_neumann_entropy(reduced_state(c, (0,))) for w, c in cond_rows)
    avg_cols = sum(w * von_neumann_entropy(reduced_state(c, (0,))) for w, c in cond_cols)
    medium = s_aa - s_a - avg_rows
    medium2 = s_aa - s_ap - avg_cols

    ens_apbp = Ensemble(np.array([w for w, _ in cond_rows]),
                        tuple(c for _, c in cond_rows))
    ens_ab = Ensemble(np.array([w for w, _ in cond_cols]),
                      tuple(c for _, c in cond_cols))
    ef_apbp, exact_ap = _pair_eof(reduced_state(psi, (2, 3)), [ens_apbp], opts)
    ef_ab, exact_ab = _pair_eof(reduced_state(psi, (0, 1)), [ens_ab], opts)

    parts = [
        {"part": "row-conditional-identity", "kind": "identity", "value": float(medium)},
        {"part": "col-conditional-identity", "kind": "identity", "value": float(medium2)},
        {"part": "marginal-plus-eof", "kind": "inequality",
         "value": float(s_aa - s_a - ef_apbp)},
        {"part": "eof-plus-marginal", "kind": "inequality",
         "value": float(s_aa - s_ap - ef_ab)},
        {"part": "eof-superadditivity", "kind": "inequality",
         "value": float(s_aa - ef_ab - ef_apbp)},
    ]
    resid = max(abs(p["value"]) for p in parts if p["kind"] == "identity")
    gap = min(p["value"] for p in parts if p["kind"] == "inequality")
    return CheckReport(
        name="case1", semantics="mixed", samples=1, seed=None,
        tol=tol, slack=slack, min_gap=float(gap), max_abs_residual=float(resid),
        passed=resid <= tol and gap >= -slack, per_sample=tuple(parts),
        extra={
            "shape": [int(x) for x in spec.weights.shape],
            "entropy_pair": float(s_aa), "entropy_a": float(s_a),
            "entropy_a_prime": float(s_ap),
            "eof_ab": float(ef_ab), "eof_a_prime_b_prime": float(ef_apbp),
            "closed_form": [bool(exact_ab), bool(exact_ap)],
        },
    )


def case1_suite(samples: int = 20, shapes=((2, 2), (2, 3), (3, 2), (3, 3)),
                seed: int = 0, tol: float = GAP_TOL, slack: float = 1e-3,
                opts: EofOptions | None = None) -> CheckReport:
    """check_case1 over seeded weight matrices, plus two exact landmarks.

    Sample 0 is the uniform 2x2 matrix (a product of two Bell pairs, every
    quantity known exactly); sample 1 is diagonal (classically correlated,
    both EoF terms zero).  The rest draw Dirichlet weight matrices over the
    allowed shapes.
    """
    shapes = tuple(tuple(int(x) for x in s) for s in shapes)
    specs: list[Case1Spec] = [
        Case1Spec(np.full((2, 2), 0.25)),
        Case1Spec(np.diag([0.5, 0.5])),
    ]
    for k in range(max(samples - len(specs), 0)):
        rng = np.random.default_rng([seed, k])
        r, c = shapes[int(rng.integers(len(shapes)))]
        specs.append(Case1Spec(rng.dirichlet(np.ones(r * c)).reshape(r, c)))
    specs = specs[:samples]

    per = []
    gap = math.inf
    resid = 0.0
    for k, spec in enumerate(specs):
        rep = check_case1(spec, opts=opts, tol=tol, slack=slack)
        gap = min(gap, rep.min_gap)
        resid = max(resid, rep.max_abs_residual)
        per.append({
            "sample": k, "shape": rep.extra["shape"], "min_gap": rep.min_gap,
            "max_abs_residual": rep.max_abs_residual, "passed": rep.passed,
        })
    return CheckReport(
        name="case1-suite", semantics="mixed", samples=len(specs), seed=seed,
        tol=tol, slack=slack, min_gap=float(gap), max_abs_residual=float(resid),
        passed=all(p["passed"] for p in per), per_sample=tuple(per),
    )


# ---------------------------------------------------------------------------
# locally flagged mixtures: member-level bounds and additivity

@dataclass(frozen=True)
class FactorEig:
    """Pinned eigendecomposition of a two-subsystem state.

    The basis matters when the spectrum is degenerate: the structured
    member bounds below rely on eigenvectors with disjoint local supports,
    and a generic eigensolver may rotate inside a degenerate eigenspace.
    Carrying weights and vectors explicitly keeps the intended basis.
    """

    dims: tuple[int, int]
    weights: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 2 or min(dims) < 1:
            raise ShapeError(f"need two subsystem dims, got {self.dims!r}")
        w = np.asarray(self.weights, dtype=float).reshape(-1).copy()
        v = as_cmatrix(self.vectors).copy()
        d = dims[0] * dims[1]
        if w.size == 0:
            raise ValueError("empty eigendecomposition")
        if v.shape != (d, w.size):
            raise ShapeError(f"vectors shape {v.shape}, expected {(d, w.size)}")
        if float(w.min()) <= 0.0:
            raise ValueError("weights must be strictly positive")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise NormalizationError(f"weights sum to {float(w.sum())!r}")
        gram = v.conj().T @ v
        if float(np.abs(gram - np.eye(w.size)).max()) > 1e-9:
            raise ValueError("vectors are not orthonormal")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    @property
    def count(self) -> int:
        return int(self.weights.size)

    def state(self) -> DensityMatrix:
        m = (self.vectors * self.weights) @ self.vectors.conj().T
        return DensityMatrix(self.dims, m)

    def left_flags(self) -> np.ndarray:
        """(count, d_left, d_left) stack of left reductions of each eigenvector."""
        da, db = self.dims
        x = self.vectors.T.reshape(self.count, da, db)
        return np.einsum("nab,ncb->nac", x, x.conj())


def factor_eig_from_density(rho: DensityMatrix) -> FactorEig:
    if len(rho.dims) != 2:
        raise ShapeError(f"need a two-subsystem state, got dims {rho.dims}")
    lam, vecs = support_decomposition(rho)
    return FactorEig(rho.dims, lam / float(lam.sum()), vecs)


def factor_eig_from_case2(spec: Case2Spec) -> FactorEig:
    """Eigendecomposition straight from the blocks, preserving the block basis."""
    keep = [b for b in spec.blocks if b.weight > 1e-12]
    w = np.array([b.weight for b in keep])
    v = np.column_stack([b.vector(spec.d_a, spec.d_b) for b in keep])
    return FactorEig((spec.d_a, spec.d_b), w / float(w.sum()), v)


def as_factor_eig(obj) -> FactorEig:
    if isinstance(obj, FactorEig):
        return obj
    if isinstance(obj, Case2Spec):
        return factor_eig_from_case2(obj)
    if isinstance(obj, DensityMatrix):
        return factor_eig_from_density(obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a factor eigendecomposition")


def factor_eig_to_payload(fe: FactorEig) -> dict:
    return {
        "dims": [int(d) for d in fe.dims],
        "weights": [float(w) for w in fe.weights],
        "vectors": _complex_to_pairs(fe.vectors.reshape(-1)),
    }


def payload_to_factor_eig(payload: dict) -> FactorEig:
    dims = tuple(int(d) for d in payload["dims"])
    w = np.asarray(payload["weights"], dtype=float)
    v = _pairs_to_complex(payload["vectors"]).reshape(dims[0] * dims[1], w.size)
    return FactorEig(dims, w, v)


def product_decomposition_members(fa: FactorEig, fb: FactorEig, iso) -> list[dict]:
    """Member-level data for a decomposition of state(fa) (x) state(fb).

    The isometry's columns act on the product eigenbasis, first factor
    major: column J*fb.count + K multiplies sqrt(w_J w_K) |J>|K>.  Members
    with negligible probability are dropped (their original row index is
    kept in "index").  Each entry carries, for the member psi_i on the
    four parties (A, B, A', B'):

      gap_member     S(rho_AA') - sum_K w_K S(A-part given flag K, normalized)
                     - S(rho_A'), the flag-averaged pair bound whose
                     probability average upper-bounds both pair EoFs
      gap_question1  S(rho_AA') minus both flag-split entropy sums taken
                     literally on the subnormalized flag components
      gap_question2  S(rho_AA') + S(flag/flag mixture) - S(A/flag mixture)
                     - S(flag/A' mixture), an SSA-shaped comparison of the
                     three trace-one flagged operators (terms in entry)
    """
    iso = check_isometry(iso)
    nj, nk = fa.count, fb.count
    if iso.shape[1] != nj * nk:
        raise ShapeError(f"isometry has {iso.shape[1]} columns, expected {nj * nk}")
    lj, lk = fa.weights, fb.weights
    sig_j = fa.left_flags()
    sig_k = fb.left_flags()
    da, db = fa.dims
    dap, dbp = fb.dims
    sqrt_l = np.sqrt(np.outer(lj, lk))
    sqrt_lj = np.sqrt(lj)
    sqrt_lk = np.sqrt(lk)

    out = []
    for i in range(iso.shape[0]):
        u = iso[i].reshape(nj, nk)
        amp = u * sqrt_l
        p = float((np.abs(amp) ** 2).sum())
        if p <= 1e-14:
            continue
        root_p = math.sqrt(p)
        mat = fa.vectors @ (amp / root_p) @ fb.vectors.T
        psi = PureState((da, db, dap, dbp), mat.reshape(-1))
        s_pair = von_neumann_entropy(reduced_state(psi, (0, 2)))
        s_ap = von_neumann_entropy(reduced_state(psi, (2,)))

        # flag-resolved components: right_ops[K] is the A-reduction of the
        # (subnormalized) piece of psi lying over the second factor's flag K,
        # left_ops[J] the A'-reduction over the first factor's flag J
        right_ops = np.empty((nk, da, da), dtype=np.complex128)
        for k in range(nk):
            x = (fa.vectors @ (u[:, k] * sqrt_lj) / root_p).reshape(da, db)
            right_ops[k] = x @ x.conj().T
        left_ops = np.empty((nj, dap, dap), dtype=np.complex128)
        for j in range(nj):
            x = (fb.vectors @ (u[j, :] * sqrt_lk) / root_p).reshape(dap, dbp)
            left_ops[j] = x @ x.conj().T
        t_right = np.einsum("kaa->k", right_ops).real
        t_left = np.einsum("jaa->j", left_ops).real
        w_right = lk * t_right
        w_left = lj * t_left

        s_hat = 0.0
        for k in range(nk):
            if t_right[k] > 1e-14:
                vals = np.linalg.eigvalsh(right_ops[k]) / t_right[k]
                s_hat += float(w_right[k]) * spectral_entropy(np.clip(vals, 0.0, None))
        gap_member = s_pair - s_hat - s_ap

        lit_right = sum(
            float(lk[k]) * spectral_entropy(np.clip(np.linalg.eigvalsh(right_ops[k]), 0.0, None))
            for k in range(nk)
        )
        lit_left = sum(
            float(lj[j]) * spectral_entropy(np.clip(np.linalg.eigvalsh(left_ops[j]), 0.0, None))
            for j in range(nj)
        )
        gap_q1 = s_pair - lit_right - lit_left

        nu = (np.abs(u) ** 2) * np.outer(lj, lk) / p
        op_a_flag = np.einsum("k,kab,kcd->acbd", lk, right_ops, sig_k)
        op_flag_ap = np.einsum("j,jab,jcd->acbd", lj, sig_j, left_ops)
        op_flag_flag = np.einsum("jk,jab,kcd->acbd", nu, sig_j, sig_k)
        daa = da * dap
        term1 = spectral_entropy(np.clip(
            np.linalg.eigvalsh(op_a_flag.reshape(daa, daa)), 0.0, None))
        term2 = spectral_entropy(np.clip(
            np.linalg.eigvalsh(op_flag_ap.reshape(daa, daa)), 0.0, None))
        term3 = spectral_entropy(np.clip(
            np.linalg.eigvalsh(op_flag_flag.reshape(daa, daa)), 0.0, None))
        gap_q2 = s_pair + term3 - term1 - term2

        out.append({
            "index": i, "p": float(p),
            "entropy_pair": float(s_pair), "entropy_a_prime": float(s_ap),
            "gap_member": float(gap_member),
            "gap_question1": float(gap_q1),
            "gap_question2": float(gap_q2),
            "term_a_flag": float(term1), "term_flag_a_prime": float(term2),
            "term_flag_flag": float(term3),
            "flag_weight_sum": float(w_right.sum()),
            "flag_weight_sum_left": float(w_left.sum()),
        })
    return out


def check_case2(spec_a: Case2Spec, spec_b: Case2Spec, opts: EofOptions | None = None,
                decomposition_samples: int = 20, members: int = 8,
                member_slack: float = 2e-3, slack: float = 2e-2,
                seed: int = 0, additivity: bool = True) -> CheckReport:
    """Member bounds and EoF additivity for locally flagged mixtures.

    Part one samples random decompositions of the product state and checks
    the flag-averaged pair bound (gap_member) on every member; for this
    family the bound is an exact consequence of strong concavity, so gaps
    may only dip below zero by optimizer-free numerical noise (member_slack
    is generous).  Part two compares the searched product EoF against the
    sum of the factor EoFs, each factor warm-started from its block
    ensemble, which is exactly optimal for this family.
    """
    fa = factor_eig_from_case2(spec_a)
    fb = factor_eig_from_case2(spec_b)
    per = []
    min_member = math.inf
    weight_err = 0.0
    n = fa.count * fb.count
    for t in range(decomposition_samples):
        iso = random_isometry(max(int(members), n), n, [seed, t])
        mem = product_decomposition_members(fa, fb, iso)
        gaps = [d["gap_member"] for d in mem]
        werr = max(abs(d["flag_weight_sum"] - 1.0) for d in mem)
        weight_err = max(weight_err, werr)
        min_member = min(min_member, min(gaps))
        per.append({"sample": t, "members": len(mem), "min_gap": float(min(gaps)),
                    "weight_sum_error": float(werr)})

    extra = {
        "member_slack": float(member_slack),
        "flag_weight_sum_error": float(weight_err),
        "block_eof": [
            float(ensemble_average_entanglement(_block_ensemble(fa), (0,))),
            float(ensemble_average_entanglement(_block_ensemble(fb), (0,))),
        ],
    }
    passed = min_member >= -member_slack and weight_err <= GAP_TOL
    residual = None
    if additivity:
        if opts is None:
            opts = EofOptions(restarts=6, seed=5)
        factor_opts = EofOptions(restarts=4, seed=opts.seed)
        ens_a = _block_ensemble(fa)
        ens_b = _block_ensemble(fb)
        ef_a, _ = _pair_eof(fa.state(), [ens_a], factor_opts)
        ef_b, _ = _pair_eof(fb.state(), [ens_b], factor_opts)
        est = eof_minimize(tensor(fa.state(), fb.state()), (0, 2), opts,
                           warm_starts=[product_ensemble(ens_a, ens_b)])
        residual = est.value - (ef_a + ef_b)
        extra.update({
            "factor_eof": [float(ef_a), float(ef_b)],
            "product_eof": float(est.value),
            "additivity_residual": float(residual),
        })
        passed = passed and abs(residual) <= slack
    return CheckReport(
        name="case2", semantics="mixed", samples=decomposition_samples, seed=seed,
        tol=slack, slack=member_slack, min_gap=float(min_member),
        max_abs_residual=None if residual is None else float(abs(residual)),
        passed=passed, per_sample=tuple(per), extra=extra,
    )


def _block_ensemble(fe: FactorEig) -> Ensemble:
    states = tuple(PureState(fe.dims, fe.vectors[:, j]) for j in range(fe.count))
    return Ensemble(np.asarray(fe.weights, dtype=float), states)


def check_weak_additivity(pairs: int = 10, seed: int = 0, slack: float = 2e-3,
                          opts: EofOptions | None = None,
                          factor_opts: EofOptions | None = None,
                          dims=(2, 2), rank: int = 2) -> CheckReport:
    """E_f(rho1 (x) rho2) never exceeds E_f(rho1) + E_f(rho2) numerically.

    The product of optimal factor decompositions is itself a decomposition
    of the product, so the searched value must land at or below the sum;
    the check warm-starts from exactly that product and flags gaps below
    -slack.  A product value clearly *below* the sum would be evidence
    against additivity itself; the largest such surplus is reported.
    """
    dims = tuple(int(d) for d in dims)
    if opts is None:
        opts = EofOptions(restarts=4, seed=21)
    if factor_opts is None:
        factor_opts = EofOptions(restarts=6, seed=22)
    per = []
    worst = math.inf
    surplus = 0.0
    for k in range(pairs):
        rng = np.random.default_rng([seed, k])
        rho_a = _rand_density(rng, dims, rank)
        rho_b = _rand_density(rng, dims, rank)
        ef_a, _ = _pair_eof(rho_a, (), factor_opts)
        ef_b, _ = _pair_eof(rho_b, (), factor_opts)
        est_a = eof_minimize(rho_a, (0,), factor_opts)
        est_b = eof_minimize(rho_b, (0,), factor_opts)
        warm = product_ensemble(est_a.best_ensemble, est_b.best_ensemble)
        est = eof_minimize(tensor(rho_a, rho_b), (0, 2), opts, warm_starts=[warm])
        gap = ef_a + ef_b - est.value
        worst = min(worst, gap)
        surplus = max(surplus, gap)
        per.append({"sample": k, "eof_a": float(ef_a), "eof_b": float(ef_b),
                    "eof_product": float(est.value), "gap": float(gap)})
    return CheckReport(
        name="weak-additivity", semantics="inequality", samples=pairs, seed=seed,
        tol=None, slack=slack, min_gap=float(worst), max_abs_residual=None,
        passed=worst >= -slack, per_sample=tuple(per),
        extra={"max_gap": float(surplus)},
    )


# ---------------------------------------------------------------------------
# counterexample searches

def pair_superadditivity_gap(psi: PureState, opts: EofOptions | None = None):
    """S(rho_AA') - E_f(rho_AB) - E_f(rho_A'B') for a four-party pure state.

    Parties are ordered (A, B, A', B').  Returns (gap, detail); detail's
    exact_terms says whether both EoF terms used the closed two-qubit form
    (otherwise they are upper bounds and the gap a lower bound).
    """
    if len(psi.dims) != 4:
        raise ShapeError(f"need four subsystems, got dims {psi.dims}")
    s_pair = von_neumann_entropy(reduced_state(psi, (0, 2)))
    ef_ab, exact1 = _pair_eof(reduced_state(psi, (0, 1)), (), opts)
    ef_apbp, exact2 = _pair_eof(reduced_state(psi, (2, 3)), (), opts)
    gap = s_pair - ef_ab - ef_apbp
    detail = {
        "entropy_pair": float(s_pair), "eof_ab": float(ef_ab),
        "eof_a_prime_b_prime": float(ef_apbp), "exact_terms": bool(exact1 and exact2),
    }
    return float(gap), detail


def superadditivity_probe(source: str = "random", trials: int = 100, seed: int = 0,
                          slack: float = 1e-6, phi: float = -1.0,
                          opts: EofOptions | None = None) -> ProbeResult:
    """Search for pair-entropy vs EoF-sum violations over pure four-party states.

    Sources: "random" draws Haar-like two-pair pure states, "case1" draws
    doubled-Schmidt states from Dirichlet weights (where the relation is a
    theorem), "werner" walks decomposition members of the two-pair view of
    the d = 4 collective-symmetry state at flip expectation `phi`.
    """
    if source not in ("random", "case1", "werner"):
        raise ValueError(f"unknown source {source!r}")
    rho_w = werner_two_pair(phi) if source == "werner" else None
    rank_w = int(support_decomposition(rho_w)[0].size) if rho_w is not None else 0
    per = []
    best_gap = math.inf
    argmin: dict = {}
    exact_all = True
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        if source == "random":
            candidates = [_rand_pure(rng, (2, 2, 2, 2))]
        elif source == "case1":
            w = rng.dirichlet(np.ones(4)).reshape(2, 2)
            candidates = [case1_state(Case1Spec(w))]
        else:
            m = int(rng.integers(rank_w, 2 * rank_w + 1))
            ens = hjw_ensemble(rho_w, random_isometry(m, rank_w, rng))
            candidates = [s for _, s in ens]
        gaps = []
        details = []
        for c in candidates:
            g, d = pair_superadditivity_gap(c, opts)
            gaps.append(g)
            details.append(d)
            exact_all = exact_all and d["exact_terms"]
        idx = int(np.argmin(gaps))
        per.append({"trial": t, "gap": float(gaps[idx]), "members": len(candidates)})
        if gaps[idx] < best_gap:
            best_gap = float(gaps[idx])
            argmin = {
                "relation": "superadditivity", "source": source, "trial": t,
                "member": idx, "gap": best_gap,
                "state": state_to_payload(candidates[idx]),
                "detail": details[idx],
            }
    extra = {"source": source, "exact_terms": bool(exact_all)}
    if source == "werner":
        extra["phi"] = float(phi)
    return ProbeResult(
        name="superadditivity", trials=trials, seed=seed, slack=float(slack),
        min_gap=float(best_gap), violation_found=best_gap < -slack,
        argmin=argmin, caveat=UPPER_BOUND_CAVEAT, per_trial=tuple(per), extra=extra,
    )


def _question_probe(name: str, key: str, factor_a, factor_b, trials: int,
                    members: int, seed: int, slack: float, dims, rank: int,
                    track_implication: bool) -> ProbeResult:
    fixed_a = None if factor_a is None else as_factor_eig(factor_a)
    fixed_b = None if factor_b is None else as_factor_eig(factor_b)
    per = []
    best_gap = math.inf
    argmin: dict = {}
    implication_failures = 0
    min_other = math.inf
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        fa = fixed_a if fixed_a is not None else factor_eig_from_density(
            _rand_density(rng, dims, rank))
        fb = fixed_b if fixed_b is not None else factor_eig_from_density(
            _rand_density(rng, dims, rank))
        n = fa.count * fb.count
        m = max(int(members), n)
        iso = random_isometry(m, n, rng)
        mem = product_decomposition_members(fa, fb, iso)
        gaps = [d[key] for d in mem]
        at = int(np.argmin(gaps))
        per.append({"trial": t, "gap": float(gaps[at]), "member": mem[at]["index"],
                    "members": len(mem)})
        if track_implication:
            for d in mem:
                min_other = min(min_other, d["gap_question1"])
                if d["gap_question2"] >= -GAP_TOL and d["gap_question1"] < -GAP_TOL:
                    implication_failures += 1
        if gaps[at] < best_gap:
            best_gap = float(gaps[at])
            argmin = {
                "relation": name, "trial": t, "member": mem[at]["index"],
                "gap": best_gap,
                "factor_a": factor_eig_to_payload(fa),
                "factor_b": factor_eig_to_payload(fb),
                "isometry": {"shape": [int(m), int(n)],
                             "data": _complex_to_pairs(iso.reshape(-1))},
            }
    extra = {
        "members": int(members), "dims": [int(d) for d in dims], "rank": int(rank),
        "fixed_factors": [fixed_a is not None, fixed_b is not None],
    }
    if track_implication:
        extra["implication_failures"] = int(implication_failures)
        extra["min_gap_question1"] = float(min_other)
    return ProbeResult(
        name=name, trials=trials, seed=seed, slack=float(slack),
        min_gap=float(best_gap), violation_found=best_gap < -slack,
        argmin=argmin, caveat=SEARCH_CAVEAT, per_trial=tuple(per), extra=extra,
    )


def probe_question1(factor_a=None, factor_b=None, trials: int = 100,
                    members: int = 8, seed: int = 0, slack: float = 1e-6,
                    dims=(2, 2), rank: int = 2) -> ProbeResult:
    """Can the pair entropy dip below the literal flag-split entropy sums?

    For every sampled decomposition member, compares S(rho_AA') against the
    two flag-resolved entropy sums evaluated literally on the subnormalized
    flag components (gap_question1 of product_decomposition_members).  A
    negative gap answers the corresponding strengthening of pair
    superadditivity in the negative for decomposition members.  Factors
    default to fresh random states per trial; pass states, flagged-mixture
    specs, or FactorEig values to pin them.
    """
    return _question_probe("question1", "gap_question1", factor_a, factor_b,
                           trials, members, seed, slack, dims, rank, False)


def probe_question2(factor_a=None, factor_b=None, trials: int = 100,
                    members: int = 8, seed: int = 0, slack: float = 1e-6,
                    dims=(2, 2), rank: int = 2) -> ProbeResult:
    """SSA-shaped comparison of the three flagged operators per member.

    Checks S(rho_AA') + S(flag/flag) >= S(A/flag) + S(flag/A') on every
    sampled member (gap_question2).  This statement implies the flag-split
    bound of probe_question1, so each run also counts members where the
    implication would fail numerically (extra["implication_failures"],
    expected zero).
    """
    return _question_probe("question2", "gap_question2", factor_a, factor_b,
                           trials, members, seed, slack, dims, rank, True)


def reevaluate_argmin(payload: dict, opts: EofOptions | None = None) -> float:
    """Recompute the gap of a serialized probe argmin from scratch."""
    relation = payload["relation"]
    if relation == "superadditivity":
        psi = payload_to_state(payload["state"])
        if not isinstance(psi, PureState):
            raise TypeError("superadditivity argmin must embed a pure state")
        gap, _ = pair_superadditivity_gap(psi, opts)
        return gap
    if relation in ("question1", "question2"):
        fa = payload_to_factor_eig(payload["factor_a"])
        fb = payload_to_factor_eig(payload["factor_b"])
        shape = payload["isometry"]["shape"]
        iso = _pairs_to_complex(payload["isometry"]["data"]).reshape(shape)
        idx = int(payload["member"])
        for d in product_decomposition_members(fa, fb, iso):
            if d["index"] == idx:
                return float(d["gap_" + relation])
        raise ValueError(f"member {idx} has negligible weight on re-evaluation")
    raise ValueError(f"unknown relation {relation!r}")


# ---------------------------------------------------------------------------
# four-way consistency chain for products of two-qubit states

def _entropy_batch(rhos: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh((rhos + np.conj(np.swapaxes(rhos, -1, -2))) / 2)
    w = np.clip(w, 0.0, None)
    mask = w > EIG_FLOOR
    return -np.where(mask, w * np.log2(np.where(mask, w, 1.0)), 0.0).sum(axis=-1)


def _binary_entropy_batch(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    out = np.zeros_like(x)
    for part in (x, 1.0 - x):
        mask = part > EIG_FLOOR
        out -= np.where(mask, part * np.log2(np.where(mask, part, 1.0)), 0.0)
    return out


def _eof_wootters_batch(rhos: np.ndarray) -> np.ndarray:
    """Closed-form two-qubit EoF for a (N, 4, 4) stack of density matrices."""
    flipped = _SIGMA_YY @ np.conj(rhos) @ _SIGMA_YY
    ev = np.linalg.eigvals(rhos @ flipped)
    sq = np.sqrt(np.clip(ev.real, 0.0, None))
    sq.sort(axis=-1)
    conc = np.clip(2.0 * sq[..., -1] - sq.sum(axis=-1), 0.0, 1.0)
    return _binary_entropy_batch((1.0 + np.sqrt(np.clip(1.0 - conc * conc, 0.0, None))) / 2.0)


def _chain_cost(left_eof: bool, right_eof: bool) -> Callable[[np.ndarray], np.ndarray]:
    def cost(vectors: np.ndarray) -> np.ndarray:
        t = vectors.reshape(-1, 2, 2, 2, 2)
        c = np.conj(t)
        if left_eof:
            rho = np.einsum("nabcd,nefcd->nabef", t, c).reshape(-1, 4, 4)
            left = _eof_wootters_batch(rho)
        else:
            left = _entropy_batch(np.einsum("nabcd,nebcd->nae", t, c))
        if right_eof:
            rho = np.einsum("nabcd,nabef->ncdef", t, c).reshape(-1, 4, 4)
            right = _eof_wootters_batch(rho)
        else:
            right = _entropy_batch(np.einsum("nabcd,nabed->nce", t, c))
        return left + right
    return cost


def relation_chain_check(rho_a: DensityMatrix, rho_b: DensityMatrix,
                         opts: EofOptions | None = None,
                         factor_opts: EofOptions | None = None,
                         slack: float = 5e-2) -> CheckReport:
    """Four decomposition-averaged costs squeezed to E_f(rho_a) + E_f(rho_b).

    Over decompositions of the product across the pair cut, minimize the
    probability-averaged member costs
        S_A + S_A',  S_A + E_f(A'B'),  E_f(AB) + S_A',  E_f(AB) + E_f(A'B')
    (single-party entropies of the member, closed-form EoFs of its pair
    reductions).  Member-wise each cost dominates the next, and the bottom
    is squeezed from below by convexity while a product of optimal factor
    decompositions achieves the top at the factor-EoF sum - so all four
    minima equal E_f(rho_a) + E_f(rho_b).  Agreement within slack is a
    sharp end-to-end consistency test of the decomposition search.
    """
    if rho_a.dims != (2, 2) or rho_b.dims != (2, 2):
        raise ShapeError("chain check needs two-qubit factors")
    if factor_opts is None:
        factor_opts = EofOptions(restarts=6, ensemble_size=4, seed=2)
    if opts is None:
        opts = EofOptions(restarts=4, seed=6)
    ef_a = eof_wootters_2q(rho_a)
    ef_b = eof_wootters_2q(rho_b)
    reference = ef_a + ef_b
    est_a = eof_minimize(rho_a, (0,), factor_opts)
    est_b = eof_minimize(rho_b, (0,), factor_opts)
    warm = [product_ensemble(est_a.best_ensemble, est_b.best_ensemble)]
    tau = tensor(rho_a, rho_b)
    parts = []
    worst = 0.0
    for label, left_eof, right_eof in (
        ("entropy+entropy", False, False),
        ("entropy+eof", False, True),
        ("eof+entropy", True, False),
        ("eof+eof", True, True),
    ):
        est = minimize_over_decompositions(tau, (0, 2), opts,
                                           member_cost=_chain_cost(left_eof, right_eof),
                                           warm_starts=warm)
        resid = est.value - reference
        worst = max(worst, abs(resid))
        parts.append({"part": label, "value": float(est.value),
                      "residual": float(resid)})
    return CheckReport(
        name="relation-chain", semantics="consistency", samples=len(parts),
        seed=opts.seed, tol=slack, slack=None, min_gap=None,
        max_abs_residual=float(worst), passed=worst <= slack,
        per_sample=tuple(parts),
        extra={"reference": float(reference), "eof_a": float(ef_a),
               "eof_b": float(ef_b),
               "factor_estimates": [float(est_a.value), float(est_b.value)]},
    )
