"""Orthonormality-constrained gradient descent for information preserving projections.

The objective is ``J(A) = ||D_full - D(A)||_F**2`` where ``D(A)`` holds the
symmetrized plug-in KL divergences between the KDEs of the projected sets
``A @ X_i``.  Bandwidths are re-selected in the projected space on every
evaluation.
"""

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import DatasetCollection
from .density import as_points, kde_log_values, parse_bandwidth_rule, select_bandwidth
from .divergence import symmetrize

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-8
GRAD_MODES = ("analytic_frozen_bandwidth", "finite_difference")
_GRAD_ALIASES = {"analytic": "analytic_frozen_bandwidth", "fd": "finite_difference"}
MAX_BACKTRACKS = 20


def orthonormality_residual(A):
    A = np.asarray(A, dtype=float)
    return float(np.linalg.norm(A @ A.T - np.eye(A.shape[0])))


@dataclass(frozen=True)
class ProjectionMatrix:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.array(self.values, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        if A.ndim != 2 or A.shape[0] > A.shape[1]:
            raise ValueError(f"projection must be m x d with m <= d, got shape {A.shape}")
        res = orthonormality_residual(A)
        if res > ORTHONORMAL_TOL:
            raise ValueError(f"projection rows are not orthonormal (||AA^T - I||_F = {res:.3g})")
        A.setflags(write=False)
        object.__setattr__(self, "values", A)

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def to_dict(self):
        return {"m": self.m, "d": self.d, "values": self.values.ravel().tolist()}

    def to_json(self, **extra):
        doc = self.to_dict()
        doc.update(extra)
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(np.array(doc["values"], dtype=float).reshape(doc["m"], doc["d"]))


@dataclass(frozen=True)
class OptimizerConfig:
    m: int
    mu: float = 1e-3
    max_iters: int = 500
    tol: float = 1e-6
    seed: int = 0
    grad_mode: str = "analytic_frozen_bandwidth"
    fd_epsilon: float = 1e-5
    retraction_threshold: float = 1e-9
    bandwidth: object = "silverman"

    def __post_init__(self):
        mode = _GRAD_ALIASES.get(self.grad_mode, self.grad_mode)
        if mode not in GRAD_MODES:
            raise ValueError(f"unknown gradient mode {self.grad_mode!r}")
        object.__setattr__(self, "grad_mode", mode)
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        parse_bandwidth_rule(self.bandwidth)


@dataclass
class IterationRecord:
    iteration: int
    J: float
    J_per_pair: float
    step_size: float
    residual: float
    accepted: bool
    backtracks: int


@dataclass
class OptimizerTrace:
    records: list = field(default_factory=list)
    A: np.ndarray = None
    iterations: int = 0
    converged: bool = False
    reason: str = ""

    @property
    def accepted(self):
        return [r for r in self.records if r.accepted]

    @property
    def accepted_J(self):
        return np.array([r.J for r in self.accepted])

    @property
    def final_J(self):
        return self.accepted[-1].J

    @property
    def final_J_per_pair(self):
        return self.accepted[-1].J_per_pair

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "reason": self.reason,
            "final_J": self.final_J,
            "final_J_per_pair": self.final_J_per_pair,
            "A": {"m": self.A.shape[0], "d": self.A.shape[1], "values": self.A.ravel().tolist()},
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def random_orthonormal(m, d, seed):
    """Haar-distributed ``m x d`` matrix with orthonormal rows."""
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((d, m)))
    # sign fix makes the QR factor uniformly distributed
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    return ProjectionMatrix(Q.T)


def polar_retract(A):
    """Nearest matrix with orthonormal rows (the polar factor of ``A``)."""
    U, _, Vt = np.linalg.svd(A, full_matrices=False)
    return U @ Vt


def constrain_gradient(delta, A):
    """Remove the component of ``delta`` normal to the constraint ``A A^T = I``."""
    delta = np.asarray(delta, dtype=float)
    A = np.asarray(getattr(A, "values", A), dtype=float)
    if delta.shape != A.shape:
        raise ValueError(f"gradient shape {delta.shape} does not match A shape {A.shape}")
    return delta - 0.5 * (delta @ A.T + A @ delta.T) @ A


def _sets_of(collection):
    if isinstance(collection, DatasetCollection):
        return collection.point_sets
    return [as_points(x) for x in collection]


def _matrix(A):
    return np.asarray(getattr(A, "values", A), dtype=float)


def _full_values(D_full, n_sets):
    F = np.asarray(getattr(D_full, "values", D_full), dtype=float)
    if F.shape != (n_sets, n_sets):
        raise ValueError(f"D_full has shape {F.shape}, expected ({n_sets}, {n_sets})")
    return F


class _Evaluation:
    """Objective value at ``A`` plus what the analytic gradient needs."""

    def __init__(self, sets, A, F, bandwidth_rule, bandwidths=None):
        if A.shape[1] != sets[0].shape[0]:
            raise ValueError(f"A has {A.shape[1]} columns but the data has d={sets[0].shape[0]}")
        self.sets = sets
        self.A = A
        self.F = F
        self.Y = [A @ X for X in sets]
        if bandwidths is None:
            bandwidths = [select_bandwidth(Y, bandwidth_rule) for Y in self.Y]
        self.h = np.asarray(bandwidths, dtype=float)
        n_sets = len(sets)
        self.K = np.zeros((n_sets, n_sets))
        for i, Yi in enumerate(self.Y):
            logd = [kde_log_values(Yi, self.Y[k], self.h[k]) for k in range(n_sets)]
            for j in range(n_sets):
                if j != i:
                    self.K[i, j] = np.mean(logd[i] - logd[j])
        raw = self.K + self.K.T
        self.active = raw > 0
        np.fill_diagonal(self.active, False)
        self.D = symmetrize(self.K)
        self.J = float(np.sum((F - self.D) ** 2))

    def gradient(self):
        """Exact gradient of J with the bandwidths held fixed."""
        n_sets = len(self.sets)
        # dJ/dKL(i||j) for ordered pairs; both (i,j) and (j,i) cells of J depend on D_ij
        t = np.where(self.active, -4.0 * (self.F - self.D), 0.0)
        d = self.A.shape[1]
        S = np.zeros((d, d))
        for i in range(n_sets):
            P = self.sets[i]
            n_i = P.shape[1]
            PPt = P @ P.T
            for k in range(n_sets):
                coef = (t[i].sum() - t[i, i]) / n_i if k == i else -t[i, k] / n_i
                if coef == 0.0:
                    continue
                _, W = kde_log_values(self.Y[i], self.Y[k], self.h[k], return_weights=True)
                Q = self.sets[k]
                PWQ = P @ W @ Q.T
                # sum_ab W_ab (p_a - q_b)(p_a - q_b)^T, using row sums of W equal to one
                M = PPt + (Q * W.sum(axis=0)) @ Q.T - PWQ - PWQ.T
                S -= coef / self.h[k] ** 2 * M
        return self.A @ S


def objective(collection, A, D_full, bandwidth_rule="silverman", bandwidths=None):
    """Squared Frobenius mismatch between ``D_full`` and the projected KL matrix."""
    sets = _sets_of(collection)
    return _Evaluation(sets, _matrix(A), _full_values(D_full, len(sets)), bandwidth_rule, bandwidths).J


def per_pair(J, n_sets):
    return J / (n_sets * (n_sets - 1))


def gradient(collection, A, D_full, mode="analytic_frozen_bandwidth", bandwidth_rule="silverman",
             fd_epsilon=1e-5, bandwidths=None):
    """Unconstrained gradient of the objective with respect to ``A``.

    ``finite_difference`` re-selects bandwidths inside every perturbed
    evaluation unless ``bandwidths`` is given, in which case both modes use
    those fixed values.
    """
    mode = _GRAD_ALIASES.get(mode, mode)
    if mode not in GRAD_MODES:
        raise ValueError(f"unknown gradient mode {mode!r}")
    sets = _sets_of(collection)
    A = _matrix(A)
    F = _full_values(D_full, len(sets))
    if mode == "analytic_frozen_bandwidth":
        return _Evaluation(sets, A, F, bandwidth_rule, bandwidths).gradient()
    return _fd_gradient(sets, A, F, bandwidth_rule, fd_epsilon, bandwidths)


def _fd_gradient(sets, A, F, bandwidth_rule, eps, bandwidths):
    G = np.zeros_like(A)
    for idx in np.ndindex(*A.shape):
        Ap, Am = A.copy(), A.copy()
        Ap[idx] += eps
        Am[idx] -= eps
        Jp = _Evaluation(sets, Ap, F, bandwidth_rule, bandwidths).J
        Jm = _Evaluation(sets, Am, F, bandwidth_rule, bandwidths).J
        G[idx] = (Jp - Jm) / (2.0 * eps)
    return G


def optimize(collection, config, D_full, init=None):
    """Run constrained gradient descent from a random orthonormal start.

    Each proposal ``A - mu * grad`` is retracted onto the constraint set if
    its residual exceeds ``config.retraction_threshold`` and accepted only
    when ``J`` does not increase; otherwise ``mu`` is halved, at most 20
    times.  After an accepted step the step size doubles again, never
    exceeding ``config.mu``.

    Returns ``(ProjectionMatrix, OptimizerTrace)``.
    """
    sets = _sets_of(collection)
    n_sets = len(sets)
    d = sets[0].shape[0]
    if config.m > d:
        raise ValueError(f"m={config.m} exceeds data dimension d={d}")
    F = _full_values(D_full, n_sets)
    A = random_orthonormal(config.m, d, config.seed).values if init is None else _matrix(init).copy()

    ev = _Evaluation(sets, A, F, config.bandwidth)
    trace = OptimizerTrace()
    trace.records.append(
        IterationRecord(0, ev.J, per_pair(ev.J, n_sets), 0.0, orthonormality_residual(A), True, 0)
    )
    mu = config.mu
    for it in range(1, config.max_iters + 1):
        trace.iterations = it
        if config.grad_mode == "analytic_frozen_bandwidth":
            G = ev.gradient()
        else:
            G = _fd_gradient(sets, A, F, config.bandwidth, config.fd_epsilon, None)
        direction = constrain_gradient(G, A)
        if not np.any(direction):
            trace.converged, trace.reason = True, "zero_gradient"
            break
        accepted = None
        for bt in range(MAX_BACKTRACKS + 1):
            A_new = A - mu * direction
            if orthonormality_residual(A_new) > config.retraction_threshold:
                A_new = polar_retract(A_new)
            ev_new = _Evaluation(sets, A_new, F, config.bandwidth)
            ok = ev_new.J <= ev.J
            trace.records.append(
                IterationRecord(it, ev_new.J, per_pair(ev_new.J, n_sets), mu,
                                orthonormality_residual(A_new), ok, bt)
            )
            if ok:
                accepted = ev_new
                break
            if bt < MAX_BACKTRACKS:
                mu *= 0.5
        if accepted is None:
            trace.converged, trace.reason = True, "backtracking_exhausted"
            break
        rel = abs(ev.J - accepted.J) / max(ev.J, 1e-12)
        A, ev = accepted.A, accepted
        mu = min(2.0 * mu, config.mu)
        logger.debug("iter %d J=%.6g mu=%.3g rel=%.3g", it, ev.J, mu, rel)
        if rel < config.tol:
            trace.converged, trace.reason = True, "tolerance"
            break
    else:
        trace.reason = "max_iters"
    trace.A = A
    return ProjectionMatrix(A), trace


def optimize_restarts(collection, config, D_full, restarts=1):
    """Best of ``restarts`` independent runs (lowest final J); seeds derive from ``config.seed``."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if restarts == 1:
        return optimize(collection, config, D_full)
    best = None
    for child in np.random.SeedSequence(config.seed).spawn(restarts):
        seed = int(child.generate_state(1)[0])
        cfg = OptimizerConfig(**{**asdict(config), "seed": seed})
        result = optimize(collection, cfg, D_full)
        if best is None or result[1].final_J < best[1].final_J:
            best = result
    return best


@dataclass(frozen=True)
class ChannelScore:
    channel: str
    score: float
    loadings: tuple


def variable_selection_report(A, channels):
    """Rank channels by the norm of their loading vector (column of ``A``), scaled to max 1."""
    A = _matrix(A)
    channels = list(channels)
    if len(channels) != A.shape[1]:
        raise ValueError(f"{len(channels)} channel names for d={A.shape[1]}")
    norms = np.linalg.norm(A, axis=0)
    top = norms.max()
    scores = norms / top if top > 0 else norms
    order = sorted(range(len(channels)), key=lambda k: -scores[k])
    return [ChannelScore(channels[k], float(scores[k]), tuple(float(x) for x in A[:, k])) for k in order]
