"""First-order solver for one problem class: maximize a real linear
functional of a complex Hermitian matrix subject to linear trace
inequalities, a unit-diagonal equality, and positive semidefiniteness.

    maximize    Re tr(C S) + offset
    subject to  Re tr(B_k S) >= b_k      k = 1..m
                diag(S) = 1              (optional)
                S  PSD

The solver is an operator-splitting (ADMM) iteration alternating an affine
step (inequalities through slack variables, the unit diagonal by direct
assignment) with a Euclidean projection onto the PSD cone. Inequalities are
internally rescaled to unit Frobenius norm; all reported residuals are in
the caller's original units.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

logger = logging.getLogger(__name__)

_CHECK_EVERY = 10          # iterations between convergence checks
_RHO_ADAPT_EVERY = 50      # iterations between step-size adaptations
_DIVERGE_WINDOW = 100      # iterations over which 10x residual growth aborts
_STALL_WINDOW = 600        # iterations without progress on an infeasible plateau
_STALL_MIN_ITER = 1500


class SdpStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class SdpConfig:
    tol_primal: float = 1e-4
    tol_psd: float = 1e-6
    tol_eq: float = 1e-6
    max_iterations: int = 20000
    step_parameter: float = 1.0

    def __post_init__(self):
        if min(self.tol_primal, self.tol_psd, self.tol_eq) <= 0:
            raise ValueError("tolerances must be positive")
        if self.step_parameter <= 0:
            raise ValueError("step_parameter must be positive")


@dataclass
class SdpProblem:
    dim: int
    objective: np.ndarray                         # Hermitian C
    ineqs: list[tuple[np.ndarray, float]] = field(default_factory=list)
    unit_diagonal: bool = True
    offset: float = 0.0

    def __post_init__(self):
        self.objective = _require_hermitian(self.objective, "objective")
        if self.objective.shape != (self.dim, self.dim):
            raise ValueError("objective shape does not match dim")
        self.ineqs = [
            (_require_hermitian(b_mat, f"ineqs[{k}]"), float(bound))
            for k, (b_mat, bound) in enumerate(self.ineqs)
        ]
        for k, (b_mat, _) in enumerate(self.ineqs):
            if b_mat.shape != (self.dim, self.dim):
                raise ValueError(f"ineqs[{k}] shape does not match dim")


@dataclass
class SdpSolution:
    S: np.ndarray
    objective_value: float
    primal_residual: float
    iterations: int
    status: SdpStatus


def _require_hermitian(mat: np.ndarray, name: str, tol: float = 1e-9) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if not np.all(np.isfinite(mat.view(float))):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    if np.abs(mat - mat.conj().T).max(initial=0.0) > tol * scale:
        raise ValueError(f"{name} is not Hermitian within tolerance")
    return 0.5 * (mat + mat.conj().T)


def psd_project(h: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: eigendecompose and clip negative modes."""
    h = _require_hermitian(h, "psd_project input")
    eigvals, eigvecs = np.linalg.eigh(h)
    clipped = np.maximum(eigvals, 0.0)
    out = (eigvecs * clipped) @ eigvecs.conj().T
    return 0.5 * (out + out.conj().T)


def residuals(s: np.ndarray, problem: SdpProblem) -> tuple[float, float, float]:
    """(max inequality violation, max diagonal violation, min eigenvalue).

    Violations are reported as max(0, b_k - Re tr(B_k S)); the diagonal
    violation is 0 when the problem carries no unit-diagonal equality.
    """
    s = np.asarray(s, dtype=complex)
    max_ineq = 0.0
    for b_mat, bound in problem.ineqs:
        max_ineq = max(max_ineq, bound - float(np.real(np.trace(b_mat @ s))))
    max_ineq = max(0.0, max_ineq)
    max_diag = float(np.abs(np.diag(s) - 1.0).max()) if problem.unit_diagonal else 0.0
    min_eig = float(np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min())
    return max_ineq, max_diag, min_eig


def _inner(a_flat: np.ndarray, m: np.ndarray) -> np.ndarray:
    # Re <A_k, M> for Hermitian A_k, M, with A_k stacked as rows of a_flat.
    return np.real(a_flat @ m.conj().ravel())


def solve(
    problem: SdpProblem,
    cfg: SdpConfig | None = None,
    initial: np.ndarray | None = None,
) -> SdpSolution:
    """Run the splitting iteration until feasibility and stationarity.

    Converged solutions satisfy every inequality within ``tol_primal``, the
    diagonal within ``tol_eq``, and are PSD up to eigensolver roundoff. A
    warm start may be given through ``initial`` (the penalty continuation
    uses the previous lifted matrix). Infeasible problems terminate with
    MAX_ITER, either at the iteration cap or earlier once the violation has
    plateaued well above tolerance; residual growth by 10x over a trailing
    window reports DIVERGED. Non-finite iterates raise ArithmeticError.
    """
    cfg = cfg or SdpConfig()
    n = problem.dim
    m = len(problem.ineqs)
    free_diag = not problem.unit_diagonal

    # Original-units constraint data for residual checks.
    b_orig = np.array([bound for _, bound in problem.ineqs], dtype=float)
    b_orig_flat = (
        np.stack([mat.ravel() for mat, _ in problem.ineqs])
        if m
        else np.zeros((0, n * n), dtype=complex)
    )

    # Reduced constraints: with a fixed unit diagonal only the off-diagonal
    # part of each B_k is active and its diagonal folds into the bound.
    red_mats = []
    red_bounds = np.empty(m)
    for k, (b_mat, bound) in enumerate(problem.ineqs):
        mat = b_mat.copy()
        if problem.unit_diagonal:
            bound = bound - float(np.real(np.trace(b_mat)))
            np.fill_diagonal(mat, 0.0)
        norm = float(np.linalg.norm(mat))
        scale = norm if norm > 1e-14 else 1.0
        red_mats.append(mat / scale)
        red_bounds[k] = bound / scale
    b_flat = (
        np.stack([mat.ravel() for mat in red_mats])
        if m
        else np.zeros((0, n * n), dtype=complex)
    )
    if m:
        gram = np.real(b_flat @ b_flat.conj().T)
        chol = cho_factor(gram + np.eye(m))

    c_free = problem.objective.copy()
    if problem.unit_diagonal:
        np.fill_diagonal(c_free, 0.0)

    # State: Z is the PSD-side iterate (also the reported solution), w the
    # nonnegative slacks, (U, u) the scaled duals.
    if initial is not None:
        z = psd_project(initial)
    else:
        z = np.eye(n, dtype=complex)
    w = np.maximum(_inner(b_flat, z) - red_bounds, 0.0) if m else np.zeros(0)
    big_u = np.zeros((n, n), dtype=complex)
    u = np.zeros(m)
    rho = cfg.step_parameter * max(1.0, float(np.linalg.norm(c_free)))

    status = SdpStatus.MAX_ITER
    iterations = cfg.max_iterations
    resid_history: list[float] = []
    best_viol = np.inf
    best_viol_iter = 0
    z_prev = z.copy()
    w_prev = w.copy()

    for it in range(1, cfg.max_iterations + 1):
        # Affine step: tilt by the objective, then project onto the
        # equality-with-slack subspace; the diagonal is assigned directly.
        mat_m = z - big_u + c_free / rho
        if problem.unit_diagonal:
            np.fill_diagonal(mat_m, 0.0)
        tau = w - u
        if m:
            lam = cho_solve(chol, red_bounds + tau - _inner(b_flat, mat_m))
            s1 = mat_m + (lam @ b_flat).reshape(n, n)
            t1 = tau - lam
        else:
            s1 = mat_m
            t1 = tau
        if problem.unit_diagonal:
            np.fill_diagonal(s1, 1.0)

        # Cone step.
        z_new = psd_project(s1 + big_u)
        w_new = np.maximum(t1 + u, 0.0) if m else t1

        big_u += s1 - z_new
        u += t1 - w_new
        z_prev, z = z, z_new
        w_prev, w = w, w_new

        if not np.isfinite(z.view(float)).all():
            raise ArithmeticError("SDP iterate became non-finite")

        if it % _RHO_ADAPT_EVERY == 0:
            r_primal = np.sqrt(np.linalg.norm(s1 - z) ** 2 + np.linalg.norm(t1 - w) ** 2)
            r_dual = rho * np.sqrt(
                np.linalg.norm(z - z_prev) ** 2 + np.linalg.norm(w - w_prev) ** 2
            )
            if r_primal > 10.0 * r_dual and rho < 1e8:
                rho *= 2.0
                big_u /= 2.0
                u /= 2.0
            elif r_dual > 10.0 * r_primal and rho > 1e-8:
                rho /= 2.0
                big_u *= 2.0
                u *= 2.0

        if it % _CHECK_EVERY == 0 or it == cfg.max_iterations:
            viol_ineq = (
                max(0.0, float((b_orig - _inner(b_orig_flat, z)).max())) if m else 0.0
            )
            viol_diag = (
                float(np.abs(np.diag(z).real - 1.0).max())
                if problem.unit_diagonal
                else 0.0
            )
            change = float(np.linalg.norm(z - z_prev))
            consensus = float(np.linalg.norm(s1 - z))

            if (
                viol_ineq <= cfg.tol_primal
                and viol_diag <= cfg.tol_eq
                and change <= cfg.tol_primal
                and consensus <= cfg.tol_primal * max(1.0, float(np.linalg.norm(z)))
            ):
                status = SdpStatus.CONVERGED
                iterations = it
                break

            combined = max(viol_ineq, viol_diag) + consensus
            resid_history.append(combined)
            lag = _DIVERGE_WINDOW // _CHECK_EVERY
            if (
                len(resid_history) > lag
                and combined > 10.0 * resid_history[-lag - 1]
                and combined > 1e3 * cfg.tol_primal
            ):
                status = SdpStatus.DIVERGED
                iterations = it
                logger.warning("SDP diverged at iteration %d (residual %.3g)", it, combined)
                break

            if viol_ineq < best_viol * (1.0 - 5e-3):
                best_viol = viol_ineq
                best_viol_iter = it
            if (
                it >= _STALL_MIN_ITER
                and best_viol > 10.0 * cfg.tol_primal
                and it - best_viol_iter >= _STALL_WINDOW
            ):
                # Infeasible plateau: no point burning the full budget.
                iterations = it
                logger.debug("SDP stalled infeasible at iteration %d", it)
                break

    max_ineq, max_diag, _ = residuals(z, problem)
    objective_value = float(np.real(np.trace(problem.objective @ z))) + problem.offset
    return SdpSolution(
        S=z,
        objective_value=objective_value,
        primal_residual=max(max_ineq, max_diag),
        iterations=iterations,
        status=status,
    )
