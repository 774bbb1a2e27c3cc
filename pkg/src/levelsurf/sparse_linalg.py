"""Sparse symmetric linear algebra: PCG, ILU(0), Lanczos extremes.

Matrices are scipy CSR with both triangles stored.  The preconditioned
conjugate gradient follows the textbook recurrence with a relative
residual stopping rule; ILU(0) keeps the factor pattern identical to the
input pattern.  Extreme eigenvalues come from Lanczos with full
reorthogonalization — directly for the largest, via a sparse LU of the
slightly regularized matrix for the smallest, so that a singular matrix is
never factorized.  Effective condition numbers deflate a supplied kernel
vector and report lambda_max / lambda_2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "SolveStats",
    "CondEstimate",
    "ZeroPivotError",
    "EigNonConvergence",
    "pcg",
    "ilu0_factor",
    "ILU0Preconditioner",
    "eig_extreme",
    "effective_cond",
    "spd_cond",
    "build_reference_matrix",
]


class ZeroPivotError(RuntimeError):
    """ILU(0) hit a zero (or structurally missing) pivot."""

    def __init__(self, row: int, structural: bool = False):
        self.row = row
        kind = "structurally missing" if structural else "zero"
        super().__init__(f"ILU(0) breakdown: {kind} pivot in row {row}")


class EigNonConvergence(RuntimeError):
    """Lanczos did not meet the tolerance within the iteration cap."""

    def __init__(self, message: str, best: float | None = None):
        self.best = best
        super().__init__(message)


@dataclass
class SolveStats:
    iterations: int
    relres: float
    converged: bool


@dataclass
class CondEstimate:
    lambda_max: float
    lambda_min: float
    cond: float
    deflated: bool


def _as_csr(A) -> sp.csr_matrix:
    A = sp.csr_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    return A


# ---------------------------------------------------------------------------
# preconditioned conjugate gradient


class JacobiPreconditioner:
    def __init__(self, A: sp.spmatrix):
        d = A.diagonal()
        if np.any(d == 0.0):
            raise ValueError(
                f"Jacobi preconditioner: zero diagonal at row {int(np.argmin(d != 0))}"
            )
        self.inv_diag = 1.0 / d

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self.inv_diag * r


class ILU0Preconditioner:
    def __init__(self, A: sp.spmatrix, modified: bool = False):
        self.L, self.U = ilu0_factor(A, modified=modified)

    def apply(self, r: np.ndarray) -> np.ndarray:
        y = spla.spsolve_triangular(self.L, r, lower=True, unit_diagonal=True)
        return spla.spsolve_triangular(self.U, y, lower=False)


def _make_preconditioner(A: sp.csr_matrix, precond):
    if precond is None or precond == "none":
        return None
    if precond == "jacobi":
        return JacobiPreconditioner(A)
    if precond == "ilu0":
        return ILU0Preconditioner(A)
    if precond == "milu0":
        return ILU0Preconditioner(A, modified=True)
    if hasattr(precond, "apply"):
        return precond
    raise ValueError(f"unknown preconditioner {precond!r}")


def pcg(A, b, tol: float = 1e-8, maxiter: int | None = None,
        precond=None, x0: np.ndarray | None = None):
    """Conjugate gradient with optional preconditioning.

    Parameters
    ----------
    A : sparse symmetric (positive semi-definite) matrix
    b : right-hand side
    tol : relative residual tolerance |b - Ax| / |b|
    precond : None | "jacobi" | "ilu0" | "milu0" | object with .apply(r)

    Returns
    -------
    (x, SolveStats)
        Iteration count, final true relative residual, and whether the
        tolerance was met.  Non-convergence is reported in the stats, not
        raised; a breakdown (non-positive curvature) raises LinAlgError.
    """
    A = _as_csr(A)
    n = A.shape[0]
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise ValueError(f"rhs shape {b.shape} does not match matrix {A.shape}")
    if maxiter is None:
        maxiter = n
    M = _make_preconditioner(A, precond)

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x * 0.0, SolveStats(0, 0.0, True)
    r = b - A @ x if x.any() else b.copy()
    if np.linalg.norm(r) / bnorm <= tol:
        return x, SolveStats(0, float(np.linalg.norm(r) / bnorm), True)

    z = M.apply(r) if M is not None else r
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxiter + 1):
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise np.linalg.LinAlgError(
                f"PCG breakdown at iteration {it}: curvature {pAp:.3e} <= 0"
            )
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) / bnorm <= tol:
            true_rel = float(np.linalg.norm(b - A @ x) / bnorm)
            if true_rel <= tol:
                return x, SolveStats(it, true_rel, True)
        z = M.apply(r) if M is not None else r
        rz_new = float(r @ z)
        if rz_new <= 0.0:
            raise np.linalg.LinAlgError(
                f"PCG breakdown at iteration {it}: preconditioned product "
                f"{rz_new:.3e} <= 0"
            )
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, SolveStats(maxiter, float(np.linalg.norm(b - A @ x) / bnorm), False)


# ---------------------------------------------------------------------------
# ILU(0)


def ilu0_factor(A, modified: bool = False) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Incomplete LU with zero fill-in.

    Returns (L, U) in CSR with L unit lower triangular and U upper
    triangular; together they occupy exactly the sparsity pattern of A.
    With ``modified=False`` (plain ILU(0)), L@U reproduces A exactly on
    A's pattern.  With ``modified=True`` (MILU(0)), the fill dropped from
    each row is subtracted from that row's pivot instead, so L@U
    preserves the row sums of A; this row-compensated variant
    preconditions Laplacian-like stencils far better than plain ILU(0).
    Raises ZeroPivotError when a pivot vanishes or the diagonal is
    structurally absent.
    """
    A = _as_csr(A).copy()
    A.sum_duplicates()
    A.sort_indices()
    n = A.shape[0]
    indptr, indices, data = A.indptr, A.indices, A.data

    colpos = [
        dict(zip(indices[indptr[i]:indptr[i + 1]].tolist(),
                 range(indptr[i], indptr[i + 1])))
        for i in range(n)
    ]
    diag_pos = np.empty(n, dtype=np.int64)
    diag_val = np.empty(n)

    for i in range(n):
        my = colpos[i]
        dropped = 0.0
        for idx in range(indptr[i], indptr[i + 1]):
            k = indices[idx]
            if k >= i:
                break
            piv = diag_val[k]
            lik = data[idx] / piv
            data[idx] = lik
            for jdx in range(diag_pos[k] + 1, indptr[k + 1]):
                p = my.get(indices[jdx])
                if p is not None:
                    data[p] -= lik * data[jdx]
                elif modified:
                    dropped += lik * data[jdx]
        dpos = my.get(i)
        if dpos is None:
            raise ZeroPivotError(i, structural=True)
        data[dpos] -= dropped
        if data[dpos] == 0.0:
            raise ZeroPivotError(i)
        diag_pos[i] = dpos
        diag_val[i] = data[dpos]

    F = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    L = (sp.tril(F, -1) + sp.identity(n, format="csr")).tocsr()
    U = sp.triu(F, 0).tocsr()
    L.sort_indices()
    U.sort_indices()
    return L, U


# ---------------------------------------------------------------------------
# Lanczos extreme eigenvalues


def _top_ritz(alphas, betas, n_pairs):
    """Largest Ritz values and their tridiagonal eigenvectors."""
    a = np.asarray(alphas)
    b = np.asarray(betas)
    k = len(a)
    n_pairs = min(n_pairs, k)
    if k <= 64:
        vals, vecs = sla.eigh_tridiagonal(a, b)
    else:
        try:
            vals, vecs = sla.eigh_tridiagonal(
                a, b, select="i", select_range=(k - n_pairs, k - 1)
            )
        except sla.LinAlgError:
            vals, vecs = sla.eigh_tridiagonal(a, b)
    order = np.argsort(vals)[::-1][:n_pairs]
    return vals[order], vecs[:, order]


def _lanczos_top(apply_op, n, rng, tol, maxiter, n_pairs=1, project=None):
    """Top Ritz pairs of a symmetric operator, full reorthogonalization.

    Stops when the residual bound beta * |last component| of every tracked
    pair falls below tol * |value|, or on Krylov breakdown (invariant
    subspace, estimates exact).  Returns (values, vectors, converged_flags).
    """
    maxiter = min(maxiter, n)
    V = np.empty((maxiter + 1, n))
    v = rng.standard_normal(n)
    if project is not None:
        v = project(v)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("start vector vanished under deflation")
    V[0] = v / nv
    alphas: list[float] = []
    betas: list[float] = []

    for k in range(maxiter):
        w = apply_op(V[k])
        alphas.append(float(V[k] @ w))
        w = w - alphas[-1] * V[k]
        if k:
            w -= betas[-1] * V[k - 1]
        w -= V[: k + 1].T @ (V[: k + 1] @ w)
        if project is not None:
            w = project(w)
        beta = float(np.linalg.norm(w))

        scale = max(map(abs, alphas)) + (max(betas) if betas else 0.0)
        check = (k + 1 >= n_pairs) and (
            k < 64 or (k % 8 == 0) or (k == maxiter - 1) or beta <= 1e-14 * scale
        )
        if check:
            vals, vecs = _top_ritz(alphas, betas, n_pairs)
            bounds = beta * np.abs(vecs[-1, :])
            ok = bounds <= tol * np.maximum(np.abs(vals), 1e-300)
            if np.all(ok) or beta <= 1e-14 * scale or k + 1 == n:
                ritz = (V[: k + 1].T @ vecs).T
                exact = beta <= 1e-14 * scale or k + 1 == n
                return vals, ritz, np.logical_or(ok, exact)
        betas.append(beta)
        V[k + 1] = w / beta

    vals, vecs = _top_ritz(alphas, betas[:-1], n_pairs)
    raise EigNonConvergence(
        f"Lanczos did not converge within {maxiter} iterations",
        best=float(vals[0]),
    )


def _deflation_projector(deflate: np.ndarray):
    k = np.asarray(deflate, dtype=float)
    nk = np.linalg.norm(k)
    if nk == 0.0:
        raise ValueError("deflation vector is zero")
    k = k / nk

    def project(w):
        return w - (k @ w) * k

    return k, project


def eig_extreme(A, which: str = "max", tol: float = 1e-6,
                maxiter: int | None = None, seed: int = 0,
                deflate: np.ndarray | None = None) -> float:
    """Extreme eigenvalue estimate by Lanczos.

    which="max" runs Lanczos on A itself.  which="min" runs Lanczos on the
    inverse of A + delta*I (sparse LU; delta a tiny multiple of |A| so a
    singular input is never factorized) and returns 1/mu - delta.  With
    ``deflate`` the supplied near-kernel direction is projected out and any
    Ritz mode still aligned with it is discarded, which turns "min" into
    the smallest nonzero eigenvalue.
    """
    A = _as_csr(A)
    n = A.shape[0]
    if maxiter is None:
        maxiter = min(n, 600)
    rng = np.random.default_rng(seed)

    khat = project = None
    if deflate is not None:
        khat, project = _deflation_projector(deflate)

    if which == "max":
        vals, _, ok = _lanczos_top(lambda v: A @ v, n, rng, tol, maxiter,
                                   n_pairs=1, project=project)
        if not ok[0]:
            raise EigNonConvergence("lambda_max estimate not converged",
                                    best=float(vals[0]))
        return float(vals[0])

    if which != "min":
        raise ValueError("which must be 'max' or 'min'")

    norm_inf = float(np.max(np.abs(A).sum(axis=1)))
    if norm_inf == 0.0:
        return 0.0
    delta = 1e-13 * norm_inf
    if khat is not None:
        delta = max(delta, 4.0 * float(np.linalg.norm(A @ khat)))
    lu = spla.splu((A + delta * sp.identity(n, format="csr")).tocsc())

    n_pairs = 2 if khat is not None else 1
    vals, ritz, ok = _lanczos_top(lu.solve, n, rng, tol, maxiter,
                                  n_pairs=n_pairs, project=project)
    for mu, y, conv in zip(vals, ritz, ok):
        if khat is not None and abs(float(khat @ y)) > 0.5:
            continue  # kernel mode
        if not conv:
            raise EigNonConvergence("smallest-eigenvalue estimate not converged",
                                    best=float(1.0 / mu - delta))
        if mu <= 0.0:
            raise EigNonConvergence(
                "inverse operator returned a non-positive Ritz value", best=None
            )
        return float(1.0 / mu - delta)
    raise EigNonConvergence(
        "all Ritz modes aligned with the deflation vector", best=None
    )


def effective_cond(A, kernel: np.ndarray, tol: float = 1e-6,
                   seed: int = 0) -> CondEstimate:
    """lambda_max / lambda_2 with the one-dimensional kernel deflated.

    ``kernel`` must actually be a kernel vector: |A k| <= 1e-8 lambda_max |k|
    is enforced.  An estimate with lambda_2 <= 0 reports cond = inf.
    """
    A = _as_csr(A)
    khat, _ = _deflation_projector(kernel)
    lam_max = eig_extreme(A, "max", tol=tol, seed=seed, deflate=kernel)
    resid = float(np.linalg.norm(A @ khat))
    if resid > 1e-8 * abs(lam_max):
        raise ValueError(
            f"supplied vector is not in the kernel: |A k| = {resid:.3e} "
            f"> 1e-8 * lambda_max = {1e-8 * abs(lam_max):.3e}"
        )
    lam2 = eig_extreme(A, "min", tol=tol, seed=seed, deflate=kernel)
    if lam2 <= 0.0 or lam2 < abs(lam_max) * 1e-300:
        cond = float("inf")
    else:
        cond = float(lam_max / lam2)
    return CondEstimate(float(lam_max), float(lam2), cond, deflated=True)


def spd_cond(A, tol: float = 1e-6, seed: int = 0) -> CondEstimate:
    """lambda_max / lambda_min for a positive definite matrix."""
    lam_max = eig_extreme(A, "max", tol=tol, seed=seed)
    lam_min = eig_extreme(A, "min", tol=tol, seed=seed)
    if lam_min <= 0.0 or lam_min < abs(lam_max) * 1e-300:
        cond = float("inf")
    else:
        cond = float(lam_max / lam_min)
    return CondEstimate(float(lam_max), float(lam_min), cond, deflated=False)


# ---------------------------------------------------------------------------
# reference matrix


def build_reference_matrix(blocks: int = 120, size: int = 120) -> sp.csr_matrix:
    """Symmetric block tridiagonal test matrix.

    Diagonal blocks D = tridiag(-1, 6, -1); the block above the diagonal is
    -B^T and the block below is -B, with B carrying ones on its diagonal
    and first subdiagonal.  With the default 120 blocks of size 120 the
    matrix has dimension 14400 and mostly 7 nonzeros per row.
    """
    if blocks < 1 or size < 1:
        raise ValueError("blocks and size must be positive")
    D = sp.diags([-1.0, 6.0, -1.0], [-1, 0, 1], shape=(size, size))
    B = sp.diags([1.0, 1.0], [0, -1], shape=(size, size))
    S = sp.diags([1.0], [1], shape=(blocks, blocks))
    A = (
        sp.kron(sp.identity(blocks), D)
        - sp.kron(S, B.T)
        - sp.kron(S.T, B)
    ).tocsr()
    # kron may pad small blocks with stored zeros; drop them so the
    # sparsity pattern (which ILU(0) factors) is the true stencil.
    A.eliminate_zeros()
    A.sort_indices()
    return A
