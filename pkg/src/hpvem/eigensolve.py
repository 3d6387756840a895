"""Smallest eigenpairs of the symmetric-definite problem A x = lambda M x."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SolverError(Exception):
    """Factorization or iteration failure in the generalized eigensolver."""


class CoverageError(Exception):
    """Fewer computed eigenvalues than the reference list requires."""


@dataclass(frozen=True)
class SolverConfig:
    n_eigs: int = 6
    shift: float | None = None
    tolerance: float = 1e-10
    max_iterations: int = 5000
    drop_zero_mode: bool = False
    dense_threshold: int = 500
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_eigs < 1:
            raise ValueError("n_eigs must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class EigenResult:
    """Ascending eigenvalues with M-orthonormal vectors and residual certificates."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    zero_mode: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _relative_residuals(a, m, vals, vecs):
    norm_a = spla.norm(a, np.inf) if sp.issparse(a) else np.linalg.norm(a, np.inf)
    norm_m = spla.norm(m, np.inf) if sp.issparse(m) else np.linalg.norm(m, np.inf)
    out = np.empty(len(vals))
    for k, lam in enumerate(vals):
        x = vecs[:, k]
        r = a @ x - lam * (m @ x)
        out[k] = np.linalg.norm(r) / ((norm_a + abs(lam) * norm_m) * np.linalg.norm(x))
    return out


def solve_generalized(a, m, config=SolverConfig()):
    """Smallest eigenpairs of A x = lambda M x (A symmetric PSD, M SPD).

    The pencil is symmetrically Jacobi-equilibrated first, which keeps the
    factorizations accurate under extreme coefficient contrast. A dense
    full-spectrum solve is used below `dense_threshold`, shift-invert Lanczos
    iteration above it. With `drop_zero_mode` the smallest eigenvalue (the
    constant mode of pure Neumann problems) is reported separately.
    """
    n = a.shape[0]
    k_want = config.n_eigs + (1 if config.drop_zero_mode else 0)
    if k_want > n:
        raise ValueError(f"requested {k_want} eigenvalues from a system of size {n}")
    diagnostics = {"n": n}

    diag = a.diagonal() if sp.issparse(a) else np.diag(a)
    if np.all(diag > 0):
        scaling = 1.0 / np.sqrt(diag)
    else:
        scaling = np.ones(n)
    dmat = sp.diags(scaling)
    a_s = (dmat @ a @ dmat) if sp.issparse(a) else scaling[:, None] * a * scaling[None, :]
    m_s = (dmat @ m @ dmat) if sp.issparse(m) else scaling[:, None] * m * scaling[None, :]

    if n <= config.dense_threshold or k_want > n - 1:
        ad = a_s.toarray() if sp.issparse(a_s) else np.asarray(a_s, dtype=float)
        md = m_s.toarray() if sp.issparse(m_s) else np.asarray(m_s, dtype=float)
        try:
            vals, vecs = la.eigh(ad, md)
        except la.LinAlgError as exc:
            raise SolverError(f"dense generalized solve failed: {exc}") from exc
        vals, vecs = vals[:k_want], vecs[:, :k_want]
        diagnostics["method"] = "dense"
    else:
        sigma = config.shift
        if sigma is None:
            sigma = 0.0
            if config.drop_zero_mode:
                scale = spla.norm(sp.csr_matrix(a_s), np.inf) / max(
                    spla.norm(sp.csr_matrix(m_s), np.inf), 1e-300)
                sigma = -1e-8 * scale
        rng = np.random.default_rng(config.rng_seed)
        v0 = rng.standard_normal(n)
        try:
            vals, vecs = spla.eigsh(a_s, k=k_want, M=m_s, sigma=sigma, which="LM",
                                    tol=0, v0=v0, maxiter=config.max_iterations)
        except RuntimeError as exc:
            raise SolverError(
                f"factorization of (A - sigma M) failed for shift {sigma!r}; "
                f"try another shift: {exc}") from exc
        except spla.ArpackNoConvergence as exc:
            got = _relative_residuals(a, m, exc.eigenvalues,
                                      exc.eigenvectors) if len(exc.eigenvalues) else []
            raise SolverError(f"iteration did not converge; attained residuals {got}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        diagnostics["method"] = "shift-invert"
        diagnostics["shift"] = sigma
    vecs = scaling[:, None] * vecs

    # deterministic normalization: x' M x = 1, largest entry positive
    for kk in range(vecs.shape[1]):
        x = vecs[:, kk]
        nrm = np.sqrt(abs(x @ (m @ x)))
        x = x / nrm
        j = np.argmax(np.abs(x))
        if x[j] < 0:
            x = -x
        vecs[:, kk] = x

    residuals = _relative_residuals(a, m, vals, vecs)
    bound = max(config.tolerance, 1e-12)
    bad = residuals > bound
    if bad.any():
        raise SolverError(
            f"residual certificate failed: {residuals[bad]} above {bound:g}")
    zero_mode = None
    if config.drop_zero_mode:
        zero_mode = float(vals[0])
        vals, vecs, residuals = vals[1:], vecs[:, 1:], residuals[1:]
    return EigenResult(np.asarray(vals, dtype=float), vecs, residuals, zero_mode, diagnostics)


# ---------------------------------------------------------------------------
# multiplicity-aware matching against reference spectra


@dataclass
class MatchResult:
    reference: np.ndarray
    errors: np.ndarray
    matched: list
    multiplicities: np.ndarray
    best: np.ndarray


def cluster_values(values, rel_tol):
    """Split an ascending list into maximal runs with relative gaps <= rel_tol."""
    values = np.asarray(values, dtype=float)
    clusters = []
    start = 0
    for i in range(1, len(values)):
        gap = values[i] - values[i - 1]
        scale = max(abs(values[i]), abs(values[i - 1]), 1e-300)
        if gap / scale > rel_tol:
            clusters.append(values[start:i])
            start = i
    if len(values):
        clusters.append(values[start:])
    return clusters


def match_eigenvalues(computed, reference, multiplicities=None, cluster_rel_tol=1e-6):
    """Pair distinct reference values with clusters of computed values, in order.

    Each reference consumes whole clusters until its multiplicity count is
    reached (one cluster when no multiplicities are given); its error is the
    smallest normalized deviation |ref - lam| / |ref| over the consumed values.
    """
    computed = np.sort(np.asarray(computed, dtype=float))
    reference = np.asarray(reference, dtype=float)
    if multiplicities is None:
        mults = np.ones(len(reference), dtype=np.intp)
    else:
        mults = np.asarray(multiplicities, dtype=np.intp)
    if len(computed) < int(mults.sum()):
        raise CoverageError(
            f"need {int(mults.sum())} computed eigenvalues, got {len(computed)}")
    clusters = cluster_values(computed, cluster_rel_tol)
    errors = np.empty(len(reference))
    counts = np.empty(len(reference), dtype=np.intp)
    matched = []
    best = np.empty(len(reference))
    ci = 0
    for k, ref in enumerate(reference):
        taken = []
        while len(taken) < mults[k]:
            if ci >= len(clusters):
                raise CoverageError(f"ran out of computed clusters at reference {ref}")
            taken.extend(clusters[ci])
            ci += 1
        taken = np.asarray(taken)
        devs = np.abs(ref - taken) / abs(ref)
        errors[k] = devs.min()
        best[k] = taken[np.argmin(devs)]
        counts[k] = len(taken)
        matched.append(taken)
    return MatchResult(reference, errors, matched, counts, best)
