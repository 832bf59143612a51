"""Unbiased sample statistics and the small linear solves behind the estimators.

Everything here is pointwise over arbitrary trailing field axes: ensembles
are arrays of shape (M, ...) and statistics reduce axis 0 with the 1/(M-1)
normalization. Covariances require both ensembles to come from the same
draw of z (paired samples); mixing draws is refused, not silently allowed.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .random_inputs import SampleSet

__all__ = [
    "SampleEnsemble",
    "CovarianceSystem",
    "mc_mean",
    "sample_variance",
    "sample_covariance",
    "build_cov_system",
    "solve_cov_system",
    "solve_tridiagonal",
]

# Diagonal entries below 1e-14 times the largest diagonal count as degenerate:
# the control variate carries no usable signal there and its weight is zeroed.
DEGENERATE_REL_VAR = 1e-14
JITTER_REL = 1e-12


@dataclass
class SampleEnsemble:
    """Solver outputs for one sample set, stacked along axis 0."""

    values: np.ndarray
    sample_set: SampleSet | None = None
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim < 1:
            raise ValueError("ensemble values need a leading sample axis")
        if self.sample_set is not None and len(self.sample_set) != self.values.shape[0]:
            raise ValueError("sample sets differ from ensemble size")

    @property
    def m(self) -> int:
        return self.values.shape[0]


def _paired(a: SampleEnsemble, b: SampleEnsemble) -> None:
    if a.m != b.m:
        raise ValueError("sample sets differ in size")
    if a.sample_set is not None and b.sample_set is not None:
        if not a.sample_set.same_draws(b.sample_set):
            raise ValueError("sample sets differ")


def mc_mean(ens: SampleEnsemble) -> np.ndarray:
    if ens.m < 1:
        raise ValueError("insufficient samples")
    return ens.values.mean(axis=0)


def sample_variance(ens: SampleEnsemble) -> np.ndarray:
    if ens.m < 2:
        raise ValueError("insufficient samples")
    return ens.values.var(axis=0, ddof=1)


def sample_covariance(a: SampleEnsemble, b: SampleEnsemble) -> np.ndarray:
    if a.m < 2:
        raise ValueError("insufficient samples")
    _paired(a, b)
    da = a.values - a.values.mean(axis=0)
    db = b.values - b.values.mean(axis=0)
    return (da * db).sum(axis=0) / (a.m - 1)


@dataclass
class CovarianceSystem:
    """Pointwise normal equations C Lambda = b for multiple control variates.

    matrix: (L, L, ...) sample covariances of the control variates
    vector: (L, ...) covariances of the target against each control variate
    var_f:  (...) sample variance of the target
    """

    matrix: np.ndarray
    vector: np.ndarray
    var_f: np.ndarray
    labels: list = dataclass_field(default_factory=list)


def build_cov_system(f_ens: SampleEnsemble, cv_list: list[SampleEnsemble]) -> CovarianceSystem:
    L = len(cv_list)
    if L < 1:
        raise ValueError("need at least one control variate")
    shape = f_ens.values.shape[1:]
    matrix = np.empty((L, L) + shape)
    vector = np.empty((L,) + shape)
    for i, gi in enumerate(cv_list):
        vector[i] = sample_covariance(f_ens, gi)
        for j, gj in enumerate(cv_list[: i + 1]):
            cij = sample_covariance(gi, gj)
            matrix[i, j] = cij
            matrix[j, i] = cij
    return CovarianceSystem(
        matrix=matrix,
        vector=vector,
        var_f=sample_variance(f_ens),
        labels=[cv.label for cv in cv_list],
    )


def solve_cov_system(matrix: np.ndarray, vector: np.ndarray):
    """Pointwise solve of C Lambda = b with jitter and degeneracy handling.

    Returns (weights, degenerate_mask), both shaped like `vector`. A tiny
    diagonal jitter 1e-12*trace(C)/L regularizes near-singular points.
    Rows whose variance sits below 1e-14 times the global largest variance
    are excluded from the solve and their weight is zero, flagged True.
    """
    matrix = np.asarray(matrix, dtype=float)
    vector = np.asarray(vector, dtype=float)
    L = matrix.shape[0]
    if matrix.shape[1] != L or vector.shape[0] != L:
        raise ValueError("covariance system shapes disagree")
    shape = vector.shape[1:]

    # (P, L, L) and (P, L) views for the batched solver
    cm = np.moveaxis(matrix.reshape(L, L, -1), -1, 0).copy()
    bv = np.moveaxis(vector.reshape(L, -1), -1, 0).copy()
    npts = cm.shape[0]

    diag = cm[:, np.arange(L), np.arange(L)]
    scale = float(diag.max(initial=0.0))
    degenerate = diag < DEGENERATE_REL_VAR * scale if scale > 0.0 else np.ones_like(diag, dtype=bool)

    # Degenerate rows are replaced by the identity row with zero right side,
    # which solves the reduced system with that weight pinned to zero.
    for h in range(L):
        bad = degenerate[:, h]
        if bad.any():
            cm[bad, h, :] = 0.0
            cm[bad, :, h] = 0.0
            cm[bad, h, h] = 1.0
            bv[bad, h] = 0.0

    trace = cm[:, np.arange(L), np.arange(L)].sum(axis=1)
    cm[:, np.arange(L), np.arange(L)] += (JITTER_REL / L) * trace[:, None]

    try:
        lam = np.linalg.solve(cm, bv[..., None])[..., 0]
    except np.linalg.LinAlgError:
        lam = np.empty_like(bv)
        for p in range(npts):
            try:
                lam[p] = np.linalg.solve(cm[p], bv[p])
            except np.linalg.LinAlgError:
                lam[p] = np.linalg.lstsq(cm[p], bv[p], rcond=None)[0]

    weights = np.moveaxis(lam, 0, -1).reshape((L,) + shape)
    mask = np.moveaxis(degenerate, 0, -1).reshape((L,) + shape)
    weights[mask] = 0.0
    return weights, mask


def solve_tridiagonal(diag: np.ndarray, sub: np.ndarray, sup: np.ndarray, rhs: np.ndarray):
    """Thomas algorithm along axis 0, vectorized over any trailing axes.

    sub[0] and sup[-1] are ignored. Raises on vanishing pivots instead of
    returning garbage, and checks the residual of the computed solution.
    """
    sub = np.asarray(sub, dtype=float)
    diag = np.asarray(diag, dtype=float)
    sup = np.asarray(sup, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    if not (sub.shape == diag.shape == sup.shape == rhs.shape):
        raise ValueError("tridiagonal bands must share one shape")

    scale = np.abs(diag).max()
    tiny = 1e-300 if scale == 0.0 else 1e-14 * scale

    cp = np.empty_like(diag)
    dp = np.empty_like(rhs)
    piv = diag[0]
    if np.any(np.abs(piv) <= tiny):
        raise ValueError("singular tridiagonal system")
    cp[0] = sup[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i] * cp[i - 1]
        if np.any(np.abs(piv) <= tiny):
            raise ValueError("singular tridiagonal system")
        cp[i] = sup[i] / piv
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / piv

    x = np.empty_like(rhs)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]

    res = diag * x
    if n > 1:
        res[1:] += sub[1:] * x[:-1]
        res[:-1] += sup[:-1] * x[1:]
    res -= rhs
    bound = np.abs(rhs).max()
    bound = 1e-300 if bound == 0.0 else 1e-10 * bound
    if np.abs(res).max() >= bound:
        raise ValueError("singular tridiagonal system")
    return x
