"""Control variate estimators built on paired sample ensembles.

The family covers the single control variate, multiple control variates
solved through the pointwise covariance system, Gram-Schmidt orthogonalized
variates, the closed-form two-variate weights, and the recursive hierarchy
with quasi-optimal or tridiagonal-optimal weights (unit weights recover
plain multilevel telescoping). Weights are pointwise fields by default;
moment weights collapse to one value per spatial cell.
"""

import time
import warnings
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .random_inputs import SeededStream, draw_uniform, gauss_legendre
from .stats import (
    DEGENERATE_REL_VAR,
    SampleEnsemble,
    build_cov_system,
    mc_mean,
    sample_covariance,
    sample_variance,
    solve_cov_system,
    solve_tridiagonal,
)

__all__ = [
    "ControlVariateSpec",
    "WeightField",
    "EstimatorOutput",
    "GramSchmidtTransform",
    "LevelEnsembles",
    "ChainStats",
    "PipelineConfig",
    "optimal_lambda_single",
    "cv_estimate_single",
    "optimal_lambda_multi",
    "cv_estimate_multi",
    "gram_schmidt_cv",
    "cv_estimate_orthogonal",
    "two_cv_closed_form",
    "chain_stats",
    "recursive_weights_quasi",
    "recursive_weights_optimal",
    "recursive_weights_unit",
    "recursive_estimate",
    "me_correction",
    "moment_lambda",
    "run_pipeline",
]

EXPECTATION_SOURCES = ("analytic", "ensemble", "hierarchical")


@dataclass(frozen=True)
class ControlVariateSpec:
    """What generates a control variate and where its expectation comes from."""

    label: str
    model: str
    expectation_source: str = "analytic"
    quad_nodes: int = 32
    m_e: int = 0

    def __post_init__(self):
        if self.expectation_source not in EXPECTATION_SOURCES:
            raise ValueError("unknown expectation source %r" % (self.expectation_source,))
        if self.expectation_source == "analytic" and self.quad_nodes < 1:
            raise ValueError("analytic expectation needs at least one quadrature node")
        if self.expectation_source == "ensemble" and self.m_e < 1:
            raise ValueError("ensemble expectation needs M_E >= 1")


@dataclass
class WeightField:
    """Per-control-variate weights, shaped (L,) + field shape.

    granularity is "global" for scalars, "moment" for one value per spatial
    cell, "pointwise" for full (x,v) fields. degenerate marks points where
    the variance carried no signal and the weight was pinned to zero.
    """

    values: np.ndarray
    granularity: str = "pointwise"
    degenerate: np.ndarray | None = None
    stage_values: np.ndarray | None = None  # per-stage hats for recursive weights

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim < 1:
            self.values = self.values[None]
        if not np.all(np.isfinite(self.values)):
            raise ValueError("weight field must be finite")
        if self.granularity not in ("global", "moment", "pointwise"):
            raise ValueError("unknown weight granularity %r" % (self.granularity,))
        if self.degenerate is None:
            self.degenerate = np.zeros(self.values.shape, dtype=bool)

    @property
    def n_controls(self) -> int:
        return self.values.shape[0]


@dataclass
class EstimatorOutput:
    mean: np.ndarray
    weights: WeightField | None = None
    variance: np.ndarray | None = None
    sample_counts: tuple = ()
    wall_time: float = 0.0
    model_evals: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        if not np.all(np.isfinite(self.mean)):
            raise ValueError("estimator mean must be finite")
        if self.wall_time < 0.0 or any(v < 0 for v in self.model_evals.values()):
            raise ValueError("cost tallies must be nonnegative")


def _ratio_with_degenerate(cov: np.ndarray, var: np.ndarray):
    """cov/var with weight 0 where var is degenerate relative to its peak."""
    var = np.asarray(var, dtype=float)
    cov = np.asarray(cov, dtype=float)
    scale = float(np.max(var, initial=0.0))
    if scale <= 0.0:
        mask = np.ones(np.broadcast(cov, var).shape, dtype=bool)
    else:
        mask = np.broadcast_to(var < DEGENERATE_REL_VAR * scale,
                               np.broadcast(cov, var).shape).copy()
    lam = np.zeros(np.broadcast(cov, var).shape)
    np.divide(cov, var, out=lam, where=~mask)
    return lam, mask


def optimal_lambda_single(f_ens: SampleEnsemble, g_ens: SampleEnsemble) -> WeightField:
    """Pointwise lambda* = Cov_M(f,g)/Var_M(g); zero with flag where Var degenerates."""
    cov = sample_covariance(f_ens, g_ens)
    var = sample_variance(g_ens)
    lam, mask = _ratio_with_degenerate(cov, var)
    return WeightField(values=lam[None], degenerate=mask[None])


def _weight_values(lam, n_controls: int) -> np.ndarray:
    if isinstance(lam, WeightField):
        values = lam.values
    else:
        values = np.asarray(lam, dtype=float)
        if values.ndim == 0 or values.shape[0] != n_controls:
            values = np.broadcast_to(values, (n_controls,) + values.shape)
    if values.shape[0] != n_controls:
        raise ValueError("weight field does not match the number of control variates")
    return values


def cv_estimate_multi(f_ens: SampleEnsemble, cv_list, cv_expects, lam) -> EstimatorOutput:
    """E_M[f] - sum_h lambda_h (E_M[g_h] - g_hat_h), with residual-variance diagnostic."""
    t0 = time.perf_counter()
    L = len(cv_list)
    if L != len(cv_expects):
        raise ValueError("one expectation per control variate is required")
    values = _weight_values(lam, L)
    shape = f_ens.values.shape[1:]

    mean = mc_mean(f_ens).copy()
    residual = f_ens.values.copy()
    for h, (g, ghat) in enumerate(zip(cv_list, cv_expects)):
        ghat = np.asarray(ghat, dtype=float)
        if ghat.shape != shape:
            raise ValueError("expectation grid mismatch for control variate %d" % h)
        w = values[h]
        # two-term update keeps the perfect-control case (w=1, g=f, ghat
        # exact) bit-exact: the sample means cancel before ghat is added
        mean -= w * mc_mean(g)
        mean += w * ghat
        residual -= w * g.values
    var = residual.var(axis=0, ddof=1) if f_ens.m >= 2 else None

    out = EstimatorOutput(
        mean=mean,
        weights=lam if isinstance(lam, WeightField) else WeightField(values=values),
        variance=var,
        sample_counts=(f_ens.m,),
        wall_time=time.perf_counter() - t0,
    )
    return out


def cv_estimate_single(f_ens, g_ens, g_expect, lam) -> EstimatorOutput:
    if isinstance(lam, WeightField):
        values = lam
    else:
        values = np.asarray(lam, dtype=float)[None] if np.ndim(lam) > 0 else np.asarray([lam], dtype=float)
        values = WeightField(values=values)
    return cv_estimate_multi(f_ens, [g_ens], [g_expect], values)


def optimal_lambda_multi(f_ens: SampleEnsemble, cv_ens_list) -> WeightField:
    """Lambda* = C^{-1} b pointwise through the regularized covariance solve."""
    system = build_cov_system(f_ens, list(cv_ens_list))
    weights, mask = solve_cov_system(system.matrix, system.vector)
    return WeightField(values=weights, degenerate=mask)


@dataclass
class GramSchmidtTransform:
    """Record of g_h = f_h - sum_{j<h} c_hj g_j over the kept directions.

    coefficients[h] lists the fields c_hj against the previously kept
    outputs; dropped[h] is True where the residual variance vanished and
    the direction was removed.
    """

    coefficients: list
    dropped: list

    def apply_to_expectations(self, expects) -> list:
        """Map raw CV expectations through the same triangular transform."""
        if len(expects) != len(self.dropped):
            raise ValueError("one expectation per original control variate is required")
        out = []
        for h, ghat in enumerate(expects):
            ghat = np.asarray(ghat, dtype=float).copy()
            for c, g_prev in zip(self.coefficients[h], out):
                ghat -= c * g_prev
            if not self.dropped[h]:
                out.append(ghat)
        # dropped directions contribute nothing downstream
        return out


def gram_schmidt_cv(cv_ens_list):
    """Orthogonalize control variates in sample covariance, dropping null directions."""
    kept: list[SampleEnsemble] = []
    kept_vars: list[np.ndarray] = []
    coefficients = []
    dropped = []
    scale = 0.0
    for ens in cv_ens_list:
        scale = max(scale, float(np.max(sample_variance(ens), initial=0.0)))
    for ens in cv_ens_list:
        residual = ens.values.copy()
        coeffs = []
        for g, var_g in zip(kept, kept_vars):
            c, _ = _ratio_with_degenerate(sample_covariance(ens, g), var_g)
            residual -= c * g.values
            coeffs.append(c)
        coefficients.append(coeffs)
        var_res = residual.var(axis=0, ddof=1)
        if float(np.max(var_res, initial=0.0)) <= DEGENERATE_REL_VAR * scale:
            dropped.append(True)
            continue
        dropped.append(False)
        out = SampleEnsemble(values=residual, sample_set=ens.sample_set,
                             label=ens.label + "_orth" if ens.label else "")
        kept.append(out)
        kept_vars.append(var_res)
    return kept, GramSchmidtTransform(coefficients=coefficients, dropped=dropped)


def cv_estimate_orthogonal(f_ens, g_list, g_expects) -> EstimatorOutput:
    """Multi-CV estimate with the decoupled weights gamma_h = Cov(f,g_h)/Var(g_h)."""
    L = len(g_list)
    shape = f_ens.values.shape[1:]
    values = np.empty((L,) + shape)
    mask = np.empty((L,) + shape, dtype=bool)
    for h, g in enumerate(g_list):
        values[h], mask[h] = _ratio_with_degenerate(sample_covariance(f_ens, g),
                                                    sample_variance(g))
    gamma = WeightField(values=values, degenerate=mask)
    return cv_estimate_multi(f_ens, g_list, g_expects, gamma)


def two_cv_closed_form(f_ens, f0_ens, finf_ens) -> WeightField:
    """Explicit 2x2 optimal weights for the (initial datum, stationary state) pair.

    Points where Delta = Var(f0)Var(finf) - Cov^2 degenerates are rerouted
    through the regularized covariance solve.
    """
    v0 = sample_variance(f0_ens)
    vi = sample_variance(finf_ens)
    c = sample_covariance(f0_ens, finf_ens)
    b0 = sample_covariance(f_ens, f0_ens)
    bi = sample_covariance(f_ens, finf_ens)

    delta = v0 * vi - c * c
    delta_scale = v0 * vi + c * c
    bad = (delta <= DEGENERATE_REL_VAR * delta_scale) | (delta_scale <= 0.0)

    safe = np.where(bad, 1.0, delta)
    lam = np.stack([
        np.where(bad, 0.0, (vi * b0 - c * bi) / safe),
        np.where(bad, 0.0, (v0 * bi - c * b0) / safe),
    ])

    mask = np.zeros_like(lam, dtype=bool)
    if bad.any():
        fallback = optimal_lambda_multi(f_ens, [f0_ens, finf_ens])
        lam[0] = np.where(bad, fallback.values[0], lam[0])
        lam[1] = np.where(bad, fallback.values[1], lam[1])
        mask[0] = bad & fallback.degenerate[0]
        mask[1] = bad & fallback.degenerate[1]
    return WeightField(values=lam, degenerate=mask)


@dataclass
class LevelEnsembles:
    """Model h evaluated on the two sample sets it participates in.

    on_coarse lives on the M_{h-1} set (shared with model h-1), on_fine on
    the M_h set (shared with model h+1, or with the full model at h = L).
    """

    on_coarse: SampleEnsemble
    on_fine: SampleEnsemble

    def __post_init__(self):
        if self.on_coarse.m < self.on_fine.m:
            raise ValueError("hierarchy needs M_{h-1} >= M_h")


@dataclass
class ChainStats:
    """Per-level variances and adjacent covariances of a CV hierarchy.

    var[h] = Var(f_{h+1-based}); adj[h] = Cov(f_{h+1}, f_h) with f_{L+1} = f,
    both estimated on the M_h sample set where the pair coexists.
    """

    var: np.ndarray
    adj: np.ndarray

    def __post_init__(self):
        self.var = np.asarray(self.var, dtype=float)
        self.adj = np.asarray(self.adj, dtype=float)
        if self.var.shape != self.adj.shape:
            raise ValueError("chain stats shapes disagree")

    @property
    def levels(self) -> int:
        return self.var.shape[0]


def _check_chain(cv_ens_chain, f_ens: SampleEnsemble) -> None:
    L = len(cv_ens_chain)
    if L < 1:
        raise ValueError("need at least one control variate")
    for h in range(L):
        fine = cv_ens_chain[h].on_fine
        nxt = cv_ens_chain[h + 1].on_coarse if h + 1 < L else f_ens
        if fine.m != nxt.m:
            raise ValueError("missing level evaluations")
        if fine.sample_set is not None and nxt.sample_set is not None:
            if not fine.sample_set.same_draws(nxt.sample_set):
                raise ValueError("sample sets differ")


def chain_stats(cv_ens_chain, f_ens: SampleEnsemble) -> ChainStats:
    """Sample statistics per recursion stage, each on its own M_h set."""
    _check_chain(cv_ens_chain, f_ens)
    L = len(cv_ens_chain)
    shape = f_ens.values.shape[1:]
    var = np.empty((L,) + shape)
    adj = np.empty((L,) + shape)
    for h in range(L):
        fine = cv_ens_chain[h].on_fine
        nxt = cv_ens_chain[h + 1].on_coarse if h + 1 < L else f_ens
        var[h] = sample_variance(fine)
        adj[h] = sample_covariance(nxt, fine)
    return ChainStats(var=var, adj=adj)


def _quasi_from_stats(stats: ChainStats):
    L = stats.levels
    hats = np.empty_like(stats.var)
    mask = np.empty(stats.var.shape, dtype=bool)
    for h in range(L):
        hats[h], mask[h] = _ratio_with_degenerate(stats.adj[h], stats.var[h])
    composites = np.empty_like(hats)
    running = np.ones(stats.var.shape[1:])
    for h in range(L - 1, -1, -1):
        running = running * hats[h]
        composites[h] = running
    return hats, composites, mask


def recursive_weights_quasi(cv_ens_chain, f_ens: SampleEnsemble) -> WeightField:
    """Stage-local hats Cov_{M_h}(f_{h+1},f_h)/Var_{M_h}(f_h) and their products."""
    stats = chain_stats(cv_ens_chain, f_ens)
    hats, composites, mask = _quasi_from_stats(stats)
    return WeightField(values=composites, degenerate=mask, stage_values=hats)


def recursive_weights_optimal(stats: ChainStats, sample_counts) -> WeightField:
    """Variance-minimizing composites from the tridiagonal stationarity system.

    Boundary conventions lambda_0 = 0, lambda_{L+1} = 1; mu_h weighs the
    sample split M_h/(M_{h-1}+M_h). A singular system falls back to the
    quasi-optimal products with a warning.
    """
    L = stats.levels
    counts = [float(m) for m in sample_counts]
    if len(counts) != L + 1:
        raise ValueError("need sample counts M_0..M_L")
    if any(m < 1 for m in counts):
        raise ValueError("insufficient samples")
    mu = np.array([counts[h + 1] / (counts[h] + counts[h + 1]) for h in range(L)])

    shape = stats.var.shape[1:]
    mu = mu.reshape((L,) + (1,) * len(shape))
    diag = stats.var.copy()
    sub = np.zeros_like(diag)
    sup = np.zeros_like(diag)
    rhs = np.zeros_like(diag)
    sub[1:] = -mu[1:] * stats.adj[:-1]
    sup[:-1] = -(1.0 - mu[:-1]) * stats.adj[:-1]
    rhs[L - 1] = (1.0 - mu[L - 1]) * stats.adj[L - 1]
    try:
        values = solve_tridiagonal(diag, sub, sup, rhs)
    except ValueError:
        warnings.warn("singular tridiagonal system; using quasi-optimal weights",
                      RuntimeWarning, stacklevel=2)
        hats, composites, mask = _quasi_from_stats(stats)
        return WeightField(values=composites, degenerate=mask, stage_values=hats)
    return WeightField(values=values)


def recursive_weights_unit(stats: ChainStats) -> WeightField:
    # lambda_h = 1 for all levels turns the recursion into plain MLMC
    return WeightField(values=np.ones_like(stats.var))


def recursive_weights_from_stats(stats: ChainStats, mode: str, sample_counts=None) -> WeightField:
    """Composite weights straight from precomputed chain statistics.

    mode is "quasi", "optimal" or "unit". Lets callers that stream large
    coarse-level ensembles (keeping only their statistics) reuse the same
    weight rules as the in-memory recursion helpers.
    """
    if mode == "quasi":
        hats, composites, mask = _quasi_from_stats(stats)
        return WeightField(values=composites, degenerate=mask, stage_values=hats)
    if mode == "unit":
        return recursive_weights_unit(stats)
    if mode == "optimal":
        if sample_counts is None:
            raise ValueError("need sample counts M_0..M_L")
        return recursive_weights_optimal(stats, sample_counts)
    raise ValueError("unknown weight mode %r" % (mode,))


def recursive_estimate(f_ens: SampleEnsemble, cv_ens_chain, weights) -> EstimatorOutput:
    """E_{M_L}[f] - sum_h lambda_h (E_{M_h}[f_h] - E_{M_{h-1}}[f_h])."""
    t0 = time.perf_counter()
    _check_chain(cv_ens_chain, f_ens)
    L = len(cv_ens_chain)
    values = _weight_values(weights, L)

    mean = mc_mean(f_ens).copy()
    for h in range(L):
        level = cv_ens_chain[h]
        mean -= values[h] * (mc_mean(level.on_fine) - mc_mean(level.on_coarse))

    # estimator variance from the independence of the per-level sample sets
    counts = [cv_ens_chain[0].on_coarse.m] + [lv.on_fine.m for lv in cv_ens_chain]
    stats = chain_stats(cv_ens_chain, f_ens)
    var_next = np.concatenate([stats.var[1:], sample_variance(f_ens)[None]], axis=0)
    lam_next = np.concatenate([values[1:], np.ones((1,) + values.shape[1:])], axis=0)
    variance = values[0] ** 2 * stats.var[0] / counts[0]
    for h in range(L):
        variance += (lam_next[h] ** 2 * var_next[h] + values[h] ** 2 * stats.var[h]
                     - 2.0 * lam_next[h] * values[h] * stats.adj[h]) / counts[h + 1]

    return EstimatorOutput(
        mean=mean,
        weights=weights if isinstance(weights, WeightField) else WeightField(values=values),
        variance=variance,
        sample_counts=tuple(counts),
        wall_time=time.perf_counter() - t0,
    )


def me_correction(lam: WeightField, m: int, m_e: int, source: str = "ensemble") -> WeightField:
    """Finite-M_E attenuation M_E/(M+M_E); identity for analytic expectations."""
    if m < 1 or m_e < 1:
        raise ValueError("insufficient samples")
    if source == "analytic":
        return lam
    factor = m_e / (m + m_e)
    return WeightField(values=lam.values * factor, granularity=lam.granularity,
                       degenerate=lam.degenerate.copy(),
                       stage_values=None if lam.stage_values is None else lam.stage_values * factor)


def moment_lambda(f_moment_ens: SampleEnsemble, cv_moment_ens: SampleEnsemble) -> WeightField:
    """Optimal weight for one moment field, a single value per spatial cell."""
    cov = sample_covariance(f_moment_ens, cv_moment_ens)
    var = sample_variance(cv_moment_ens)
    lam, mask = _ratio_with_degenerate(cov, var)
    return WeightField(values=lam[None], granularity="moment", degenerate=mask[None])


@dataclass
class PipelineConfig:
    """Everything run_pipeline needs: models as callables over z-samples.

    truth(z_values) and each control model(z_values) return stacked fields
    of shape (len(z),) + field shape. Expectations for analytic sources are
    computed by Gauss-Legendre quadrature of the model over z in [0,1].
    """

    truth: object
    controls: list  # (ControlVariateSpec, model callable) pairs
    samples: object  # M for alg_3_2/alg_3_8, (M_0, ..., M_L) for alg_3_6
    seed: int = 0
    m_e: int = 0
    weights: str = "optimal"  # optimal | quasi | unit
    force_lambda: object = None
    me_correct: bool = True


def _gauss_legendre_expectation(model, order: int) -> np.ndarray:
    z, w = gauss_legendre(order)
    vals = np.asarray(model(z), dtype=float)
    return np.tensordot(w, vals, axes=(0, 0))


def _ensemble(model, sset, label="") -> SampleEnsemble:
    return SampleEnsemble(values=np.asarray(model(sset.values), dtype=float),
                          sample_set=sset, label=label)


def run_pipeline(algorithm: str, config: PipelineConfig) -> EstimatorOutput:
    """Sampling, solving, and estimating staged per the named algorithm.

    alg_3_2: multiple CV on one M-sample set, weights from that set.
    alg_3_6: recursive hierarchy on nested independent sets M_0 > ... > M_L.
    alg_3_8: multiple CV with C from the M_E set and b from the M set.
    """
    t0 = time.perf_counter()
    evals = {}

    def draw(n, sid):
        if n < 1:
            raise ValueError("empty sample request")
        return draw_uniform(SeededStream(config.seed, sid), n)

    if algorithm == "alg_3_2":
        m = int(config.samples)
        sset = draw(m, 0)
        cv_list = [_ensemble(model, sset, spec.label) for spec, model in config.controls]
        f_ens = _ensemble(config.truth, sset, "truth")
        for spec, _ in config.controls:
            evals[spec.label] = m
        evals["truth"] = m

        expects = []
        for sid, ((spec, model), ens) in enumerate(zip(config.controls, cv_list), start=1):
            if spec.expectation_source == "analytic":
                expects.append(_gauss_legendre_expectation(model, spec.quad_nodes))
                evals[spec.label] += spec.quad_nodes
            else:
                eset = draw(spec.m_e, sid)
                expects.append(mc_mean(_ensemble(model, eset)))
                evals[spec.label] += spec.m_e

        if config.force_lambda is not None:
            lam = config.force_lambda
        else:
            lam = optimal_lambda_multi(f_ens, cv_list)
            if config.me_correct:
                for h, (spec, _) in enumerate(config.controls):
                    if spec.expectation_source == "ensemble":
                        lam.values[h] *= spec.m_e / (m + spec.m_e)
        out = cv_estimate_multi(f_ens, cv_list, expects, lam)

    elif algorithm == "alg_3_6":
        counts = [int(mh) for mh in config.samples]
        L = len(counts) - 1
        if L < 1:
            raise ValueError("need sample counts M_0..M_L")
        if any(a <= b for a, b in zip(counts, counts[1:])):
            raise ValueError("hierarchy needs M_0 > M_1 > ... > M_L")
        if len(config.controls) != L:
            raise ValueError("need one control model per hierarchy level")
        sets = [draw(mh, h) for h, mh in enumerate(counts)]
        chain = []
        for h, (spec, model) in enumerate(config.controls):
            chain.append(LevelEnsembles(
                on_coarse=_ensemble(model, sets[h], spec.label),
                on_fine=_ensemble(model, sets[h + 1], spec.label),
            ))
            evals[spec.label] = counts[h] + counts[h + 1]
        f_ens = _ensemble(config.truth, sets[L], "truth")
        evals["truth"] = counts[L]

        if config.force_lambda is not None:
            lam = config.force_lambda
        elif config.weights == "quasi":
            lam = recursive_weights_quasi(chain, f_ens)
        elif config.weights == "unit":
            lam = recursive_weights_unit(chain_stats(chain, f_ens))
        else:
            lam = recursive_weights_optimal(chain_stats(chain, f_ens), counts)
        out = recursive_estimate(f_ens, chain, lam)

    elif algorithm == "alg_3_8":
        m = int(config.samples)
        if config.m_e < 1:
            raise ValueError("alg_3_8 needs M_E >= 1")
        eset = draw(config.m_e, 0)
        sset = draw(m, 1)
        cv_e = [_ensemble(model, eset, spec.label) for spec, model in config.controls]
        cv_m = [_ensemble(model, sset, spec.label) for spec, model in config.controls]
        f_ens = _ensemble(config.truth, sset, "truth")
        for spec, _ in config.controls:
            evals[spec.label] = m + config.m_e
        evals["truth"] = m
        expects = [mc_mean(e) for e in cv_e]

        if config.force_lambda is not None:
            lam = config.force_lambda
        else:
            # C from the large M_E ensemble, b from the M ensemble
            L = len(cv_e)
            shape = f_ens.values.shape[1:]
            matrix = np.empty((L, L) + shape)
            vector = np.empty((L,) + shape)
            for i in range(L):
                vector[i] = sample_covariance(f_ens, cv_m[i])
                for j in range(i + 1):
                    cij = sample_covariance(cv_e[i], cv_e[j])
                    matrix[i, j] = cij
                    matrix[j, i] = cij
            values, mask = solve_cov_system(matrix, vector)
            lam = WeightField(values=values, degenerate=mask)
            if config.me_correct:
                lam.values *= config.m_e / (m + config.m_e)
        out = cv_estimate_multi(f_ens, cv_m, expects, lam)

    else:
        raise ValueError("unknown algorithm %r" % (algorithm,))

    out.model_evals = evals
    out.wall_time = time.perf_counter() - t0
    return out
