"""End-to-end uncertainty experiments: the three canonical test problems.

Test 1 is space-homogeneous relaxation of a two-bump datum, Test 2 a shock
tube with uncertain initial temperature, Test 3 sudden heating at a diffusive
wall. All share one pipeline: draw z samples, advance every model the chosen
estimator needs on a common time grid, assemble the estimate at each output
checkpoint and record its relative L2 error against a quadrature reference
that is cached on disk.

Sample sets are drawn from per-repetition streams (seed + 1 + rep, one stream
id per role), so estimators that run together share their ensembles and a
rerun with the same config reproduces the same numbers bit for bit.
"""

import csv
import hashlib
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .estimators import (ChainStats, LevelEnsembles, WeightField, chain_stats,
                         cv_estimate_multi, cv_estimate_single, me_correction,
                         optimal_lambda_single, recursive_estimate,
                         recursive_weights_from_stats, two_cv_closed_form)
from .phase_space import (MomentVector, SpatialGrid, VelocityGrid, l2_error,
                          maxwellian, moments)
from .random_inputs import SeededStream, draw_uniform, gauss_legendre
from .solvers.bgk import BgkConfig, NuLaw, bgk_step, max_dt, parse_nu_law
from .solvers.boltzmann import (BoltzmannConfig, boltzmann_rk4_step,
                                boltzmann_step_rk2, build_tables)
from .solvers.boundaries import BoundarySpec, EulerGhostFiller, KineticGhostFiller
from .solvers.euler import (euler_equilibrium, euler_from_moments,
                            euler_primitives, euler_step, moments_from_euler)
from .stats import (SampleEnsemble, mc_mean, sample_covariance,
                    sample_variance, solve_cov_system)

__all__ = ["QUANTITIES", "ESTIMATORS", "CSV_HEADER", "ExperimentConfig",
           "ErrorRecord", "ReferenceSolution", "CostModel", "cost_model",
           "estimator_tallies", "resolve_config", "initial_datum",
           "boundary_spec", "euler_datum", "equilibrium_mean",
           "two_level_estimate", "reference_solution", "run_test1",
           "run_test2", "run_test3", "run_experiment", "write_csv", "read_csv"]

QUANTITIES = ("distribution", "density", "temperature")
ESTIMATORS = ("mc", "mscv", "mscv2", "mscvh2", "mlmc")
CSV_HEADER = ("time", "estimator", "quantity", "error", "cost")

# bumped when solver numerics change; part of the reference cache key
SOLVER_VERSION = "2"

_HIERARCHICAL = ("mscvh2", "mlmc")
_TEST_S = {1: 0.2, 2: 0.25, 3: 0.2}
_TEST_TF = {1: 10.0, 2: 0.875, 3: 0.8}

TEST1_RHO0 = 0.125
TEST1_SIGMA = 0.5
TEST1_MASS = TEST1_RHO0 * TEST1_SIGMA


# ---------------------------------------------------------------- configs

@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: test problem, estimator, sampling plan, grids.

    Fields left at None are filled with per-test defaults by resolve_config.
    cv_samples is (M_E,) for the plain control-variate estimators and
    (M_0, M_1) for the hierarchical ones.
    """

    test: int
    estimator: str = "mc"
    samples: int = None
    cv_samples: tuple = ()
    epsilon: float = None
    nx: int = 100
    nv: int = 32
    vmax: float = 8.0
    tf: float = None
    dt: float = None
    nu_law: str = None
    repeats: int = 10
    seed: int = 0
    weights: str = "quasi"
    truth: str = "boltzmann"
    quad_order: int = 32
    checkpoints: int = 25
    cache_dir: str = None
    out: str = None

    def __post_init__(self):
        if self.test not in (1, 2, 3):
            raise ValueError("test must be 1, 2 or 3")
        if self.estimator not in ESTIMATORS:
            raise ValueError("unknown estimator %r" % (self.estimator,))
        object.__setattr__(self, "cv_samples",
                           tuple(int(c) for c in self.cv_samples))
        if any(c < 1 for c in self.cv_samples):
            raise ValueError("insufficient samples")
        if self.samples is not None:
            if int(self.samples) < 1:
                raise ValueError("insufficient samples")
            object.__setattr__(self, "samples", int(self.samples))
        for name in ("epsilon", "tf", "dt"):
            value = getattr(self, name)
            if value is not None:
                value = float(value)
                if not np.isfinite(value) or value <= 0.0:
                    raise ValueError("%s must be positive" % name)
                object.__setattr__(self, name, value)
        if self.nx < 1 or self.nv < 2:
            raise ValueError("grid sizes are too small")
        if self.vmax <= 0.0:
            raise ValueError("vmax must be positive")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.weights not in ("quasi", "optimal", "unit"):
            raise ValueError("unknown weight mode %r" % (self.weights,))
        if self.truth not in ("boltzmann", "bgk"):
            raise ValueError("unknown truth model %r" % (self.truth,))
        if not 1 <= self.quad_order <= 64:
            raise ValueError("unsupported quadrature order")
        if self.checkpoints < 2:
            raise ValueError("need at least two output checkpoints")


def _estimator_list(cfg, estimators):
    ests = tuple(estimators) if estimators is not None else (cfg.estimator,)
    if not ests:
        raise ValueError("need at least one estimator")
    if len(set(ests)) != len(ests):
        raise ValueError("duplicate estimator requested")
    for e in ests:
        if e not in ESTIMATORS:
            raise ValueError("unknown estimator %r" % (e,))
    return ests


def _resolve_physics(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill the per-test solver defaults (no sampling-plan checks)."""
    kinetic = cfg.test != 1
    samples = cfg.samples if cfg.samples is not None else (10 if kinetic else 100)
    epsilon = cfg.epsilon if cfg.epsilon is not None else (1e-2 if kinetic else 1.0)
    tf = cfg.tf if cfg.tf is not None else _TEST_TF[cfg.test]
    nu_law = cfg.nu_law if cfg.nu_law is not None else ("rho" if kinetic else "const:1")
    parse_nu_law(nu_law)
    if cfg.dt is not None:
        dt = cfg.dt
    elif kinetic:
        dt = max_dt(SpatialGrid(cfg.nx), VelocityGrid(cfg.nv, cfg.vmax), epsilon)
    else:
        dt = min(0.05, epsilon)
    return replace(cfg, samples=samples, epsilon=epsilon, tf=tf, dt=dt,
                   nu_law=nu_law)


def resolve_config(cfg: ExperimentConfig, estimators=None) -> ExperimentConfig:
    """Fill per-test defaults and cross-check the sampling plan.

    estimators lists everything that will run off this config (they share
    sample sets); defaults to just cfg.estimator. When hierarchical and
    plain CV estimators run together, the M_1 set doubles as the
    expectation set, so cv_samples stays (M_0, M_1).
    """
    ests = _estimator_list(cfg, estimators)
    cfg = _resolve_physics(cfg)
    kinetic = cfg.test != 1
    samples = cfg.samples

    hier = any(e in _HIERARCHICAL for e in ests)
    pair = any(e in ("mscv", "mscv2") for e in ests)
    cv = cfg.cv_samples
    if hier:
        if not cv:
            cv = (10000, 100) if kinetic else (10000, 1000)
        if len(cv) != 2 or not (cv[0] > cv[1] > samples):
            raise ValueError("hierarchy needs M_0 > M_1 > ... > M_L")
    elif pair:
        if not kinetic:
            if cv:
                raise ValueError("test 1 control expectations are analytic")
        else:
            if not cv:
                cv = (100,)
            if len(cv) != 1:
                raise ValueError("plain control variates share one expectation sample set")
    elif cv:
        raise ValueError("mc takes no control variates")
    if (hier or pair) and samples < 2:
        raise ValueError("insufficient samples")
    return replace(cfg, cv_samples=cv)


@dataclass(frozen=True)
class ErrorRecord:
    """One CSV row: relative L2 error of an estimator at one output time."""

    time: float
    estimator: str
    quantity: str
    error: float
    cost: float

    def __post_init__(self):
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "error", float(self.error))
        object.__setattr__(self, "cost", float(self.cost))
        if self.quantity not in QUANTITIES:
            raise ValueError("unknown quantity %r" % (self.quantity,))
        if not self.estimator:
            raise ValueError("estimator label must be nonempty")
        if not all(np.isfinite(v) and v >= 0.0
                   for v in (self.time, self.error, self.cost)):
            raise ValueError("record fields must be finite and nonnegative")


# ------------------------------------------------------------- cost model

C_FULL = 1.0
C_CV = 0.8
C_LIMIT = 1.0


@dataclass(frozen=True)
class CostModel:
    """Analytic per-sample solver costs.

    The full model pays the fast spectral collision sum
    (angles^(d_v-1) N_v^d_v log N_v^d_v) per cell, the relaxation control
    variate one local Maxwellian per cell, the limit model one cell update.
    The constants keep cost(full)/cost(cv) = 100 at the default grids.
    """

    nx: int = 100
    nv: int = 32
    n_angles: int = 8
    d_x: int = 1
    d_v: int = 2

    def __post_init__(self):
        if self.nx < 1 or self.nv < 2 or self.n_angles < 1:
            raise ValueError("grid sizes are too small")
        if self.d_x < 0 or self.d_v < 1:
            raise ValueError("bad dimension count")

    def full_per_sample(self) -> float:
        nv_d = float(self.nv) ** self.d_v
        return (C_FULL * float(self.n_angles) ** (self.d_v - 1)
                * nv_d * np.log2(nv_d) * float(self.nx) ** self.d_x)

    def cv_per_sample(self) -> float:
        return C_CV * float(self.nv) ** self.d_v * float(self.nx) ** self.d_x

    def limit_per_sample(self) -> float:
        return C_LIMIT * float(self.nx) ** self.d_x


def cost_model(tallies: dict, model: CostModel) -> dict:
    """Analytic cost of the tallied solver evaluations, by class and total.

    tallies maps "full"/"cv"/"limit" to evaluation counts; a "wall_time"
    entry passes through unscaled so measured seconds can ride along
    without entering the analytic total.
    """
    per = {"full": model.full_per_sample(), "cv": model.cv_per_sample(),
           "limit": model.limit_per_sample()}
    unknown = set(tallies) - set(per) - {"wall_time"}
    if unknown:
        raise ValueError("unknown cost tally %r" % (sorted(unknown)[0],))
    report = {}
    for name, unit in per.items():
        count = float(tallies.get(name, 0))
        if count < 0:
            raise ValueError("cost tallies must be nonnegative")
        report[name] = count * unit
    report["total"] = report["full"] + report["cv"] + report["limit"]
    report["wall_time"] = float(tallies.get("wall_time", 0.0))
    return report


def estimator_tallies(cfg: ExperimentConfig, estimators=None) -> dict:
    """Per-repetition solver evaluation counts by cost class, per estimator.

    Test 1 controls are closed-form in time, so only the full-model ensemble
    is tallied there.
    """
    ests = _estimator_list(cfg, estimators)
    cfg = resolve_config(cfg, ests)
    m = cfg.samples
    hier = any(e in _HIERARCHICAL for e in ests)
    out = {}
    for e in ests:
        if cfg.test == 1 or e == "mc":
            out[e] = {"full": m}
        elif e in _HIERARCHICAL:
            m0, m1 = cfg.cv_samples
            out[e] = {"full": m, "cv": m + m1, "limit": m0 + m1}
        else:
            m_e = cfg.cv_samples[1] if hier else cfg.cv_samples[0]
            n_cv = 2 if e == "mscv2" else 1
            out[e] = {"full": m, "cv": n_cv * (m + m_e)}
    return out


# ------------------------------------------------------------- test data

def _test1_datum(z, vgrid, s):
    z = np.asarray(z, dtype=float)[:, None, None]
    cp = 2.0 + s * z
    cm = 1.0 + s * z
    v1 = vgrid.v1[None]
    v2 = vgrid.v2[None]
    bump_p = np.exp(-((v1 - cp) ** 2 + (v2 - cp) ** 2) / TEST1_SIGMA)
    bump_m = np.exp(-((v1 + cm) ** 2 + (v2 + cm) ** 2) / TEST1_SIGMA)
    return TEST1_RHO0 / (2.0 * np.pi) * (bump_p + bump_m)


def _test2_moments(z, xgrid, s):
    z = np.asarray(z, dtype=float)[:, None]
    left = (xgrid.centers < 0.5)[None, :]
    rho = np.where(left, 1.0, 0.125) * np.ones_like(z)
    T = np.where(left, 1.0 + s * z, 0.8 + s * z)
    return MomentVector(rho=rho, u1=np.zeros_like(rho), u2=np.zeros_like(rho), T=T)


def _test3_moments(n_samples, xgrid):
    one = np.ones((n_samples, xgrid.n))
    return MomentVector(rho=one, u1=np.zeros_like(one), u2=np.zeros_like(one),
                        T=one.copy())


def _test3_wall_temp(z, s):
    return 2.0 * (1.0 + s * np.asarray(z, dtype=float))


def initial_datum(test: int, z, vgrid: VelocityGrid, xgrid: SpatialGrid = None,
                  s: float = None) -> np.ndarray:
    """Initial kinetic datum of the given test evaluated at samples z.

    Test 1 returns (B, N, N) two-bump fields; tests 2 and 3 return
    (B, nx, N, N) local Maxwellians and need a spatial grid. s overrides the
    perturbation amplitude (s = 0 gives the unperturbed datum).
    """
    s_val = _TEST_S[test] if s is None else float(s)
    z = np.asarray(z, dtype=float)
    if test == 1:
        return _test1_datum(z, vgrid, s_val)
    if xgrid is None:
        raise ValueError("tests 2 and 3 need a spatial grid")
    if test == 2:
        return maxwellian(_test2_moments(z, xgrid, s_val), vgrid)
    return maxwellian(_test3_moments(len(z), xgrid), vgrid)


def boundary_spec(test: int, z, s: float = None) -> BoundarySpec:
    """Boundary conditions of the given test for samples z.

    Test 2 lets both ends outflow; test 3 heats through a diffusive left
    wall at temperature 2(1 + s z) and outflows on the right.
    """
    if test == 2:
        return BoundarySpec(left="transmissive", right="transmissive")
    if test == 3:
        s_val = _TEST_S[3] if s is None else float(s)
        return BoundarySpec(left="wall", right="transmissive",
                            wall_temp=_test3_wall_temp(z, s_val))
    raise ValueError("test %r has no spatial boundaries" % (test,))


def euler_datum(test: int, z, xgrid: SpatialGrid, s: float = None) -> np.ndarray:
    """Conservative limit-model datum (B, 4, nx) matching initial_datum."""
    s_val = _TEST_S[test] if s is None else float(s)
    z = np.asarray(z, dtype=float)
    if test == 2:
        return euler_from_moments(_test2_moments(z, xgrid, s_val))
    if test == 3:
        return euler_from_moments(_test3_moments(len(z), xgrid))
    raise ValueError("test %r has no fluid limit datum" % (test,))


# ------------------------------------------------------------- advancers

class _StepAdvancer:
    """Carries a batched state to requested times with steps of at most dt."""

    def __init__(self, state, step, dt):
        self.state = np.array(state, dtype=float)
        self.step = step
        self.dt = float(dt)
        self.t = 0.0

    def to(self, target):
        target = float(target)
        span = target - self.t
        if span < -1e-12:
            raise ValueError("output times must be ascending")
        if span > 1e-14:
            n = max(1, int(np.ceil(span / self.dt - 1e-9)))
            h = span / n
            for _ in range(n):
                self.state = self.step(self.state, h)
            self.t = target
        return self.state


class _ExactAdvancer:
    """Evaluates a closed-form trajectory lazily at each requested time."""

    def __init__(self, evaluate):
        self.evaluate = evaluate

    def to(self, target):
        return self.evaluate(float(target))


def _homogeneous_bgk_advancer(f0, vgrid, law: NuLaw, epsilon):
    mom = moments(f0, vgrid)
    finf = maxwellian(mom, vgrid)
    if law.proportional:
        nu = (law.coeff * mom.rho)[:, None, None] / epsilon
    else:
        nu = law.coeff / epsilon

    def evaluate(t):
        return finf + np.exp(-nu * t) * (f0 - finf)

    return _ExactAdvancer(evaluate)


def _kinetic_step_advancer(cfg, model, f0, bc, vgrid, xgrid, tables, law):
    filler = KineticGhostFiller(bc, vgrid)
    if model == "bgk":
        bcfg = BgkConfig(nu=law, epsilon=cfg.epsilon)

        def step(f, h):
            return bgk_step(f, bcfg, h, bc, vgrid, xgrid, filler)
    else:
        def step(f, h):
            return boltzmann_step_rk2(f, tables, h, cfg.epsilon, bc, xgrid, filler)
    return _StepAdvancer(f0, step, cfg.dt)


def _truth_tables(cfg, vgrid):
    if cfg.truth != "boltzmann":
        return None
    if cfg.test == 1:
        # amplitude tuned so the slowest relaxation mode of the two-bump
        # datum decays at about unit rate; 16 angle nodes keep the discrete
        # equilibrium within a few 1e-4 of the grid Maxwellian
        b0 = 3.05 / (2.0 * np.pi * TEST1_MASS)
        return build_tables(vgrid, BoltzmannConfig(n_modes=vgrid.n,
                                                   n_angles=16, b0=b0))
    return build_tables(vgrid, BoltzmannConfig(n_modes=vgrid.n))


def _truth_advancer(cfg, z, vgrid, xgrid, tables, s):
    if cfg.test == 1:
        f0 = _test1_datum(z, vgrid, s)
        if cfg.truth == "bgk":
            return _homogeneous_bgk_advancer(f0, vgrid, parse_nu_law(cfg.nu_law),
                                             cfg.epsilon)

        def step(f, h):
            return boltzmann_rk4_step(f, tables, h, cfg.epsilon)

        return _StepAdvancer(f0, step, cfg.dt)
    f0 = initial_datum(cfg.test, z, vgrid, xgrid, s)
    bc = boundary_spec(cfg.test, z, s)
    model = "bgk" if cfg.truth == "bgk" else "boltzmann"
    return _kinetic_step_advancer(cfg, model, f0, bc, vgrid, xgrid, tables,
                                  parse_nu_law(cfg.nu_law))


# ------------------------------------------------------------- reference

@dataclass(frozen=True)
class ReferenceSolution:
    """Quadrature expectation of the truth model on the output time grid."""

    times: np.ndarray
    distribution: np.ndarray
    density: np.ndarray
    temperature: np.ndarray

    def table(self) -> dict:
        return {"distribution": self.distribution, "density": self.density,
                "temperature": self.temperature}


def _times_array(cfg, times):
    if times is None:
        return np.linspace(0.0, cfg.tf, cfg.checkpoints)
    arr = np.asarray(times, dtype=float)
    if arr.ndim != 1 or arr.size < 1 or np.any(arr < 0) or np.any(np.diff(arr) <= 0):
        raise ValueError("output times must be nonnegative and ascending")
    return arr


def _field_table(states, vgrid):
    mom = moments(states, vgrid)
    return {"distribution": states, "density": mom.rho, "temperature": mom.T}


def _quad_table(weights, table):
    return {q: np.tensordot(weights, v, axes=(0, 0)) for q, v in table.items()}


def _cache_dir(cfg):
    root = (cfg.cache_dir or os.environ.get("KINUQ_CACHE_DIR")
            or os.path.join(os.path.expanduser("~"), ".cache", "kinuq"))
    os.makedirs(root, exist_ok=True)
    return root


def _reference_key(cfg, times, s):
    payload = {
        "version": SOLVER_VERSION,
        "test": cfg.test,
        "truth": cfg.truth,
        "epsilon": repr(cfg.epsilon),
        "tf": repr(cfg.tf),
        "dt": repr(cfg.dt),
        "nx": cfg.nx if cfg.test != 1 else 0,
        "nv": cfg.nv,
        "vmax": repr(float(cfg.vmax)),
        "nu_law": cfg.nu_law,
        "order": cfg.quad_order,
        "s": repr(float(s)),
        "times": [repr(float(t)) for t in times],
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _accumulate_reference(cfg, t_out, z, weights, vgrid, xgrid, tables, s):
    adv = _truth_advancer(cfg, z, vgrid, xgrid, tables, s)
    n_out = len(t_out)
    dist = rho = temp = None
    for j, t in enumerate(t_out):
        tab = _field_table(adv.to(t), vgrid)
        if dist is None:
            dist = np.zeros((n_out,) + tab["distribution"].shape[1:])
            rho = np.zeros((n_out,) + tab["density"].shape[1:])
            temp = np.zeros((n_out,) + tab["temperature"].shape[1:])
        dist[j] = np.tensordot(weights, tab["distribution"], axes=(0, 0))
        rho[j] = np.tensordot(weights, tab["density"], axes=(0, 0))
        temp[j] = np.tensordot(weights, tab["temperature"], axes=(0, 0))
    return dist, rho, temp


def reference_solution(cfg: ExperimentConfig, times=None, s=None) -> ReferenceSolution:
    """Gauss-Legendre expectation of the truth model at the output times.

    The temperature reference is the expectation of the per-sample
    temperature (not the temperature of the mean state). Results are cached
    on disk under a key covering everything that shapes the numbers; a
    quadrature node whose solve fails is identified by index in the error.
    """
    cfg = _resolve_physics(cfg)
    t_out = _times_array(cfg, times)
    s_val = _TEST_S[cfg.test] if s is None else float(s)
    path = os.path.join(_cache_dir(cfg),
                        "ref-%s.npz" % _reference_key(cfg, t_out, s_val))
    if os.path.exists(path):
        data = np.load(path)
        return ReferenceSolution(times=data["times"],
                                 distribution=data["distribution"],
                                 density=data["density"],
                                 temperature=data["temperature"])
    nodes, weights = gauss_legendre(cfg.quad_order)
    vgrid = VelocityGrid(cfg.nv, cfg.vmax)
    xgrid = SpatialGrid(cfg.nx) if cfg.test != 1 else None
    tables = _truth_tables(cfg, vgrid)
    try:
        dist, rho, temp = _accumulate_reference(cfg, t_out, nodes, weights,
                                                vgrid, xgrid, tables, s_val)
    except ValueError:
        for i in range(len(nodes)):
            try:
                _accumulate_reference(cfg, t_out, nodes[i:i + 1], np.ones(1),
                                      vgrid, xgrid, tables, s_val)
            except ValueError as err:
                raise ValueError("reference z-node %d: %s" % (i, err)) from err
        raise
    tmp = "%s.tmp-%d.npz" % (path[:-4], os.getpid())
    np.savez_compressed(tmp, times=t_out, distribution=dist, density=rho,
                        temperature=temp)
    os.replace(tmp, path)
    return ReferenceSolution(times=t_out, distribution=dist, density=rho,
                             temperature=temp)


# ----------------------------------------------------- estimator assembly

def _split_weights(f_ens, cv_on_m, cv_on_exp, granularity):
    """Normal-equation weights from split ensembles, attenuated for finite M_E.

    The covariance matrix of the controls comes from the expectation
    ensemble, the covariances against the target from the estimate ensemble.
    """
    n_cv = len(cv_on_m)
    shape = f_ens.values.shape[1:]
    matrix = np.empty((n_cv, n_cv) + shape)
    vector = np.empty((n_cv,) + shape)
    for i in range(n_cv):
        vector[i] = sample_covariance(f_ens, cv_on_m[i])
        for j in range(i + 1):
            cij = sample_covariance(cv_on_exp[i], cv_on_exp[j])
            matrix[i, j] = cij
            matrix[j, i] = cij
    values, mask = solve_cov_system(matrix, vector)
    wf = WeightField(values=values, granularity=granularity, degenerate=mask)
    return me_correction(wf, m=f_ens.m, m_e=cv_on_exp[0].m)


def _chain_weights(estimator, cfg, chain, f_ens, counts):
    mode = "unit" if estimator == "mlmc" else cfg.weights
    return recursive_weights_from_stats(chain_stats(chain, f_ens), mode, counts)


def two_level_estimate(f_ens, f1_on_m1, f2_on_m1, f2_on_m, coarse_mean,
                       mode, counts):
    """Two-level recursion where only the coarsest-level MEAN is available.

    Matches recursive_estimate on the same inputs; used when the M_0
    ensemble is streamed (equilibrium lifts of a large fluid batch) and
    only its mean survives. Returns (estimate, weights).
    """
    if f1_on_m1.m < f2_on_m.m:
        raise ValueError("hierarchy needs M_{h-1} >= M_h")
    stats = ChainStats(
        var=np.stack([sample_variance(f1_on_m1), sample_variance(f2_on_m)]),
        adj=np.stack([sample_covariance(f2_on_m1, f1_on_m1),
                      sample_covariance(f_ens, f2_on_m)]),
    )
    wf = recursive_weights_from_stats(stats, mode, counts)
    mean = (mc_mean(f_ens)
            - wf.values[1] * (mc_mean(f2_on_m) - mc_mean(f2_on_m1))
            - wf.values[0] * (mc_mean(f1_on_m1) - np.asarray(coarse_mean, dtype=float)))
    return mean, wf


def equilibrium_mean(U, vgrid: VelocityGrid, with_sq=False, chunk=2048):
    """Sample mean of the lifted Maxwellians of a fluid batch, streamed.

    The Maxwellian factorizes over the two velocity axes, so each chunk
    reduces to one outer-product contraction and the (B, nx, N, N) lift is
    never materialized. With with_sq=True also returns the mean of squares
    (for pointwise standard errors).
    """
    rho, u1, u2, T = euler_primitives(U)
    n_samples, nx = rho.shape
    nodes = vgrid.nodes
    mean = np.zeros((nx, vgrid.n, vgrid.n))
    mean_sq = np.zeros_like(mean) if with_sq else None
    for lo in range(0, n_samples, chunk):
        sl = slice(lo, min(lo + chunk, n_samples))
        t2 = 2.0 * T[sl][..., None]
        amp = rho[sl] / (2.0 * np.pi * T[sl])
        e1 = np.exp(-((nodes - u1[sl][..., None]) ** 2) / t2)
        e2 = np.exp(-((nodes - u2[sl][..., None]) ** 2) / t2)
        a1 = amp[..., None] * e1
        mean += np.einsum("bxi,bxj->xij", a1, e2)
        if with_sq:
            mean_sq += np.einsum("bxi,bxj->xij", amp[..., None] * a1 * e1, e2 * e2)
    mean /= n_samples
    if with_sq:
        mean_sq /= n_samples
        return mean, mean_sq
    return mean


# --------------------------------------------------------------- runners

def _records(cfg, ests, t_out, errs):
    model = CostModel(nx=1 if cfg.test == 1 else cfg.nx, nv=cfg.nv,
                      d_x=0 if cfg.test == 1 else 1)
    tallies = estimator_tallies(cfg, ests)
    records = []
    for e in ests:
        cost = cost_model(tallies[e], model)["total"]
        for j, t in enumerate(t_out):
            for qi, q in enumerate(QUANTITIES):
                records.append(ErrorRecord(time=float(t), estimator=e,
                                           quantity=q,
                                           error=float(errs[e][j, qi]),
                                           cost=cost))
    return records


def run_test1(cfg: ExperimentConfig, estimators=None, times=None):
    """Homogeneous relaxation error curves.

    Returns one ErrorRecord per (estimator, time, quantity); errors are
    averaged over cfg.repeats independent repetitions. All estimators in
    the list share the same truth ensembles. Controls: mscv pairs the
    relaxation model sample by sample with analytic (quadrature)
    expectation, mscv2 uses the datum/equilibrium pair, the hierarchical
    estimators chain equilibrium and relaxation levels.
    """
    ests = _estimator_list(cfg, estimators)
    cfg = resolve_config(cfg, ests)
    if cfg.test != 1:
        raise ValueError("config is not for test 1")
    vgrid = VelocityGrid(cfg.nv, cfg.vmax)
    law = parse_nu_law(cfg.nu_law)
    tables = _truth_tables(cfg, vgrid)
    t_out = _times_array(cfg, times)
    refs = reference_solution(cfg, t_out).table()
    nodes, wq = gauss_legendre(cfg.quad_order)

    hier = any(e in _HIERARCHICAL for e in ests)
    need_g = hier or ("mscv" in ests)
    need_pair = "mscv2" in ests
    s = _TEST_S[1]
    n_out = len(t_out)
    errs = {e: np.zeros((n_out, len(QUANTITIES))) for e in ests}

    # z-independent control expectations from the quadrature nodes
    f0_nodes = _test1_datum(nodes, vgrid, s)
    adv_g_nodes = _homogeneous_bgk_advancer(f0_nodes, vgrid, law, cfg.epsilon) \
        if "mscv" in ests else None
    f0_hat = finf_hat = None
    if need_pair:
        f0_hat = _quad_table(wq, _field_table(f0_nodes, vgrid))
        finf_nodes = maxwellian(moments(f0_nodes, vgrid), vgrid)
        finf_hat = _quad_table(wq, _field_table(finf_nodes, vgrid))

    for rep in range(cfg.repeats):
        rep_seed = cfg.seed + 1 + rep
        set_m = draw_uniform(SeededStream(rep_seed, 0), cfg.samples)
        adv_f = _truth_advancer(cfg, set_m.values, vgrid, None, tables, s)
        f0_m = _test1_datum(set_m.values, vgrid, s)
        adv_g = _homogeneous_bgk_advancer(f0_m, vgrid, law, cfg.epsilon) \
            if need_g else None
        tab_f0_m = tab_finf_m = None
        if need_pair:
            tab_f0_m = _field_table(f0_m, vgrid)
            tab_finf_m = _field_table(maxwellian(moments(f0_m, vgrid), vgrid), vgrid)
        if hier:
            m0, m1 = cfg.cv_samples
            set_m1 = draw_uniform(SeededStream(rep_seed, 2), m1)
            set_m0 = draw_uniform(SeededStream(rep_seed, 3), m0)
            f0_m1 = _test1_datum(set_m1.values, vgrid, s)
            adv_g_m1 = _homogeneous_bgk_advancer(f0_m1, vgrid, law, cfg.epsilon)
            tab_l_m1 = _field_table(maxwellian(moments(f0_m1, vgrid), vgrid), vgrid)
            f0_m0 = _test1_datum(set_m0.values, vgrid, s)
            tab_l_m0 = _field_table(maxwellian(moments(f0_m0, vgrid), vgrid), vgrid)
            del f0_m0

        for j, t in enumerate(t_out):
            tab_f = _field_table(adv_f.to(t), vgrid)
            tab_g = _field_table(adv_g.to(t), vgrid) if adv_g is not None else None
            ghat = _quad_table(wq, _field_table(adv_g_nodes.to(t), vgrid)) \
                if adv_g_nodes is not None else None
            tab_g_m1 = _field_table(adv_g_m1.to(t), vgrid) if hier else None
            for qi, q in enumerate(QUANTITIES):
                f_ens = SampleEnsemble(tab_f[q], sample_set=set_m, label="f")
                for e in ests:
                    if e == "mc":
                        val = mc_mean(f_ens)
                    elif e == "mscv":
                        g_ens = SampleEnsemble(tab_g[q], sample_set=set_m, label="bgk")
                        wf = optimal_lambda_single(f_ens, g_ens)
                        val = cv_estimate_single(f_ens, g_ens, ghat[q], wf).mean
                    elif e == "mscv2":
                        c0 = SampleEnsemble(tab_f0_m[q], sample_set=set_m, label="f0")
                        ci = SampleEnsemble(tab_finf_m[q], sample_set=set_m, label="finf")
                        wf = two_cv_closed_form(f_ens, c0, ci)
                        val = cv_estimate_multi(f_ens, [c0, ci],
                                                [f0_hat[q], finf_hat[q]], wf).mean
                    else:
                        chain = [
                            LevelEnsembles(
                                on_coarse=SampleEnsemble(tab_l_m0[q], sample_set=set_m0),
                                on_fine=SampleEnsemble(tab_l_m1[q], sample_set=set_m1)),
                            LevelEnsembles(
                                on_coarse=SampleEnsemble(tab_g_m1[q], sample_set=set_m1),
                                on_fine=SampleEnsemble(tab_g[q], sample_set=set_m)),
                        ]
                        wf = _chain_weights(e, cfg, chain, f_ens,
                                            (m0, m1, cfg.samples))
                        val = recursive_estimate(f_ens, chain, wf).mean
                    errs[e][j, qi] += l2_error(val, refs[q][j])
    for e in ests:
        errs[e] /= cfg.repeats
    return _records(cfg, ests, t_out, errs)


def _run_kinetic(cfg, ests, t_out):
    vgrid = VelocityGrid(cfg.nv, cfg.vmax)
    xgrid = SpatialGrid(cfg.nx)
    law = parse_nu_law(cfg.nu_law)
    law2 = NuLaw(0.125, True)  # deliberately under-relaxed second control
    tables = _truth_tables(cfg, vgrid)
    refs = reference_solution(cfg, t_out).table()
    s = _TEST_S[cfg.test]

    hier = any(e in _HIERARCHICAL for e in ests)
    pair = any(e in ("mscv", "mscv2") for e in ests)
    need_cv = any(e != "mc" for e in ests)
    need_two = "mscv2" in ests
    m = cfg.samples
    if hier:
        m0, m1 = cfg.cv_samples
    n_out = len(t_out)
    errs = {e: np.zeros((n_out, len(QUANTITIES))) for e in ests}

    for rep in range(cfg.repeats):
        rep_seed = cfg.seed + 1 + rep
        set_m = draw_uniform(SeededStream(rep_seed, 0), m)
        adv_f = _truth_advancer(cfg, set_m.values, vgrid, xgrid, tables, s)
        adv_g = adv_g2 = adv_u = None
        if hier:
            set_m1 = draw_uniform(SeededStream(rep_seed, 2), m1)
            set_m0 = draw_uniform(SeededStream(rep_seed, 3), m0)
            set_exp = set_m1  # M_1 doubles as the expectation set
        elif pair:
            set_exp = draw_uniform(SeededStream(rep_seed, 1), cfg.cv_samples[0])
        if need_cv:
            z_cv = np.concatenate([set_m.values, set_exp.values])
            sl_m = slice(0, m)
            sl_e = slice(m, m + len(set_exp))
            bc_cv = boundary_spec(cfg.test, z_cv, s)
            f0_cv = initial_datum(cfg.test, z_cv, vgrid, xgrid, s)
            adv_g = _kinetic_step_advancer(cfg, "bgk", f0_cv, bc_cv, vgrid,
                                           xgrid, None, law)
            if need_two:
                adv_g2 = _kinetic_step_advancer(cfg, "bgk", f0_cv, bc_cv, vgrid,
                                                xgrid, None, law2)
            del f0_cv
        if hier:
            z_u = np.concatenate([set_m0.values, set_m1.values])
            sl_u0 = slice(0, m0)
            sl_u1 = slice(m0, m0 + m1)
            bc_u = boundary_spec(cfg.test, z_u, s)
            filler_u = EulerGhostFiller(bc_u)
            U0 = euler_datum(cfg.test, z_u, xgrid, s)

            def step_u(U, h, _bc=bc_u, _fill=filler_u):
                return euler_step(U, h, _bc, xgrid, _fill)

            adv_u = _StepAdvancer(U0, step_u, cfg.dt)

        for j, t in enumerate(t_out):
            tab_f = _field_table(adv_f.to(t), vgrid)
            if need_cv:
                g = adv_g.to(t)
                tab_g_m = _field_table(g[sl_m], vgrid)
                tab_g_e = _field_table(g[sl_e], vgrid)
            if need_two:
                g2 = adv_g2.to(t)
                tab_g2_m = _field_table(g2[sl_m], vgrid)
                tab_g2_e = _field_table(g2[sl_e], vgrid)
            if hier:
                U = adv_u.to(t)
                mom0 = moments_from_euler(U[sl_u0])
                mom1 = moments_from_euler(U[sl_u1])
                lift_m1 = euler_equilibrium(U[sl_u1], vgrid)
                coarse_dist_mean = equilibrium_mean(U[sl_u0], vgrid)
                tab_l_m1 = {"distribution": lift_m1, "density": mom1.rho,
                            "temperature": mom1.T}
                tab_l_m0 = {"density": mom0.rho, "temperature": mom0.T}
            for qi, q in enumerate(QUANTITIES):
                gran = "pointwise" if q == "distribution" else "moment"
                f_ens = SampleEnsemble(tab_f[q], sample_set=set_m, label="f")
                for e in ests:
                    if e == "mc":
                        val = mc_mean(f_ens)
                    elif e == "mscv":
                        g_m = SampleEnsemble(tab_g_m[q], sample_set=set_m)
                        g_e = SampleEnsemble(tab_g_e[q], sample_set=set_exp)
                        # single CV: lambda from the M samples, attenuated by
                        # M_E/(M+M_E) because the expectation is itself sampled
                        wf = me_correction(optimal_lambda_single(f_ens, g_m),
                                           m=m, m_e=g_e.m)
                        val = cv_estimate_multi(f_ens, [g_m], [mc_mean(g_e)], wf).mean
                    elif e == "mscv2":
                        g_m = SampleEnsemble(tab_g_m[q], sample_set=set_m)
                        g_e = SampleEnsemble(tab_g_e[q], sample_set=set_exp)
                        h_m = SampleEnsemble(tab_g2_m[q], sample_set=set_m)
                        h_e = SampleEnsemble(tab_g2_e[q], sample_set=set_exp)
                        wf = _split_weights(f_ens, [g_m, h_m], [g_e, h_e], gran)
                        val = cv_estimate_multi(f_ens, [g_m, h_m],
                                                [mc_mean(g_e), mc_mean(h_e)], wf).mean
                    else:
                        g_m = SampleEnsemble(tab_g_m[q], sample_set=set_m)
                        g_m1 = SampleEnsemble(tab_g_e[q], sample_set=set_m1)
                        mode = "unit" if e == "mlmc" else cfg.weights
                        if q == "distribution":
                            f1_m1 = SampleEnsemble(lift_m1, sample_set=set_m1)
                            val, _ = two_level_estimate(f_ens, f1_m1, g_m1, g_m,
                                                        coarse_dist_mean, mode,
                                                        (m0, m1, m))
                        else:
                            chain = [
                                LevelEnsembles(
                                    on_coarse=SampleEnsemble(tab_l_m0[q],
                                                             sample_set=set_m0),
                                    on_fine=SampleEnsemble(tab_l_m1[q],
                                                           sample_set=set_m1)),
                                LevelEnsembles(on_coarse=g_m1, on_fine=g_m),
                            ]
                            wf = _chain_weights(e, cfg, chain, f_ens, (m0, m1, m))
                            val = recursive_estimate(f_ens, chain, wf).mean
                    errs[e][j, qi] += l2_error(val, refs[q][j])
    for e in ests:
        errs[e] /= cfg.repeats
    return _records(cfg, ests, t_out, errs)


def run_test2(cfg: ExperimentConfig, estimators=None, times=None):
    """Shock-tube error curves (uncertain initial temperature)."""
    ests = _estimator_list(cfg, estimators)
    cfg = resolve_config(cfg, ests)
    if cfg.test != 2:
        raise ValueError("config is not for test 2")
    return _run_kinetic(cfg, ests, _times_array(cfg, times))


def run_test3(cfg: ExperimentConfig, estimators=None, times=None):
    """Sudden-heating error curves (uncertain wall temperature)."""
    ests = _estimator_list(cfg, estimators)
    cfg = resolve_config(cfg, ests)
    if cfg.test != 3:
        raise ValueError("config is not for test 3")
    return _run_kinetic(cfg, ests, _times_array(cfg, times))


def run_experiment(cfg: ExperimentConfig, estimators=None, times=None):
    """Dispatch to the runner for cfg.test."""
    runner = {1: run_test1, 2: run_test2, 3: run_test3}[cfg.test]
    return runner(cfg, estimators, times)


# ------------------------------------------------------------------- CSV

def _validate_records(records):
    last = {}
    for r in records:
        if not isinstance(r, ErrorRecord):
            raise ValueError("write_csv expects ErrorRecord rows")
        key = (r.estimator, r.quantity)
        if key in last and r.time <= last[key]:
            raise ValueError("record times must be strictly increasing per series")
        last[key] = r.time


def write_csv(records, path) -> None:
    """Error records as `time,estimator,quantity,error,cost` rows.

    Floats are written with %.17g so a round trip is bit-exact and repeated
    runs of the same config produce byte-identical files.
    """
    _validate_records(records)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(["%.17g" % r.time, r.estimator, r.quantity,
                             "%.17g" % r.error, "%.17g" % r.cost])


def read_csv(path):
    """Inverse of write_csv; validates the header."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != list(CSV_HEADER):
        raise ValueError("unexpected CSV header")
    return [ErrorRecord(time=float(t), estimator=e, quantity=q,
                        error=float(err), cost=float(c))
            for t, e, q, err, c in rows[1:]]
