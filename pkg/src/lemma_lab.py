"""
Numerical verification of the quantitative lemmas behind the exclusion scheme.

Every trial draws its inputs from its own Philox generator (spawned from the run seed), checks the lemma's
hypotheses first and only then evaluates the conclusion. A clause is an inequality lhs >= rhs; its margin is
lhs - rhs, on a log scale wherever the inequality is multiplicative.
"""
import math
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np
import pydash as py_

from circle_map import MapFamily, circle_distance, critical_set_for, reduce_circle
from conditions import at_least, check_mis, check_X, check_Y, cross_check_brprop
from constants import EMPIRICAL, PAPER, build_profile, scaled_overrides
from errors import CriticalHit, DegenerateLadder
from exclusion import ExclusionContext, classify_parameter, worker_count
from logger import logger
from orbit import compute_ladder, critical_orbit, deriv_along, iterate_orbit, offset_log_deriv, \
    parameter_derivatives, transversality_ratio
from returns import DEEP, SHALLOW, build_ladder, build_window, classify_essential, \
    count_bound_window_shallow_returns, decompose, estimate_image_length

DIST = "dist"
TRANS = "trans"
SAMP = "samp"
WRAP = "wrap"
BOUND = "bound"
OUTSIDE = "outside"
EXPANSION = "expansion"
BRPROP = "brprop"
DISTREM = "distrem"
NORETURN = "noreturn"

lemma_ids = [DIST, TRANS, SAMP, WRAP, BOUND, OUTSIDE, EXPANSION, BRPROP, DISTREM, NORETURN]

# Lemmas that hold at every finite L under their hypotheses; the rest are asymptotic in L
finite_L_lemmas = {DIST, DISTREM}

# Lemmas checked against the asymptotic (paper) profile unless a profile is given
paper_profile_lemmas = {DIST, TRANS, SAMP, DISTREM}

grid_nodes = 21
near_failure_margin = 0.05
parameter_pairs = 4
annulus_samples = 4
wrap_max_samples = 4097


@dataclass(frozen=True)
class LabContext(object):
    phi: object
    L: float
    profile: object
    n_max: int
    critical_set: object


class ClauseTally(object):
    """
    Collects the clauses evaluated during one trial
    """

    def __init__(self):
        self.clauses = {}
        self.passed = True
        self.checked = False
        self.worst = None

    def record(self, name, lhs, rhs, verdict=True, inputs=None):
        holds = at_least(lhs, rhs)
        passed, checked = self.clauses.get(name, (0, 0))
        self.clauses[name] = (passed + int(holds), checked + 1)
        if not verdict:
            return holds
        self.checked = True
        self.passed = self.passed and holds
        margin = lhs - rhs
        if self.worst is None or margin < self.worst["margin"]:
            self.worst = {"clause": name, "lhs": lhs, "rhs": rhs, "margin": margin, "at": inputs}
        return holds

    def record_bool(self, name, holds, inputs=None):
        return self.record(name, 1.0 if holds else 0.0, 1.0, inputs=inputs)


@dataclass
class TrialOutcome(object):
    inputs: dict
    met: bool = False
    passed: bool = False
    worst: dict = None
    clauses: dict = field(default_factory=dict)

    @classmethod
    def from_tally(cls, inputs, tally, met=True):
        met = met and tally.checked
        return cls(inputs=inputs, met=met, passed=met and tally.passed, worst=tally.worst if met else None,
                   clauses=tally.clauses)


@dataclass
class LemmaReport(object):
    lemma_id: str
    L: float
    trials: int
    hypothesis_met_count: int
    pass_count: int
    worst_margin: dict
    profile: dict
    seed: int
    n_max: int
    finite_L: bool
    clause_counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def pass_rate(self):
        if self.hypothesis_met_count == 0:
            return float("nan")
        return self.pass_count / self.hypothesis_met_count

    def to_dict(self):
        report = {
            "lemmaId": self.lemma_id,
            "L": self.L,
            "trials": self.trials,
            "hypothesisMetCount": self.hypothesis_met_count,
            "passCount": self.pass_count,
            "passRate": self.pass_rate,
            "worstMargin": self.worst_margin,
            "profile": self.profile,
            "seed": self.seed,
            "nMax": self.n_max,
            "finiteL": self.finite_L,
            "clauseCounts": self.clause_counts
        }
        return report


def draw_parameter(rng):
    return float(rng.random())


def distortion_log_ratio(family, trace, radius, n, nodes=grid_nodes):
    """
    log of max / min of |(f^n)'| over a grid of the interval [theta - radius, theta + radius] around the
    start of trace. Grid orbits are followed as offsets from the trace, so radii below the spacing of doubles
    at theta are still resolved.

    :raises CriticalHit: When a grid orbit meets a critical point
    """
    logs = offset_log_deriv(family, trace, np.linspace(-radius, radius, nodes), n)
    return float(logs.max() - logs.min())


def bound_period_clauses(profile, distance, p, log_expansion):
    """
    The bound period estimates for a return at distance |c - phi| with bound period p, where
    log_expansion = log|(f^{p+1})'phi|. The proof exponent 6 alpha/lambda is reported alongside the
    stated 7 alpha/lambda and does not enter the verdict.

    :return: (name, lhs, rhs, verdict) tuples
    :rtype: list
    """
    log_L, log_distance = profile.log_L, math.log(distance)
    lam, alpha = profile.lambda_, profile.alpha
    clauses = [
        ("a_lower", float(p), -log_distance / log_L, True),
        ("a_upper", -2.0 * log_distance / (lam * log_L), float(p), True),
        ("b", log_expansion, max((-1.0 + 7.0 * alpha / lam) * log_distance, lam * (p + 1) * log_L / 3.0), True),
        ("b_proof", log_expansion, max((-1.0 + 6.0 * alpha / lam) * log_distance, lam * (p + 1) * log_L / 3.0),
         False)
    ]
    if p <= profile.N:
        clauses.append(("c", log_expansion, profile.lambda0 * (p + 1) * log_L / 3.0, True))
    return clauses


def outside_clauses(profile, n, log_deriv, entered):
    """
    Growth outside C_delta after n steps: L^(1-3 lambda) delta L^(3 lambda n), and L^(3 lambda n) when the
    orbit has just entered C_delta

    :rtype: list
    """
    log_L, lam = profile.log_L, profile.lambda_
    clauses = [("a", log_deriv, (1.0 - 3.0 * lam) * log_L + math.log(profile.delta) + 3.0 * lam * n * log_L, True)]
    if entered:
        clauses.append(("b", log_deriv, 3.0 * lam * n * log_L, True))
    return clauses


def distrem_bound(profile):
    """
    log of K0^2 L^(2 - beta)
    """
    return 2.0 * math.log(profile.K0) + (2.0 - profile.beta) * profile.log_L


def _family(context, a):
    return MapFamily(context.phi, reduce_circle(a), context.L)


def _all_critical_traces(family, n, critical_set):
    return [critical_orbit(family, index, n, critical_set) for index in range(len(critical_set))]


def _alive(context, a, n):
    exclusion = ExclusionContext(phi=context.phi, L=context.L, profile=context.profile, n_max=n,
                                 critical_set=context.critical_set)
    return classify_parameter(a, exclusion).alive


def trial_dist(context, rng):
    a, theta, n = draw_parameter(rng), float(rng.random()), int(rng.integers(1, context.n_max + 1))
    inputs = {"a": a, "theta": theta, "n": n}
    tally = ClauseTally()
    family = _family(context, a)
    try:
        trace = iterate_orbit(family, theta, n, context.critical_set)
        radius = float(compute_ladder(trace, context.profile.beta).D[n])
        log_ratio = distortion_log_ratio(family, trace, radius, n, grid_nodes)
        log_K = math.log(context.profile.K)
        if log_K - log_ratio < near_failure_margin * log_K:
            log_ratio = max(log_ratio, distortion_log_ratio(family, trace, radius, n, 2 * grid_nodes - 1))
    except (CriticalHit, DegenerateLadder):
        return TrialOutcome(inputs=inputs)
    tally.record("distortion", log_K, log_ratio, inputs=inputs)
    return TrialOutcome.from_tally(inputs, tally)


def trial_trans(context, rng):
    a, n = draw_parameter(rng), int(rng.integers(0, context.n_max + 1))
    index = int(rng.integers(0, len(context.critical_set)))
    inputs = {"a": a, "c": index, "n": n}
    family = _family(context, a)
    try:
        ratio = transversality_ratio(family, index, n, context.critical_set)
        trace = critical_orbit(family, index, n, context.critical_set)
    except CriticalHit:
        return TrialOutcome(inputs=inputs)

    tally = ClauseTally()
    bound = math.fsum(math.exp(-trace.log_deriv[i]) for i in range(1, n + 1))
    tally.record("identity", bound, abs(ratio - 1.0), verdict=False)
    met = check_Y(trace, context.profile, n).holds
    if met:
        band = context.L ** (-context.profile.lambda_ / 2.0)
        tally.record("band", band, abs(abs(ratio) - 1.0), inputs=dict(inputs, ratio=ratio))
    return TrialOutcome.from_tally(inputs, tally, met)


def trial_samp(context, rng):
    a, n = draw_parameter(rng), int(rng.integers(1, context.n_max + 1))
    index = int(rng.integers(0, len(context.critical_set)))
    inputs = {"a": a, "c": index, "n": n}
    family, profile = _family(context, a), context.profile
    tally = ClauseTally()
    try:
        trace = critical_orbit(family, index, n, context.critical_set)
        if not (check_X(trace, profile, n).holds and check_Y(trace, profile, n).holds):
            return TrialOutcome(inputs=inputs)
        window = build_window(family, index, n, profile, clamp=False, critical_set=context.critical_set)
        log_Kprime = math.log(profile.Kprime)
        for _ in range(parameter_pairs):
            lo, hi = window.raw
            first, second = lo + (hi - lo) * float(rng.random()), lo + (hi - lo) * float(rng.random())
            log_first = parameter_derivatives(family.with_a(first), index, n, context.critical_set)[0][n]
            log_second = parameter_derivatives(family.with_a(second), index, n, context.critical_set)[0][n]
            tally.record("ratio", log_Kprime, abs(log_first - log_second),
                         inputs=dict(inputs, first=first, second=second))
    except (CriticalHit, DegenerateLadder):
        return TrialOutcome(inputs=inputs)
    return TrialOutcome.from_tally(inputs, tally)


def trial_wrap(context, rng):
    profile = context.profile
    a, n = draw_parameter(rng), int(rng.integers(1, min(profile.N, context.n_max) + 1))
    index = int(rng.integers(0, len(context.critical_set)))
    inputs = {"a": a, "c": index, "n": n}
    family = _family(context, a)
    tally = ClauseTally()
    try:
        trace = critical_orbit(family, index, n, context.critical_set)
        if not check_mis(trace, profile, n).holds:
            return TrialOutcome(inputs=inputs)
        window = build_window(family, index, n, profile, clamp=False, critical_set=context.critical_set)
        length = estimate_image_length(family, index, window.raw[0], window.raw[1], n, refine=True,
                                       critical_set=context.critical_set, max_samples=wrap_max_samples)
    except (CriticalHit, DegenerateLadder):
        return TrialOutcome(inputs=inputs)
    tally.record("cover", length, 1.0, inputs=inputs)
    return TrialOutcome.from_tally(inputs, tally)


def trial_bound(context, rng):
    profile = context.profile
    a, index = draw_parameter(rng), int(rng.integers(0, len(context.critical_set)))
    inputs = {"a": a, "c": index}
    family = _family(context, a)
    tally = ClauseTally()
    try:
        traces = _all_critical_traces(family, context.n_max, context.critical_set)
    except CriticalHit:
        return TrialOutcome(inputs=inputs)
    n = context.n_max
    if not all(check_X(trace, profile, n).holds and check_Y(trace, profile, n).holds for trace in traces):
        return TrialOutcome(inputs=inputs)

    trace = traces[index]
    ladders = [build_ladder(other, profile.beta) for other in traces]
    for event in decompose(trace, ladders, profile, SHALLOW).events:
        p = event.bound_period
        if event.exhausted or not 1 <= p <= n - 1 or event.time + p + 1 > trace.horizon:
            continue
        log_expansion = deriv_along(trace, event.time, event.time + p + 1)
        where = dict(inputs, time=event.time, p=p, distance=event.depth)
        for name, lhs, rhs, verdict in bound_period_clauses(profile, event.depth, p, log_expansion):
            tally.record(name, lhs, rhs, verdict=verdict, inputs=where)
    return TrialOutcome.from_tally(inputs, tally)


def trial_outside(context, rng):
    profile = context.profile
    a, theta = draw_parameter(rng), float(rng.random())
    inputs = {"a": a, "theta": theta}
    if not _alive(context, a, min(profile.N, context.n_max)):
        return TrialOutcome(inputs=inputs)
    tally = ClauseTally()
    try:
        trace = iterate_orbit(_family(context, a), theta, context.n_max, context.critical_set)
    except CriticalHit:
        return TrialOutcome(inputs=inputs)
    for n in range(1, trace.horizon + 1):
        if trace.dist[n - 1] <= profile.delta:
            break
        entered = trace.dist[n] <= profile.delta
        for name, lhs, rhs, verdict in outside_clauses(profile, n, float(trace.log_deriv[n]), entered):
            tally.record(name, lhs, rhs, verdict=verdict, inputs=dict(inputs, n=n))
        if entered:
            break
    return TrialOutcome.from_tally(inputs, tally)


def trial_expansion(context, rng):
    profile = context.profile
    a, index = draw_parameter(rng), int(rng.integers(0, len(context.critical_set)))
    inputs = {"a": a, "c": index}
    if not _alive(context, a, context.n_max):
        return TrialOutcome(inputs=inputs)
    family = _family(context, a)
    tally = ClauseTally()
    try:
        traces = _all_critical_traces(family, context.n_max, context.critical_set)
        trace = traces[index]
        ladder = compute_ladder(trace, profile.beta)
    except (CriticalHit, DegenerateLadder):
        return TrialOutcome(inputs=inputs)

    ladders = [build_ladder(other, profile.beta) for other in traces]
    decomposition = classify_essential(decompose(trace, ladders, profile, DEEP))
    for event in decomposition.events:
        nu = event.time
        if not event.essential or nu < 1:
            continue
        where = dict(inputs, nu=nu, depth=event.depth)
        log_depth = math.log(event.depth)
        expansion = float(ladder.log_D[nu] + trace.log_deriv[nu])
        tally.record("expansion", expansion, 0.5 * log_depth, inputs=where)
        tally.record("distrem", distrem_bound(profile), expansion, inputs=where)

        try:
            window = build_window(family, index, nu, profile, clamp=False, critical_set=context.critical_set)
        except (CriticalHit, DegenerateLadder):
            continue
        half = (window.amended[1] - window.amended[0]) / 2.0
        inner = event.depth ** 0.2 * half
        for _ in range(annulus_samples):
            offset = inner + (half - inner) * float(rng.random())
            b = a + offset if rng.random() < 0.5 else a - offset
            try:
                moved = critical_orbit(family.with_a(b), index, nu, context.critical_set).points[nu]
            except CriticalHit:
                continue
            gap = circle_distance(float(trace.points[nu]), float(moved))
            tally.record("separation", math.log(max(gap, 5e-324)), 0.25 * log_depth, inputs=dict(where, b=b))
    return TrialOutcome.from_tally(inputs, tally)


def trial_brprop(context, rng):
    profile = context.profile
    a, index = draw_parameter(rng), int(rng.integers(0, len(context.critical_set)))
    inputs = {"a": a, "c": index}
    n = context.n_max
    try:
        traces = _all_critical_traces(_family(context, a), n + 1, context.critical_set)
    except CriticalHit:
        return TrialOutcome(inputs=inputs)
    ladders = [build_ladder(other, profile.beta) for other in traces]
    trace = traces[index]
    report = cross_check_brprop(trace, decompose(trace, ladders, profile, DEEP), profile, n)
    tally = ClauseTally()
    if report["applicable"]:
        tally.record_bool("xy_next", report["agrees"], inputs=inputs)
    return TrialOutcome.from_tally(inputs, tally, report["applicable"])


def trial_distrem(context, rng):
    a, theta, n = draw_parameter(rng), float(rng.random()), int(rng.integers(1, context.n_max + 1))
    inputs = {"a": a, "theta": theta, "n": n}
    try:
        trace = iterate_orbit(_family(context, a), theta, n, context.critical_set)
        ladder = compute_ladder(trace, context.profile.beta)
    except (CriticalHit, DegenerateLadder):
        return TrialOutcome(inputs=inputs)
    tally = ClauseTally()
    tally.record("distrem", distrem_bound(context.profile), float(trace.log_deriv[n] + ladder.log_D[n]),
                 inputs=inputs)
    return TrialOutcome.from_tally(inputs, tally)


def trial_noreturn(context, rng):
    profile = context.profile
    a, index = draw_parameter(rng), int(rng.integers(0, len(context.critical_set)))
    inputs = {"a": a, "c": index}
    if not _alive(context, a, min(profile.N, context.n_max)):
        return TrialOutcome(inputs=inputs)
    try:
        traces = _all_critical_traces(_family(context, a), context.n_max, context.critical_set)
    except CriticalHit:
        return TrialOutcome(inputs=inputs)
    ladders = [build_ladder(other, profile.beta) for other in traces]
    scanned, violations = count_bound_window_shallow_returns(traces[index], ladders, profile)
    tally = ClauseTally()
    if scanned:
        tally.record("no_return", 0.0, float(len(violations)), inputs=dict(inputs, violations=violations[:5]))
    return TrialOutcome.from_tally(inputs, tally)


trial_functions = {
    DIST: trial_dist,
    TRANS: trial_trans,
    SAMP: trial_samp,
    WRAP: trial_wrap,
    BOUND: trial_bound,
    OUTSIDE: trial_outside,
    EXPANSION: trial_expansion,
    BRPROP: trial_brprop,
    DISTREM: trial_distrem,
    NORETURN: trial_noreturn
}


def _run_trial(job):
    lemma_id, context, seed_sequence = job
    rng = np.random.Generator(np.random.Philox(seed_sequence))
    return trial_functions[lemma_id](context, rng)


class LemmaLab(object):
    """
    Runs batches of lemma trials for one drive function
    """

    def __init__(self, phi, workers=None, beta=1.75, N=20, epsilon=0.05, rule=None):
        self.phi = phi
        self.workers = worker_count(workers)
        self.beta = beta
        self.N = N
        self.epsilon = epsilon
        self.rule = rule

    def default_profile(self, lemma_id, L):
        if lemma_id in paper_profile_lemmas:
            return build_profile(self.phi, L, beta=self.beta, N=self.N, kind=PAPER, epsilon=self.epsilon)
        return build_profile(self.phi, L, beta=self.beta, N=self.N, kind=EMPIRICAL,
                             overrides=scaled_overrides(L, self.rule), epsilon=self.epsilon)

    def run(self, lemma_id, trials, L, n_max, seed, profile=None):
        """
        Runs one lemma

        :param lemma_id: One of lemma_ids
        :type lemma_id: str
        :param trials: Number of trials
        :type trials: int
        :param L: The family's L
        :type L: float
        :param n_max: Largest horizon a trial may draw
        :type n_max: int
        :param seed: Root seed; trial i uses the i-th spawned child
        :type seed: int
        :param profile: Constants bundle; the default depends on the lemma
        :type profile: ConstantsProfile

        :rtype: LemmaReport
        """
        if lemma_id not in trial_functions:
            raise ValueError("Unknown lemma '{}', expected one of {}".format(lemma_id, ", ".join(lemma_ids)))
        if n_max < 1:
            raise ValueError("n_max must be at least 1, got {}".format(n_max))
        if profile is None:
            profile = self.default_profile(lemma_id, L)
        context = LabContext(phi=self.phi, L=float(L), profile=profile, n_max=int(n_max),
                             critical_set=critical_set_for(self.phi, float(L)))
        jobs = [(lemma_id, context, child) for child in np.random.SeedSequence(seed).spawn(trials)]

        if self.workers == 1 or trials < 2:
            outcomes = [_run_trial(job) for job in jobs]
        else:
            with Pool(self.workers) as pool:
                outcomes = pool.map(_run_trial, jobs)

        return self._report(lemma_id, L, n_max, seed, profile, outcomes)

    def _report(self, lemma_id, L, n_max, seed, profile, outcomes):
        met = py_.filter_(outcomes, "met")
        worst = None
        for outcome in met:
            if outcome.worst is not None and (worst is None or outcome.worst["margin"] < worst["margin"]):
                worst = outcome.worst

        clause_counts = {}
        for outcome in outcomes:
            for name, (passed, checked) in outcome.clauses.items():
                counts = clause_counts.setdefault(name, {"passed": 0, "checked": 0})
                counts["passed"] += passed
                counts["checked"] += checked

        violations = []
        for trial, outcome in enumerate(outcomes):
            if outcome.met and not outcome.passed:
                violations.append({"lemma": lemma_id, "trial": trial, "inputs": outcome.worst["at"],
                                   "clause": outcome.worst["clause"], "lhs": outcome.worst["lhs"],
                                   "rhs": outcome.worst["rhs"], "margin": outcome.worst["margin"]})
                logger.warning("Lemma {} violated at L={} trial {}: {}".format(lemma_id, L, trial, outcome.worst))

        return LemmaReport(lemma_id=lemma_id, L=float(L), trials=len(outcomes), hypothesis_met_count=len(met),
                           pass_count=py_.count_by(met, "passed").get(True, 0), worst_margin=worst,
                           profile=profile.to_dict(), seed=int(seed), n_max=int(n_max),
                           finite_L=lemma_id in finite_L_lemmas, clause_counts=clause_counts,
                           violations=violations)

    def verify_dist(self, trials, L, n_max, seed, profile=None):
        return self.run(DIST, trials, L, n_max, seed, profile)

    def verify_trans(self, trials, L, n_max, seed, profile=None):
        return self.run(TRANS, trials, L, n_max, seed, profile)

    def verify_samp(self, trials, L, n_max, seed, profile=None):
        return self.run(SAMP, trials, L, n_max, seed, profile)

    def verify_wrap(self, trials, L, profile, seed, n_max=None):
        return self.run(WRAP, trials, L, n_max if n_max is not None else 2 * profile.N, seed, profile)

    def verify_bound_period(self, trials, L, profile, seed, n_max=50):
        return self.run(BOUND, trials, L, n_max, seed, profile)

    def verify_outside(self, trials, L, profile, seed, n_max=50):
        return self.run(OUTSIDE, trials, L, n_max, seed, profile)

    def verify_expansion(self, trials, L, profile, seed, n_max=50):
        return self.run(EXPANSION, trials, L, n_max, seed, profile)

    def verify_brprop(self, trials, L, profile, seed, n_max=50):
        return self.run(BRPROP, trials, L, n_max, seed, profile)

    def verify_distrem(self, trials, L, n_max, seed, profile=None):
        return self.run(DISTREM, trials, L, n_max, seed, profile)

    def verify_noreturn(self, trials, L, profile, seed, n_max=50):
        return self.run(NORETURN, trials, L, n_max, seed, profile)
