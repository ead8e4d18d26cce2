"""Margins, success-probability bounds and feasibility regions, in log space.

Every subtracted term of a bound is kept as its natural logarithm and only
exponentiated at the end, so huge sample sizes (``n`` up to ~1e300, passed as
a float) and tiny power terms such as ``(sigma_max sqrt(G)/D)^d`` at
``d = 500`` neither overflow nor underflow on the way.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .core import LossConfig
from .datagen import GmmubSpec, check_assumptions

_LOG2 = math.log(2.0)


def _log_ratio_pow(d, num, den):
    """d * ln(num / den), the log of (num/den)^d."""
    return d * (math.log(num) - math.log(den))


def _log_bg_coef(spec, cfg):
    """ln of G/(d/2+1) * (sigma_max sqrt(G)/D)^d."""
    d, G = spec.d, cfg.G
    return math.log(G) - math.log(d / 2.0 + 1.0) + _log_ratio_pow(d, cfg.sigma_max * math.sqrt(G), spec.D)


def _gain(spec, cfg, j):
    """G - (1+G) sigma_j^2 / sigma_max^2."""
    G = cfg.G
    return G - (1.0 + G) * spec.sigmas[j - 1] ** 2 / cfg.sigma_max ** 2


def _check_j(spec, j):
    if not 1 <= j <= spec.k:
        raise ValueError(f"cluster index {j} outside 1..{spec.k}")


def margin_w(spec, cfg, j=1):
    """Per-point loss margin W_j between cluster-j seeds and background seeds.

    W_j = pi_j (G - (1+G) sigma_j^2/sigma_max^2)
          - pi_bg (sigma_max sqrt(G)/D)^d G/(d/2+1)
    """
    _check_j(spec, j)
    pi_j = float(spec.weights[j - 1])
    return pi_j * _gain(spec, cfg, j) - spec.pi_bg * math.exp(_log_bg_coef(spec, cfg))


def weight_threshold(spec, cfg, j=1):
    """Smallest weight of cluster j for which W_j > 0.

    The weight of cluster j is varied with the background absorbing the
    change and the other cluster weights held fixed. With ``c`` the
    background coefficient and ``A`` the gain, the root is
    ``(1 - S) c / (A + c)`` where ``S`` sums the other cluster weights;
    for a single cluster this is ``c / (A + c)``.

    Returns ``inf`` when the gain is not positive (no weight suffices).
    """
    _check_j(spec, j)
    A = _gain(spec, cfg, j)
    if A <= 0:
        return math.inf
    c = math.exp(_log_bg_coef(spec, cfg))
    others = float(np.sum(spec.weights[:-1])) - float(spec.weights[j - 1])
    return (1.0 - others) * c / (A + c)


def displayed_threshold(spec, cfg, j=1):
    """The fraction c / (A + c) without the other-cluster correction."""
    _check_j(spec, j)
    A = _gain(spec, cfg, j)
    if A <= 0:
        return math.inf
    c = math.exp(_log_bg_coef(spec, cfg))
    return c / (A + c)


@dataclass
class ProbabilityBound:
    """A success-probability lower bound.

    ``value`` is clamped to [0, 1]; ``raw`` is the unclamped bound;
    ``log_terms`` maps each subtracted term to its natural log.
    """

    value: float
    raw: float
    log_terms: dict
    clamped: bool
    weight_ok: bool = True

    def __float__(self):
        return self.value

    def to_dict(self):
        return {"value": self.value, "raw": self.raw, "clamped": self.clamped,
                "weight_ok": self.weight_ok,
                "log_terms": {k: float(v) for k, v in self.log_terms.items()}}


def _combine(log_terms, weight_ok=True):
    if not weight_ok:
        return ProbabilityBound(0.0, -math.inf, log_terms, True, False)
    total = math.fsum(math.exp(min(v, 700.0)) for v in log_terms.values())
    raw = 1.0 - total
    val = min(max(raw, 0.0), 1.0)
    return ProbabilityBound(val, raw, log_terms, val != raw, True)


def _log_n(n):
    n = float(n)
    if not n > 0:
        raise ValueError("n must be positive")
    return math.log(n)


def _log_hoeffding(spec, cfg, n, w):
    """ln(2k n exp(-n w^2 / 2G^2))."""
    w = float(w)
    if math.isnan(w):
        return math.inf
    if abs(w) > 1e150:  # n w^2 would overflow; the term is exp(-huge)
        return -math.inf
    return math.log(2.0 * spec.k) + _log_n(n) - float(n) * w * w / (2.0 * cfg.G ** 2)


def _log_tail(spec, cfg, n):
    """ln(2n exp(-d(G-1)^2/8))."""
    return _LOG2 + _log_n(n) - spec.d * (cfg.G - 1.0) ** 2 / 8.0


def _log_crowding(spec, cfg, n):
    """ln(n k (2 sigma_max sqrt(G)/D)^d)."""
    return _log_n(n) + math.log(spec.k) + _log_ratio_pow(spec.d, 2.0 * cfg.sigma_max * math.sqrt(cfg.G), spec.D)


def _min_w(spec, cfg):
    return min(margin_w(spec, cfg, j) for j in range(1, spec.k + 1))


def success_prob_prop1(spec, cfg, n):
    """Probability that both realized-sample conditions hold (needs A1)."""
    return _combine({"tail": _log_tail(spec, cfg, n), "crowding": _log_crowding(spec, cfg, n)})


def success_prob_thm1(spec, cfg, n):
    """Single-cluster bound: 1 - 2n e^{-nW^2/2G^2} - 2n e^{-d(G-1)^2/8} - n(2 sigma_max sqrt G/D)^d."""
    if spec.k != 1:
        raise ValueError("the single-cluster bound needs k = 1")
    w = margin_w(spec, cfg, 1)
    return _combine({"hoeffding": _log_hoeffding(spec, cfg, n, w),
                     "tail": _log_tail(spec, cfg, n),
                     "crowding": _log_crowding(spec, cfg, n)}, w > 0)


def success_prob_thm2(spec, cfg, n):
    """Multi-cluster bound with the smallest margin min_j W_j."""
    if spec.k < 1:
        raise ValueError("need at least one cluster")
    w = _min_w(spec, cfg)
    return _combine({"hoeffding": _log_hoeffding(spec, cfg, n, w),
                     "crowding": _log_crowding(spec, cfg, n),
                     "tail": _log_tail(spec, cfg, n)}, w > 0)


def cor1_radius_sq(spec, n):
    """Squared error radius 4 d max sigma_j^2 / (n min pi_j)."""
    return 4.0 * spec.d * float(np.max(spec.sigmas)) ** 2 / (float(n) * float(np.min(spec.weights[:-1])))


def success_prob_cor1(spec, cfg, n):
    """Five-term bound for all estimated means to fall inside the error radius.

    Returns
    -------
    (ProbabilityBound, float)
        The bound and the squared radius.
    """
    if spec.k < 1:
        raise ValueError("need at least one cluster")
    w = _min_w(spec, cfg)
    d = spec.d
    pis = spec.weights[:-1]
    smax2, pmin = float(np.max(spec.sigmas)) ** 2, float(np.min(pis))
    conc = [-(d / 8.0) * (2.0 * p * smax2 / (s * s * pmin) - 1.0) ** 2 for p, s in zip(pis, spec.sigmas)]
    count = [-float(n) * p * p / 2.0 for p in pis]
    terms = {"hoeffding": _log_hoeffding(spec, cfg, n, w),
             "mean_concentration": _LOG2 + _logsumexp(conc),
             "cluster_size": _logsumexp(count),
             "crowding": _log_crowding(spec, cfg, n),
             "tail": _log_tail(spec, cfg, n)}
    return _combine(terms, w > 0), cor1_radius_sq(spec, n)


def _logsumexp(v):
    v = np.asarray(v, dtype=np.float64)
    m = v.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + math.log(np.sum(np.exp(v - m))))


def cor2_c(spec, cfg):
    """c = min((G-1)^2/8, ln(D / (2 sigma_max sqrt G)))."""
    return min((cfg.G - 1.0) ** 2 / 8.0, math.log(spec.D / (2.0 * cfg.sigma_max * math.sqrt(cfg.G))))


def cor2_regime(spec, cfg, n):
    """True when c d > 2 ln n (and c > 0)."""
    c = cor2_c(spec, cfg)
    return c > 0 and c * spec.d > 2.0 * _log_n(n)


def cor2_log10_n_max(spec, cfg):
    """log10 of the largest n with c d > 2 ln n, i.e. n < exp(c d / 2)."""
    return cor2_c(spec, cfg) * spec.d / 2.0 / math.log(10.0)


def cor1_min_n(spec, cfg, eps=1e-4, log10_hi=300.0):
    """Smallest n (to 1e-6 relative) with the five-term bound above 1 - eps.

    Scans log10 n upward in steps of 0.05 and bisects the first crossing.
    Returns ``inf`` when no n up to ``10**log10_hi`` qualifies.
    """
    def ok(lg):
        return success_prob_cor1(spec, cfg, 10.0 ** lg)[0].raw > 1.0 - eps

    prev = 0.0
    lg = 0.0
    while lg <= log10_hi:
        if ok(lg):
            if lg == 0.0:
                return 1.0
            lo, hi = prev, lg
            while hi - lo > 1e-7:
                mid = 0.5 * (lo + hi)
                lo, hi = (lo, mid) if ok(mid) else (mid, hi)
            return 10.0 ** hi
        prev = lg
        lg += 0.05
    return math.inf


def uniform_loss_mean(d, G):
    """Mean loss of a point uniform in the support ball: -G/(d/2+1)."""
    if d < 1 or G <= 1:
        raise ValueError("need d >= 1 and G > 1")
    return -G / (d / 2.0 + 1.0)


def gaussian_loss_mean_bound(sigma_1, sigma_max, G):
    """Upper bound sigma_1^2/sigma_max^2 - G on the mean loss of a Gaussian point."""
    if G <= 1 or sigma_max <= 0 or sigma_1 <= 0:
        raise ValueError("need G > 1 and positive scales")
    return sigma_1 ** 2 / sigma_max ** 2 - G


@dataclass
class BoundReport:
    """All margins, thresholds and bounds for one (spec, cfg, n)."""

    n: float
    w_values: list
    weight_thresholds: list
    displayed_thresholds: list
    threshold_mismatch: list
    prob_prop1: ProbabilityBound
    prob_thm1: ProbabilityBound | None
    prob_thm2: ProbabilityBound
    prob_cor1: ProbabilityBound
    cor1_radius_sq: float
    cor2_c: float
    cor2_regime: bool
    assumptions: dict = field(default_factory=dict)

    @property
    def weight_ok(self):
        return all(w > 0 for w in self.w_values)

    @property
    def feasible(self):
        a = self.assumptions
        return self.weight_ok and a.get("a1", False) and a.get("a2", False) and a.get("a3", False)

    def to_dict(self):
        def p(b):
            return None if b is None else b.to_dict()
        return {"n": self.n, "w_values": self.w_values,
                "weight_thresholds": self.weight_thresholds,
                "displayed_thresholds": self.displayed_thresholds,
                "threshold_mismatch": self.threshold_mismatch,
                "prob_prop1": p(self.prob_prop1), "prob_thm1": p(self.prob_thm1),
                "prob_thm2": p(self.prob_thm2), "prob_cor1": p(self.prob_cor1),
                "cor1_radius_sq": self.cor1_radius_sq, "cor2_c": self.cor2_c,
                "cor2_regime": self.cor2_regime, "assumptions": self.assumptions,
                "feasible": self.feasible}


def bound_report(spec, cfg, n):
    """Evaluate every margin and bound for ``spec`` at sample size ``n``."""
    ks = range(1, spec.k + 1)
    w = [margin_w(spec, cfg, j) for j in ks]
    thr = [weight_threshold(spec, cfg, j) for j in ks]
    shown = [displayed_threshold(spec, cfg, j) for j in ks]
    # the weight condition as displayed vs W_j > 0 on the actual weights
    mismatch = [bool((spec.weights[j - 1] > shown[j - 1]) != (w[j - 1] > 0)) for j in ks]
    cor1, rad = success_prob_cor1(spec, cfg, n)
    return BoundReport(float(n), w, thr, shown, mismatch,
                       success_prob_prop1(spec, cfg, n),
                       success_prob_thm1(spec, cfg, n) if spec.k == 1 else None,
                       success_prob_thm2(spec, cfg, n), cor1, rad,
                       cor2_c(spec, cfg), cor2_regime(spec, cfg, n),
                       check_assumptions(spec, cfg).to_dict())


CONSTRAINTS = ("A3", "A1", "A2", "weight", "theorem")


def _failing(spec, cfg, n, prob_floor):
    """Names of the constraints violated at this sigma_max (in fixed order)."""
    rep = check_assumptions(spec, cfg)
    bad = []
    if not rep.a3:
        bad.append("A3")
    if not rep.a1:
        bad.append("A1")
    if spec.k > 1 and not rep.a2:
        bad.append("A2")
    if _min_w(spec, cfg) <= 0:
        bad.append("weight")
    prob = success_prob_thm1(spec, cfg, n) if spec.k == 1 else success_prob_thm2(spec, cfg, n)
    if not prob.value >= prob_floor:
        bad.append("theorem")
    return bad


@dataclass
class RegionRow:
    axis_value: float
    sigma_lo: float
    sigma_hi: float
    limiting_upper: str
    limiting_lower: str

    @property
    def empty(self):
        return not self.sigma_lo <= self.sigma_hi


def _axis_setting(spec, n, G, axis, value):
    if axis == "d":
        return spec.resized(int(round(value))), n, G
    if axis == "n":
        return spec, float(value), G
    if axis == "G":
        return spec, n, float(value)
    if axis is None:
        return spec, n, G
    raise ValueError(f"unknown axis {axis!r}")


def feasible_sigma_region(spec, n, G=4.0, prob_floor=0.99, grid=None, axis=None,
                          axis_values=None, rel_tol=1e-3):
    """Interval of sigma_max meeting every sufficient condition at once.

    The conditions are A3 (lower bound), A1, A2 (k > 1), the weight
    condition W_j > 0, and the single- or multi-cluster success bound being
    at least ``prob_floor``.

    Parameters
    ----------
    spec : GmmubSpec
    n : float
    G : float
    prob_floor : float
    grid : int or array_like, optional
        Number of log-spaced sigma_max points (default 200) over
        [max sigma_j, D/sqrt(G)], or explicit values.
    axis : {"d", "n", "G"}, optional
        Sweep axis; ``axis_values`` gives its points.
    rel_tol : float
        Relative width to which interval endpoints are bisected.

    Returns
    -------
    list of RegionRow
        One row per axis value. Empty intervals have NaN endpoints.
    """
    if axis is None:
        values = [np.nan]
    else:
        values = list(np.asarray(axis_values, dtype=np.float64).ravel())
        if not values:
            raise ValueError("empty axis grid")
    if grid is not None and np.ndim(grid) and len(grid) == 0:
        raise ValueError("empty sigma grid")
    rows = []
    for v in values:
        sp, nn, gg = _axis_setting(spec, n, G, axis, v)
        if grid is None or np.ndim(grid) == 0:
            m = 200 if grid is None else int(grid)
            if m < 2:
                raise ValueError("sigma grid needs at least two points")
            sig = np.geomspace(float(np.max(sp.sigmas)), sp.D / math.sqrt(gg), m)
        else:
            sig = np.sort(np.asarray(grid, dtype=np.float64))
        rows.append(_region_one(sp, nn, gg, prob_floor, sig, rel_tol,
                                v if axis is not None else float("nan")))
    return rows


def _region_one(spec, n, G, floor, sig, rel_tol, axis_value):
    def bad(s):
        return _failing(spec, LossConfig(s, G), n, floor)

    ok = np.array([not bad(s) for s in sig])
    if not ok.any():
        # report the constraint failing most often across the grid
        counts = {c: 0 for c in CONSTRAINTS}
        for s in sig:
            for c in bad(s):
                counts[c] += 1
        worst = max(CONSTRAINTS, key=lambda c: counts[c])
        return RegionRow(axis_value, math.nan, math.nan, worst, worst)
    idx = np.flatnonzero(ok)
    # longest contiguous run of feasible grid points
    runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    run = max(runs, key=len)
    i0, i1 = int(run[0]), int(run[-1])

    def refine(inside, outside):
        while abs(outside - inside) > rel_tol * min(inside, outside):
            mid = math.sqrt(inside * outside)
            if bad(mid):
                outside = mid
            else:
                inside = mid
        return inside, outside

    lo_name = hi_name = "grid"
    lo = float(sig[i0])
    if i0 > 0:
        lo, out = refine(lo, float(sig[i0 - 1]))
        lo_name = bad(out)[0]
    hi = float(sig[i1])
    if i1 < len(sig) - 1:
        hi, out = refine(hi, float(sig[i1 + 1]))
        hi_name = bad(out)[0]
    return RegionRow(axis_value, lo, hi, hi_name, lo_name)
