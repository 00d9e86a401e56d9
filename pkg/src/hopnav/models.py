"""The eight transition-probability models, their fitting procedures, and
log-likelihood evaluation.

Every model defines a right-stochastic row p(i, .) over the LCC nodes:

* hop-biased walker: mass beta_k spread uniformly over the hop-k neighborhood
  of the source, plus a uniform beta_0/N noise term, renormalized per row over
  the hops that are actually non-empty for that source;
* preferential attachment: proportional to target degree, source-independent;
* gravitational: target degree over squared hop distance, with the diagonal
  pushed beyond the diameter;
* random walker at a fixed or fitted damping factor;
* first-order Markov chain with rows estimated from the counts themselves.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .clickstream import ALL, TransitionSet
from .graph import Graph
from .khop import ProfileCache, SourceProfile

NEG_INF = float("-inf")

#: Damping factor used for the "links only" walker; exactly 1 would zero out
#: every off-edge transition.
ALPHA_NEAR_ONE = 1.0 - 1e-6
ALPHA_PAGERANK = 0.85


class ModelError(Exception):
    pass


class ModelId(enum.Enum):
    """The eight candidate models, in fixed tie-break order."""

    HOPRANK = "hoprank"
    PA = "pa"
    GRAVITATIONAL = "gravitational"
    RW_JUMPS = "rw-0.0"
    RW_LINKS = "rw-1.0"
    RW_PAGERANK = "rw-0.85"
    RW_EMPIRICAL = "rw-empirical"
    MARKOV_CHAIN = "markov-chain"

    def __str__(self):
        return self.value

    @property
    def order(self) -> int:
        return list(ModelId).index(self)


_FIXED_ALPHA = {
    ModelId.RW_JUMPS: 0.0,
    ModelId.RW_LINKS: ALPHA_NEAR_ONE,
    ModelId.RW_PAGERANK: ALPHA_PAGERANK,
}


@dataclass
class HopPortationVector:
    """Probability vector over hop distances 0..diameter; entry 0 absorbs
    self-loops and random jumps."""

    beta: np.ndarray

    def __post_init__(self):
        self.beta = np.asarray(self.beta, np.float64)
        if np.any(self.beta < 0) or abs(self.beta.sum() - 1.0) > 1e-12:
            raise ModelError("hop probabilities must be a simplex vector")

    @property
    def diameter(self) -> int:
        return len(self.beta) - 1

    def padded(self, diameter: int) -> "HopPortationVector":
        if diameter + 1 < len(self.beta):
            raise ModelError("vector longer than diameter allows")
        out = np.zeros(diameter + 1)
        out[:len(self.beta)] = self.beta
        return HopPortationVector(out)


@dataclass
class FittedModel:
    model_id: ModelId
    nparams: int
    navtype: str
    nobs: int
    graph_hash: str
    diameter: int | None = None
    beta: np.ndarray | None = None
    alpha: float | None = None
    mc_rows: dict[int, dict[int, int]] = field(default_factory=dict, repr=False)
    mc_row_totals: dict[int, int] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        out = {"model": self.model_id.value, "nparams": self.nparams,
               "navtype": self.navtype, "nobs": self.nobs,
               "graph_hash": self.graph_hash}
        if self.diameter is not None:
            out["diameter"] = self.diameter
        if self.beta is not None:
            out["beta"] = [float(b) for b in self.beta]
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.mc_rows:
            out["mc_rows"] = {str(i): {str(j): c for j, c in row.items()}
                              for i, row in self.mc_rows.items()}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "FittedModel":
        fm = cls(ModelId(data["model"]), data["nparams"], data["navtype"],
                 data["nobs"], data["graph_hash"], data.get("diameter"))
        if "beta" in data:
            fm.beta = np.array(data["beta"], np.float64)
        if "alpha" in data:
            fm.alpha = data["alpha"]
        for i, row in data.get("mc_rows", {}).items():
            fm.mc_rows[int(i)] = {int(j): c for j, c in row.items()}
            fm.mc_row_totals[int(i)] = sum(fm.mc_rows[int(i)].values())
        return fm


def nparams(model_id: ModelId, g: Graph, diameter: int) -> int:
    """Free-parameter count per model; the Markov chain uses N*(N-2)."""
    if model_id is ModelId.HOPRANK:
        return diameter + 1
    if model_id is ModelId.RW_EMPIRICAL:
        return 1
    if model_id is ModelId.MARKOV_CHAIN:
        return g.node_count * (g.node_count - 2)
    return 0


# ---------------------------------------------------------------------------
# hop-biased walker


def fit_hopportation(ts: TransitionSet, navtype, profiles: ProfileCache,
                     diameter: int) -> HopPortationVector:
    """MLE of the hop-preference vector: the fraction of observed transitions
    landing at each hop distance; hop 0 is the self-loop/noise share."""
    src, dst, cnt = ts.arrays(navtype)
    if cnt.sum() == 0:
        raise ModelError(f"no transitions for type {navtype}")
    counts = np.zeros(diameter + 1, np.int64)
    for i, j, c in zip(src, dst, cnt):
        k = int(profiles.get(int(i)).dist[j])
        counts[k] += c
    return HopPortationVector(counts / counts.sum())


def hoprank_row_z(beta: np.ndarray, hop_histogram: np.ndarray) -> float:
    """Per-row normalizer: total hop mass reachable from this source."""
    reachable = hop_histogram[1:len(beta)] > 0
    return float(beta[0] + beta[1:][reachable].sum())


def hoprank_prob(i: int, j: int, beta, profile: SourceProfile, n: int) -> float:
    """Transition probability under the hop-biased walker from source i."""
    b = beta.beta if isinstance(beta, HopPortationVector) else np.asarray(beta)
    k = int(profile.dist[j])
    mass = b[0] / n
    if k >= 1:
        mass += b[k] / float(profile.hop_histogram[k])
    return mass / hoprank_row_z(b, profile.hop_histogram)


# ---------------------------------------------------------------------------
# degree / distance baselines


def pa_prob(i: int, j: int, g: Graph) -> float:
    """Preferential attachment: proportional to target degree, any source."""
    return g.degree(j) / (2.0 * g.edge_count)


def grav_prob(i: int, j: int, g: Graph, profile: SourceProfile,
              diameter: int) -> float:
    """Gravitational: target degree over squared hop distance; the diagonal
    sits at distance diameter+2 so self-loops keep a small probability."""
    sp = float(diameter + 2) if i == j else float(profile.dist[j])
    return g.degree(j) / (sp * sp) / profile.grav_normalizer


def rw_prob(i: int, j: int, g: Graph, alpha: float) -> float:
    """Damped random walker: follow a link with probability alpha, otherwise
    jump uniformly."""
    n = g.node_count
    link = (1.0 / g.degree(i)) if g.has_edge(i, j) else 0.0
    return alpha * link + (1.0 - alpha) / n


# ---------------------------------------------------------------------------
# fitted baselines


def _edge_terms(ts: TransitionSet, navtype, g: Graph):
    """Per-transition link mass a_ij/deg(i) and counts, for damping fits."""
    src, dst, cnt = ts.arrays(navtype)
    aterm = np.zeros(len(src))
    for t, (i, j) in enumerate(zip(src, dst)):
        if g.has_edge(int(i), int(j)):
            aterm[t] = 1.0 / g.degree(int(i))
    return aterm, cnt


def _alpha_ll(alpha: float, aterm: np.ndarray, cnt: np.ndarray, n: int) -> float:
    p = alpha * aterm + (1.0 - alpha) / n
    if np.any(p <= 0):
        return NEG_INF
    return float(np.dot(cnt, np.log(p)))


def fit_alpha(ts: TransitionSet, navtype, g: Graph, tol: float = 1e-6) -> float:
    """Maximum-likelihood damping factor by golden-section search on [0, 1].

    The per-transition probability is linear in alpha, so the log-likelihood
    is concave and the search converges to the global maximum; a boundary
    solution at 1 is clamped just below it to keep off-edge transitions at
    finite likelihood.
    """
    aterm, cnt = _edge_terms(ts, navtype, g)
    if cnt.sum() == 0:
        raise ModelError("no transitions to fit a damping factor")
    n = g.node_count
    inv = (math.sqrt(5) - 1) / 2
    lo, hi = 0.0, 1.0
    x1 = hi - inv * (hi - lo)
    x2 = lo + inv * (hi - lo)
    f1 = _alpha_ll(x1, aterm, cnt, n)
    f2 = _alpha_ll(x2, aterm, cnt, n)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv * (hi - lo)
            f2 = _alpha_ll(x2, aterm, cnt, n)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv * (hi - lo)
            f1 = _alpha_ll(x1, aterm, cnt, n)
    alpha = (lo + hi) / 2
    # snap to the boundary when the optimum sits there
    if _alpha_ll(0.0, aterm, cnt, n) >= _alpha_ll(alpha, aterm, cnt, n):
        alpha = 0.0
    elif _alpha_ll(1.0 - 1e-9, aterm, cnt, n) >= _alpha_ll(alpha, aterm, cnt, n):
        alpha = 1.0 - 1e-9
    return min(max(alpha, 0.0), 1.0 - 1e-9)


def mc_fit(ts: TransitionSet, navtype, g: Graph) -> FittedModel:
    """First-order Markov chain: rows are the normalized observed counts;
    never-observed source rows fall back to uniform."""
    src, dst, cnt = ts.arrays(navtype)
    fm = FittedModel(ModelId.MARKOV_CHAIN,
                     nparams(ModelId.MARKOV_CHAIN, g, 0),
                     _navtype_name(navtype), int(cnt.sum()), g.content_hash())
    for i, j, c in zip(src, dst, cnt):
        row = fm.mc_rows.setdefault(int(i), {})
        row[int(j)] = row.get(int(j), 0) + int(c)
    fm.mc_row_totals = {i: sum(row.values()) for i, row in fm.mc_rows.items()}
    return fm


# ---------------------------------------------------------------------------
# unified fitting / likelihood


def _navtype_name(navtype) -> str:
    return navtype if isinstance(navtype, str) else navtype.value


def fit_model(model_id: ModelId, ts: TransitionSet, navtype, g: Graph,
              profiles: ProfileCache, diameter: int) -> FittedModel:
    name = _navtype_name(navtype)
    nobs = ts.nobs(navtype)
    if model_id is ModelId.MARKOV_CHAIN:
        return mc_fit(ts, navtype, g)
    fm = FittedModel(model_id, nparams(model_id, g, diameter), name, nobs,
                     g.content_hash(), diameter)
    if model_id is ModelId.HOPRANK:
        fm.beta = fit_hopportation(ts, navtype, profiles, diameter).beta
    elif model_id is ModelId.RW_EMPIRICAL:
        fm.alpha = fit_alpha(ts, navtype, g)
    elif model_id in _FIXED_ALPHA:
        fm.alpha = _FIXED_ALPHA[model_id]
    return fm


def _pair_probs(fm: FittedModel, g: Graph, profiles: ProfileCache | None,
                src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Model probability for each (src, dst) pair, vectorized per source."""
    n = g.node_count
    m = len(src)
    p = np.empty(m)
    mid = fm.model_id
    if mid is ModelId.PA:
        return g.degrees()[dst] / (2.0 * g.edge_count)
    if mid in (ModelId.RW_JUMPS, ModelId.RW_LINKS, ModelId.RW_PAGERANK,
               ModelId.RW_EMPIRICAL):
        alpha = fm.alpha
        for t in range(m):
            p[t] = rw_prob(int(src[t]), int(dst[t]), g, alpha)
        return p
    if mid is ModelId.MARKOV_CHAIN:
        for t in range(m):
            i, j = int(src[t]), int(dst[t])
            tot = fm.mc_row_totals.get(i)
            if tot is None:
                p[t] = 1.0 / n
            else:
                p[t] = fm.mc_rows[i].get(j, 0) / tot
        return p
    if profiles is None:
        raise ModelError(f"{mid.value} needs source profiles")
    degs = g.degrees().astype(np.float64)
    order = np.argsort(src, kind="stable")
    bounds = np.searchsorted(src[order], np.unique(src))
    groups = np.split(order, bounds[1:])
    for grp in groups:
        i = int(src[grp[0]])
        prof = profiles.get(i)
        d = prof.dist[dst[grp]].astype(np.int64)
        if mid is ModelId.HOPRANK:
            beta = fm.beta
            z = hoprank_row_z(beta, prof.hop_histogram)
            hop_mass = np.where(d >= 1, beta[d] / np.maximum(prof.hop_histogram[d], 1), 0.0)
            p[grp] = (beta[0] / n + hop_mass) / z
        elif mid is ModelId.GRAVITATIONAL:
            sp = d.astype(np.float64)
            sp[dst[grp] == i] = fm.diameter + 2
            p[grp] = degs[dst[grp]] / (sp * sp) / prof.grav_normalizer
        else:
            raise ModelError(f"unknown model {mid}")
    return p


def loglik(fm: FittedModel, ts: TransitionSet, navtype,
           profiles: ProfileCache | None = None,
           smoothing: float = 0.0) -> float:
    """Log-likelihood sum(t_ij * ln p_ij) over the observed transitions.

    Any observed pair with zero model probability makes the result -inf,
    eliminating the model; the optional additive smoothing (off by default)
    replaces p with (p + eps) / (1 + eps * N) for exploratory runs.
    """
    g = ts.graph
    if fm.graph_hash != g.content_hash():
        raise ModelError("fitted model belongs to a different graph")
    src, dst, cnt = ts.arrays(navtype)
    if len(src) == 0:
        return 0.0
    p = _pair_probs(fm, g, profiles, src, dst)
    if smoothing > 0:
        p = (p + smoothing) / (1.0 + smoothing * g.node_count)
    if np.any(p <= 0):
        return NEG_INF
    return float(np.dot(cnt, np.log(p)))


def dense_row(fm: FittedModel, i: int, g: Graph,
              profiles: ProfileCache | None = None) -> np.ndarray:
    """Materialize one full probability row; meant for small graphs, exports,
    and stochasticity checks."""
    n = g.node_count
    mid = fm.model_id
    if mid is ModelId.PA:
        return g.degrees() / (2.0 * g.edge_count)
    if mid in (ModelId.RW_JUMPS, ModelId.RW_LINKS, ModelId.RW_PAGERANK,
               ModelId.RW_EMPIRICAL):
        row = np.full(n, (1.0 - fm.alpha) / n)
        row[g.neighbors(i)] += fm.alpha / g.degree(i)
        return row
    if mid is ModelId.MARKOV_CHAIN:
        tot = fm.mc_row_totals.get(i)
        if tot is None:
            return np.full(n, 1.0 / n)
        row = np.zeros(n)
        for j, c in fm.mc_rows[i].items():
            row[j] = c / tot
        return row
    prof = profiles.get(i)
    if mid is ModelId.HOPRANK:
        beta = fm.beta
        d = prof.dist.astype(np.int64)
        hop_mass = np.where(d >= 1, beta[d] / np.maximum(prof.hop_histogram[d], 1), 0.0)
        return (beta[0] / n + hop_mass) / hoprank_row_z(beta, prof.hop_histogram)
    if mid is ModelId.GRAVITATIONAL:
        sp = prof.dist.astype(np.float64)
        sp[i] = fm.diameter + 2
        return g.degrees() / (sp * sp) / prof.grav_normalizer
    raise ModelError(f"unknown model {mid}")


def save_models(models: list[FittedModel], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump([fm.to_json() for fm in models], f, indent=1)


def load_models(path) -> list[FittedModel]:
    with open(path, "r", encoding="utf-8") as f:
        return [FittedModel.from_json(d) for d in json.load(f)]
