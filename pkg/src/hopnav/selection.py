"""BIC scoring and per-navigation-type model rankings."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .clickstream import ALL, TransitionSet
from .khop import ProfileCache
from .models import FittedModel, ModelId, fit_model, loglik

#: Navigation types with fewer observations than this are skipped.
MIN_TRANSITIONS = 2


class SelectionError(Exception):
    pass


@dataclass
class Evaluation:
    model_id: ModelId
    ll: float
    nparams: int
    nobs: int
    bic: float


@dataclass
class Ranking:
    navtype: str
    evaluations: list[Evaluation]  # ascending BIC

    @property
    def winner(self) -> ModelId:
        return self.evaluations[0].model_id


def bic(ll: float, nparams: int, nobs: int) -> float:
    """Bayesian Information Criterion, -2*LL + nparams*ln(nobs); an
    eliminated model (LL = -inf) maps to +inf."""
    if nobs < 1:
        raise SelectionError("BIC needs at least one observation")
    if ll == float("-inf"):
        return float("inf")
    return -2.0 * ll + nparams * math.log(nobs)


def rank_models(fitted: list[FittedModel], ts: TransitionSet, navtype,
                profiles: ProfileCache, smoothing: float = 0.0) -> Ranking:
    """Score each fitted model on one navigation type and sort ascending by
    BIC; ties fall to the model with fewer parameters, then to the fixed
    model order."""
    nobs = ts.nobs(navtype)
    evals = []
    for fm in fitted:
        ll = loglik(fm, ts, navtype, profiles, smoothing=smoothing)
        evals.append(Evaluation(fm.model_id, ll, fm.nparams, nobs,
                                bic(ll, fm.nparams, nobs)))
    evals.sort(key=lambda e: (e.bic, e.nparams, e.model_id.order))
    name = navtype if isinstance(navtype, str) else navtype.value
    return Ranking(name, evals)


def evaluate_all(g, ts: TransitionSet, navtypes, model_ids, profiles,
                 diameter: int, min_transitions: int = MIN_TRANSITIONS,
                 smoothing: float = 0.0) -> tuple[list[Ranking], list[str]]:
    """Fit and rank the requested models for each navigation type.

    Types with fewer than ``min_transitions`` observations are skipped and
    reported in the second return value.
    """
    if not model_ids:
        raise SelectionError("no models requested")
    rankings, skipped = [], []
    for navtype in navtypes:
        name = navtype if isinstance(navtype, str) else navtype.value
        if ts.nobs(navtype) < min_transitions:
            skipped.append(name)
            continue
        fitted = [fit_model(mid, ts, navtype, g, profiles, diameter)
                  for mid in model_ids]
        rankings.append(rank_models(fitted, ts, navtype, profiles,
                                    smoothing=smoothing))
    return rankings, skipped


def winner_matrix(rankings_by_dataset: dict[str, list[Ranking]],
                  navtypes: list[str]) -> list[list[str]]:
    """Grid of winning model names, one row per dataset; skipped cells show
    "-". The first row is the header."""
    header = ["dataset"] + list(navtypes)
    rows = [header]
    for dataset in sorted(rankings_by_dataset):
        winners = {r.navtype: r.winner.value for r in rankings_by_dataset[dataset]}
        rows.append([dataset] + [winners.get(t, "-") for t in navtypes])
    return rows
