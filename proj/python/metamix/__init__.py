"""Random-effects meta-analysis with an exact normal-mixture effect posterior."""

import json

from ._metamix import (
    DataError,
    Dataset,
    DomainError,
    Error,
    NormalMixture,
    NumericalError,
    analyze_json,
    common_effect,
    effect_posterior,
    format_tau_prior,
    hksj,
    predictive,
    q_profile,
    q_statistic,
    random_effects,
    read_csv,
    shrinkage,
    subset_last,
    tau_estimate,
    tau_posterior,
    tau_prior_quantile,
)


def analyze(data, **options):
    """Full report as a dict; options as for analyze_json."""
    if isinstance(data, str):
        data = read_csv(data)
    return json.loads(analyze_json(data, **options))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
