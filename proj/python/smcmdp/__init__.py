"""Statistical model checking for MDPs with unknown transition probabilities.

Thin wrapper over the C++ extension module; `run` and `transform_report`
return plain data structures instead of raw JSON text.
"""

import json as _json

try:
    from ._smcmdp import (
        ci,
        exact_value,
        hoeffding_halfwidth,
        min_coverage,
        transform_report,
        worst_case_n,
    )
    from ._smcmdp import run as _run
except ImportError:  # build-tree layout: extension on PYTHONPATH
    from _smcmdp import (
        ci,
        exact_value,
        hoeffding_halfwidth,
        min_coverage,
        transform_report,
        worst_case_n,
    )
    from _smcmdp import run as _run

__all__ = [
    "ci",
    "exact_value",
    "hoeffding_halfwidth",
    "min_coverage",
    "run",
    "transform_report",
    "worst_case_n",
]


def run(model_json, **kwargs):
    """Run the sample-estimate-solve loop; returns the result as a dict."""
    return _json.loads(_run(model_json, **kwargs))
