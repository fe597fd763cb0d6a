from typing import Any

from ._common import _add_paths, _remove_paths, _error, _result, PLUGIN_DIR

_SPEC_KEYS = ("n_features", "n_informative", "K", "n_train", "n_test", "seed", "separation")


def handle_simulate(params: dict[str, Any], **kwargs: Any) -> str:
    """
    Generate a synthetic prediction stream under a dataset-shift scenario.

    Args:
        params: Dictionary containing keys:
            - output_path: str (required) - test stream destination (.jsonl or .csv)
            - scenario: str - "unperturbed" | "concept_shift" | "x_imbalance" | "y_imbalance". Default "unperturbed"
            - classifier: str - "logistic_regression" | "gaussian_naive_bayes". Default "logistic_regression"
            - affected_tail: int - records affected by the scenario. Default 500
            - permute_after: bool - shuffle the stream after the scenario. Default True
            - n_features, n_informative, K, n_train, n_test, seed, separation: dataset settings
        **kwargs: Additional keyword arguments (unused)

    Returns:
        str: JSON-serialized summary with record counts and written paths.
    """
    output_path = params.get("output_path")
    if not isinstance(output_path, str) or not output_path:
        return _error("output_path is required")
    added = _add_paths(PLUGIN_DIR)
    try:
        from protclass.commands import cmd_simulate
        from protclass.shift.datasets import SyntheticSpec
        from protclass.shift.models import LOGISTIC_REGRESSION
        from protclass.shift.scenarios import ShiftScenario, UNPERTURBED

        spec = SyntheticSpec(**{k: params[k] for k in _SPEC_KEYS if params.get(k) is not None})
        scenario = ShiftScenario(
            kind=params.get("scenario") or UNPERTURBED,
            affected_tail=int(params.get("affected_tail", 500)),
            permute_after=bool(params.get("permute_after", True)),
        )
        summary = cmd_simulate(output_path, spec, scenario, params.get("classifier") or LOGISTIC_REGRESSION)
        return _result(summary)
    except Exception as exc:
        return _error(str(exc))
    finally:
        _remove_paths(added)
