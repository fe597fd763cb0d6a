from typing import Any

from ._common import _add_paths, _remove_paths, _error, _result, PLUGIN_DIR


def handle_experiment(params: dict[str, Any], **kwargs: Any) -> str:
    """
    Run a battery of dataset-shift experiments described by a key = value config file.

    Args:
        params: Dictionary containing keys:
            - config_path: str (required) - experiment config file
            - output_path: str (required) - metrics table CSV with columns
                scenario, classifier, calibrator, protected, metric, mean, seed_<s>...
        **kwargs: Additional keyword arguments (unused)

    Returns:
        str: JSON-serialized dict with keys cells, rows, output, config_hash.
    """
    config_path = params.get("config_path")
    output_path = params.get("output_path")
    if not config_path or not output_path:
        return _error("config_path and output_path are required")
    added = _add_paths(PLUGIN_DIR)
    try:
        from protclass.commands import cmd_experiment

        return _result(cmd_experiment(config_path, output_path))
    except Exception as exc:
        return _error(str(exc))
    finally:
        _remove_paths(added)
