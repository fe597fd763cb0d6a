from typing import Any

from ._common import _add_paths, _remove_paths, _error, _result, PLUGIN_DIR


def handle_oracle_check(params: dict[str, Any], **kwargs: Any) -> str:
    """
    Check the Composite Jumper against brute-force trajectory enumeration on random tiny instances.

    Args:
        params: Dictionary containing optional keys:
            - instances: int - number of random instances. Default 100
            - seed: int - battery seed. Default 0
            - tolerance: float - largest accepted absolute deviation. Default 1e-9
        **kwargs: Additional keyword arguments (unused)

    Returns:
        str: JSON-serialized dict with keys instances, passed, max_abs_error, tolerance, ok.
    """
    instances = params.get("instances", 100)
    if not isinstance(instances, int) or instances < 1:
        return _error(f"instances must be a positive integer, got {instances!r}")
    added = _add_paths(PLUGIN_DIR)
    try:
        from protclass.commands import cmd_oracle_check

        report = cmd_oracle_check(
            instances=instances, seed=int(params.get("seed", 0)), tolerance=float(params.get("tolerance", 1e-9))
        )
        return _result(report.to_dict())
    except Exception as exc:
        return _error(str(exc))
    finally:
        _remove_paths(added)
