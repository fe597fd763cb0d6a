import sys
import json
from pathlib import Path
from typing import Any, Union

PLUGIN_DIR: Path = Path(__file__).parent.parent

_RUN_KEYS = ("pi", "jump_rates", "betas", "alpha_magnitudes", "clamp_epsilon", "ece_bins", "ece_norm", "seed")


def _add_paths(*dirs: Path) -> list[str]:
    added: list[str] = []
    for d in dirs:
        s = str(d)
        if s not in sys.path:
            sys.path.insert(0, s)
            added.append(s)
    return added


def _remove_paths(added: list[str]) -> None:
    for s in added:
        try:
            sys.path.remove(s)
        except ValueError:
            pass


def _error(message: str) -> str:
    return json.dumps({"error": message})


def _result(payload: dict[str, Any], note: Union[str, None] = None) -> str:
    if note:
        payload = {**payload, "note": note}
    return json.dumps(payload, ensure_ascii=False)


def _run_config(params: dict[str, Any]) -> Any:
    """Build a RunConfig from the run keys present in params; absent keys keep their defaults."""
    from protclass.config import RunConfig

    return RunConfig(**{k: params[k] for k in _RUN_KEYS if params.get(k) is not None})


def _write_records(records: Any, path: Path) -> Union[str, None]:
    """Write inline [{"p": [...], "y": int}, ...] records as JSON Lines; returns an error message or None."""
    if not isinstance(records, list) or not records:
        return "records must be a non-empty list"
    with open(path, "w", encoding="utf-8") as fh:
        for i, rec in enumerate(records):
            if not isinstance(rec, dict) or "p" not in rec or "y" not in rec:
                return f"record {i} must be an object with p and y, got {rec!r}"
            fh.write(json.dumps(rec) + "\n")
    return None
