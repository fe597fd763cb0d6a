from typing import Any
import tempfile
from pathlib import Path

from ._common import _add_paths, _remove_paths, _error, _result, _run_config, _write_records, PLUGIN_DIR


def handle_calibrate(params: dict[str, Any], **kwargs: Any) -> str:
    """
    Protect a stream of base probability forecasts with the Composite Jumper.

    Args:
        params: Dictionary containing keys:
            - stream_path: str | None
                Path to a JSON Lines or CSV stream (p_0..p_{K-1}, y).
            - records: list[dict] | None
                Inline records used when stream_path is absent. Example:
                [
                    {"p": [0.8, 0.2], "y": 0},
                    {"p": [0.3, 0.7], "y": 1}
                ]
            - output_path: str | None
                Per-step output file. If None, outputs go to a temporary directory and only the report is returned.
            - pi, jump_rates, betas, alpha_magnitudes, clamp_epsilon, ece_bins, ece_norm, seed: run settings
        **kwargs: Additional keyword arguments (unused)

    Returns:
        str: JSON-serialized report with keys:
            - n, K: record and class counts
            - base, protected: metric dicts (log_loss, brier, ece, accuracy, auc)
            - regret: cumulative protected minus base log loss
            - protection_bound: log(1 / pi)
            - within_bound: bool
            - best_calibrator: calibrator with the highest final log martingale

    Raises:
        Returns error in JSON if:
            - neither stream_path nor records is given
            - a record is malformed or a setting is out of range
    """
    stream_path = params.get("stream_path")
    records = params.get("records")
    if stream_path is None and records is None:
        return _error("give either stream_path or records")
    added = _add_paths(PLUGIN_DIR)
    try:
        from protclass.commands import cmd_calibrate

        run = _run_config(params)
        with tempfile.TemporaryDirectory() as scratch:
            if stream_path is None:
                stream_path = Path(scratch) / "records.jsonl"
                problem = _write_records(records, stream_path)
                if problem:
                    return _error(problem)
            output_path = params.get("output_path")
            keep_files = output_path is not None
            report = cmd_calibrate(stream_path, output_path or Path(scratch) / "protected.jsonl", run)
            if not keep_files:
                report.pop("outputs", None)
        return _result(report)
    except Exception as exc:
        return _error(str(exc))
    finally:
        _remove_paths(added)
