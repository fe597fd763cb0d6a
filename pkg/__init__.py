import json
from pathlib import Path

from .tools import (
   handle_calibrate,
   handle_simulate,
   handle_experiment,
   handle_oracle_check,
)

_SCHEMAS_DIR = Path(__file__).parent / "schemas"

_TOOLS = [
    ("protclass_calibrate",    handle_calibrate),
    ("protclass_simulate",     handle_simulate),
    ("protclass_experiment",   handle_experiment),
    ("protclass_oracle_check", handle_oracle_check),
]


def register(ctx):
    plugin_name = ctx.manifest.name
    for name, handler in _TOOLS:
        schema = json.loads((_SCHEMAS_DIR / f"{name}.json").read_text())
        ctx.register_tool(name, plugin_name, schema, handler)
