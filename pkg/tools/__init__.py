from .calibrate import handle_calibrate
from .simulate import handle_simulate
from .experiment import handle_experiment
from .oracle_check import handle_oracle_check

__all__ = [
    "handle_calibrate",
    "handle_simulate",
    "handle_experiment",
    "handle_oracle_check",
]
