from .check import command as check_command
from .continuation import command as continue_command
from .scan import command as scan_command
from .space import command as space_command
from .subspace import command as subspace_command

__all__ = [
    "check_command",
    "continue_command",
    "scan_command",
    "space_command",
    "subspace_command",
]
