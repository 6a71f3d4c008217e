"""Figure generation for planner CSV sweeps; coupled to the planner only
through its published CSV/JSON schemas."""

__version__ = "0.1.0"

from .figures import (  # noqa: F401
    build_hfu,
    build_intensity,
    build_penalty,
    build_timeline,
)
from .schemas import (  # noqa: F401
    COLUMNS,
    KINDS,
    SchemaMismatch,
    expected_header,
    read_table,
)
