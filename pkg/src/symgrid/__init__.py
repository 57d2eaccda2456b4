"""symgrid: exact arithmetic symbols over small number fields, prime grids
with prescribed triple-symbol variation, and finite-group cochain checks."""

__version__ = "0.1.0"

from .descriptors import get_field, load_field, field_names  # noqa: F401
