"""HTTP service layer: pydantic models, handlers, FastAPI app."""

from . import handlers, models  # noqa: F401
