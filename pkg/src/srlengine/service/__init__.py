from .core import IngestResult, ServiceCore
from .http import serve

__all__ = ["ServiceCore", "IngestResult", "serve"]
