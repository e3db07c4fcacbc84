"""HTTP service wrapper around the counting library.

Run it with `uvicorn k3count.service:app`; the CLI mounts the same app
in-process by default, so the service and the command line cannot drift.
"""

from .app import app, create_app

__all__ = ["app", "create_app"]
