"""Model backend server speaking the urbanscape wire protocol v1.

Runs as its own process with its own dependencies; the workstation engine
talks to it over HTTP only. Capabilities load lazily at startup from
publicly available checkpoints and are reported by /v1/health; anything
that fails to load answers `unsupported` instead of breaking the server.
"""

__version__ = "0.1.0"
