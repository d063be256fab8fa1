"""Entry point: load configured checkpoints and serve the wire protocol."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import SidecarConfig
from .models import load_capabilities
from .server import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="urbanscape-sidecar",
        description="Model backend server for the urbanscape wire protocol.",
    )
    parser.add_argument("--config", help="JSON config (listen, device, models)")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    config = SidecarConfig.from_file(args.config) if args.config else SidecarConfig()
    capabilities = load_capabilities(config.models, config.device)
    if not any(capabilities.values()):
        logging.getLogger("sidecar").warning(
            "no capability loaded; serving health endpoint only"
        )

    import uvicorn

    uvicorn.run(
        create_app(capabilities),
        host=config.host,
        port=config.port,
        log_level="warning",
        workers=1,  # request parallelism stays in-process; inference is lock-serialized
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
