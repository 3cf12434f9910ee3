import logging
import sys
from datetime import datetime

import hydra

from common.errors import MarketError, SolverError
from runner import build_runner

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INTERNAL = 4


def exit_code(exc):
    if isinstance(exc, MarketError):
        return EXIT_CONFIG
    if isinstance(exc, SolverError):
        return EXIT_SOLVER
    return EXIT_INTERNAL


@hydra.main(version_base=None, config_path="./config", config_name="default")
def main(cfg):
    if not cfg.exp_dir:
        cfg.exp_dir = cfg.base_dir + '/' + f"{datetime.now().strftime('%Y-%m-%d-%H:%M:%S')}"
    try:
        runner = build_runner(cfg)
        runner.run()
    except (MarketError, SolverError) as e:
        kind = "error" if isinstance(e, MarketError) else "solver error"
        print(f"{kind}: {e}", file=sys.stderr)
        sys.exit(exit_code(e))
    except Exception as e:
        logger.exception("run failed")
        print(f"internal error: {e!r}", file=sys.stderr)
        sys.exit(exit_code(e))


if __name__ == "__main__":
    try:
        main()
    except SystemExit as e:
        # every failure inside main exits with its own code, so a 1 can only
        # come from hydra rejecting the config or the overrides
        sys.exit(EXIT_CONFIG if e.code == 1 else e.code)
