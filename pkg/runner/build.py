import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fvcore.common.registry import Registry
from omegaconf import OmegaConf

from common import __version__
from common.errors import ConfigError
from common.io_utils import make_dir, save_csv, save_json, save_yaml
from common.type_utils import cfg2dict, config_digest

__all__ = ["RUNNER_REGISTRY", "COMMANDS", "RunManifest", "BaseRunner", "build_runner"]

RUNNER_REGISTRY = Registry("runner")

# subcommand -> registered runner
COMMANDS = {
    "fluid": "FluidRunner",
    "psi": "PsiRunner",
    "sweep": "SweepRunner",
    "simulate": "SimulateRunner",
    "rideshare": "RideshareRunner",
    "supplychain": "SupplyChainRunner",
    "secondary": "SecondaryRunner",
}


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config_digest: str
    root_seed: int
    tool_version: str = __version__
    started_at: str = ""
    finished_at: str = ""
    outputs: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


class BaseRunner():
    """Computes everything first, then writes outputs atomically plus manifest.json.

    Subclasses implement ``execute`` and queue files with ``emit_json`` /
    ``emit_csv``; nothing touches exp_dir until ``execute`` returns.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.command = cfg.command
        self.exp_dir = Path(cfg.exp_dir)
        self.seed = int(cfg.rng_seed)
        self.threads = int(cfg.get("threads", 1))
        self.progress = bool(cfg.get("progress", False))
        self.rho = float(cfg.get("rho", 0.5))
        self.logger = logging.getLogger(type(self).__module__)
        self._pending = []

    def emit_json(self, name, data):
        self._pending.append((name, "json", data, None))

    def emit_csv(self, name, rows, cols):
        self._pending.append((name, "csv", rows, cols))

    def execute(self):
        raise NotImplementedError

    def run(self):
        manifest = RunManifest(command=self.command, config_digest=config_digest(self.cfg),
                               root_seed=self.seed, started_at=_now())
        self.logger.info("\n" + OmegaConf.to_yaml(self.cfg))
        self.execute()

        make_dir(self.exp_dir)
        save_yaml(cfg2dict(self.cfg), self.exp_dir / "config.yaml")
        for name, kind, data, cols in self._pending:
            path = self.exp_dir / name
            if kind == "json":
                save_json(data, path)
            else:
                save_csv(data, path, cols=cols)
            manifest.outputs[Path(name).stem] = str(path)
            self.logger.info(f"wrote {path}")
        self._pending = []
        manifest.finished_at = _now()
        save_json(manifest.to_dict(), self.exp_dir / "manifest.json")
        return manifest


def build_runner(cfg):
    command = cfg.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {sorted(COMMANDS)}")
    return RUNNER_REGISTRY.get(COMMANDS[command])(cfg)
