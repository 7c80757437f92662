from typing import Callable, Dict, Optional

from ccot.strategies import BaseStrategy, get_strategy

from . import config
from .manifest import RunManifest


class Router:
    """
    Maps a method name to a configured co-clustering strategy.
    """

    def __init__(self, manifest: RunManifest):
        self.manifest = manifest
        self.settings: Dict[str, Callable[[], dict]] = {
            "ccot": lambda: {"cfg": manifest.ccot_config()},
            "ccot-gw": lambda: {"gw": manifest.gw_config(), "kernel": manifest.kernel_config()},
        }

    def get_strategy(self, name: Optional[str] = None) -> BaseStrategy:
        name = name or self.manifest.method or config.DEFAULT_METHOD
        kwargs = self.settings[name]() if name in self.settings else {}
        return get_strategy(name, **kwargs)
