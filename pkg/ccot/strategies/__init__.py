from typing import Dict, Type

from ..errors import InputError
from .base import BaseStrategy
from .ccot import CcotStrategy
from .ccot_gw import CcotGwStrategy

STRATEGIES: Dict[str, Type[BaseStrategy]] = {
    CcotStrategy.name: CcotStrategy,
    CcotGwStrategy.name: CcotGwStrategy,
}


def get_strategy(name: str, **kwargs) -> BaseStrategy:
    try:
        cls = STRATEGIES[name]
    except KeyError:
        raise InputError(f"unknown method '{name}', expected one of {sorted(STRATEGIES)}") from None
    return cls(**kwargs)
