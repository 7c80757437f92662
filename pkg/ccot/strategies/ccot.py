from typing import Optional

from ..coclust import CcotConfig, CoClusterResult, ccot
from ..core import DataMatrix
from .base import BaseStrategy


class CcotStrategy(BaseStrategy):
    """
    Sampled entropic OT between rows and columns, majority vote over samples.
    """

    name = "ccot"

    def __init__(self, cfg: Optional[CcotConfig] = None):
        self.cfg = cfg or CcotConfig()

    def fit(self, matrix: DataMatrix) -> CoClusterResult:
        return ccot(matrix, self.cfg)
