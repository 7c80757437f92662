from typing import Optional

from ..coclust import CoClusterResult, KernelConfig, ccot_gw
from ..core import DataMatrix
from ..gromov import GWConfig
from .base import BaseStrategy


class CcotGwStrategy(BaseStrategy):
    """
    GW barycenter of the row and column similarity matrices; no sampling.
    """

    name = "ccot-gw"

    def __init__(self, gw: Optional[GWConfig] = None, kernel: Optional[KernelConfig] = None):
        self.gw = gw or GWConfig()
        self.kernel = kernel or KernelConfig()

    def fit(self, matrix: DataMatrix) -> CoClusterResult:
        return ccot_gw(matrix, self.gw, self.kernel)
