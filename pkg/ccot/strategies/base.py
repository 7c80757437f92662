from abc import ABC, abstractmethod

from ..coclust import CoClusterResult
from ..core import DataMatrix


class BaseStrategy(ABC):
    """
    Co-clustering method interface. All methods must implement fit().
    """

    name = ""

    @abstractmethod
    def fit(self, matrix: DataMatrix) -> CoClusterResult:
        """
        :param matrix: data matrix to co-cluster
        :return: row and column partitions with their diagnostics
        """
        pass
