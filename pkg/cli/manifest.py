from dataclasses import asdict, dataclass, fields
from typing import Optional, Tuple

import yaml

from ccot import config as lib_config
from ccot.coclust import CcotConfig, KernelConfig
from ccot.errors import InputError
from ccot.gromov import GWConfig
from ccot.strategies import STRATEGIES

from . import config
from .ingest import FORMATS


@dataclass
class RunManifest:
    """
    Everything a run needs: one input source, the method and its settings.
    """

    input: Optional[str] = None
    format: str = "dense-csv"
    preset: Optional[str] = None
    method: str = config.DEFAULT_METHOD
    lam: Optional[float] = None  # None: grid search (ccot) or CCOT_GW_LAMBDA (ccot-gw)
    samples: int = lib_config.N_SAMPLES
    max_extra_samples: int = lib_config.MAX_EXTRA_SAMPLES
    eps: Tuple[float, float] = (lib_config.EPS_R, 1.0 - lib_config.EPS_R)
    sigma: Optional[float] = None
    loss: str = "squared"
    barycenter_size: Optional[int] = None
    outer_iter: int = lib_config.GW_OUTER_ITER
    seed: int = 0
    n_jobs: int = lib_config.N_JOBS
    out: str = config.OUTPUT_DIR
    exclude_zeros: Optional[bool] = None  # None: on for triplet input
    record_timing: bool = False

    def validate(self) -> "RunManifest":
        if (self.input is None) == (self.preset is None):
            raise InputError("exactly one of input path or preset is required")
        if self.format not in FORMATS:
            raise InputError(f"unknown input format '{self.format}', expected one of {FORMATS}")
        if self.method not in STRATEGIES:
            raise InputError(f"unknown method '{self.method}', expected one of {sorted(STRATEGIES)}")
        if len(self.eps) != 2:
            raise InputError(f"eps needs two weights, got {self.eps}")
        # building the configs runs their own checks
        self.ccot_config()
        self.gw_config()
        self.kernel_config()
        return self

    @property
    def zero_exclusion(self) -> bool:
        if self.exclude_zeros is None:
            return self.input is not None and self.format == "triplet"
        return self.exclude_zeros

    def ccot_config(self) -> CcotConfig:
        return CcotConfig(
            lam=self.lam,
            n_samples=self.samples,
            seed=self.seed,
            max_extra_samples=self.max_extra_samples,
            n_jobs=self.n_jobs,
        )

    def gw_config(self) -> GWConfig:
        return GWConfig(
            lam=self.lam if self.lam is not None else lib_config.GW_LAMBDA,
            loss=self.loss,
            eps_r=float(self.eps[0]),
            eps_c=float(self.eps[1]),
            barycenter_size=self.barycenter_size,
            outer_iter=self.outer_iter,
            seed=self.seed,
        )

    def kernel_config(self) -> KernelConfig:
        return KernelConfig(kind="gaussian", sigma=self.sigma)

    def to_dict(self) -> dict:
        """
        Settings recorded in the run summary; the output directory is left out.
        """
        out = asdict(self)
        out.pop("out")
        out["eps"] = [float(x) for x in self.eps]
        return out

    @classmethod
    def from_yaml(cls, path: str) -> "RunManifest":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError(f"unknown manifest keys in {path}: {unknown}")
        if "eps" in data:
            data["eps"] = tuple(data["eps"])
        return cls(**data)

    def updated(self, **overrides) -> "RunManifest":
        """
        Copy with every override that is not None applied.
        """
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None})
        # a source given on the command line replaces the manifest's source
        if overrides.get("input") is not None and overrides.get("preset") is None:
            data["preset"] = None
        if overrides.get("preset") is not None and overrides.get("input") is None:
            data["input"] = None
        data["eps"] = tuple(data["eps"])
        return RunManifest(**data)
