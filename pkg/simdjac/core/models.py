from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from . import constants as C
from .config import get_settings


class FloatEnv(BaseModel):
    """binary64 parameters the kernels are tuned for."""
    omega: float = C.OMEGA
    sqrt_omega: float = C.SQRT_OMEGA
    mu_check: float = C.MU_CHECK
    eps: float = C.EPS
    eta: float = C.ETA
    eta_hat: float = C.ETA_HAT
    p: int = C.P_BITS

    model_config = {"frozen": True}


FLOAT_ENV = FloatEnv()


class ErrorBounds(BaseModel):
    """Relative error bounds of the 2x2 kernels, as multiples of eps."""
    alpha: float = C.ALPHA_BOUND  # | |fl(e^{i alpha})| - 1 |
    tan_phi_real: float = C.TAN_PHI_BOUND_REAL
    tan_phi_complex: float = C.TAN_PHI_BOUND_COMPLEX
    cos_phi_real: float = C.COS_PHI_BOUND_REAL
    cos_phi_complex: float = C.COS_PHI_BOUND_COMPLEX
    complex_fma: float = C.EPS_TILDE
    complex_rotation: float = C.EPS_TILDE_ROT
    hypot_low: float = C.HYPOT_BOUND_LOW
    hypot_high: float = C.HYPOT_BOUND_HIGH

    model_config = {"frozen": True}

    def hypot(self) -> Tuple[float, float]:
        """Allowed (below, above) deviation of fl(hypot)/hypot from 1 on normal-range inputs."""
        return self.hypot_low * C.EPS, self.hypot_high * C.EPS

    def tan_phi(self, is_complex: bool) -> float:
        return (self.tan_phi_complex if is_complex else self.tan_phi_real) * C.EPS

    def cos_phi(self, is_complex: bool) -> float:
        return (self.cos_phi_complex if is_complex else self.cos_phi_real) * C.EPS


ERROR_BOUNDS = ErrorBounds()


Permutation = Literal["ascending", "descending", "random"]


class SpectrumSpec(BaseModel):
    """Singular values sigma_i = 2**(xi * (1 - (i-1)/(n-1))), i = 1..n, then permuted."""
    xi: float
    n: int = Field(ge=2)
    perm: Permutation = "ascending"

    @field_validator("xi")
    @classmethod
    def xi_non_positive(cls, v: float) -> float:
        if v > 0:
            raise ValueError("xi must be <= 0 so that all sigma lie in (0, 1]")
        return v


class SVDConfig(BaseModel):
    max_sweeps: int = Field(default_factory=lambda: get_settings().max_sweeps, ge=1)
    strategy: str = Field(default_factory=lambda: get_settings().strategy)
    workers: int = Field(default_factory=lambda: get_settings().workers, ge=1)
    lanes: int = Field(default_factory=lambda: get_settings().lanes)
    gram_schmidt: bool = Field(default_factory=lambda: get_settings().gram_schmidt)
    debug_checks: bool = Field(default_factory=lambda: get_settings().debug_checks)
    max_rescale_attempts: int = Field(default_factory=lambda: get_settings().max_rescale_attempts, ge=1)
    norm_reduction: Literal["sequential", "pairwise"] = Field(default_factory=lambda: get_settings().norm_reduction)

    @field_validator("lanes")
    @classmethod
    def lanes_power_of_two(cls, v: int) -> int:
        if v < 2 or v & (v - 1):
            raise ValueError(f"lanes must be a power of two >= 2, got {v}")
        return v

    @staticmethod
    def varsigma(is_complex: bool) -> float:
        return 4.0 if is_complex else 2.0


class SweepRecord(BaseModel):
    sweep: int
    transformations: int  # T
    rescalings: int = 0
    scale_exponent: int  # s_k at the end of the sweep
    phase_seconds: Dict[str, float] = {}


class ErrorMeasures(BaseModel):
    r_G: float
    r_U: float
    r_V: float
    r_Sigma: float


class EVDComparison(BaseModel):
    """Batch maxima of the 2x2 residuals, kernel vs. reference."""
    batch_id: int
    count: int
    rho_kernel: float
    rho_ref: float
    delta_kernel: float
    delta_ref: float
    lambda_f_kernel: float
    lambda_f_ref: float
    lambda_max_kernel: float
    lambda_max_ref: float
    rho_ratio: float  # ref / kernel
    lambda_f_ratio: float
    seconds_kernel: float = 0.0
    seconds_ref: float = 0.0


class NormRecord(BaseModel):
    vector: int
    xi: float
    m: int
    rel_err_ef: float
    rel_err_dot: Optional[float]  # None when the baseline overflowed
    dot_overflow: bool
    seconds_ef: float = 0.0
    seconds_dot: float = 0.0


class RunManifest(BaseModel):
    """Everything that determines a CLI run; echoed into every CSV."""
    subcommand: str
    seed: Optional[int] = None
    inputs: List[str] = []
    outputs: List[str] = []
    strategy: Optional[str] = None
    workers: int = 1
    sweeps: Optional[int] = None
    lanes: int = C.DEFAULT_LANES
    backend: str = "vector"
    params: Dict[str, str] = {}
    format_version: int = C.FORMAT_VERSION

    @model_validator(mode="after")
    def lanes_power_of_two(self):
        if self.lanes < 2 or self.lanes & (self.lanes - 1):
            raise ValueError(f"lanes must be a power of two >= 2, got {self.lanes}")
        return self
