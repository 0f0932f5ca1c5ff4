import math
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import List, Optional

import numpy as np


class CoderKind(str, Enum):
    """Binary descriptor used to code the normalized luminance"""

    LBP_GT = "lbp"
    CENSUS_GE = "census"
    MTB = "mtb"

    @property
    def depth(self):
        return 1 if self is CoderKind.MTB else 8


class NormalizationMode(str, Enum):
    """How the exposure pair is made comparable before coding"""

    BIDIRECTIONAL = "bidirectional"
    UNIDIRECTIONAL = "unidirectional"
    NONE = "none"


@dataclass(frozen=True)
class Motion:
    """
    Euclidean motion about the image center.

    A pixel p of the moving image corresponds to the point
    c + R(theta) (p - c) + (tx, ty) of the reference, with x the column
    and y the row index.
    """

    theta: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    @classmethod
    def from_degrees(cls, theta_deg, tx=0.0, ty=0.0):
        return cls(math.radians(theta_deg), float(tx), float(ty))

    @property
    def degrees(self):
        return math.degrees(self.theta)

    def as_vector(self):
        """Parameter vector in normal-equation order (tx, ty, theta)"""
        return np.array([self.tx, self.ty, self.theta], dtype=np.float64)

    def to_dict(self):
        return {"theta_deg": self.degrees, "tx": self.tx, "ty": self.ty}


@dataclass(frozen=True)
class ValidityMask:
    """True where a warped sample fell inside the source image"""

    bits: np.ndarray

    @property
    def height(self):
        return self.bits.shape[0]

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def count(self):
        return int(np.count_nonzero(self.bits))

    @property
    def fraction(self):
        return self.count / self.bits.size

    @classmethod
    def full(cls, height, width):
        return cls(np.ones((height, width), dtype=bool))


@dataclass(frozen=True)
class Pyramid:
    """Gaussian pyramid, level 0 at full resolution, coarsest last"""

    levels: List[np.ndarray]

    def __len__(self):
        return len(self.levels)

    @property
    def coarsest(self):
        return self.levels[-1]


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    def cumulative(self):
        return np.cumsum(self.counts, dtype=np.int64)


@dataclass(frozen=True)
class IntensityLut:
    """256-entry monotone non-decreasing intensity table"""

    table: np.ndarray

    def __call__(self, img):
        return self.table[np.asarray(img, dtype=np.uint8)]

    def is_monotone(self):
        return bool(np.all(np.diff(self.table.astype(np.int32)) >= 0))

    @classmethod
    def identity(cls):
        return cls(np.arange(256, dtype=np.uint8))


@dataclass(frozen=True)
class SaturationThresholds:
    alpha: int = 5
    beta: int = 254
    zeta1: int = 0
    zeta2: int = 255

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class NormalizedPair:
    z1_hat: np.ndarray
    z2_hat: np.ndarray
    thresholds: SaturationThresholds
    f12: IntensityLut
    f21: IntensityLut


@dataclass(frozen=True)
class BitPlanes:
    """J binary planes of shape (J, height, width), values in {0, 1}"""

    planes: np.ndarray

    @property
    def depth(self):
        return self.planes.shape[0]

    @property
    def height(self):
        return self.planes.shape[1]

    @property
    def width(self):
        return self.planes.shape[2]


@dataclass(frozen=True)
class PlaneGradients:
    dx: np.ndarray
    dy: np.ndarray


@dataclass(frozen=True)
class NormalEquations:
    A: np.ndarray
    b: np.ndarray
    n_valid: int


@dataclass(frozen=True)
class AlignConfig:
    max_pyramid_levels: int = 4
    max_iters_per_level: int = 10
    theta_tolerance: float = 1e-4
    translation_tolerance: float = 0.01
    coder: CoderKind = CoderKind.LBP_GT
    sigma: float = 0.5
    alpha: int = 5
    beta: int = 254
    use_histogram_init: bool = True
    normalization: NormalizationMode = NormalizationMode.BIDIRECTIONAL

    def to_dict(self):
        data = asdict(self)
        data["coder"] = self.coder.value
        data["normalization"] = self.normalization.value
        return data


@dataclass(frozen=True)
class LevelStats:
    level: int
    iterations: int
    cost: float
    valid_fraction: float
    converged: bool = False


@dataclass
class AlignResult:
    """Motion mapping slave coordinates onto the reference frame, plus diagnostics"""

    motion: Motion
    per_level: List[LevelStats] = field(default_factory=list)
    converged: bool = False
    swapped: bool = False
    init: Optional[Motion] = None

    @property
    def final_cost(self):
        return self.per_level[-1].cost if self.per_level else 0.0


@dataclass(frozen=True)
class MotionError:
    d_theta: float
    d_ty: float
    d_tx: float


@dataclass(frozen=True)
class JointHistogram:
    bins: np.ndarray

    @property
    def total(self):
        return int(self.bins.sum())
