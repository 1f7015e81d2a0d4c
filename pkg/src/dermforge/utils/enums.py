from enum import Enum, IntEnum

from .constants import CLASS_CODES, CLASS_NAMES


class ClassLabel(IntEnum):
    """Diagnosis label; the integer value is the model output index."""

    AKIEC = 0
    BCC = 1
    BKL = 2
    DF = 3
    MEL = 4
    NV = 5
    VASC = 6

    @property
    def code(self) -> str:
        return CLASS_CODES[self.value]

    @property
    def full_name(self) -> str:
        return CLASS_NAMES[self.code]

    @classmethod
    def from_code(cls, code: str) -> "ClassLabel":
        """Map a HAM10000 dx code to its label.

        Raises:
            ValueError: If the code is not one of the seven diagnosis codes
        """
        try:
            return cls(CLASS_CODES.index(code))
        except ValueError:
            raise ValueError(f"Unknown diagnosis code '{code}'") from None


class Mode(Enum):
    """Execution mode of a forward pass."""

    TRAINING = "training"
    INFERENCE = "inference"


class Split(Enum):
    TRAIN = "train"
    VALIDATION = "val"


class Facet(Enum):
    """Exploratory tabulations of the metadata."""

    DX = "dx"
    DX_TYPE = "dx_type"
    LOCALIZATION = "localization"
    AGE_BY_DX = "age_by_dx"


class ClassWeightMode(Enum):
    PAPER = "paper"
    UNIFORM = "uniform"


class ReduceMode(Enum):
    SUM = "sum"
    MEAN = "mean"
    MAX = "max"
