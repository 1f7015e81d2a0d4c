from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field

Padding = Union[Literal["valid", "same"], Annotated[int, Field(ge=0)]]


class InputSpec(BaseModel):
    """Declares the per-sample input shape (channels, height, width)."""

    kind: Literal["input"] = "input"
    name: str = "input_1"
    shape: tuple[int, int, int]


class Conv2DSpec(BaseModel):
    kind: Literal["conv2d"] = "conv2d"
    name: str
    out_channels: int = Field(ge=1)
    kernel_size: int = Field(ge=1)
    stride: int = Field(default=1, ge=1)
    padding: Padding = "valid"
    activation: Literal["relu", "linear"] = "relu"


class MaxPool2DSpec(BaseModel):
    kind: Literal["maxpool2d"] = "maxpool2d"
    name: str
    pool_size: int = Field(ge=1)
    stride: int = Field(ge=1)
    padding: Padding = "valid"


class BatchNormSpec(BaseModel):
    kind: Literal["batchnorm"] = "batchnorm"
    name: str
    channels: int = Field(ge=1)
    momentum: float = Field(ge=0.0, le=1.0)
    epsilon: float = Field(gt=0.0)


class DropoutSpec(BaseModel):
    kind: Literal["dropout"] = "dropout"
    name: str
    rate: float = Field(ge=0.0, lt=1.0)


class FlattenSpec(BaseModel):
    kind: Literal["flatten"] = "flatten"
    name: str


class DenseSpec(BaseModel):
    kind: Literal["dense"] = "dense"
    name: str
    units: int = Field(ge=1)
    activation: Literal["relu", "softmax", "linear"] = "relu"


LayerSpec = Annotated[
    Union[InputSpec, Conv2DSpec, MaxPool2DSpec, BatchNormSpec, DropoutSpec, FlattenSpec, DenseSpec],
    Field(discriminator="kind"),
]


class ModelSpec(BaseModel):
    """Ordered layer chain; the first entry is the input declaration."""

    layers: list[LayerSpec]

    @property
    def input_shape(self) -> tuple[int, int, int]:
        first = self.layers[0]
        if not isinstance(first, InputSpec):
            raise ValueError("ModelSpec must start with an input layer")
        return first.shape


class LayerSummary(BaseModel):
    name: str
    kind: str
    output_shape: tuple[int, ...]
    params: int


class ModelSummary(BaseModel):
    layers: list[LayerSummary]
    trainable_params: int
    non_trainable_params: int

    @property
    def total_params(self) -> int:
        return self.trainable_params + self.non_trainable_params
