# -*- coding: utf-8 -*-
"""
Module for reading and writing model files.

Layout, all values little-endian::

    magic "PEVD" | u16 version | u8 type tag | u8 reserved (0)

Type tag 1, end-to-end model::

    u32 input length | u32 embedding size | u32 filters | u32 width | f64 threshold
    f64 embedding[257 * embedding size]
    f64 convolution weight[filters * embedding size * width] | f64 convolution bias[filters]
    f64 head weight[filters] | f64 head bias[1]

Type tag 2, boosted trees::

    u32 number of trees | f64 learning rate | f64 base score | f64 threshold
    for every tree: u32 node count, then per node array
        i32 feature | f64 threshold | i32 left | i32 right | f64 value
"""
import struct
from typing import (
    Tuple,
    Union
)

import numpy as np
import torch

from .boosting import (
    FeatureModel,
    Tree
)
from .end_to_end import (
    VOCABULARY_SIZE,
    ByteConvNet,
    EndToEndModel
)
from .exceptions import ModelFormatError

MAGIC = b"PEVD"
VERSION = 1
TAG_END_TO_END = 1
TAG_TREES = 2

_HEADER = struct.Struct("<4sHBB")
_END_TO_END = struct.Struct("<IIIId")
_TREES = struct.Struct("<Iddd")
_NODE_ARRAYS = (("feature", "<i4"), ("threshold", "<f8"), ("left", "<i4"), ("right", "<i4"), ("value", "<f8"))

Model = Union[EndToEndModel, FeatureModel]


def dumps(model: Model) -> bytes:
    """
    :param model: Trained model
    :return: Content of the model file
    :rtype: bytes
    """
    if isinstance(model, EndToEndModel):
        network = model.network
        parts = [_HEADER.pack(MAGIC, VERSION, TAG_END_TO_END, 0),
                 _END_TO_END.pack(model.input_length, model.embedding_size, model.filters, model.width,
                                  model.threshold)]
        parts += [_array(parameter.detach().numpy(), "<f8") for parameter in
                  (network.embedding.weight, network.conv.weight, network.conv.bias, network.head.weight,
                   network.head.bias)]
        return b"".join(parts)

    if isinstance(model, FeatureModel):
        parts = [_HEADER.pack(MAGIC, VERSION, TAG_TREES, 0),
                 _TREES.pack(len(model.trees), model.learning_rate, model.base_score, model.threshold)]
        for tree in model.trees:
            parts.append(struct.pack("<I", len(tree.feature)))
            parts += [_array(getattr(tree, name), dtype) for name, dtype in _NODE_ARRAYS]
        return b"".join(parts)

    raise TypeError(f"Can't store a model of type {type(model).__name__}")


def loads(data: bytes) -> Model:
    """
    :param bytes data: Content of a model file
    :return: Model scoring exactly like the stored one
    :raise ModelFormatError: The content is not a valid model file
    """
    reader = _Reader(data)
    magic, version, tag, _ = reader.unpack(_HEADER)
    if magic != MAGIC:
        raise ModelFormatError(f"Expected magic {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise ModelFormatError(f"Unsupported model file version {version}")

    if tag == TAG_END_TO_END:
        model = _load_end_to_end(reader)
    elif tag == TAG_TREES:
        model = _load_trees(reader)
    else:
        raise ModelFormatError(f"Unknown model type tag {tag}")
    if reader.remaining:
        raise ModelFormatError(f"{reader.remaining} unexpected bytes at the end of the model file")

    return model


def save_model(model: Model, path: str) -> None:
    with open(path, "wb") as file:
        file.write(dumps(model))


def load_model(path: str) -> Model:
    """
    :param str path: Path of the model file
    :return: Stored model
    :raise ModelFormatError: The file is not a valid model file
    """
    with open(path, "rb") as file:
        return loads(file.read())


def _load_end_to_end(reader: "_Reader") -> EndToEndModel:
    input_length, embedding_size, filters, width, threshold = reader.unpack(_END_TO_END)
    if not embedding_size or not filters or not width or input_length % width:
        raise ModelFormatError("Invalid end-to-end model dimensions")
    network = ByteConvNet(embedding_size, filters, width).double()
    shapes = (
        (network.embedding.weight, (VOCABULARY_SIZE, embedding_size)),
        (network.conv.weight, (filters, embedding_size, width)),
        (network.conv.bias, (filters,)),
        (network.head.weight, (1, filters)),
        (network.head.bias, (1,)),
    )
    with torch.no_grad():
        for parameter, shape in shapes:
            parameter.copy_(torch.from_numpy(reader.array("<f8", int(np.prod(shape))).reshape(shape)))

    return EndToEndModel(network, input_length, threshold)


def _load_trees(reader: "_Reader") -> FeatureModel:
    count, learning_rate, base_score, threshold = reader.unpack(_TREES)
    trees = []
    for _ in range(count):
        nodes, = reader.unpack(struct.Struct("<I"))
        arrays = {name: reader.array(dtype, nodes) for name, dtype in _NODE_ARRAYS}
        internal = arrays["feature"] >= 0
        children = np.concatenate([arrays["left"][internal], arrays["right"][internal]])
        if not nodes or children.size and (children.min() <= 0 or children.max() >= nodes):
            raise ModelFormatError("Tree with invalid child indices")
        trees.append(Tree(**{name: array.astype(np.int32 if dtype == "<i4" else np.float64)
                             for (name, dtype), array in zip(_NODE_ARRAYS, arrays.values())}))

    return FeatureModel(trees, learning_rate, base_score, threshold)


def _array(values: np.ndarray, dtype: str) -> bytes:
    return np.ascontiguousarray(values, dtype=dtype).tobytes()


class _Reader:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.position = 0

    @property
    def remaining(self) -> int:
        return len(self.data) - self.position

    def take(self, size: int) -> bytes:
        if size > self.remaining:
            raise ModelFormatError("Model file is truncated")
        chunk = self.data[self.position:self.position + size]
        self.position += size
        return chunk

    def unpack(self, layout: struct.Struct) -> Tuple:
        return layout.unpack(self.take(layout.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        return np.frombuffer(self.take(np.dtype(dtype).itemsize * count), dtype=dtype).copy()
