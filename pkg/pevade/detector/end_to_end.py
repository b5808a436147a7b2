# -*- coding: utf-8 -*-
"""
Module for the end-to-end byte model: embedding, strided convolution,
global max pooling and a logistic head over the first bytes of the file
"""
import logging
from typing import (
    Sequence,
    Tuple
)

import numpy as np
import torch
from torch import nn

from .detector import (
    DEFAULT_THRESHOLD,
    Detector
)
from .exceptions import (
    DegenerateDataset,
    PositionOutOfWindow
)

logger = logging.getLogger(__name__)

DEFAULT_INPUT_LENGTH = 65536
VOCABULARY_SIZE = 257
PADDING_TOKEN = 256


class ByteConvNet(nn.Module):
    """
    Network scoring a window of byte tokens

    :param int embedding_size: Size of the embedding vector of a token
    :param int filters: Number of convolution filters
    :param int width: Width and stride of the convolution
    """

    def __init__(self, embedding_size: int = 8, filters: int = 16, width: int = 32):
        super().__init__()
        self.embedding = nn.Embedding(VOCABULARY_SIZE, embedding_size)
        self.conv = nn.Conv1d(embedding_size, filters, width, stride=width)
        self.head = nn.Linear(filters, 1)

    def forward_embedded(self, embedded: torch.Tensor) -> torch.Tensor:
        """
        :param torch.Tensor embedded: Embedded tokens, (batch, length, embedding size)
        :return: Logits, (batch,)
        :rtype: torch.Tensor
        """
        activations = self.conv(embedded.transpose(1, 2))
        pooled = activations.max(dim=2).values
        return self.head(pooled).squeeze(1)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:  # pylint: disable=arguments-differ
        return self.forward_embedded(self.embedding(tokens))


class EndToEndModel(Detector):
    """
    Differentiable detector reading the first input_length bytes of a file.

    Positions past the end of the file hold the padding token, bytes past
    input_length are never read.
    """
    name = "end_to_end"
    differentiable = True

    def __init__(self, network: ByteConvNet = None, input_length: int = DEFAULT_INPUT_LENGTH,
                 threshold: float = DEFAULT_THRESHOLD):
        super().__init__(threshold)
        self.network = (network if network is not None else ByteConvNet()).double().eval()
        if input_length % self.width:
            raise ValueError(f"Input length {input_length} is not a multiple of the convolution width {self.width}")
        self.input_length = input_length
        self.training_accuracy = None

    @classmethod
    def zeros(cls, input_length: int = DEFAULT_INPUT_LENGTH, embedding_size: int = 8, filters: int = 16,
              width: int = 32, threshold: float = DEFAULT_THRESHOLD) -> "EndToEndModel":
        """
        :return: Untrained model with every parameter at 0, scoring 0.5 for any input
        :rtype: EndToEndModel
        """
        network = ByteConvNet(embedding_size, filters, width)
        with torch.no_grad():
            for parameter in network.parameters():
                parameter.zero_()
        return cls(network, input_length, threshold)

    @property
    def embedding_size(self) -> int:
        return self.network.embedding.embedding_dim

    @property
    def filters(self) -> int:
        return self.network.conv.out_channels

    @property
    def width(self) -> int:
        return self.network.conv.kernel_size[0]

    @property
    def embedding_matrix(self) -> np.ndarray:
        """
        :return: Embedding vector of every token, (257, embedding size)
        :rtype: np.ndarray
        """
        return self.network.embedding.weight.detach().numpy().copy()

    def tokens(self, data: bytes) -> np.ndarray:
        """
        :param bytes data: Content of a file
        :return: Token window, bytes of the file followed by padding tokens
        :rtype: np.ndarray
        """
        window = np.full(self.input_length, PADDING_TOKEN, dtype=np.int64)
        content = np.frombuffer(bytes(data[:self.input_length]), dtype=np.uint8)
        window[:len(content)] = content
        return window

    def embed(self, data: bytes) -> np.ndarray:
        """
        :param bytes data: Content of a file
        :return: Embedded window, (input length, embedding size)
        :rtype: np.ndarray
        """
        return self.embedding_matrix[self.tokens(data)]

    def malice(self, data: bytes) -> float:
        with torch.no_grad():
            logits = self.network(torch.from_numpy(self.tokens(data)).unsqueeze(0))
        return float(torch.sigmoid(logits)[0])

    def malice_embedded(self, embedded: np.ndarray) -> float:
        """
        Score an embedded window directly

        :param np.ndarray embedded: Embedded window, (input length, embedding size)
        :return: Probability that the file is malicious
        :rtype: float
        """
        with torch.no_grad():
            logits = self.network.forward_embedded(torch.as_tensor(embedded, dtype=torch.float64).unsqueeze(0))
        return float(torch.sigmoid(logits)[0])

    def gradient(self, data: bytes, positions: Sequence[int]) -> np.ndarray:
        """
        Gradient of the score with respect to the embedding vectors at the positions

        :param bytes data: Content of a file
        :param positions: File offsets, all below input_length
        :return: Gradients, (number of positions, embedding size)
        :rtype: np.ndarray
        :raise PositionOutOfWindow: A position is outside of the input window
        """
        positions = np.asarray(positions, dtype=np.int64)
        outside = positions[(positions < 0) | (positions >= self.input_length)]
        if len(outside):
            raise PositionOutOfWindow(f"Position {int(outside[0])} is outside of the {self.input_length} "
                                      f"bytes input window")

        tokens = torch.from_numpy(self.tokens(data)).unsqueeze(0)
        embedded = self.network.embedding(tokens).detach().requires_grad_(True)
        malice = torch.sigmoid(self.network.forward_embedded(embedded)).sum()
        gradient, = torch.autograd.grad(malice, embedded)

        return gradient[0].numpy()[positions]


def train_end_to_end(dataset: Sequence[Tuple[bytes, int]], epochs: int = 20, learning_rate: float = 0.01,
                     batch_size: int = 32, seed: int = 0, input_length: int = DEFAULT_INPUT_LENGTH,
                     embedding_size: int = 8, filters: int = 16, width: int = 32) -> EndToEndModel:
    """
    Train the byte model with Adam on the logistic loss

    :param dataset: File contents with their label, 1 for malicious
    :param int epochs: Number of passes over the data
    :param float learning_rate: Adam learning rate
    :param int batch_size: Number of files per update
    :param int seed: Seed of the initialization and the shuffling
    :return: Trained model, training_accuracy holds the accuracy on the dataset
    :rtype: EndToEndModel
    :raise DegenerateDataset: Both labels are not present
    """
    labels = np.array([label for _, label in dataset], dtype=np.float64)
    if len(set(labels.tolist())) != 2:
        raise DegenerateDataset("Training needs both benign and malicious files")

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = EndToEndModel(ByteConvNet(embedding_size, filters, width), input_length)
    tokens = np.stack([model.tokens(data) for data, _ in dataset]).astype(np.int16)
    network = model.network.train()
    optimizer = torch.optim.Adam(network.parameters(), lr=learning_rate)
    loss_function = nn.BCEWithLogitsLoss()
    rng = np.random.default_rng(seed)

    for epoch in range(epochs):
        order = rng.permutation(len(dataset))
        total = 0.0
        for start in range(0, len(order), batch_size):
            batch = order[start:start + batch_size]
            optimizer.zero_grad()
            logits = network(torch.from_numpy(tokens[batch].astype(np.int64)))
            loss = loss_function(logits, torch.from_numpy(labels[batch]))
            loss.backward()
            optimizer.step()
            total += float(loss) * len(batch)
        logger.info("Epoch %d/%d, loss %.6f", epoch + 1, epochs, total / len(order))

    network.eval()
    with torch.no_grad():
        predictions = np.concatenate([
            torch.sigmoid(network(torch.from_numpy(tokens[start:start + batch_size].astype(np.int64)))).numpy()
            for start in range(0, len(tokens), batch_size)
        ])
    model.training_accuracy = float(np.mean((predictions >= model.threshold) == (labels == 1)))
    logger.info("Training accuracy %.4f", model.training_accuracy)

    return model
