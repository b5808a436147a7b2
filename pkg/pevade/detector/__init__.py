# -*- coding: utf-8 -*-
"""
Detectors scoring files as malicious, their trainers and model files
"""
from .boosting import (
    FeatureModel,
    Tree,
    fit_boosting,
    train_feature_model
)
from .detector import (
    DEFAULT_THRESHOLD,
    Detector,
    DetectorScore
)
from .end_to_end import (
    ByteConvNet,
    EndToEndModel,
    train_end_to_end
)
from .exceptions import (
    DegenerateDataset,
    DetectorError,
    ExternalProtocol,
    ExternalTimeout,
    ExternalUnreachable,
    ModelFormatError,
    NotDifferentiable,
    PositionOutOfWindow
)
from .external import (
    ExternalDetector,
    HttpTransport,
    SubprocessTransport
)
from .factory import (
    DetectorKind,
    DetectorSpec,
    TransportKind,
    detector_from_target
)
from .features import extract_features
from .storage import (
    load_model,
    save_model
)
