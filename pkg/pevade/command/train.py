# -*- coding: utf-8 -*-
"""
Module containing command for training a detector
"""
import os
from typing import Dict

from .command import Command
from .helper import ui
from .helper.corpus import (
    load_dataset,
    read_manifest
)
from ..config import ConfigError
from ..constants import EXIT_OK
from ..detector import (
    DetectorKind,
    save_model,
    train_end_to_end,
    train_feature_model
)
from ..enums import Command as CommandName

MODEL_NAME = "model.pevd"


class Train(Command):
    """
    Train the end-to-end or the feature model on the files of the manifest
    """
    _name = CommandName.TRAIN.value

    def _execute(self, config: Dict) -> int:
        settings = config["train"]
        manifest_path = config["corpus"]["manifest"]
        if not manifest_path:
            raise ConfigError("corpus.manifest is required for training")
        dataset = load_dataset(read_manifest(manifest_path))
        seed = config["run"]["seed"]

        if DetectorKind(settings["kind"]) is DetectorKind.END_TO_END:
            model = train_end_to_end(dataset, epochs=settings["epochs"],
                                     learning_rate=settings["learning_rate"] or 0.01,
                                     batch_size=settings["batch_size"], seed=seed,
                                     input_length=settings["input_length"])
        else:
            model = train_feature_model(dataset, n_trees=settings["n_trees"], depth=settings["depth"],
                                        learning_rate=settings["learning_rate"] or 0.3, seed=seed,
                                        subsample=settings["subsample"])
        model.threshold = config["detector"]["threshold"]

        out = settings["out"] or os.path.join(config["output"]["dir"], MODEL_NAME)
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        save_model(model, out)
        ui.print_table([[settings["kind"], len(dataset), model.training_accuracy, out]],
                       ["model", "files", "training accuracy", "saved to"])

        return EXIT_OK
