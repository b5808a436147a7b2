# -*- coding: utf-8 -*-
"""
Module for the synthetic corpus: marked malicious files, benign files and
the manifest listing their labels
"""
import logging
import os
from typing import (
    List,
    Tuple
)

import lazy_import
import numpy as np

from ...constants import (
    MANIFEST_COLUMNS,
    MANIFEST_NAME,
    MARKER
)
from ...enums import Label
from ...pe import (
    SynthSpec,
    synthesize_minimal
)

pd = lazy_import.lazy_module("pandas")

logger = logging.getLogger(__name__)


class CorpusError(Exception):
    """
    The corpus or its manifest is not usable
    """


HEADER_RESERVE = 8192
IMPORTS = (("kernel32.dll", ("ExitProcess", "GetProcAddress", "LoadLibraryA")),
           ("user32.dll", ("MessageBoxA",)))


def corpus_spec(rng: np.random.Generator, label: Label) -> SynthSpec:
    """
    :param np.random.Generator rng: Source of the layout choices
    :param Label label: Malicious files carry the marker in their first section
    :return: Layout of the next corpus file
    :rtype: SynthSpec
    """
    n_sections = int(rng.integers(1, 4))
    imports = IMPORTS[:int(rng.integers(1, 3))] if n_sections >= 2 and rng.random() < 0.5 else ()
    overlay_len = int(rng.integers(16, 1024)) if rng.random() < 0.3 else 0
    return SynthSpec(n_sections=n_sections, overlay_len=overlay_len, content_seed=int(rng.integers(2 ** 31)),
                     header_reserve=HEADER_RESERVE, imports=imports,
                     first_section_prefix=MARKER if label is Label.MALICIOUS else b"")


def synthesize_corpus(n_benign: int, n_malicious: int, out_dir: str, seed: int = 0) -> "pd.DataFrame":
    """
    Write the corpus files and the manifest

    :param int n_benign: Number of benign files
    :param int n_malicious: Number of malicious files
    :param str out_dir: Directory receiving benign/, malicious/ and the manifest
    :param int seed: The same seed writes the same files
    :return: Manifest, paths relative to out_dir
    :rtype: pd.DataFrame
    """
    rng = np.random.default_rng(seed)
    rows = []
    for label, count in ((Label.BENIGN, n_benign), (Label.MALICIOUS, n_malicious)):
        name = label.name.lower()
        os.makedirs(os.path.join(out_dir, name), exist_ok=True)
        for index in range(count):
            relative = f"{name}/{name}_{index:04d}.exe"
            with open(os.path.join(out_dir, relative), "wb") as file:
                file.write(synthesize_minimal(corpus_spec(rng, label)))
            rows.append((relative, label.value))

    manifest = pd.DataFrame(rows, columns=MANIFEST_COLUMNS)
    manifest.to_csv(os.path.join(out_dir, MANIFEST_NAME), index=False)
    logger.info("Wrote %d benign and %d malicious files to %s", n_benign, n_malicious, out_dir)

    return manifest


def read_manifest(path: str) -> "pd.DataFrame":
    """
    :param str path: Manifest file
    :return: Manifest with absolute paths
    :rtype: pd.DataFrame
    :raise FileNotFoundError: The manifest doesn't exist
    :raise CorpusError: The manifest doesn't have the path and label columns
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Manifest {path} doesn't exist")
    manifest = pd.read_csv(path)
    if list(manifest.columns) != MANIFEST_COLUMNS:
        raise CorpusError(f"Manifest {path} must have the columns {', '.join(MANIFEST_COLUMNS)}")
    manifest["path"] = [os.path.join(os.path.dirname(os.path.abspath(path)), item) for item in manifest["path"]]

    return manifest


def load_dataset(manifest: "pd.DataFrame") -> List[Tuple[bytes, int]]:
    dataset = []
    for path, label in zip(manifest["path"], manifest["label"]):
        with open(path, "rb") as file:
            dataset.append((file.read(), int(label)))
    return dataset


def list_files(directory: str) -> List[str]:
    """
    :return: Files of the directory, sorted by name
    :rtype: List[str]
    """
    return [os.path.join(directory, name) for name in sorted(os.listdir(directory))
            if os.path.isfile(os.path.join(directory, name))]
