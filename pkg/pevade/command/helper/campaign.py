# -*- coding: utf-8 -*-
"""
Module for the campaign outputs: CSV rows, detection curve and the
provenance record written next to every adversarial file
"""
import json
import os
from typing import (
    Dict,
    Iterable,
    List,
    Optional,
    Tuple
)

import lazy_import

from ...attack import AttackResult
from ...constants import (
    CAMPAIGN_COLUMNS,
    CURVE_COLUMNS,
    FLOAT_FORMAT,
    PROVENANCE_SUFFIX
)
from ...detector import (
    DetectorKind,
    DetectorSpec,
    TransportKind
)
from ...manipulation import format_manipulation

pd = lazy_import.lazy_module("pandas")


def detector_spec(config: Dict) -> DetectorSpec:
    settings = config["detector"]
    return DetectorSpec(kind=DetectorKind(settings["kind"]), model=settings["model"],
                        transport=TransportKind(settings["transport"]), command=settings["command"],
                        url=settings["url"], timeout_ms=settings["timeout_ms"], threshold=settings["threshold"])


def campaign_rows(results: Iterable[Tuple[str, AttackResult]], threshold: float) -> "pd.DataFrame":
    """
    :param results: Sample id and attack result of every sample
    :param float threshold: Scores at or over it count as detected
    :return: One row per sample and trace step, sorted by sample then step
    :rtype: pd.DataFrame
    """
    rows = [(sample_id, step.step_index, step.queries, step.best_score, int(step.best_score >= threshold),
             step.payload_bytes)
            for sample_id, result in results for step in result.trace]
    frame = pd.DataFrame(rows, columns=CAMPAIGN_COLUMNS)
    return frame.sort_values(["sample_id", "step_index"], kind="stable").reset_index(drop=True)


def detection_curve(rows: "pd.DataFrame") -> "pd.DataFrame":
    """
    Detection rate after every step, a sample that stopped early keeps its last state

    :param pd.DataFrame rows: Campaign rows
    :return: Columns step_index and detection_rate
    :rtype: pd.DataFrame
    """
    if rows.empty:
        return pd.DataFrame(columns=CURVE_COLUMNS)
    detected = rows.pivot(index="step_index", columns="sample_id", values="detected")
    detected = detected.reindex(range(int(rows["step_index"].max()) + 1)).ffill()
    curve = detected.mean(axis=1).rename("detection_rate").rename_axis("step_index").reset_index()
    return curve[CURVE_COLUMNS]


def write_csv(frame: "pd.DataFrame", path: str) -> None:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def provenance_path(path: str) -> str:
    return path + PROVENANCE_SUFFIX


def provenance_record(original_path: str, result: AttackResult) -> Dict:
    plan = result.plan
    return {
        "original": os.path.abspath(original_path),
        "manipulations": [format_manipulation(manipulation) for manipulation in result.manipulations],
        "regions": [{"offset": region.offset, "length": region.length, "tag": region.tag}
                    for region in (plan.regions if plan is not None else ())],
        "inserted": [{"offset": offset, "length": length} for offset, length in
                     (plan.inserted if plan is not None else ())],
        "cost": {"inserted": result.cost.inserted, "substituted": result.cost.substituted,
                 "structural": result.cost.structural, "total": result.cost.total},
        "score": result.best_score,
        "success": result.success,
        "queries": result.queries_used,
    }


def write_provenance(path: str, original_path: str, result: AttackResult) -> None:
    with open(provenance_path(path), "w", encoding="utf-8") as file:
        json.dump(provenance_record(original_path, result), file, indent=2, sort_keys=True)


def read_provenance(path: str) -> Optional[Dict]:
    """
    :param str path: Adversarial file
    :return: Its provenance record, None when there is none
    :rtype: dict
    """
    record = provenance_path(path)
    if not os.path.isfile(record):
        return None
    with open(record, encoding="utf-8") as file:
        return json.load(file)


def adversarial_pairs(directory: str) -> List[Tuple[str, str]]:
    """
    :param str directory: Directory written by the attack command
    :return: Original and adversarial path of every file with a provenance record, sorted
    :rtype: List[Tuple[str, str]]
    """
    pairs = []
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        if name.endswith(PROVENANCE_SUFFIX) or not os.path.isfile(path):
            continue
        record = read_provenance(path)
        if record is not None:
            pairs.append((record["original"], path))
    return pairs
