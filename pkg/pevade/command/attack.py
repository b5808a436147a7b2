# -*- coding: utf-8 -*-
"""
Module containing command for running an attack campaign
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import (
    Dict,
    List,
    Tuple
)

from .command import Command
from .helper import ui
from .helper.campaign import (
    campaign_rows,
    detection_curve,
    detector_spec,
    write_csv,
    write_provenance
)
from .helper.corpus import (
    CorpusError,
    list_files,
    read_manifest
)
from ..attack import (
    AttackConfig,
    AttackResult,
    DonorPool,
    FeasibilityViolation,
    GammaVariant,
    NoBenignFiles,
    RandomSearch,
    attack_loop,
    gamma_attack,
    harvest_donors,
    iterative_byte_gradient,
    single_gradient_step
)
from ..budget import within_budget
from ..constants import (
    ADVERSARIAL_DIR,
    CAMPAIGN_NAME,
    CURVE_NAME,
    EXIT_OK
)
from ..enums import (
    Command as CommandName,
    Label,
    Optimizer
)
from ..manipulation import parse_manipulation
from ..oracle import check_equivalence
from ..pe import parse

logger = logging.getLogger(__name__)


def attack_config(config: Dict) -> AttackConfig:
    settings = config["attack"]
    return AttackConfig(epsilon=settings["epsilon"], max_iterations=settings["max_iterations"],
                        max_queries=settings["max_queries"], population=settings["population"],
                        elitism=settings["elitism"], crossover_prob=settings["crossover_prob"],
                        mutation_prob=settings["mutation_prob"], mutation_sigma=settings["mutation_sigma"],
                        payload_penalty=settings["lambda"], threshold=settings["threshold"],
                        seed=config["run"]["seed"])


class Attack(Command):
    """
    Attack every malicious file, write the adversarial files with their
    provenance, the campaign CSV and the detection curve
    """
    _name = CommandName.ATTACK.value

    def _execute(self, config: Dict) -> int:
        settings = config["attack"]
        samples = self._samples(config)
        if not samples:
            raise CorpusError("No malicious file to attack")

        detector = detector_spec(config).build()
        hyper = attack_config(config)
        optimizer = Optimizer(settings["optimizer"])
        donors = self._donors(config) if optimizer is Optimizer.GAMMA else None
        manipulations = [parse_manipulation(text.strip()) for text in settings["manipulations"].split(",")
                         if text.strip()]

        def run(path: str) -> Tuple[str, AttackResult]:
            with open(path, "rb") as file:
                pe = parse(file.read())
            if optimizer is Optimizer.GAMMA:
                result = gamma_attack(pe, donors, detector, hyper, GammaVariant(settings["gamma_manipulation"]))
            elif optimizer is Optimizer.SINGLE_GRADIENT:
                result = single_gradient_step(pe, manipulations, detector, hyper)
            elif optimizer is Optimizer.RANDOM:
                result = attack_loop(pe, manipulations, detector, config=hyper, optimizer=RandomSearch())
            else:
                result = iterative_byte_gradient(pe, manipulations, detector, hyper)
            logger.info("%s: score %.6f after %d queries", path, result.best_score, result.queries_used)
            return path, result

        with ThreadPoolExecutor(max_workers=config["run"]["jobs"]) as pool:
            results = list(pool.map(run, samples))

        for path, result in results:
            self._check_feasible(path, result, hyper)

        out_dir = config["output"]["dir"]
        adversarial_dir = os.path.join(out_dir, ADVERSARIAL_DIR)
        os.makedirs(adversarial_dir, exist_ok=True)
        named = []
        for path, result in results:
            sample_id = os.path.basename(path)
            self._write_adversarial(os.path.join(adversarial_dir, sample_id), path, result)
            named.append((sample_id, result))

        rows = campaign_rows(named, hyper.threshold)
        curve = detection_curve(rows)
        write_csv(rows, os.path.join(out_dir, CAMPAIGN_NAME))
        write_csv(curve, os.path.join(out_dir, CURVE_NAME))
        self._summary(named, curve, hyper)

        return EXIT_OK

    @staticmethod
    def _samples(config: Dict) -> List[str]:
        corpus = config["corpus"]
        if corpus["malicious_dir"]:
            samples = list_files(corpus["malicious_dir"])
        elif corpus["manifest"]:
            manifest = read_manifest(corpus["manifest"])
            samples = list(manifest.loc[manifest["label"] == Label.MALICIOUS.value, "path"])
        else:
            raise CorpusError("corpus.malicious_dir or corpus.manifest is required")
        limit = config["attack"]["limit"]

        return samples[:limit] if limit else samples

    @staticmethod
    def _donors(config: Dict) -> DonorPool:
        settings = config["attack"]
        if settings["donors_dir"]:
            paths = [settings["donors_dir"]]
        elif config["corpus"]["benign_dir"]:
            paths = [config["corpus"]["benign_dir"]]
        elif config["corpus"]["manifest"]:
            manifest = read_manifest(config["corpus"]["manifest"])
            paths = list(manifest.loc[manifest["label"] == Label.BENIGN.value, "path"])
        else:
            raise NoBenignFiles("attack.donors_dir, corpus.benign_dir or corpus.manifest is required")

        return harvest_donors(paths, settings["max_donors"], config["run"]["seed"], settings["donor_slice"])

    @staticmethod
    def _check_feasible(original_path: str, result: AttackResult, hyper: AttackConfig) -> None:
        with open(original_path, "rb") as file:
            original = file.read()
        if not within_budget(result.cost, hyper.epsilon):
            raise FeasibilityViolation(f"{original_path}: adversarial file is over the budget")
        report = check_equivalence(original, result.best_bytes, result.plan.kinds if result.plan else ())
        if not report.equivalent:
            raise FeasibilityViolation(f"{original_path}: adversarial file is not equivalent: {report}")

    @staticmethod
    def _write_adversarial(path: str, original_path: str, result: AttackResult) -> None:
        with open(path, "wb") as file:
            file.write(result.best_bytes)
        write_provenance(path, original_path, result)

    @staticmethod
    def _summary(results: List[Tuple[str, AttackResult]], curve, hyper: AttackConfig) -> None:
        evaded = sum(result.success for _, result in results)
        count = len(results)
        ui.print_table([[count, evaded, float(curve["detection_rate"].iloc[0]),
                         float(curve["detection_rate"].iloc[-1]),
                         sum(result.queries_used for _, result in results) / count,
                         sum(result.payload_size for _, result in results) / count]],
                       ["samples", "evaded", "initial detection rate", "final detection rate", "mean queries",
                        "mean payload bytes"])
        if evaded < count:
            ui.print_warning(f"{count - evaded} of {count} samples are still detected at {hyper.threshold}")
        print(f"Final detection rate: {1 - evaded / count:.6f}")
