"""Tests for the attack loop, the gradient and genetic optimizers and the evaluation helpers."""

import logging

import numpy as np
import pytest

from pevade.attack import (
    AttackConfig,
    BudgetZeroWithInsertions,
    CandidateEvaluator,
    DonorPool,
    EmptyDonorPool,
    FeasibilityViolation,
    GammaVariant,
    InfeasiblePlan,
    LinearScorer,
    NoBenignFiles,
    OracleMismatch,
    QueryBudgetExhausted,
    RandomSearch,
    TransferRow,
    additive_sanity_attack,
    attack_loop,
    best_replacement,
    gamma_attack,
    harvest,
    harvest_donors,
    iterative_byte_gradient,
    single_gradient_step,
    transfer_evaluate
)
from pevade.detector import EndToEndModel, NotDifferentiable, train_feature_model
from pevade.manipulation import (
    Extend,
    FullDos,
    Kind,
    Padding,
    SectionInjection,
    compose
)
from pevade.oracle import check_equivalence
from pevade.pe import serialize
from pevade.validators import ValidationError

from conftest import ConstantDetector, LengthDetector, TableDetector


def assert_feasible(original, result, epsilon):
    assert result.cost.total <= epsilon
    kinds = result.plan.kinds if result.plan is not None else ()
    assert check_equivalence(original, result.best_bytes, kinds).equivalent


def assert_trace(result, max_queries):
    assert result.trace[0].step_index == 0
    assert [step.step_index for step in result.trace] == list(range(len(result.trace)))
    best_scores = [step.best_score for step in result.trace]
    assert best_scores == sorted(best_scores, reverse=True)
    queries = [step.queries for step in result.trace]
    assert queries == sorted(queries)
    assert result.queries_used == queries[-1] <= max_queries
    assert best_scores[-1] <= result.best_score <= result.initial_score


@pytest.fixture
def benign_files(tiny_corpus):
    return [(f"benign_{index}", data) for index, (data, label) in enumerate(tiny_corpus) if label == 0]


@pytest.fixture
def donors(benign_files):
    return harvest(benign_files)


class TestAttackConfig:
    def test_defaults(self):
        config = AttackConfig()
        assert config.epsilon == 4096
        assert config.population == 20
        assert config.elitism == 5
        assert config.payload_penalty == 1e-6

    def test_replace(self):
        config = AttackConfig().replace(epsilon=10, seed=3)
        assert (config.epsilon, config.seed, config.max_queries) == (10, 3, 500)

    @pytest.mark.parametrize("changes", [{"epsilon": -1}, {"population": 1}, {"elitism": 20},
                                         {"crossover_prob": 1.5}, {"max_queries": "many"},
                                         {"mutation_sigma": float("nan")}])
    def test_invalid(self, changes):
        with pytest.raises(ValidationError):
            AttackConfig(**changes)


class TestCandidateEvaluator:
    def test_over_budget(self, small_pe, small_pe_bytes):
        editable = compose(small_pe, [FullDos()])
        evaluator = CandidateEvaluator(small_pe_bytes, ConstantDetector(0.9), AttackConfig(epsilon=2))
        output = bytearray(editable.template)
        output[2:5] = b"\xaa\xbb\xcc"
        with pytest.raises(FeasibilityViolation, match="budget"):
            evaluator.evaluate(bytes(output), editable)
        assert evaluator.queries == 0

    def test_not_equivalent(self, small_pe, small_pe_bytes):
        editable = compose(small_pe, [FullDos()])
        evaluator = CandidateEvaluator(small_pe_bytes, ConstantDetector(0.9), AttackConfig())
        output = bytearray(editable.template)
        output[small_pe.sections[0].entry.pointer_to_raw_data] ^= 1
        with pytest.raises(FeasibilityViolation, match="equivalent"):
            evaluator.evaluate(bytes(output), editable)

    def test_query_budget(self, small_pe_bytes):
        detector = ConstantDetector(0.9)
        evaluator = CandidateEvaluator(small_pe_bytes, detector, AttackConfig(max_queries=1))
        evaluator.evaluate(small_pe_bytes, None)
        assert evaluator.exhausted
        with pytest.raises(QueryBudgetExhausted):
            evaluator.evaluate(small_pe_bytes, None)
        assert detector.queries == 1

    def test_penalty_keeps_the_trace_decreasing(self):
        evaluator = CandidateEvaluator(b"a", TableDetector({b"a": 0.6, b"b": 0.7}), AttackConfig())
        evaluator.evaluate(b"a", None, penalty=0.5)
        evaluator.record(0)
        evaluator.evaluate(b"b", None)
        evaluator.record(1)
        assert [step.best_score for step in evaluator.trace] == [0.6, 0.6]
        assert [step.score for step in evaluator.trace] == [0.6, 0.7]
        result = evaluator.result(1)
        assert result.best_bytes == b"b"
        assert result.best_score == 0.7


class TestAttackLoop:
    def test_random_search(self, roomy_pe, roomy_pe_bytes, random_model):
        config = AttackConfig(max_iterations=10)
        result = attack_loop(roomy_pe, [FullDos(), Extend(512)], random_model, config=config)
        assert_feasible(roomy_pe_bytes, result, config.epsilon)
        assert_trace(result, config.max_queries)
        assert result.iterations_used <= 10
        assert [manipulation.kind for manipulation in result.manipulations] == [Kind.EXTEND, Kind.FULL_DOS]

    def test_substitutions_stay_in_budget(self, small_pe, small_pe_bytes, random_model):
        config = AttackConfig(epsilon=5, max_iterations=30)
        result = attack_loop(small_pe, [FullDos()], random_model, config=config, optimizer=RandomSearch(0.2))
        assert result.cost.total <= 5
        assert result.cost.inserted == 0

    def test_query_limit(self, small_pe, random_model):
        result = attack_loop(small_pe, [FullDos()], random_model, config=AttackConfig(max_queries=3))
        assert result.queries_used <= 3
        assert random_model.queries == result.queries_used

    def test_evasion_stops_the_loop(self, small_pe, small_pe_bytes):
        result = attack_loop(small_pe, [FullDos()], ConstantDetector(0.2))
        assert result.success
        assert result.iterations_used == 0
        assert result.queries_used == 1
        assert result.best_bytes == small_pe_bytes
        assert len(result.trace) == 1

    def test_budget_below_insertions(self, small_pe, random_model):
        with pytest.raises(BudgetZeroWithInsertions):
            attack_loop(small_pe, [Extend(512)], random_model, config=AttackConfig(epsilon=100))

    def test_infeasible_manipulation(self, crowded_pe, random_model):
        with pytest.raises(InfeasiblePlan):
            attack_loop(crowded_pe, [SectionInjection(512)], random_model)

    def test_custom_objective(self, small_pe, random_model):
        result = attack_loop(small_pe, [FullDos()], random_model, objective=lambda score: -score.malice,
                             config=AttackConfig(max_iterations=5, threshold=0.0))
        assert result.best_score >= result.initial_score


class TestGradient:
    def test_best_replacement_follows_the_gradient(self):
        embedding = np.zeros((257, 2))
        embedding[30] = embedding[40] = (-1.0, 0.0)
        embedding[50] = (-0.5, 0.5)
        gradients = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
        replacement, gains = best_replacement(gradients, np.array([0, 30, 0]), embedding)
        # 30 and 40 tie, the lowest byte wins
        assert replacement.tolist() == [30, 30, 0]
        assert gains.tolist() == [1.0, 0.0, 0.0]

    def test_zero_gradient_keeps_bytes(self):
        embedding = np.random.default_rng(0).normal(size=(257, 4))
        replacement, gains = best_replacement(np.zeros((3, 4)), np.array([1, 2, 3]), embedding)
        assert replacement.tolist() == [1, 2, 3]
        assert not gains.any()

    def test_iterative_attack(self, roomy_pe, roomy_pe_bytes, random_model):
        config = AttackConfig(max_iterations=5, epsilon=4096)
        result = iterative_byte_gradient(roomy_pe, [Extend(1024)], random_model, config)
        assert_feasible(roomy_pe_bytes, result, config.epsilon)
        assert_trace(result, config.max_queries)

    def test_without_backtracking(self, small_pe, small_pe_bytes, random_model):
        config = AttackConfig(max_iterations=3, epsilon=600)
        result = iterative_byte_gradient(small_pe, [Extend(512), FullDos()], random_model, config,
                                         backtracking=False)
        assert_feasible(small_pe_bytes, result, config.epsilon)
        assert result.queries_used <= 4

    def test_single_step(self, small_pe, random_model):
        result = single_gradient_step(small_pe, [Extend(512)], random_model, AttackConfig())
        assert result.iterations_used <= 1
        assert len(result.trace) <= 2

    def test_zero_model_changes_nothing(self, small_pe, zero_model):
        result = iterative_byte_gradient(small_pe, [Extend(512)], zero_model, AttackConfig(max_iterations=3))
        assert result.best_bytes == compose(small_pe, [Extend(512)]).template
        assert result.best_score == pytest.approx(0.5)
        assert result.queries_used == 1

    def test_needs_a_differentiable_model(self, small_pe, tiny_corpus):
        model = train_feature_model(tiny_corpus, n_trees=2)
        with pytest.raises(NotDifferentiable):
            iterative_byte_gradient(small_pe, [Extend(512)], model)

    def test_needs_bytes_inside_the_window(self, small_pe):
        model = EndToEndModel.zeros(input_length=512)
        with pytest.raises(InfeasiblePlan):
            iterative_byte_gradient(small_pe, [Padding(64)], model)


class TestHarvest:
    def test_pool(self, donors, benign_files):
        assert 0 < len(donors) <= 32
        assert all(0 < len(donor.content) <= 4096 for donor in donors.donors)
        assert {donor.source for donor in donors.donors} <= {name for name, _ in benign_files}

    def test_seeded(self, benign_files):
        assert harvest(benign_files, seed=1) == harvest(benign_files, seed=1)
        assert len(harvest(benign_files, max_sections=2)) == 2

    def test_slices_are_capped(self, benign_files):
        pool = harvest(benign_files, max_slice=100)
        assert pool.lengths.max() <= 100

    def test_unparseable_files_are_skipped(self, benign_files, caplog):
        with caplog.at_level(logging.WARNING):
            pool = harvest([("junk", b"not a pe")] + benign_files)
        assert "junk" in caplog.text
        assert "junk" not in {donor.source for donor in pool.donors}

    def test_no_benign_files(self):
        with pytest.raises(NoBenignFiles):
            harvest([("junk", b"not a pe")])

    def test_from_directory(self, benign_files, tmp_path):
        for name, data in benign_files:
            (tmp_path / f"{name}.exe").write_bytes(data)
        pool = harvest_donors([str(tmp_path)], seed=4)
        assert pool == harvest_donors([str(path) for path in tmp_path.iterdir()], seed=4)

    def test_slice_lengths(self, donors):
        lengths = donors.lengths
        assert donors.slice_lengths(np.ones(len(donors)), int(lengths.sum())).tolist() == lengths.tolist()
        assert donors.slice_lengths(np.zeros(len(donors)), 100).sum() == 0
        assert donors.slice_lengths(np.ones(len(donors)), 100).sum() <= 100


class TestGamma:
    def test_section_injection_evades(self, roomy_pe, roomy_pe_bytes, donors, length_detector):
        config = AttackConfig(population=10, elitism=3, max_queries=100)
        result = gamma_attack(roomy_pe, donors, length_detector, config)
        assert result.success
        assert result.best_score < result.initial_score
        assert result.queries_used % config.population == 0
        assert result.queries_used <= config.max_queries
        assert result.manipulations[0].kind is Kind.SECTION_INJECTION
        assert_feasible(roomy_pe_bytes, result, config.epsilon)

    def test_padding_variant(self, roomy_pe, roomy_pe_bytes, donors, length_detector):
        config = AttackConfig(population=10, elitism=3, max_queries=100, epsilon=2048)
        result = gamma_attack(roomy_pe, donors, length_detector, config, GammaVariant.PADDING)
        assert [manipulation.kind for manipulation in result.manipulations] == [Kind.PADDING]
        assert result.best_bytes.startswith(roomy_pe_bytes)
        assert_feasible(roomy_pe_bytes, result, config.epsilon)

    def test_shift_makes_room(self, crowded_pe, donors):
        original = serialize(crowded_pe)
        config = AttackConfig(population=6, elitism=2, max_queries=60)
        result = gamma_attack(crowded_pe, donors, LengthDetector(0.9 * len(original)), config)
        assert [manipulation.kind for manipulation in result.manipulations] == [Kind.SHIFT, Kind.SECTION_INJECTION]
        assert_feasible(original, result, config.epsilon)

    def test_payload_penalty(self, roomy_pe, roomy_pe_bytes, donors, length_detector):
        config = AttackConfig(population=6, elitism=2, max_queries=60, payload_penalty=1e-4)
        result = gamma_attack(roomy_pe, donors, length_detector, config)
        assert_trace(result, config.max_queries)
        assert_feasible(roomy_pe_bytes, result, config.epsilon)

    def test_huge_penalty_keeps_the_original(self, roomy_pe, roomy_pe_bytes, donors):
        config = AttackConfig(population=6, elitism=2, max_queries=30, payload_penalty=1e9)
        result = gamma_attack(roomy_pe, donors, ConstantDetector(0.6), config)
        assert not result.success
        assert result.best_bytes == roomy_pe_bytes
        assert result.payload_size == 0
        assert result.queries_used == 30
        assert len(result.trace) == 5

    def test_small_budget(self, roomy_pe, donors, length_detector):
        with pytest.raises(BudgetZeroWithInsertions):
            gamma_attack(roomy_pe, donors, length_detector, AttackConfig(epsilon=5))

    def test_empty_pool(self, roomy_pe, length_detector):
        with pytest.raises(EmptyDonorPool):
            gamma_attack(roomy_pe, DonorPool(), length_detector)

    def test_queries_below_population(self, roomy_pe, donors, length_detector):
        with pytest.raises(InfeasiblePlan):
            gamma_attack(roomy_pe, donors, length_detector, AttackConfig(max_queries=5))


class TestSanityAttack:
    def test_closed_form(self):
        rng = np.random.default_rng(0)
        x = rng.random(20)
        scorer = LinearScorer(rng.normal(size=20), 0.5)
        result = additive_sanity_attack(x, scorer, 0.1)
        assert np.allclose(result, np.clip(x + 0.1 * np.sign(scorer.weights), 0, 1))
        for _ in range(20):
            other = np.clip(x + rng.uniform(-0.1, 0.1, size=20), 0, 1)
            assert scorer.loss(other) <= scorer.loss(result) + 1e-12

    @pytest.mark.parametrize("x, epsilon, norm", [(np.full(3, 0.5), 0.1, "l2"), (np.full(3, 0.5), -0.1, "linf"),
                                                  (np.full(3, 1.5), 0.1, "linf")])
    def test_invalid_arguments(self, x, epsilon, norm):
        with pytest.raises(ValueError):
            additive_sanity_attack(x, LinearScorer(np.ones(3)), epsilon, norm)

    def test_optimizer_mismatch(self, monkeypatch):
        monkeypatch.setattr("pevade.attack.sanity.projected_gradient_ascent", lambda scorer, x, epsilon: x)
        with pytest.raises(OracleMismatch):
            additive_sanity_attack(np.full(3, 0.5), LinearScorer(np.ones(3)), 0.2)


class TestTransfer:
    def test_rows(self):
        originals = [bytes(100), bytes(200)]
        adversarials = [bytes(1000), bytes(2000)]
        rows = transfer_evaluate(originals, adversarials, [LengthDetector(150), ConstantDetector(0.1)],
                                 ["length", "constant"])
        assert rows == [TransferRow("length", 2, 0), TransferRow("constant", 0, 0)]
        assert rows[0].relative_drop == 1.0
        assert rows[1].relative_drop == 0.0

    def test_default_ids(self):
        rows = transfer_evaluate([b"a"], [b"b"], [ConstantDetector(0.9)])
        assert rows[0].target_id == "constant"

    def test_unpaired(self):
        with pytest.raises(ValueError):
            transfer_evaluate([b"a"], [], [ConstantDetector(0.9)])
        with pytest.raises(ValueError):
            transfer_evaluate([b"a"], [b"b"], [ConstantDetector(0.9)], ["one", "two"])
