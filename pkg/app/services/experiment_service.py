"""
Сервис экспериментов DGNN.

Содержит полный прогон эксперимента (данные, разбиение, признаки, PageRank,
модель, обучение, шум, оценка, модели сравнения, отчет), распознавание
действий с кросс-валидацией по субъектам и свипы по k, P, sigma и числу меток.
"""

import multiprocessing
import uuid
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import torch
from loguru import logger
from sklearn.metrics import confusion_matrix
from tqdm import tqdm

from app.core.database import get_db_session
from app.core.exceptions import ConfigurationException, DomainException, PipelineException
from app.dataio.bundle import load_graph_bundle, write_split
from app.dataio.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from app.dataio.pca import FeatureTransform, fit_feature_transform, target_range_for
from app.dataio.reports import write_confusion, write_history, write_metrics, write_sweep, write_table
from app.dataio.skeleton import (
    ACTIONS,
    SkeletonSequence,
    generate_synthetic_skeletons,
    kfold_by_subject,
    load_skeleton_dataset,
    normalize_skeletons,
)
from app.dgnn.action import forward_action, subsequence_windows
from app.dgnn.forward import predict
from app.dgnn.model import DgnnModel, build_model
from app.dgnn.quantize import perturb_coefficients
from app.graphs.graph import Graph, PprTable
from app.graphs.ppr import graph_ppr_table
from app.graphs.sbm import generate_sbm
from app.graphs.splits import make_inductive, random_split
from app.photonics.lut import MetaAtomLut, default_lut, load_lut
from app.schemas.experiment import BaselineKind, ClassifierKind, ExperimentConfig, SweepAxis, TaskKind
from app.schemas.training import LossKind, TrainConfig
from app.services.baseline_service import BaselineResult, BaselineService
from app.services.registry_service import RegistryService
from app.services.training_service import TrainingService
from app.train.batches import NodeBatch, SequenceBatch
from app.train.history import EpochStats, TrainHistory
from config.settings import settings

# Синтетический граф: по 5 меток на класс, остальные узлы - тест
SBM_LABELS_PER_CLASS = 5
LABEL_SCARCITY_REPEATS = 10
SKELETON_COORDS = 3


@dataclass
class NodeData:
    """Подготовленный граф узловой задачи."""

    graph: Graph  # граф оценки с признаками в диапазоне кодирования
    raw_attributes: np.ndarray
    train_graph: Graph
    train_table: PprTable
    eval_table: PprTable
    transform: Optional[FeatureTransform] = None

    @property
    def class_names(self) -> List[str]:
        return list(self.graph.class_names) or [str(c) for c in range(self.graph.n_classes)]


@dataclass
class ExperimentResult:
    """Итог запуска: каталог отчета и метрики."""

    report_dir: Path
    metrics: Dict[str, Any]
    model: Optional[DgnnModel] = None
    history: Optional[TrainHistory] = None


@dataclass
class SweepResult:
    """Таблица свипа: по строке на значение оси."""

    report_dir: Path
    axis: SweepAxis
    rows: List[Dict[str, Any]] = field(default_factory=list)


def vote_video(predictions: Sequence[int]) -> int:
    """
    Голосование winner-takes-all по подпоследовательностям видео.

    Args:
        predictions: Предсказанные классы подпоследовательностей

    Returns:
        int: Самый частый класс; при равенстве - меньший индекс
    """
    predictions = np.asarray(predictions, dtype=np.int64).ravel()
    if predictions.size == 0:
        raise DomainException("Нет предсказаний подпоследовательностей для голосования")
    if predictions.min() < 0:
        raise DomainException("Классы подпоследовательностей не могут быть отрицательными")
    return int(np.argmax(np.bincount(predictions)))


def resolve_train_config(config: ExperimentConfig) -> TrainConfig:
    """
    Конфигурация обучения с умолчаниями задачи для незаданных полей.

    DGNN-O: lr 0.1 и MSE по one-hot; DGNN-E: lr 0.01; действия: lr 0.005, батч 32.
    """
    train = config.train
    explicit = train.model_fields_set
    update: Dict[str, Any] = {}
    if "learning_rate" not in explicit:
        if config.task == TaskKind.GRAPH_ACTION:
            update["learning_rate"] = settings.LR_ACTION
        elif config.model.classifier == ClassifierKind.OPTICAL:
            update["learning_rate"] = settings.LR_DGNN_O
        else:
            update["learning_rate"] = settings.LR_DGNN_E
    if "loss" not in explicit and config.model.classifier == ClassifierKind.OPTICAL:
        update["loss"] = LossKind.MSE_ONEHOT
    if "batch" not in explicit and config.task == TaskKind.GRAPH_ACTION:
        update["batch"] = settings.ACTION_BATCH_SIZE
    if "seed" not in explicit:
        update["seed"] = config.seed
    if config.noise.binary:
        update["binary_training"] = True
    return train.model_copy(update=update)


def _retrain_config(config: ExperimentConfig, train: TrainConfig, seed: int) -> TrainConfig:
    return TrainConfig(
        learning_rate=config.noise.retrain_lr,
        epochs=config.noise.retrain_epochs,
        loss=train.loss,
        l2_weight=train.l2_weight,
        seed=seed,
        log_every=train.log_every,
    )


def _model_kind(config: ExperimentConfig) -> str:
    return "dgnn_o" if config.model.classifier == ClassifierKind.OPTICAL else "dgnn_e"


@contextmanager
def _stage(name: str) -> Iterator[None]:
    """Любая ошибка внутри этапа поднимается как PipelineException с именем этапа."""
    logger.debug(f"▶️ Этап '{name}'")
    try:
        yield
    except PipelineException:
        raise
    except Exception as e:
        logger.error(f"❌ Этап '{name}' завершился ошибкой: {e}")
        raise PipelineException(name, e) from e


class RunRecorder:
    """Запись запуска в реестр; без реестра все методы ничего не делают."""

    def __init__(self, registry: Optional[RegistryService] = None, run_id: Optional[str] = None):
        self.registry = registry
        self.run_id = run_id

    def on_epoch(self, stats: EpochStats) -> None:
        if self.registry is not None:
            self.registry.record_epoch(self.run_id, stats)

    def finish(self, best: Optional[float], final: Optional[float], report_dir: Path) -> None:
        if self.registry is not None:
            self.registry.finish_run(self.run_id, best, final, str(report_dir))


class ExperimentService:
    """Сервис запуска экспериментов и свипов."""

    def __init__(self, registry_enabled: Optional[bool] = None, progress: bool = True):
        """
        Инициализация сервиса.

        Args:
            registry_enabled: Писать запуски в реестр (по умолчанию из настроек)
            progress: Показывать прогресс-бары tqdm
        """
        self.registry_enabled = settings.REGISTRY_ENABLED if registry_enabled is None else registry_enabled
        self.progress = progress

    @contextmanager
    def _recorder(self, config: ExperimentConfig) -> Iterator[RunRecorder]:
        if not self.registry_enabled:
            yield RunRecorder()
            return
        with get_db_session() as session:
            registry = RegistryService(session)
            run = registry.start_run(
                task=config.task.value,
                dataset=config.dataset or ("sbm" if config.sbm else "synthetic-skeletons"),
                model_kind=_model_kind(config),
                seed=config.seed,
                config_json=config.model_dump_json(),
            )
            try:
                yield RunRecorder(registry, run.id)
            except Exception as e:
                registry.fail_run(run.id, str(e))
                raise

    # ---------------------------------------------------------------- узлы

    @staticmethod
    def _split(config: ExperimentConfig, graph: Graph) -> Graph:
        if graph.labels is None or not np.any(graph.labels >= 0):
            raise ConfigurationException("Для обучения нужны метки узлов")
        split = config.split
        if split.test_size is not None or split.labels_per_class is not None:
            masks = random_split(graph.labels, config.seed, split.test_size, split.labels_per_class)
            return graph.with_split(*masks)
        if config.sbm is not None:
            return graph.with_split(*random_split(graph.labels, config.seed, labels_per_class=SBM_LABELS_PER_CLASS))
        if graph.train_mask.any():
            return graph
        n_labeled = int(np.sum(graph.labels >= 0))
        n_test = min(settings.BENCHMARK_TEST_SIZE, n_labeled // 2)
        if n_test < settings.BENCHMARK_TEST_SIZE:
            logger.warning(f"⚠️ В графе {n_labeled} размеченных узлов, тестовых будет {n_test}")
        return graph.with_split(*random_split(graph.labels, config.seed, n_test=n_test))

    def prepare_node_data(self, config: ExperimentConfig) -> NodeData:
        """
        Этапы data, split, features и ppr узловой задачи.

        Args:
            config: Конфигурация эксперимента

        Returns:
            NodeData: Граф оценки, граф обучения и их таблицы PageRank
        """
        if config.task == TaskKind.GRAPH_ACTION:
            raise ConfigurationException("prepare_node_data применим только к узловым задачам")

        with _stage("data"):
            if config.sbm is not None:
                sbm = config.sbm
                graph = generate_sbm(sbm.n, sbm.n_classes, sbm.p, sbm.q, config.seed, attr_std=sbm.attr_std)
            else:
                graph = load_graph_bundle(config.dataset)

        with _stage("split"):
            graph = self._split(config, graph)
            logger.info(f"🔀 Разбиение: {int(graph.train_mask.sum())} train, {int(graph.test_mask.sum())} test")

        inductive = config.task == TaskKind.NODE_INDUCTIVE
        with _stage("features"):
            fit_rows = np.flatnonzero(~graph.test_mask) if inductive else None
            transform = fit_feature_transform(
                graph.attributes, config.split.pca_dim, target_range_for(config.model.encoding), fit_rows
            )
            processed = graph.with_attributes(transform.transform(graph.attributes))

        with _stage("ppr"):
            k, alpha = config.model.top_k, config.model.alpha
            eval_table = graph_ppr_table(processed, k, alpha, settings.PPR_BLOCK_SIZE)
            if inductive:
                train_graph, _ = make_inductive(processed, np.flatnonzero(processed.test_mask))
                train_table = graph_ppr_table(train_graph, k, alpha, settings.PPR_BLOCK_SIZE)
            else:
                train_graph, train_table = processed, eval_table

        return NodeData(
            graph=processed,
            raw_attributes=graph.attributes,
            train_graph=train_graph,
            train_table=train_table,
            eval_table=eval_table,
            transform=transform,
        )

    @staticmethod
    def _lut(config: ExperimentConfig) -> MetaAtomLut:
        return load_lut(config.model.lut_file) if config.model.lut_file else default_lut()

    def train_node_model(
        self,
        config: ExperimentConfig,
        data: NodeData,
        train: TrainConfig,
        on_epoch=None
    ) -> Tuple[DgnnModel, TrainHistory]:
        """Этапы model и train."""
        with _stage("model"):
            model = build_model(
                config.model, data.graph.n_attrs, data.graph.n_classes, self._lut(config), config.seed, config.task
            )
        with _stage("train"):
            trainer = TrainingService(on_epoch=on_epoch, progress=self.progress)
            return trainer.fit(model, data.train_graph, data.train_table, train, data.graph, data.eval_table)

    @staticmethod
    def predict_nodes(model: DgnnModel, graph: Graph, table: PprTable, mask: np.ndarray) -> np.ndarray:
        """Предсказанные классы узлов mask."""
        batch = NodeBatch.from_mask(graph, table, model, mask)
        with torch.no_grad():
            return predict(batch.outputs(model))

    def evaluate_nodes(self, model: DgnnModel, data: NodeData) -> Optional[float]:
        """Test accuracy на графе оценки; None без тестовых узлов."""
        if not data.graph.test_mask.any():
            return None
        predictions = self.predict_nodes(model, data.graph, data.eval_table, data.graph.test_mask)
        return float(np.mean(predictions == data.graph.labels[data.graph.test_mask]))

    def apply_noise(
        self,
        config: ExperimentConfig,
        data: NodeData,
        model: DgnnModel,
        train: TrainConfig,
        sigma: float,
        seed: int
    ) -> Tuple[DgnnModel, Optional[TrainHistory]]:
        """
        Шум коэффициентов и (если включено) переобучение классификатора.

        При sigma = 0 модель копируется без переобучения.
        """
        noisy = perturb_coefficients(model, sigma, seed)
        if not (config.noise.retrain and sigma > 0):
            return noisy, None
        trainer = TrainingService(progress=self.progress)
        return trainer.retrain_classifier(
            noisy, data.train_graph, data.train_table, _retrain_config(config, train, seed),
            data.graph, data.eval_table,
        )

    def run_baselines(self, config: ExperimentConfig, data: NodeData) -> Dict[str, BaselineResult]:
        """Модели сравнения на том же разбиении графа оценки."""
        service = BaselineService(config.baseline, progress=self.progress)
        graph = data.graph
        results: Dict[str, BaselineResult] = {}
        for kind in config.baselines:
            if kind == BaselineKind.PCA:
                result = service.fit_linear_on_pca(graph.attributes, graph.labels, graph.train_mask, graph.test_mask)
            elif kind == BaselineKind.MLP:
                result = service.fit_mlp(data.raw_attributes, graph.labels, graph.train_mask, graph.test_mask)
            else:
                variant = "sum" if kind == BaselineKind.PPRGO_S else "weighted_sum"
                result = service.fit_pprgo(
                    data.raw_attributes, graph.labels, data.eval_table, variant, graph.train_mask, graph.test_mask
                )
            results[kind.value] = result
        return results

    def _run_nodes(self, config: ExperimentConfig, recorder: RunRecorder, report_dir: Path) -> ExperimentResult:
        train = resolve_train_config(config)
        data = self.prepare_node_data(config)
        model, history = self.train_node_model(config, data, train, recorder.on_epoch)

        metrics: Dict[str, Any] = {
            "task": config.task.value,
            "run_name": config.run_name,
            "model_kind": _model_kind(config),
            "seed": config.seed,
            "n_nodes": data.graph.n_nodes,
            "n_train": int(data.graph.train_mask.sum()),
            "n_test": int(data.graph.test_mask.sum()),
            "feature_dim": model.feature_dim,
            "top_k": config.model.top_k,
            "heads": config.model.heads,
            "binary": model.binary,
            "best_epoch": history.best.epoch if history.best else None,
            "train_accuracy": history.final.train_accuracy if history.final else None,
        }

        retrain_history = None
        with _stage("noise"):
            metrics["test_accuracy_clean"] = self.evaluate_nodes(model, data)
            if config.noise.sigma > 0:
                model, retrain_history = self.apply_noise(
                    config, data, model, train, config.noise.sigma, config.noise.seed
                )
                metrics["noise_sigma"] = config.noise.sigma
                metrics["retrained"] = retrain_history is not None

        with _stage("evaluate"):
            test_accuracy = self.evaluate_nodes(model, data)
            metrics["test_accuracy"] = test_accuracy
            if data.graph.test_mask.any():
                predictions = self.predict_nodes(model, data.graph, data.eval_table, data.graph.test_mask)
                matrix = confusion_matrix(
                    data.graph.labels[data.graph.test_mask], predictions, labels=np.arange(data.graph.n_classes)
                )
            else:
                matrix = None
            logger.info(f"🎯 {config.run_name}: test accuracy {test_accuracy}")

        with _stage("baselines"):
            baselines = self.run_baselines(config, data)
            metrics["baselines"] = {
                name: {
                    "test_accuracy": result.test_accuracy,
                    "train_accuracy": result.train_accuracy,
                    "weight_decay": result.weight_decay,
                    "accuracy_by_decay": {str(k): v for k, v in result.accuracy_by_decay.items()},
                }
                for name, result in baselines.items()
            }

        with _stage("report"):
            write_history(history, report_dir / "history.tsv")
            if retrain_history is not None:
                write_history(retrain_history, report_dir / "retrain_history.tsv")
            if matrix is not None:
                write_confusion(matrix, data.class_names, report_dir / "confusion.tsv")
            write_split(data.graph.train_mask, data.graph.test_mask, report_dir / "split.txt")
            metrics["checkpoint_sha256"] = save_checkpoint(
                model, report_dir / "model.ckpt", train.model_dump(mode="json"),
                feature_transform=data.transform, test_mask=data.graph.test_mask,
            )
            write_metrics(metrics, report_dir / "metrics.json")

        best = history.best.test_accuracy if history.best else None
        recorder.finish(best, test_accuracy, report_dir)
        return ExperimentResult(report_dir=report_dir, metrics=metrics, model=model, history=history)

    # ------------------------------------------------------------- действия

    def _load_sequences(self, config: ExperimentConfig) -> Tuple[List[SkeletonSequence], int]:
        if config.dataset:
            return load_skeleton_dataset(config.dataset), len(ACTIONS)
        spec = config.skeletons
        return generate_synthetic_skeletons(spec.per_class, spec.frames, config.seed, spec.n_classes), spec.n_classes

    def _windows(self, sequences: Sequence[SkeletonSequence], indices: np.ndarray, config: ExperimentConfig):
        windows = [
            subsequence_windows(sequences[i].frames, config.model.frames, config.model.window_stride) for i in indices
        ]
        labels = np.concatenate([np.full(len(w), sequences[i].action) for w, i in zip(windows, indices)])
        return windows, torch.as_tensor(labels, dtype=torch.int64)

    def _run_action(self, config: ExperimentConfig, recorder: RunRecorder, report_dir: Path) -> ExperimentResult:
        train = resolve_train_config(config)
        with _stage("data"):
            sequences, n_classes = self._load_sequences(config)
        class_names = list(ACTIONS[:n_classes]) if n_classes <= len(ACTIONS) else [str(c) for c in range(n_classes)]

        with _stage("split"):
            folds = kfold_by_subject(sequences, config.split.folds, config.seed)

        lut = self._lut(config)
        trainer = TrainingService(on_epoch=recorder.on_epoch, progress=self.progress)
        fold_rows, voting_rows = [], []
        true_videos, voted_videos = [], []
        model, history, feature_dim = None, None, None
        for fold, (train_idx, test_idx) in enumerate(
            tqdm(folds, desc="folds", disable=not self.progress, leave=False)
        ):
            with _stage("features"):
                normalized, _ = normalize_skeletons(sequences, train_idx, target_range_for(config.model.encoding))
                train_windows, train_labels = self._windows(normalized, train_idx, config)
                test_windows, test_labels = self._windows(normalized, test_idx, config)
                train_batch = SequenceBatch(np.concatenate(train_windows), train_labels)
                test_batch = SequenceBatch(np.concatenate(test_windows), test_labels)

            with _stage("model"):
                model = build_model(config.model, SKELETON_COORDS, n_classes, lut, config.seed + fold, config.task)
                feature_dim = config.model.frames * model.feature_dim

            with _stage("train"):
                model, history = trainer.fit_action(model, train_batch, test_batch, train)

            with _stage("evaluate"):
                with torch.no_grad():
                    predictions = predict(forward_action(test_batch.windows, model))
                subsequence_accuracy = float(np.mean(predictions == test_labels.numpy()))
                per_video = np.split(predictions, np.cumsum([len(w) for w in test_windows])[:-1])
                correct_videos = 0
                for index, votes in zip(test_idx, per_video):
                    sequence = sequences[index]
                    voted = vote_video(votes)
                    correct_videos += int(voted == sequence.action)
                    true_videos.append(sequence.action)
                    voted_videos.append(voted)
                    counts = np.bincount(votes, minlength=n_classes)
                    voting_rows.append(
                        [fold, int(index), sequence.subject, sequence.repetition,
                         class_names[sequence.action], class_names[voted]] + [int(c) for c in counts]
                    )
                video_accuracy = correct_videos / len(test_idx)
                fold_rows.append([fold, len(train_idx), len(test_idx), subsequence_accuracy, video_accuracy])
                logger.info(
                    f"🦴 Фолд {fold}: подпоследовательности {subsequence_accuracy:.3f}, видео {video_accuracy:.3f}"
                )

            with _stage("report"):
                write_history(history, report_dir / f"history_fold{fold}.tsv")
                save_checkpoint(model, report_dir / f"fold{fold}.ckpt", train.model_dump(mode="json"))

        metrics = {
            "task": config.task.value,
            "run_name": config.run_name,
            "model_kind": _model_kind(config),
            "seed": config.seed,
            "n_videos": len(sequences),
            "folds": len(folds),
            "feature_dim": feature_dim,
            "subsequence_accuracy": float(np.mean([row[3] for row in fold_rows])),
            "video_accuracy": float(np.mean([row[4] for row in fold_rows])),
            "fold_subsequence_accuracy": [row[3] for row in fold_rows],
            "fold_video_accuracy": [row[4] for row in fold_rows],
        }
        metrics["test_accuracy"] = metrics["video_accuracy"]

        with _stage("report"):
            write_table(report_dir / "folds.tsv", ("fold", "n_train", "n_test", "subseq_acc", "video_acc"), fold_rows)
            write_table(
                report_dir / "voting.tsv",
                ["fold", "video", "subject", "repetition", "true", "voted"] + class_names,
                voting_rows,
            )
            matrix = confusion_matrix(true_videos, voted_videos, labels=np.arange(n_classes))
            write_confusion(matrix, class_names, report_dir / "confusion.tsv")
            write_metrics(metrics, report_dir / "metrics.json")

        logger.info(
            f"🎯 {config.run_name}: подпоследовательности {metrics['subsequence_accuracy']:.3f}, "
            f"видео {metrics['video_accuracy']:.3f}"
        )
        recorder.finish(None, metrics["video_accuracy"], report_dir)
        return ExperimentResult(report_dir=report_dir, metrics=metrics, model=model, history=history)

    # -------------------------------------------------------------- запуск

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        """
        Полный прогон эксперимента.

        Args:
            config: Конфигурация эксперимента

        Returns:
            ExperimentResult: Каталог отчета (history, metrics, confusion, checkpoint) и метрики
        """
        report_dir = Path(config.output_dir) / config.run_name
        report_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"🧪 Эксперимент {config.run_name} -> {report_dir}")
        with self._recorder(config) as recorder:
            if config.task == TaskKind.GRAPH_ACTION:
                return self._run_action(config, recorder, report_dir)
            return self._run_nodes(config, recorder, report_dir)

    # ---------------------------------------------------------------- свипы

    @staticmethod
    def _variant(config: ExperimentConfig, axis: SweepAxis, value: float, repeat: int, sweep_dir: Path) -> ExperimentConfig:
        data = config.model_dump(mode="json", exclude_unset=True)
        if axis == SweepAxis.K:
            data.setdefault("model", {})["top_k"] = int(value)
        elif axis == SweepAxis.P:
            data.setdefault("model", {})["heads"] = int(value)
        elif axis == SweepAxis.LABELS_PER_CLASS:
            data.setdefault("split", {})["labels_per_class"] = int(value)
        data["seed"] = config.seed + repeat
        data["output_dir"] = str(sweep_dir / f"{axis.value}_{_value_label(value)}")
        data["name"] = f"rep{repeat}"
        return ExperimentConfig.model_validate(data)

    def _independent_points(
        self,
        config: ExperimentConfig,
        axis: SweepAxis,
        values: Sequence[float],
        repeats: int,
        sweep_dir: Path,
        workers: int
    ) -> Dict[float, List[Dict[str, Optional[float]]]]:
        jobs = [(value, self._variant(config, axis, value, r, sweep_dir)) for value in values for r in range(repeats)]
        scores: Dict[float, List[Dict[str, Optional[float]]]] = {value: [] for value in values}
        if workers > 1:
            # spawn: дочерние процессы не наследуют пул потоков torch
            context = multiprocessing.get_context("spawn")
            with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
                futures = [(value, pool.submit(_run_point, job.model_dump_json(exclude_unset=True))) for value, job in jobs]
                for value, future in tqdm(futures, desc=f"sweep {axis.value}", disable=not self.progress):
                    scores[value].append(future.result())
        else:
            for value, job in tqdm(jobs, desc=f"sweep {axis.value}", disable=not self.progress):
                scores[value].append(_point_scores(self.run(job).metrics))
        return scores

    def _trained_once_points(
        self,
        config: ExperimentConfig,
        axis: SweepAxis,
        values: Sequence[float],
        repeats: int,
        sweep_dir: Path
    ) -> Dict[float, List[Dict[str, Optional[float]]]]:
        train = resolve_train_config(config)
        data = self.prepare_node_data(config)
        model, _ = self.train_node_model(config, data, train)
        trainer = TrainingService(progress=self.progress)

        scores: Dict[float, List[Dict[str, Optional[float]]]] = {value: [] for value in values}
        for value in tqdm(values, desc=f"sweep {axis.value}", disable=not self.progress):
            for repeat in range(repeats):
                with _stage(f"{axis.value}={value}"):
                    if axis == SweepAxis.SIGMA:
                        point_data = data
                        point_model, _ = self.apply_noise(
                            config, data, model, train, float(value), config.noise.seed + repeat
                        )
                    else:
                        k = int(value)
                        eval_table = graph_ppr_table(data.graph, k, config.model.alpha, settings.PPR_BLOCK_SIZE)
                        train_table = (
                            eval_table if data.train_graph is data.graph
                            else graph_ppr_table(data.train_graph, k, config.model.alpha, settings.PPR_BLOCK_SIZE)
                        )
                        point_data = replace(data, train_table=train_table, eval_table=eval_table)
                        point_model, _ = trainer.retrain_classifier(
                            model, point_data.train_graph, point_data.train_table,
                            _retrain_config(config, train, train.seed + repeat),
                            point_data.graph, point_data.eval_table,
                        )
                    accuracy = self.evaluate_nodes(point_model, point_data)
                point_dir = sweep_dir / f"{axis.value}_{_value_label(value)}" / f"rep{repeat}"
                point_dir.mkdir(parents=True, exist_ok=True)
                write_metrics({axis.value: value, "repeat": repeat, "test_accuracy": accuracy}, point_dir / "metrics.json")
                scores[value].append({"dgnn": accuracy})
        return scores

    def sweep(
        self,
        config: ExperimentConfig,
        axis: SweepAxis,
        values: Sequence[float],
        repeats: Optional[int] = None,
        workers: int = 1,
        reuse_optics: bool = False
    ) -> SweepResult:
        """
        Свип по оси: по обученной и оцененной модели на каждое значение.

        Args:
            config: Базовая конфигурация
            axis: k, P, sigma или labels_per_class
            values: Значения оси
            repeats: Повторов на значение (labels_per_class - 10 по умолчанию, иначе 1)
            workers: Процессов для независимых точек
            reuse_optics: Для k - одна обученная оптика и переобучение классификатора на каждое k

        Returns:
            SweepResult: Строки value, mean, std, repeats и средние моделей сравнения
        """
        axis = SweepAxis(axis)
        if not values:
            raise ConfigurationException("Свип требует хотя бы одно значение")
        if config.task == TaskKind.GRAPH_ACTION and axis != SweepAxis.P:
            raise ConfigurationException(f"Для распознавания действий доступен только свип по P, не {axis.value}")
        if repeats is None:
            repeats = LABEL_SCARCITY_REPEATS if axis == SweepAxis.LABELS_PER_CLASS else 1
        if repeats < 1:
            raise ConfigurationException("repeats должно быть не меньше 1")

        sweep_dir = Path(config.output_dir) / f"sweep-{axis.value}-{config.run_name}"
        sweep_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"🧹 Свип {axis.value} по {list(values)}, {repeats} повторов -> {sweep_dir}")

        if axis == SweepAxis.SIGMA or (axis == SweepAxis.K and reuse_optics):
            scores = self._trained_once_points(config, axis, values, repeats, sweep_dir)
        else:
            scores = self._independent_points(config, axis, values, repeats, sweep_dir, workers)

        rows = [_sweep_row(axis, value, scores[value]) for value in values]
        write_sweep(rows, sweep_dir / "sweep.tsv")

        if self.registry_enabled:
            sweep_id = str(uuid.uuid4())
            with get_db_session() as session:
                registry = RegistryService(session)
                for row in rows:
                    if row["mean"] is not None:
                        registry.record_sweep_point(
                            sweep_id, axis.value, float(row[axis.value]), row["mean"], row["std"], row["repeats"]
                        )
        return SweepResult(report_dir=sweep_dir, axis=axis, rows=rows)


def _value_label(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else str(value)


def _point_scores(metrics: Dict[str, Any]) -> Dict[str, Optional[float]]:
    scores = {"dgnn": metrics.get("test_accuracy")}
    for name, result in metrics.get("baselines", {}).items():
        scores[name] = result["test_accuracy"]
    return scores


def _run_point(config_json: str) -> Dict[str, Optional[float]]:
    """Точка свипа в отдельном процессе, без реестра."""
    torch.set_num_threads(1)
    config = ExperimentConfig.model_validate_json(config_json)
    return _point_scores(ExperimentService(registry_enabled=False, progress=False).run(config).metrics)


def _sweep_row(axis: SweepAxis, value: float, scores: List[Dict[str, Optional[float]]]) -> Dict[str, Any]:
    row: Dict[str, Any] = {axis.value: value}
    names = ["dgnn"] + [name for name in scores[0] if name != "dgnn"]
    for name in names:
        values = [s[name] for s in scores if s.get(name) is not None]
        prefix = "" if name == "dgnn" else f"{name}_"
        row[f"{prefix}mean"] = float(np.mean(values)) if values else None
        row[f"{prefix}std"] = float(np.std(values)) if values else None
    row["repeats"] = len(scores)
    return row


def run_experiment(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    """Прогон эксперимента сервисом с параметрами по умолчанию."""
    return ExperimentService(**kwargs).run(config)


def sweep(config: ExperimentConfig, axis: SweepAxis, values: Sequence[float], **kwargs) -> SweepResult:
    """Свип сервисом с реестром из настроек."""
    service_kwargs = {key: kwargs.pop(key) for key in ("registry_enabled", "progress") if key in kwargs}
    return ExperimentService(**service_kwargs).sweep(config, axis, values, **kwargs)


def _evaluation_mask(loaded: Checkpoint, graph: Graph) -> np.ndarray:
    if loaded.split is not None and loaded.split["n_nodes"] == graph.n_nodes:
        return loaded.test_mask(graph.n_nodes)
    if graph.test_mask.any():
        return graph.test_mask
    raise ConfigurationException(
        "Нет тестовых узлов: в bundle нет split.txt, а разбиение чекпоинта не подходит к графу"
    )


def evaluate_checkpoint(checkpoint: Path, dataset: Path, out_dir: Optional[Path] = None) -> Dict[str, Any]:
    """
    Оценка сохраненной модели на bundle графа.

    Атрибуты кодируются преобразованием из чекпоинта. Оцениваются тестовые узлы
    разбиения, на котором обучалась модель, иначе тестовые узлы split.txt.

    Args:
        checkpoint: Путь к чекпоинту
        dataset: Путь к bundle графа
        out_dir: Каталог для metrics.json и confusion.tsv

    Returns:
        Dict[str, Any]: accuracy, n_eval, checkpoint_sha256
    """
    with _stage("data"):
        loaded = load_checkpoint(checkpoint)
        model = loaded.model
        graph = load_graph_bundle(dataset)
    with _stage("features"):
        graph = graph.with_attributes(loaded.encode_attributes(graph.attributes))
    with _stage("ppr"):
        table = graph_ppr_table(graph, model.top_k or settings.TOP_K, model.alpha or settings.PPR_ALPHA, settings.PPR_BLOCK_SIZE)
    with _stage("evaluate"):
        mask = _evaluation_mask(loaded, graph) & (graph.labels >= 0)
        predictions = ExperimentService.predict_nodes(model, graph, table, mask)
        truth = graph.labels[mask]
        n_classes = model.n_classes
        metrics = {
            "checkpoint_sha256": loaded.content_hash,
            "dataset": str(dataset),
            "n_eval": int(mask.sum()),
            "test_accuracy": float(np.mean(predictions == truth)),
        }
    logger.info(f"🎯 Оценка {checkpoint}: accuracy {metrics['test_accuracy']:.4f} на {metrics['n_eval']} узлах")
    if out_dir is not None:
        with _stage("report"):
            out_dir = Path(out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            names = list(graph.class_names) or [str(c) for c in range(n_classes)]
            matrix = confusion_matrix(truth, predictions, labels=np.arange(n_classes))
            write_confusion(matrix, names, out_dir / "confusion.tsv")
            write_metrics(metrics, out_dir / "metrics.json")
    return metrics
