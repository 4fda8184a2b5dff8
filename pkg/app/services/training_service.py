"""
Сервис обучения DGNN.

Содержит цикл Adam для узловой классификации (полный батч), распознавания
действий (мини-батчи) и переобучения классификатора при замороженной оптике.
"""

import copy
import math
from typing import Callable, Optional, Tuple

import numpy as np
import torch
from loguru import logger
from tqdm import tqdm

from app.core.exceptions import ConfigurationException, DivergenceException, NumericException
from app.dgnn.forward import predict
from app.dgnn.model import DgnnModel
from app.dgnn.quantize import quantize_model
from app.graphs.graph import Graph, NeighborTable
from app.schemas.experiment import ClassifierKind
from app.schemas.training import TrainConfig
from app.train.batches import Batch, NodeBatch, SequenceBatch
from app.train.gradients import batch_loss
from app.train.history import EpochStats, TrainHistory
from app.train.optimizer import ClampedAdam, width_group

EpochCallback = Callable[[EpochStats], None]


def accuracy(model: DgnnModel, batch: Optional[Batch]) -> Optional[float]:
    """Доля верных предсказаний на батче (None для пустого батча)."""
    if batch is None or len(batch) == 0:
        return None
    with torch.no_grad():
        predictions = predict(batch.outputs(model))
    return float(np.mean(predictions == batch.labels.numpy()))


class TrainingService:
    """Сервис обучения моделей DGNN."""

    def __init__(self, on_epoch: Optional[EpochCallback] = None, progress: bool = True):
        """
        Инициализация сервиса.

        Args:
            on_epoch: Обработчик записи каждой эпохи (например, реестр запусков)
            progress: Показывать прогресс-бар tqdm
        """
        self.on_epoch = on_epoch
        self.progress = progress

    def _optimizer(self, model: DgnnModel, config: TrainConfig, classifier_only: bool = False) -> ClampedAdam:
        widths = [] if classifier_only else [p for p in model.optical_parameters() if p.requires_grad]
        if model.classifier_widths is not None:
            widths.append(model.classifier_widths)
        groups = [width_group(widths)] if widths else []
        if model.classifier is not None:
            groups.append({"params": list(model.classifier.parameters())})
        return ClampedAdam(groups, lr=config.learning_rate)

    @staticmethod
    def _finalize(model: DgnnModel) -> DgnnModel:
        """После обучения со straight-through модель фиксируется бинарной."""
        if model.straight_through:
            model.straight_through = False
            return quantize_model(model)
        return model

    def _loop(
        self,
        model: DgnnModel,
        train_batch: Batch,
        test_batch: Optional[Batch],
        config: TrainConfig,
        optimizer: ClampedAdam,
        desc: str
    ) -> TrainHistory:
        if len(train_batch) == 0:
            raise ConfigurationException("Нет размеченных примеров для обучения")
        history = TrainHistory()
        best_state = None
        last_finite: Optional[float] = None
        generator = np.random.default_rng(config.seed)
        batch_size = config.batch_size

        epochs = range(1, config.epochs + 1)
        for epoch in tqdm(epochs, desc=desc, disable=not self.progress or config.epochs == 0, leave=False):
            if batch_size is None or batch_size >= len(train_batch):
                chunks = [None]
            else:
                order = generator.permutation(len(train_batch))
                chunks = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]

            total, count = 0.0, 0
            for chunk in chunks:
                batch = train_batch if chunk is None else train_batch.subset(chunk)
                optimizer.zero_grad()
                loss = batch_loss(model, batch, config.loss, config.l2_weight)
                if not torch.isfinite(loss):
                    logger.error(f"❌ Расходимость на эпохе {epoch}, последний конечный loss {last_finite}")
                    raise DivergenceException(epoch, last_finite)
                loss.backward()
                optimizer.step()
                total += loss.item() * len(batch)
                count += len(batch)

            last_finite = total / count
            stats = EpochStats(
                epoch=epoch,
                loss=last_finite,
                train_accuracy=accuracy(model, train_batch),
                test_accuracy=accuracy(model, test_batch),
            )
            history.append(stats)
            if history.is_best(stats):
                best_state = copy.deepcopy(model.state_dict())
            if self.on_epoch is not None:
                self.on_epoch(stats)
            if config.log_every and epoch % config.log_every == 0:
                logger.info(
                    f"📈 Эпоха {epoch}: loss={stats.loss:.4f}, train={stats.train_accuracy:.3f}, "
                    f"test={stats.test_accuracy if stats.test_accuracy is not None else float('nan'):.3f}"
                )

        if best_state is not None:
            model.load_state_dict(best_state)
            best = history.best
            logger.info(f"🏁 Восстановлены параметры лучшей эпохи {best.epoch} (test={best.test_accuracy})")
        return history

    def fit(
        self,
        model: DgnnModel,
        graph: Graph,
        table: NeighborTable,
        config: TrainConfig,
        eval_graph: Optional[Graph] = None,
        eval_table: Optional[NeighborTable] = None
    ) -> Tuple[DgnnModel, TrainHistory]:
        """
        Обучение узловой классификации.

        Args:
            model: Модель (изменяется на месте)
            graph: Граф обучения (метки train_mask)
            table: Таблица соседей графа обучения
            config: Конфигурация обучения
            eval_graph: Граф оценки test_mask (индуктивный режим: восстановленный полный граф)
            eval_table: Таблица соседей графа оценки

        Returns:
            Tuple[DgnnModel, TrainHistory]: Модель с параметрами лучшей эпохи и история
        """
        torch.manual_seed(config.seed)
        eval_graph = eval_graph or graph
        eval_table = eval_table or table

        model.straight_through = config.binary_training and not model.binary
        model.set_optics_trainable(config.optics_trainable and not model.binary)
        try:
            train_batch = NodeBatch.from_mask(graph, table, model, graph.train_mask)
            test_batch = (
                NodeBatch.from_mask(eval_graph, eval_table, model, eval_graph.test_mask)
                if eval_graph.test_mask.any() else None
            )
            logger.info(
                f"🚀 Обучение: {len(train_batch)} train, {len(test_batch) if test_batch else 0} test, "
                f"{config.epochs} эпох, lr={config.learning_rate}"
            )
            history = self._loop(model, train_batch, test_batch, config, self._optimizer(model, config), "fit")
        finally:
            model.set_optics_trainable(True)

        return self._finalize(model), history

    def retrain_classifier(
        self,
        model: DgnnModel,
        graph: Graph,
        table: NeighborTable,
        config: TrainConfig,
        eval_graph: Optional[Graph] = None,
        eval_table: Optional[NeighborTable] = None
    ) -> Tuple[DgnnModel, TrainHistory]:
        """
        Переобучение только классификатора; оптика (ширины и шум) не меняется.

        Args:
            model: Обученная (возможно квантованная и зашумленная) модель
            graph: Граф
            table: Таблица соседей
            config: Конфигурация (обычно lr 0.1)

        Returns:
            Tuple[DgnnModel, TrainHistory]: Копия модели с новым классификатором и история
        """
        if model.binary and model.classifier_kind == ClassifierKind.OPTICAL:
            raise ConfigurationException("Переобучение бинарного классификационного DPU не поддерживается")

        retrained = copy.deepcopy(model)
        retrained.straight_through = False
        retrained.set_optics_trainable(False)
        optics_before = retrained.optics_hash()
        eval_graph = eval_graph or graph
        eval_table = eval_table or table
        try:
            train_batch = NodeBatch.from_mask(graph, table, retrained, graph.train_mask)
            test_batch = (
                NodeBatch.from_mask(eval_graph, eval_table, retrained, eval_graph.test_mask)
                if eval_graph.test_mask.any() else None
            )
            optimizer = self._optimizer(retrained, config, classifier_only=True)
            history = self._loop(retrained, train_batch, test_batch, config, optimizer, "retrain")
        finally:
            retrained.set_optics_trainable(True)

        if retrained.optics_hash() != optics_before:
            raise NumericException("Оптика изменилась при переобучении классификатора", provenance="retrain")
        logger.info(f"🔁 Классификатор переобучен за {config.epochs} эпох, оптика не изменена")
        return retrained, history

    def fit_action(
        self,
        model: DgnnModel,
        train_batch: SequenceBatch,
        test_batch: Optional[SequenceBatch],
        config: TrainConfig
    ) -> Tuple[DgnnModel, TrainHistory]:
        """
        Обучение распознавания действий на окнах кадров (мини-батчи).

        Args:
            model: Модель с read-out DPU
            train_batch: Окна обучения
            test_batch: Окна теста
            config: Конфигурация (batch=32, lr 0.005)

        Returns:
            Tuple[DgnnModel, TrainHistory]: Модель лучшей эпохи и история
        """
        torch.manual_seed(config.seed)
        model.straight_through = config.binary_training and not model.binary
        model.set_optics_trainable(config.optics_trainable and not model.binary)
        try:
            n_batches = math.ceil(len(train_batch) / (config.batch_size or len(train_batch)))
            logger.info(f"🚀 Обучение действий: {len(train_batch)} окон, {n_batches} батчей на эпоху")
            history = self._loop(model, train_batch, test_batch, config, self._optimizer(model, config), "fit-action")
        finally:
            model.set_optics_trainable(True)
        return self._finalize(model), history
