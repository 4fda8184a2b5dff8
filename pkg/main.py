"""
Командная строка DGNN: генерация, загрузка данных, обучение, оценка, свипы.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Добавляем корневую папку проекта в путь
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from loguru import logger
from pydantic import ValidationError

from app.core.database import get_db_session
from app.core.exceptions import DgnnException
from app.core.logging import setup_logging_from_settings
from app.dataio import (
    load_graph_bundle,
    load_skeleton_dataset,
    save_graph_bundle,
    save_skeleton_bundle,
)
from app.dgnn import build_model
from app.graphs import generate_sbm, random_split
from app.photonics import default_lut, load_lut
from app.schemas.experiment import ExperimentConfig, SweepAxis, TaskKind
from app.services import (
    ExperimentService,
    RegistryService,
    compute_performance,
    evaluate_checkpoint,
    export_features,
    map_density,
)
from app.services.experiment_service import SBM_LABELS_PER_CLASS, resolve_train_config
from app.train import NodeBatch, gradcheck
from config.settings import settings


def _csv(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _add_experiment_flags(parser: argparse.ArgumentParser, seed_required: bool) -> None:
    """Флаги полей ExperimentConfig; файл --config их перекрывает."""
    parser.add_argument("--config", help="JSON конфигурации эксперимента")
    parser.add_argument("--seed", type=int, required=seed_required, help="Зерно данных, разбиения и инициализации")
    parser.add_argument("--task", choices=[t.value for t in TaskKind])
    parser.add_argument("--dataset", help="Bundle графа или скелетный датасет")
    parser.add_argument("--sbm", action="store_true", help="Синтетический граф SBM")
    parser.add_argument("--sbm-n", type=int)
    parser.add_argument("--sbm-classes", type=int)
    parser.add_argument("--sbm-p", type=float)
    parser.add_argument("--sbm-q", type=float)
    parser.add_argument("--heads", type=int, help="Количество голов P")
    parser.add_argument("--message-dim", type=int, help="Выходов DPU m")
    parser.add_argument("--top-k", type=int)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--preset", choices=["synthetic", "benchmark", "action"])
    parser.add_argument("--encoding", choices=["amplitude", "phase"])
    parser.add_argument("--classifier", choices=["electronic", "optical"])
    parser.add_argument("--lut", help="Файл LUT мета-атома")
    parser.add_argument("--frames", type=int, help="Кадров в подпоследовательности")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--batch", help="'full' или размер мини-батча")
    parser.add_argument("--frozen-optics", action="store_true", help="Не обучать ширины щелей")
    parser.add_argument("--binary", action="store_true", help="Бинарная модуляция")
    parser.add_argument("--sigma", type=float, help="СКО шума коэффициентов")
    parser.add_argument("--retrain", action="store_true", help="Переобучить классификатор после шума")
    parser.add_argument("--baselines", type=_csv, help="pca,mlp,pprgo_s,pprgo_ws")
    parser.add_argument("--baseline-epochs", type=int)
    parser.add_argument("--test-size", type=int)
    parser.add_argument("--labels-per-class", type=int)
    parser.add_argument("--folds", type=int)
    parser.add_argument("--pca-dim", type=int)
    parser.add_argument("--output-dir")
    parser.add_argument("--name")


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Только явно заданные флаги, вложенные по секциям ExperimentConfig."""
    sections: Dict[str, Dict[str, Any]] = {"model": {}, "train": {}, "noise": {}, "split": {}, "baseline": {}, "sbm": {}}
    mapping = {
        "heads": ("model", "heads"),
        "message_dim": ("model", "message_dim"),
        "top_k": ("model", "top_k"),
        "alpha": ("model", "alpha"),
        "preset": ("model", "preset"),
        "encoding": ("model", "encoding"),
        "classifier": ("model", "classifier"),
        "lut": ("model", "lut_file"),
        "frames": ("model", "frames"),
        "epochs": ("train", "epochs"),
        "lr": ("train", "learning_rate"),
        "batch": ("train", "batch"),
        "sigma": ("noise", "sigma"),
        "test_size": ("split", "test_size"),
        "labels_per_class": ("split", "labels_per_class"),
        "folds": ("split", "folds"),
        "pca_dim": ("split", "pca_dim"),
        "baseline_epochs": ("baseline", "epochs"),
        "sbm_n": ("sbm", "n"),
        "sbm_classes": ("sbm", "n_classes"),
        "sbm_p": ("sbm", "p"),
        "sbm_q": ("sbm", "q"),
    }
    for flag, (section, key) in mapping.items():
        value = getattr(args, flag)
        if value is not None:
            sections[section][key] = value
    if args.frozen_optics:
        sections["train"]["optics_trainable"] = False
    if args.binary:
        sections["noise"]["binary"] = True
    if args.retrain:
        sections["noise"]["retrain"] = True

    overrides: Dict[str, Any] = {key: value for key, value in sections.items() if value}
    if args.sbm and "sbm" not in overrides:
        overrides["sbm"] = {}
    for flag in ("seed", "task", "dataset", "output_dir", "name", "baselines"):
        value = getattr(args, flag)
        if value is not None:
            overrides[flag] = value
    return overrides


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = _overrides(args)
    if args.config:
        return ExperimentConfig.from_file(args.config, **overrides)
    return ExperimentConfig.model_validate(overrides)


def cmd_gen_sbm(args: argparse.Namespace) -> int:
    graph = generate_sbm(args.n, args.classes, args.p, args.q, args.seed, attr_std=args.attr_std)
    graph = graph.with_split(*random_split(graph.labels, args.seed, labels_per_class=args.labels_per_class))
    save_graph_bundle(graph, args.out, class_names=[f"class{c}" for c in range(args.classes)])
    logger.info(f"✅ SBM записан в {args.out}: {graph.n_nodes} узлов, {graph.n_edges} ребер")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    if args.kind == "skeleton":
        sequences = load_skeleton_dataset(args.src)
        save_skeleton_bundle(sequences, args.out)
        logger.info(f"✅ {len(sequences)} скелетных видео записаны в {args.out}")
        return 0
    graph = load_graph_bundle(args.src)
    save_graph_bundle(graph, args.out, class_names=list(graph.class_names) or None)
    logger.info(f"✅ Граф {graph.n_nodes} узлов, {graph.n_edges} ребер, {graph.n_classes} классов -> {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    result = ExperimentService().run(config)
    print(json.dumps({"report_dir": str(result.report_dir), "test_accuracy": result.metrics.get("test_accuracy")}))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    metrics = evaluate_checkpoint(Path(args.checkpoint), Path(args.dataset), Path(args.out) if args.out else None)
    print(json.dumps(metrics, sort_keys=True))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    values = [float(v) for v in _csv(args.values)]
    result = ExperimentService().sweep(
        config, SweepAxis(args.axis), values, repeats=args.repeats, workers=args.workers, reuse_optics=args.reuse_optics
    )
    for row in result.rows:
        print(json.dumps(row, sort_keys=True))
    logger.info(f"✅ Таблица свипа: {result.report_dir / 'sweep.tsv'}")
    return 0


def cmd_perf(args: argparse.Namespace) -> int:
    if args.map:
        n_in, n_out = args.map
        density = map_density(n_in, n_out, args.rate, args.area)
        print(json.dumps({"ops_per_s_per_mm2": density}))
        return 0
    report = compute_performance(args.n, args.m, args.k, args.heads, args.classes, args.rate, args.power, args.area)
    print(json.dumps(report.as_dict(), sort_keys=True))
    return 0


def cmd_export_features(args: argparse.Namespace) -> int:
    export_features(args.checkpoint, load_graph_bundle(args.dataset), args.out)
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    if config.task == TaskKind.GRAPH_ACTION:
        logger.error("❌ gradcheck поддерживает только узловые задачи")
        return 2
    service = ExperimentService(registry_enabled=False)
    data = service.prepare_node_data(config)
    lut = load_lut(config.model.lut_file) if config.model.lut_file else default_lut()
    model = build_model(config.model, data.graph.n_attrs, data.graph.n_classes, lut, config.seed, config.task)
    batch = NodeBatch.from_mask(data.train_graph, data.train_table, model, data.train_graph.train_mask)
    loss = resolve_train_config(config).loss
    report = gradcheck(model, batch, loss, samples=args.samples, h=args.h, seed=config.seed, tolerance=args.tolerance)
    print(json.dumps({
        "checked": len(report.entries),
        "max_rel_error": report.max_rel_error,
        "passed": report.passed,
    }))
    return 0 if report.passed else 1


def cmd_runs(args: argparse.Namespace) -> int:
    with get_db_session() as session:
        for run in RegistryService(session).list_runs(args.limit):
            print(
                f"{run.id}\t{run.created_at:%Y-%m-%d %H:%M}\t{run.task}\t{run.model_kind}\tseed={run.seed}\t"
                f"{run.status}\tfinal={run.final_test_accuracy}\t{run.report_dir or ''}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgnn", description=settings.APP_DESCRIPTION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-sbm", help="Сгенерировать синтетический граф SBM в bundle")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--q", type=float, default=0.005)
    p.add_argument("--attr-std", type=float, default=0.15)
    p.add_argument("--labels-per-class", type=int, default=SBM_LABELS_PER_CLASS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen_sbm)

    p = sub.add_parser("ingest", help="Проверить и переписать датасет в канонический формат")
    p.add_argument("--kind", choices=["graph", "skeleton"], default="graph")
    p.add_argument("--src", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("train", help="Обучить и оценить модель, записать отчет")
    _add_experiment_flags(p, seed_required=True)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="Оценить чекпоинт на bundle графа")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", help="Каталог для metrics.json и confusion.tsv")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("sweep", help="Свип по k, P, sigma или labels_per_class")
    _add_experiment_flags(p, seed_required=True)
    p.add_argument("--axis", required=True, choices=[a.value for a in SweepAxis])
    p.add_argument("--values", required=True, help="Значения через запятую")
    p.add_argument("--repeats", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--reuse-optics", action="store_true", help="k: одна оптика, переобучение классификатора")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("perf", help="Вычислительные характеристики")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--classes", type=int, default=8)
    p.add_argument("--rate", type=float, default=settings.MODULATION_RATE_HZ)
    p.add_argument("--power", type=float, default=settings.SOURCE_POWER_W)
    p.add_argument("--area", type=float, help="Площадь, м^2")
    p.add_argument("--map", type=int, nargs=2, metavar=("N_IN", "N_OUT"), help="Плотность одного DPU n_in -> n_out")
    p.set_defaults(handler=cmd_perf)

    p = sub.add_parser("export-features", help="Выгрузить интенсивности признаков узлов в CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_export_features)

    p = sub.add_parser("gradcheck", help="Сравнить градиенты с центральными разностями")
    _add_experiment_flags(p, seed_required=False)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--h", type=float, default=1e-2)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser("runs", help="Последние запуски из реестра")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(handler=cmd_runs)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа командной строки."""
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as e:
        logger.error(f"❌ Некорректная конфигурация: {e}")
        return 2
    except DgnnException as e:
        logger.error(f"❌ {e.message}")
        return 1
    except KeyboardInterrupt:
        logger.info("⏹️ Остановлено пользователем")
        return 130


if __name__ == "__main__":
    # Настраиваем логирование
    setup_logging_from_settings()
    sys.exit(main())
