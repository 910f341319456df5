# /src/panoptic_eval.py

"""
Panoptic Evaluation CLI

This module is the command-line entry point of the toolkit. It wires manifests,
class maps and flags into evaluation runs and writes structured reports.

Subcommands:
    semantic   IoU, mIoU and fwIoU
    panoptic   PQ, SQ, RQ, PQ-dagger with thing/stuff splits (plus semantic scores)
    tracking   PAT, PTQ and LSTQ (plus panoptic and semantic scores)
    fuse       build panoptic labels from semantic labels and 3D boxes
    gen        write synthetic scenario datasets

Exit status is 0 when a complete report (or dataset) was written, 1 on any
evaluation error and 2 on usage errors.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from constant import LABEL_FILE_SUFFIX
from eval.panoptic_evaluate import PQStats, evaluate_panoptic_scan, finalize
from eval.semantic_evaluate import ConfusionMatrix, finalize_semantic, miou
from eval.tracking_evaluate import (
    SequenceTally,
    evaluate_sequence,
    finalize_tracking,
    reduce_tallies,
    sequence_breakdown,
)
from fusion.panoptic_fusion import (
    TrackIdRegistry,
    fuse_gt,
    fuse_pred,
    overlap_noise_statistics,
    select_boxes,
    select_max_f1_thresholds,
)
from models.config_models import EvaluationConfig, FusionConfig, Manifest, ManifestScan
from models.exceptions import (
    MalformedManifestError,
    NoPresentClassesError,
    PanopticEvalError,
    TokenMismatchError,
)
from models.label_models import ClassMap, ScanLabels, SequenceLabels
from models.metric_models import MetricReport, ReportMeta, SequenceBreakdown
from models.scenario_models import ScenarioSpec
from scenario.cases import CASES
from scenario.scenario_generator import generate, write_scenario
from utils.label_io import (
    dump_structured,
    file_digest,
    load_boxes,
    load_class_map,
    load_labels,
    load_manifest,
    load_points,
    load_structured,
    save_class_map,
    save_labels,
)
from utils.label_utils import remap
from utils.parallel_utils import ordered_map, resolve_workers
from utils.report_utils import (
    per_class_table,
    render_report,
    write_report,
    write_table_csv,
)

load_dotenv()

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class ScanJob(BaseModel):
    """One scan pair to load and score, self-contained for worker processes."""

    sequence_id: str
    token: str
    gt_path: Path
    pred_path: Path
    class_map: ClassMap
    config: EvaluationConfig


class SequenceJob(BaseModel):
    """One sequence to load and score."""

    sequence_id: str
    scans: List[ScanJob]
    class_map: ClassMap
    config: EvaluationConfig


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def load_scan_pair(job: ScanJob) -> Tuple[ScanLabels, ScanLabels]:
    """
    Load a scan pair and bring both sides into evaluation ids.

    Ground truth is always remapped through the class map; predictions only
    when the config says they are stored in raw ids.
    """
    gt = remap(load_labels(job.gt_path), job.class_map, source=str(job.gt_path))
    pred = load_labels(job.pred_path)
    if job.config.remap_predictions:
        pred = remap(pred, job.class_map, source=str(job.pred_path))
    return gt, pred


def scan_jobs(
    manifest: Manifest, class_map: ClassMap, config: EvaluationConfig
) -> List[ScanJob]:
    """
    Resolve the gt/pred files of every scan in manifest order.

    Raises:
        TokenMismatchError: If a scan lists only one of gt and pred
        FileNotFoundError: If a listed file does not exist
    """
    jobs = []
    for sequence in manifest.sequences:
        if not sequence.scans:
            logger.warning(f"Sequence {sequence.sequence_id} lists no scans")
        for scan in sequence.scans:
            if scan.gt is None or scan.pred is None:
                side = "prediction" if scan.pred is None else "ground truth"
                raise TokenMismatchError(
                    f"Scan '{scan.token}' of sequence '{sequence.sequence_id}' has no {side} file"
                )
            gt_path, pred_path = manifest.resolve(scan.gt), manifest.resolve(scan.pred)
            for path in (gt_path, pred_path):
                if not path.exists():
                    raise FileNotFoundError(f"File for scan '{scan.token}' not found: {path}")
            jobs.append(
                ScanJob(
                    sequence_id=sequence.sequence_id,
                    token=scan.token,
                    gt_path=gt_path,
                    pred_path=pred_path,
                    class_map=class_map,
                    config=config,
                )
            )
    return jobs


def sequence_jobs(
    manifest: Manifest, class_map: ClassMap, config: EvaluationConfig
) -> List[SequenceJob]:
    grouped: Dict[str, List[ScanJob]] = {s.sequence_id: [] for s in manifest.sequences}
    for job in scan_jobs(manifest, class_map, config):
        grouped[job.sequence_id].append(job)
    return [
        SequenceJob(sequence_id=sid, scans=scans, class_map=class_map, config=config)
        for sid, scans in grouped.items()
    ]


# ---------------------------------------------------------------------------
# Worker functions (top level so that they pickle)
# ---------------------------------------------------------------------------


def semantic_worker(job: ScanJob) -> ConfusionMatrix:
    gt, pred = load_scan_pair(job)
    cm = ConfusionMatrix.for_class_map(job.class_map)
    cm.add_scan(gt, pred, job.token)
    return cm


def panoptic_worker(job: ScanJob) -> Tuple[ConfusionMatrix, PQStats]:
    gt, pred = load_scan_pair(job)
    return evaluate_panoptic_scan(gt, pred, job.class_map, job.config, job.token)


def tracking_worker(job: SequenceJob) -> SequenceTally:
    gt_scans, pred_scans = [], []
    for scan in job.scans:
        gt, pred = load_scan_pair(scan)
        gt_scans.append((scan.token, gt))
        pred_scans.append((scan.token, pred))
    logger.debug(f"Tracking sequence {job.sequence_id} ({len(job.scans)} scans)")
    return evaluate_sequence(
        SequenceLabels(sequence_id=job.sequence_id, scans=gt_scans),
        SequenceLabels(sequence_id=job.sequence_id, scans=pred_scans),
        job.class_map,
        job.config,
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def evaluation_config(args: argparse.Namespace) -> EvaluationConfig:
    return EvaluationConfig(
        min_points=args.min_points,
        apply_filter_to=args.apply_filter_to,
        ids_gap_mode=args.ids_gap_mode,
        track_mean=args.track_mean,
        remap_predictions=args.remap_pred,
        parallelism=resolve_workers(args.parallelism),
    )


def report_meta(
    command: str, config: EvaluationConfig, class_map: ClassMap, manifest_path: Path
) -> ReportMeta:
    return ReportMeta(
        command=command,
        config_digest=config.digest(class_map.model_dump_json()),
        manifest_digest=file_digest(manifest_path),
        workers=config.parallelism,
    )


def _optional_miou(cm: ConfusionMatrix) -> Optional[float]:
    try:
        return miou(cm)
    except NoPresentClassesError:
        return None


def _optional_pq(stats: PQStats, class_map: ClassMap, cm: ConfusionMatrix) -> Optional[float]:
    try:
        return finalize(stats, class_map, cm).pq
    except NoPresentClassesError:
        return None


def _prepare(args: argparse.Namespace) -> Tuple[Manifest, ClassMap, EvaluationConfig]:
    manifest = load_manifest(args.manifest)
    class_map = load_class_map(args.classmap)
    config = evaluation_config(args)
    logger.info(
        f"{args.command}: {len(manifest.sequences)} sequences, {manifest.scan_count} scans, "
        f"{config.parallelism} workers"
    )
    return manifest, class_map, config


def _group_by_sequence(jobs: Sequence[ScanJob], results: Sequence) -> Dict[str, List]:
    grouped: Dict[str, List] = {}
    for job, result in zip(jobs, results):
        grouped.setdefault(job.sequence_id, []).append(result)
    return grouped


def cmd_semantic(args: argparse.Namespace) -> MetricReport:
    """Score semantic segmentation over a manifest."""
    manifest, class_map, config = _prepare(args)
    jobs = scan_jobs(manifest, class_map, config)
    matrices = ordered_map(semantic_worker, jobs, config.parallelism)

    total = ConfusionMatrix.for_class_map(class_map)
    breakdowns = []
    for sequence_id, seq_matrices in _group_by_sequence(jobs, matrices).items():
        seq_cm = ConfusionMatrix.for_class_map(class_map)
        for cm in seq_matrices:
            seq_cm = seq_cm.merge(cm)
        total = total.merge(seq_cm)
        breakdowns.append(
            SequenceBreakdown(
                sequence_id=sequence_id, frames=len(seq_matrices), miou=_optional_miou(seq_cm)
            )
        )

    return MetricReport(
        meta=report_meta("semantic", config, class_map, Path(args.manifest)),
        semantic=finalize_semantic(total, class_map),
        sequences=breakdowns,
    )


def cmd_panoptic(args: argparse.Namespace) -> MetricReport:
    """Score panoptic segmentation (and semantic segmentation) over a manifest."""
    manifest, class_map, config = _prepare(args)
    jobs = scan_jobs(manifest, class_map, config)
    results = ordered_map(panoptic_worker, jobs, config.parallelism)

    total_cm = ConfusionMatrix.for_class_map(class_map)
    total_stats = PQStats(class_map.num_eval_classes)
    breakdowns = []
    for sequence_id, seq_results in _group_by_sequence(jobs, results).items():
        seq_cm = ConfusionMatrix.for_class_map(class_map)
        seq_stats = PQStats(class_map.num_eval_classes)
        for cm, stats in seq_results:
            seq_cm = seq_cm.merge(cm)
            seq_stats = seq_stats.merge(stats)
        total_cm = total_cm.merge(seq_cm)
        total_stats = total_stats.merge(seq_stats)
        breakdowns.append(
            SequenceBreakdown(
                sequence_id=sequence_id,
                frames=len(seq_results),
                miou=_optional_miou(seq_cm),
                pq=_optional_pq(seq_stats, class_map, seq_cm),
            )
        )

    return MetricReport(
        meta=report_meta("panoptic", config, class_map, Path(args.manifest)),
        semantic=finalize_semantic(total_cm, class_map),
        panoptic=finalize(total_stats, class_map, total_cm),
        sequences=breakdowns,
    )


def cmd_tracking(args: argparse.Namespace) -> MetricReport:
    """Score panoptic tracking (plus panoptic and semantic scores) over a manifest."""
    manifest, class_map, config = _prepare(args)
    jobs = sequence_jobs(manifest, class_map, config)
    tallies = ordered_map(tracking_worker, jobs, config.parallelism)

    merged = reduce_tallies(tallies, class_map)
    return MetricReport(
        meta=report_meta("tracking", config, class_map, Path(args.manifest)),
        semantic=finalize_semantic(merged.cm, class_map),
        panoptic=finalize(merged.ptq_stats, class_map, merged.cm),
        tracking=finalize_tracking(tallies, class_map, config),
        sequences=[sequence_breakdown(t, class_map, config) for t in tallies],
    )


def _parse_class_thresholds(text: Optional[str]) -> Dict[int, float]:
    """Parse "0=0.3,1=0.5" into {0: 0.3, 1: 0.5}."""
    thresholds: Dict[int, float] = {}
    if not text:
        return thresholds
    for item in text.split(","):
        try:
            class_id, value = item.split("=")
            thresholds[int(class_id)] = float(value)
        except ValueError:
            raise ValueError(f"Bad class threshold '{item}', expected <class_id>=<score>") from None
    return thresholds


def fusion_config(args: argparse.Namespace) -> FusionConfig:
    threshold_mode = args.threshold_mode
    if threshold_mode is None:
        threshold_mode = "fixed" if args.score_threshold > 0 else "none"
    return FusionConfig(
        mode=args.mode,
        threshold_mode=threshold_mode,
        score_threshold=args.score_threshold,
        class_thresholds=_parse_class_thresholds(args.class_thresholds),
    )


def _require(manifest: Manifest, scan: ManifestScan, field: str) -> Path:
    value = getattr(scan, field)
    if value is None:
        raise MalformedManifestError(f"Scan '{scan.token}' has no '{field}' entry")
    path = manifest.resolve(value)
    if not path.exists():
        raise FileNotFoundError(f"File for scan '{scan.token}' not found: {path}")
    return path


def fusion_box_field(scan: ManifestScan, mode: str) -> str:
    """Manifest field holding the boxes to fuse: annotations in gt mode, detections otherwise."""
    if mode == "gt" and scan.gt_boxes is not None:
        return "gt_boxes"
    return "boxes"


def cmd_fuse(args: argparse.Namespace) -> Path:
    """
    Fuse semantic labels and boxes into panoptic label files.

    Writes <out_dir>/<sequence>/<token>.panoptic.bin in evaluation ids, the
    matching classmap_eval.yaml and a manifest listing the fused files. In gt
    mode an overlap_noise.csv with the per-class noise share is written too.
    Gt mode fuses the gt_boxes of a scan when listed, else its boxes.

    Returns:
        Path of the written manifest
    """
    manifest = load_manifest(args.manifest)
    class_map = load_class_map(args.classmap)
    config = fusion_config(args)
    out_dir = Path(args.out_dir)
    source_field = "gt" if config.mode == "gt" else "pred"
    remap_source = config.mode == "gt" or args.remap_pred
    logger.info(
        f"fuse ({config.mode}): {manifest.scan_count} scans, threshold mode {config.threshold_mode}"
    )

    thresholds = None
    if config.mode == "pred" and config.threshold_mode == "max-f1":
        detections, annotations = [], []
        for sequence in manifest.sequences:
            for scan in sequence.scans:
                detections.append(load_boxes(_require(manifest, scan, "boxes")))
                annotations.append(load_boxes(_require(manifest, scan, "gt_boxes")))
        thresholds = select_max_f1_thresholds(detections, annotations, config.max_f1_distance)
        logger.info(f"max-F1 thresholds: {thresholds}")

    noise_pairs = []
    sequences = []
    for sequence in manifest.sequences:
        registry = TrackIdRegistry()
        scans = []
        for scan in sequence.scans:
            semantic = load_labels(_require(manifest, scan, source_field))
            if remap_source:
                semantic = remap(semantic, class_map, source=scan.token)
            points = load_points(_require(manifest, scan, "points"))
            boxes = load_boxes(_require(manifest, scan, fusion_box_field(scan, config.mode)))
            if config.mode == "gt":
                fused = fuse_gt(semantic, points, boxes, class_map, registry)
                noise_pairs.append((semantic, fused))
            else:
                kept = select_boxes(boxes, config, thresholds)
                if len(kept) < len(boxes):
                    logger.debug(f"Scan {scan.token}: {len(boxes) - len(kept)} boxes below threshold")
                fused = fuse_pred(semantic, points, kept, class_map, registry)

            relative = Path(sequence.sequence_id) / f"{scan.token}{LABEL_FILE_SUFFIX}"
            save_labels(out_dir / relative, fused)
            scans.append({"token": scan.token, source_field: relative.as_posix()})
        sequences.append({"sequence_id": sequence.sequence_id, "scans": scans})

    save_class_map(out_dir / "classmap_eval.yaml", class_map.identity_over_eval())
    manifest_path = out_dir / "manifest.yaml"
    dump_structured(manifest_path, {"sequences": sequences})
    if config.mode == "gt":
        write_table_csv(overlap_noise_statistics(noise_pairs, class_map), out_dir / "overlap_noise.csv")
    logger.info(f"Fused labels written to {out_dir}")
    return manifest_path


def cmd_gen(args: argparse.Namespace) -> Path:
    """
    Write a synthetic dataset from a scenario spec file or a case preset.

    Returns:
        Path of the written manifest
    """
    if args.case:
        pairs = CASES[args.case](background_points=args.background_points)
    else:
        document = load_structured(args.spec)
        specs = document if isinstance(document, list) else [document]
        pairs = [generate(ScenarioSpec(**spec)) for spec in specs]
    return write_scenario(pairs, args.out_dir)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="LiDAR panoptic segmentation and tracking evaluation"
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )
    parser.add_argument("--log-file", type=str, default=None, help="Also log to this file")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in ("semantic", "panoptic", "tracking"):
        sub = subparsers.add_parser(name, help=f"{name} evaluation")
        sub.add_argument("--manifest", type=str, required=True, help="Manifest (YAML or JSON)")
        sub.add_argument("--classmap", type=str, required=True, help="Class map (YAML or JSON)")
        sub.add_argument("--output", type=str, default="report.json", help="Report JSON path")
        sub.add_argument("--table-csv", type=str, default=None, help="Per-class CSV path")
        sub.add_argument(
            "--min-points",
            type=int,
            default=15,
            help="Keep instances with strictly more points than this",
        )
        sub.add_argument(
            "--apply-filter-to",
            type=str,
            default="both",
            choices=["gt", "pred", "both"],
            help="Which side the point filter applies to",
        )
        sub.add_argument(
            "--ids-gap-mode",
            type=str,
            default="skip",
            choices=["skip", "count"],
            help="Whether a gap in a ground-truth track counts as an ID switch",
        )
        sub.add_argument(
            "--track-mean",
            type=str,
            default="global",
            choices=["global", "per-sequence"],
            help="How per-track TQ values are averaged",
        )
        sub.add_argument(
            "--remap-pred",
            action="store_true",
            help="Predictions are stored in raw class ids",
        )
        sub.add_argument(
            "--parallelism", type=int, default=None, help="Worker processes"
        )

    fuse = subparsers.add_parser("fuse", help="Build panoptic labels from semantics and boxes")
    fuse.add_argument("--manifest", type=str, required=True, help="Manifest (YAML or JSON)")
    fuse.add_argument("--classmap", type=str, required=True, help="Class map (YAML or JSON)")
    fuse.add_argument("--mode", type=str, required=True, choices=["gt", "pred"])
    fuse.add_argument("--out-dir", type=str, required=True, help="Output directory")
    fuse.add_argument(
        "--score-threshold",
        type=float,
        default=0.0,
        help="Drop detections scoring below this (0 keeps all boxes)",
    )
    fuse.add_argument(
        "--threshold-mode",
        type=str,
        default=None,
        choices=["none", "fixed", "per-class", "max-f1"],
        help="Confidence filter; fixed when a score threshold is given, none otherwise",
    )
    fuse.add_argument(
        "--class-thresholds",
        type=str,
        default=None,
        help="Per-class thresholds, e.g. 0=0.3,1=0.5",
    )
    fuse.add_argument(
        "--remap-pred",
        action="store_true",
        help="Semantic predictions are stored in raw class ids",
    )

    gen = subparsers.add_parser("gen", help="Write a synthetic scenario dataset")
    source = gen.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", type=str, help="Scenario spec file (YAML or JSON)")
    source.add_argument("--case", type=str, choices=sorted(CASES), help="Tracking case preset")
    gen.add_argument("--out-dir", type=str, required=True, help="Output directory")
    gen.add_argument(
        "--background-points",
        type=int,
        default=10,
        help="Stuff points per scan for case presets",
    )
    return parser


def setup_logging(level: str, log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse the command line and run one subcommand.

    Args:
        argv: Arguments without the program name; sys.argv when omitted

    Returns:
        Process exit status
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    setup_logging(args.log_level, args.log_file)

    try:
        if args.command in ("semantic", "panoptic", "tracking"):
            commands = {"semantic": cmd_semantic, "panoptic": cmd_panoptic, "tracking": cmd_tracking}
            report = commands[args.command](args)
            write_report(report, args.output)
            if args.table_csv:
                write_table_csv(per_class_table(report), args.table_csv)
            print(render_report(report))
        elif args.command == "fuse":
            cmd_fuse(args)
        else:
            cmd_gen(args)
    except (PanopticEvalError, ValidationError, ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1

    logger.info(f"{args.command} finished")
    return 0


if __name__ == "__main__":
    sys.exit(main())
