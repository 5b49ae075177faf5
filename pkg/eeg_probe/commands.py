"""
Implementations of the CLI subcommands. Each command reads its inputs, writes its outputs, fills
the RunManifest and returns the path the manifest is placed next to (None for no manifest).
"""
import importlib
import json
import logging
import sys
from datetime import datetime, timedelta
from functools import partial
from os import path
from typing import Dict, List, Optional

import numpy as np
from omegaconf import OmegaConf

from eeg_probe.conditioning import conditioning_table, export_conditioning
from eeg_probe.config import config_to_dict, load_config
from eeg_probe.encoder import EncoderConfig, embed, load_params, save_params
from eeg_probe.errors import DimensionError, UsageError
from eeg_probe.evaluation import cluster_accuracy, export_embeddings, feature_space_probe, kmeans, linear_probe, \
    parse_window, read_embeddings, region_ablation, timestep_ablation
from eeg_probe.execution import DumpableStageCache, StageCache, run_pipeline
from eeg_probe.execution.caching import exclude_target_time_none_or_lesser_then, exclude_targets_constraint
from eeg_probe.manifest import RunManifest
from eeg_probe.metric_learning import TrainConfig, train
from eeg_probe.montage import load_montage, select_region
from eeg_probe.preprocess import PreprocessConfig, preprocess_pack, split_kfold, split_leave_two, split_within
from eeg_probe.signal_io import SegmentSet, SynthSpec, read_pack, read_segments, synth_dataset, write_pack, \
    write_segments
from eeg_probe.video_metrics import compare_clips, read_clip, select_keyframes

logger = logging.getLogger(__name__)


def _overrides(args, seed_key: Optional[str] = "seed") -> List[str]:
    overrides = list(getattr(args, "set", None) or [])
    if seed_key is not None and getattr(args, "seed", None) is not None:
        overrides.append(f'{seed_key}={args.seed}')
    return overrides


def _check_not_input(output: str, *inputs: str):
    for inp in inputs:
        if inp is not None and path.abspath(output) == path.abspath(inp):
            raise UsageError(f'output {output} would overwrite the input {inp}')


def _write_json(fn: Optional[str], content: Dict):
    text = json.dumps(content, indent=2)
    if fn is None:
        sys.stdout.write(text + "\n")
        return
    with open(fn, "w", encoding="utf-8") as f:
        f.write(text + "\n")
    logger.info(f'wrote: {fn}')


def _region_part(args, in_channels: int, split: Optional[str] = None) -> SegmentSet:
    segments = select_region(read_segments(args.segs), load_montage(args.montage), args.region)
    if segments.n_channels != in_channels:
        raise DimensionError(f'region "{args.region}" has {segments.n_channels} channels, the model expects '
                             f'{in_channels}')
    split = args.split if split is None else split
    return segments if split == "all" else segments.split_part(split)


def cmd_synth(args, manifest: RunManifest) -> str:
    spec = load_config(SynthSpec, args.spec, _overrides(args))
    data = synth_dataset(spec)
    if spec.output == "segments":
        write_segments(data, args.out)
    else:
        write_pack(data, args.out)
    manifest.config = config_to_dict(spec)
    manifest.seeds = {"seed": spec.seed}
    manifest.inputs = {"spec": args.spec}
    manifest.outputs = {"out": args.out}
    return args.out


def cmd_preprocess(args, manifest: RunManifest) -> str:
    _check_not_input(args.out, args.input)
    config = load_config(PreprocessConfig, args.config, _overrides(args, seed_key=None))
    segments = preprocess_pack(read_pack(args.input), config, load_montage(args.montage), n_jobs=args.jobs)
    write_segments(segments, args.out)
    manifest.config = {"preprocess": config_to_dict(config), "montage": args.montage}
    manifest.inputs = {"pack": args.input, "config": args.config}
    manifest.outputs = {"segments": args.out}
    return args.out


def cmd_split(args, manifest: RunManifest) -> str:
    _check_not_input(args.out, args.segs)
    segments = read_segments(args.segs)
    if args.mode == "within":
        ratios = tuple(float(r) for r in args.ratios.split(","))
        result = split_within(segments, ratios, seed=args.seed)
    elif args.mode == "leave-two":
        if not args.test_subjects:
            raise UsageError(f'--test-subjects a,b is required for mode leave-two')
        result = split_leave_two(segments, tuple(int(s) for s in args.test_subjects.split(",")))
    else:
        result = split_kfold(segments, n_folds=args.n_folds, fold=args.fold, seed=args.seed)
    write_segments(result, args.out)
    manifest.config = {"mode": args.mode, "ratios": args.ratios, "test_subjects": args.test_subjects,
                       "n_folds": args.n_folds, "fold": args.fold}
    manifest.seeds = {"seed": args.seed}
    manifest.inputs = {"segments": args.segs}
    manifest.outputs = {"segments": args.out}
    return args.out


def _train_configs(args):
    train_overrides = _overrides(args)
    if args.labels is not None:
        train_overrides.append(f'label_mode={args.labels}')
    train_config = load_config(TrainConfig, args.config, train_overrides)
    encoder_overrides = list(args.encoder_set or [])
    if args.seed is not None:
        encoder_overrides.append(f'seed={args.seed}')
    encoder_config = load_config(EncoderConfig, args.encoder_config, encoder_overrides)
    return train_config, encoder_config


def cmd_train(args, manifest: RunManifest) -> str:
    train_config, encoder_config = _train_configs(args)
    montage = load_montage(args.montage)
    params, history = train(read_segments(args.segs), train_config, encoder_config, montage=montage,
                            region=args.region)
    save_params(args.out, params, history.encoder_config)
    if args.history:
        history.to_csv(args.history)
    manifest.config = {"train": config_to_dict(train_config), "encoder": config_to_dict(history.encoder_config),
                       "region": args.region, "montage": args.montage, "best_epoch": history.best_epoch}
    manifest.seeds = {"train": train_config.seed, "encoder": encoder_config.seed}
    manifest.inputs = {"segments": args.segs}
    manifest.outputs = {"model": args.out, **({"history": args.history} if args.history else {})}
    return args.out


def cmd_eval(args, manifest: RunManifest) -> Optional[str]:
    params, encoder_config = load_params(args.model)
    result = {"region": args.region, "labels": args.labels}
    if args.eval_command == "kmeans":
        part = _region_part(args, encoder_config.in_channels)
        labels = part.labels(args.labels)
        k = len(np.unique(labels))
        assignments = kmeans(embed(part.segments, params, encoder_config), k, restarts=args.restarts,
                             seed=args.seed).assignments
        result.update(split=args.split, n=len(part), k=k, chance=1.0 / k,
                      accuracy=cluster_accuracy(assignments, labels))
    elif args.eval_command == "probe":
        segments = _region_part(args, encoder_config.in_channels, split="all")
        train_part, test_part = segments.split_part("train"), segments.split_part("test")
        accuracy = linear_probe(embed(train_part.segments, params, encoder_config), train_part.labels(args.labels),
                                embed(test_part.segments, params, encoder_config), test_part.labels(args.labels),
                                epochs=args.epochs, lr=args.lr)
        result.update(n_train=len(train_part), n_test=len(test_part), accuracy=accuracy)
    else:
        part = _region_part(args, encoder_config.in_channels)
        probes = feature_space_probe(embed(part.segments, params, encoder_config), part, seed=args.seed,
                                     restarts=args.restarts)
        result.update(split=args.split, n=len(part),
                      clustering={kind: {"accuracy": acc, "chance": chance} for kind, (acc, chance) in probes.items()})
    logger.info(f'{args.eval_command}: {result}')
    _write_json(args.out, result)
    manifest.config = {"eval": args.eval_command, "encoder": config_to_dict(encoder_config), **result}
    manifest.seeds = {"seed": args.seed}
    manifest.inputs = {"model": args.model, "segments": args.segs}
    manifest.outputs = {"result": args.out} if args.out else {}
    return args.out


def cmd_ablate(args, manifest: RunManifest) -> str:
    if args.ablate_command == "regions":
        train_config, encoder_config = _train_configs(args)
        montage = load_montage(args.montage)
        regions = args.regions.split(",") if args.regions else None
        report = region_ablation(read_segments(args.segs), montage, args.regime, train_config, encoder_config,
                                 regions=regions, n_jobs=args.jobs)
        manifest.config = {"train": config_to_dict(train_config), "encoder": config_to_dict(encoder_config),
                           "regions": regions, "regime": args.regime, "montage": args.montage}
        manifest.seeds = {"train": train_config.seed, "encoder": encoder_config.seed}
        manifest.inputs = {"segments": args.segs}
    else:
        params, encoder_config = load_params(args.model)
        windows = [parse_window(w) for w in args.windows.split(",")]
        part = _region_part(args, encoder_config.in_channels)
        report = timestep_ablation(params, encoder_config, part, windows, label_mode=args.labels,
                                   regime=args.regime, seed=args.seed, n_jobs=args.jobs)
        manifest.config = {"windows": args.windows, "region": args.region, "split": args.split,
                           "labels": args.labels, "regime": args.regime}
        manifest.seeds = {"seed": args.seed}
        manifest.inputs = {"model": args.model, "segments": args.segs}
    report.to_csv(args.out)
    json_fn = path.splitext(args.out)[0] + ".json"
    report.to_json(json_fn)
    manifest.outputs = {"csv": args.out, "json": json_fn}
    return args.out


def cmd_embed(args, manifest: RunManifest) -> str:
    params, encoder_config = load_params(args.model)
    part = _region_part(args, encoder_config.in_channels)
    emb = embed(part.segments, params, encoder_config)
    export_embeddings(emb, part.video_label, part.emotion_label, part.subject_id, args.out)
    manifest.config = {"region": args.region, "split": args.split, "montage": args.montage}
    manifest.inputs = {"model": args.model, "segments": args.segs}
    manifest.outputs = {"embeddings": args.out}
    return args.out


def cmd_condition(args, manifest: RunManifest) -> str:
    _check_not_input(args.out, args.emb)
    emb, labels = read_embeddings(args.emb)
    table = conditioning_table(emb, labels["video_label"], total_frames=args.frames, enc_dim=args.enc_dim,
                               subject_ids=labels["subject_id"], with_position=not args.no_position)
    export_conditioning(table, args.out)
    manifest.config = {"frames": args.frames, "enc_dim": args.enc_dim, "with_position": not args.no_position}
    manifest.inputs = {"embeddings": args.emb}
    manifest.outputs = {"conditioning": args.out}
    return args.out


def cmd_metrics(args, manifest: RunManifest) -> Optional[str]:
    gt, gen = read_clip(args.gt), read_clip(args.gen)
    result = compare_clips(gt, gen, hs_alpha=args.hs_alpha, iterations=args.iterations).to_json_dict()
    if args.keyframes:
        result["keyframes_gt"] = select_keyframes(gt, args.keyframes, args.hs_alpha, args.iterations)
        result["keyframes_gen"] = select_keyframes(gen, args.keyframes, args.hs_alpha, args.iterations)
    _write_json(args.out, result)
    manifest.config = {"hs_alpha": args.hs_alpha, "iterations": args.iterations, "keyframes": args.keyframes}
    manifest.inputs = {"gt": args.gt, "gen": args.gen}
    manifest.outputs = {"metrics": args.out} if args.out else {}
    return args.out


def cmd_run(args, manifest: RunManifest) -> None:
    config_module = importlib.import_module(name=args.config)
    config = getattr(config_module, args.config_object)

    if args.display_config:
        logger.info(f'pipeline config:\n{OmegaConf.to_yaml(OmegaConf.create(config))}')

    if args.persist_cache:
        logger.info(f'enable cache persistence (loading from and dumping to cache directory={args.cache_dir})')
        cache = DumpableStageCache(directory=args.cache_dir, verbose=args.cache_verbose)
    else:
        # an in-memory cache still avoids recomputing repeated stages
        cache = StageCache(verbose=args.cache_verbose)

    # dump partial results also if a stage fails
    try:
        t_start = datetime.now()
        run_pipeline(config, cache=cache)
        logger.info(f'pipeline done. total execution time: {datetime.now() - t_start}')
    finally:
        if isinstance(cache, DumpableStageCache):
            cache.dump(constraints=[
                partial(exclude_targets_constraint, exclude_targets=args.exclude_persisting_targets.split(",")),
                partial(exclude_target_time_none_or_lesser_then,
                        min_time=timedelta(milliseconds=args.time_min_persist)),
            ])
    return None


COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "split": cmd_split,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "embed": cmd_embed,
    "condition": cmd_condition,
    "metrics": cmd_metrics,
    "run": cmd_run,
}
