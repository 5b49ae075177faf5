import argparse
import logging
import sys
from datetime import datetime
from typing import List, Optional

logger = logging.getLogger(__name__)

MODEL_FLAGS_HELP = "Binary encoder parameter file written by `train`."


def _add_set(parser: argparse.ArgumentParser, flag: str = "--set", dest: str = "set", what: str = "config"):
    parser.add_argument(
        flag,
        dest=dest,
        type=str,
        nargs="*",
        default=[],
        help=f'Dotlist overrides of {what} fields, e.g. {flag} lr=0.001 epochs=10.'
    )


def _add_region_args(parser: argparse.ArgumentParser, split: bool = True, split_default: str = "test"):
    parser.add_argument("--segs", type=str, required=True, help="Segment directory.")
    parser.add_argument("--montage", type=str, default="seed_v1",
                        help="Builtin montage name or montage JSON file. default: seed_v1")
    parser.add_argument("--region", type=str, default="all", help="Region key the model was trained on. "
                                                                  "default: all")
    parser.add_argument("--labels", type=str, default="video", choices=["video", "emotion"],
                        help="Label column to evaluate against. default: video")
    if split:
        parser.add_argument("--split", type=str, default=split_default, choices=["train", "val", "test", "all"],
                            help=f'Split part to use. default: {split_default}')


def _add_train_args(parser: argparse.ArgumentParser):
    parser.add_argument("--segs", type=str, required=True, help="Segment directory (already split).")
    parser.add_argument("--montage", type=str, default="seed_v1",
                        help="Builtin montage name or montage JSON file. default: seed_v1")
    parser.add_argument("--labels", type=str, default=None, choices=["video", "emotion"],
                        help="Label column to train on (overrides label_mode of the train config).")
    parser.add_argument("--config", type=str, default=None, help="Train config (JSON or YAML).")
    parser.add_argument("--encoder-config", dest="encoder_config", type=str, default=None,
                        help="Encoder config (JSON or YAML).")
    parser.add_argument("--seed", type=int, default=None, help="Overrides the train and encoder seeds.")
    _add_set(parser, what="train config")
    _add_set(parser, flag="--encoder-set", dest="encoder_set", what="encoder config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eeg-probe",
        description="Probe what EEG encoders learn: preprocessing, triplet training, clustering and region / "
                    "timestep ablations, conditioning vectors and video metrics."
    )
    parser.add_argument(
        "--log_level", "-l",
        type=str,
        default="INFO",
        help="Log level for the console logger. default: INFO"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("synth", help="Generate a synthetic dataset with planted structure.")
    p.add_argument("--spec", type=str, default=None, help="SynthSpec as JSON or YAML file.")
    p.add_argument("--out", type=str, required=True, help="Output directory.")
    p.add_argument("--seed", type=int, default=None, help="Overrides the spec seed.")
    _add_set(p, what="spec")

    p = commands.add_parser("preprocess", help="Preprocess a recording pack into labeled segments.")
    p.add_argument("--in", dest="input", type=str, required=True, help="Recording pack directory.")
    p.add_argument("--config", type=str, default=None, help="Preprocess config (JSON or YAML).")
    p.add_argument("--montage", type=str, default="seed_v1", help="Montage used for bad channel interpolation.")
    p.add_argument("--out", type=str, required=True, help="Output segment directory.")
    p.add_argument("--jobs", type=int, default=1, help="Recordings processed in parallel. default: 1")
    _add_set(p)

    p = commands.add_parser("split", help="Assign train / val / test tags.")
    p.add_argument("--segs", type=str, required=True, help="Segment directory.")
    p.add_argument("--mode", type=str, default="within", choices=["within", "leave-two", "kfold"])
    p.add_argument("--ratios", type=str, default="0.8,0.1,0.1", help="Within-subject ratios. default: 0.8,0.1,0.1")
    p.add_argument("--test-subjects", dest="test_subjects", type=str, default=None,
                   help="Two subject ids a,b for mode leave-two.")
    p.add_argument("--n-folds", dest="n_folds", type=int, default=5)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, required=True, help="Output segment directory.")

    p = commands.add_parser("train", help="Train the encoder with triplet loss.")
    _add_train_args(p)
    p.add_argument("--region", type=str, default="all", help="Montage region to train on. default: all")
    p.add_argument("--out", type=str, required=True, help="Output model file.")
    p.add_argument("--history", type=str, default=None, help="Optional CSV file for the training history.")

    p = commands.add_parser("eval", help="Evaluate a trained encoder.")
    evals = p.add_subparsers(dest="eval_command", required=True)
    for name, help_text in [("kmeans", "k-means clustering accuracy."),
                            ("probe", "Linear probe trained on the train split, tested on the test split."),
                            ("features", "Cluster by video, emotion and subject labels.")]:
        e = evals.add_parser(name, help=help_text)
        e.add_argument("--model", type=str, required=True, help=MODEL_FLAGS_HELP)
        _add_region_args(e, split=name != "probe")
        e.add_argument("--seed", type=int, default=0)
        e.add_argument("--out", type=str, default=None, help="Result JSON (default: standard output).")
        if name == "probe":
            e.add_argument("--epochs", type=int, default=200)
            e.add_argument("--lr", type=float, default=1e-2)
        else:
            e.add_argument("--restarts", type=int, default=10)

    p = commands.add_parser("ablate", help="Region and timestep ablations.")
    ablations = p.add_subparsers(dest="ablate_command", required=True)
    a = ablations.add_parser("regions", help="Train and evaluate one encoder per montage region.")
    _add_train_args(a)
    a.add_argument("--regions", type=str, default=None, help="Comma separated region keys (default: all keys).")
    a.add_argument("--regime", type=str, default="all_subject", choices=["all_subject", "leave_two"])
    a.add_argument("--jobs", type=int, default=1, help="Regions trained in parallel. default: 1")
    a.add_argument("--out", type=str, required=True, help="Report CSV (a JSON is written next to it).")
    a = ablations.add_parser("timesteps", help="Mask time windows of the test segments.")
    a.add_argument("--model", type=str, required=True, help=MODEL_FLAGS_HELP)
    _add_region_args(a)
    a.add_argument("--windows", type=str, required=True, help="Comma separated t1:t2 windows.")
    a.add_argument("--regime", type=str, default="all_subject", choices=["all_subject", "leave_two"])
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--jobs", type=int, default=1, help="Windows evaluated in parallel. default: 1")
    a.add_argument("--out", type=str, required=True, help="Report CSV (a JSON is written next to it).")

    p = commands.add_parser("embed", help="Export embeddings as CSV.")
    p.add_argument("--model", type=str, required=True, help=MODEL_FLAGS_HELP)
    _add_region_args(p, split_default="all")
    p.add_argument("--out", type=str, required=True, help="Output CSV.")

    p = commands.add_parser("condition", help="Build frame conditioning vectors from embeddings.")
    p.add_argument("--emb", type=str, required=True, help="Embedding CSV written by `embed`.")
    p.add_argument("--frames", type=int, default=8, help="Frames per clip. default: 8")
    p.add_argument("--enc-dim", dest="enc_dim", type=int, default=10, help="Positional encoding dimension. "
                                                                            "default: 10")
    p.add_argument("--no-position", dest="no_position", action="store_true",
                   help="Omit the positional encoding of the frame index.")
    p.add_argument("--out", type=str, required=True, help="Output CSV.")

    p = commands.add_parser("metrics", help="PSNR, SSIM and OFS of two frame directories.")
    p.add_argument("--gt", type=str, required=True, help="Directory of ground truth frame_%%04d.pgm files.")
    p.add_argument("--gen", type=str, required=True, help="Directory of generated frame_%%04d.pgm files.")
    p.add_argument("--hs-alpha", dest="hs_alpha", type=float, default=1.0)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--keyframes", type=int, default=0, help="Also select this many keyframes per clip.")
    p.add_argument("--out", type=str, default=None, help="Result JSON (default: standard output).")

    p = commands.add_parser("run", help="Execute a cached stage pipeline defined in a python module.")
    p.add_argument(
        "config",
        type=str,
        help="Name of the module that has to contain a pipeline config dict, e.g. eeg_probe.pipelines.planted."
    )
    p.add_argument(
        "--config_object", "-o",
        type=str,
        help="Name of the pipeline dict inside the module. default: config",
        default="config"
    )
    p.add_argument(
        "--persist_cache", "-p",
        action='store_true',
        help="Load stage results from --cache_dir before the run and dump new ones after it.",
    )
    p.add_argument(
        "--cache_dir", "-c",
        type=str,
        help="Directory of persisted stage results (used with --persist_cache). default: cache",
        default="cache"
    )
    p.add_argument(
        "--cache_verbose", "-v",
        help="Log every cache lookup and insertion.",
        action="store_true"
    )
    p.add_argument(
        "--display_config", "-d",
        action='store_true',
        help="Log the pipeline config as YAML before running it.",
    )
    p.add_argument(
        "--exclude_persisting_targets", "-e",
        type=str,
        default="",
        help="Comma separated list of dotted stage targets to exclude from cache persistence. default: empty string"
    )
    p.add_argument(
        "--time_min_persist", "-t",
        type=int,
        default=1000,
        help="Minimum execution time in milliseconds a stage has to take to persist its result. default: 1000"
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)

    # initialize here to set log level also for imported modules
    logging.basicConfig(level=logging.getLevelName(args.log_level))

    from eeg_probe.commands import COMMANDS
    from eeg_probe.errors import ProbeError
    from eeg_probe.manifest import RunManifest, write_manifest

    manifest = RunManifest(subcommand=args.command, argv=argv)
    t_start = datetime.now()
    try:
        output = COMMANDS[args.command](args, manifest)
        manifest.wall_clock_s = (datetime.now() - t_start).total_seconds()
        if output is not None:
            write_manifest(manifest, output)
    except ProbeError as e:
        message = " ".join(str(e).split())
        print(f'error={type(e).__name__} code={e.exit_code} message={message}', file=sys.stderr)
        return e.exit_code
    except OSError as e:
        message = " ".join(str(e).split())
        print(f'error={type(e).__name__} code=3 message={message}', file=sys.stderr)
        return 3
    logger.info(f'{args.command} done. total execution time: {datetime.now() - t_start}')
    return 0


if __name__ == "__main__":
    sys.exit(main())
