"""
sdsen command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure or a failed
property check.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .. import __version__
from ..autograd import Tensor
from ..checks import SUITES, run_suite
from ..data import gen_dataset, load_image, load_manifest, make_streak_spec, save_image
from ..errors import ConfigurationError, DataError, SdsenError
from ..metrics.evaluate import evaluate, write_report
from ..models import build_sdsen, forward_multistage, model_from_checkpoint
from ..seeding import derive_seed
from ..training import train
from .run_config import describe_keys, load_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        message = f"expected comma-separated numbers, got {text!r}"
        raise argparse.ArgumentTypeError(message) from None


def configure_logging() -> None:
    name = os.getenv("SDSEN_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


# -- commands -------------------------------------------------------------------------


def cmd_gen_data(args: argparse.Namespace) -> int:
    streaks = {"motion_blur": args.motion_blur}
    if args.angles is not None:
        streaks["angles"] = args.angles
    spec = make_streak_spec(**streaks)
    if args.size < 1:
        raise ConfigurationError(f"--size must be positive, got {args.size}")
    backgrounds = []
    if args.backgrounds is not None:
        files = sorted(Path(args.backgrounds).glob("*.png"))
        if not files:
            raise DataError(f"no PNG backgrounds in {args.backgrounds}")
        backgrounds = [load_image(f) for f in files]

    manifest = gen_dataset(
        args.n,
        args.size,
        spec,
        args.seed,
        args.out,
        val=args.val,
        test=args.test,
        backgrounds=backgrounds,
    )
    print(f"✅ {len(manifest.entries)} pairs written, manifest at {manifest.path}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config)
    manifest = load_manifest(cfg.paths.manifest)
    pairs = manifest.load_pairs("train")
    if not pairs:
        raise DataError(f"no train pairs in {manifest.path}")
    val_pairs = manifest.load_pairs("val") if cfg.train.val_every else []

    checkpoint = Path(args.out)
    log_path = args.log or cfg.paths.log or checkpoint.with_suffix(".log")
    model = build_sdsen(cfg.refine, seed=derive_seed(cfg.train.seed, "init"))
    name = cfg.paths.variant or "custom"
    print(f"🔧 {name} model, {model.count_params()} parameters, {cfg.refine.stages} stage(s)")

    result = train(
        model, pairs, cfg.train, checkpoint, log_path, val_pairs, model_config=cfg.refine
    )
    if result.records:
        steps = len(result.records)
        print(f"📈 loss {result.initial_loss:.6f} -> {result.final_loss:.6f} over {steps} steps")
    for score in result.val_psnr[-1:]:
        print(f"📈 validation PSNR {score:.3f} dB")
    print(f"✅ checkpoint written to {result.checkpoint}")
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    model = model_from_checkpoint(args.ckpt, args.stages)
    image = load_image(args.input)
    outputs = forward_multistage(model, Tensor(image[None]))
    final = outputs[-1]
    save_image(final.background.data[0], args.output)
    print(f"✅ restored image written to {args.output} ({len(outputs)} stage(s))")
    if args.rain_out is not None:
        save_image(final.rain.data[0], args.rain_out)
        print(f"✅ rain layer written to {args.rain_out}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    model = model_from_checkpoint(args.ckpt, args.stages)
    manifest = load_manifest(args.manifest)
    report = evaluate(model, manifest, args.split, model_id=str(args.ckpt))
    path = args.report or Path(args.ckpt).with_suffix(f".{args.split}.tsv")
    write_report(report, path)
    print(
        f"📈 {args.split}: PSNR {report.mean_psnr:.3f} dB, SSIM {report.mean_ssim:.4f} "
        f"over {len(report.scores)} images"
    )
    print(f"✅ report written to {path}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    results = run_suite(args.suite)
    for result in results:
        print(result.to_line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"❌ {len(failed)} of {len(results)} properties failed")
        return EXIT_FAILURE
    print(f"✅ all {len(results)} properties hold")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------


def build_parser() -> CliParser:
    parser = CliParser(prog="sdsen", description="Symmetry-enhanced deraining toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("gen-data", help="write a synthetic rain dataset")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--n", type=int, default=8, help="number of pairs (default 8)")
    p.add_argument("--size", type=int, default=64, help="image side in pixels (default 64)")
    p.add_argument("--seed", type=int, default=0, help="data seed (default 0)")
    p.add_argument("--angles", type=_float_list, help="fixed streak angles, degrees from vertical")
    p.add_argument("--val", type=int, default=0, help="pairs tagged val (default 0)")
    p.add_argument("--test", type=int, default=0, help="pairs tagged test (default 0)")
    p.add_argument("--motion-blur", type=int, default=0, help="directional blur length, 0 = off")
    p.add_argument("--backgrounds", type=Path, help="directory of PNG backgrounds to use instead")
    p.set_defaults(handler=cmd_gen_data)

    p = commands.add_parser(
        "train",
        help="train a model from a run config",
        epilog="run config keys (key=default):\n" + describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--config", required=True, type=Path, help="flat key=value run config")
    p.add_argument("--out", required=True, type=Path, help="checkpoint path")
    p.add_argument("--log", type=Path, help="training log path (default <checkpoint>.log)")
    p.set_defaults(handler=cmd_train)

    p = commands.add_parser("infer", help="derain one image")
    p.add_argument("--ckpt", required=True, type=Path)
    p.add_argument("--in", dest="input", required=True, type=Path)
    p.add_argument("--out", dest="output", required=True, type=Path)
    p.add_argument("--stages", type=int, help="stages to run (default: as trained)")
    p.add_argument("--rain-out", type=Path, help="also write the predicted rain layer")
    p.set_defaults(handler=cmd_infer)

    p = commands.add_parser("eval", help="PSNR/SSIM over a manifest split")
    p.add_argument("--ckpt", required=True, type=Path)
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--stages", type=int, help="stages to run (default: as trained)")
    p.add_argument("--report", type=Path, help="report path (default <checkpoint>.<split>.tsv)")
    p.set_defaults(handler=cmd_eval)

    p = commands.add_parser("check", help="run a numeric property suite")
    p.add_argument("--suite", required=True, choices=[*SUITES, "all"])
    p.set_defaults(handler=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging()
    try:
        return args.handler(args)
    except ConfigurationError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SdsenError, OSError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
