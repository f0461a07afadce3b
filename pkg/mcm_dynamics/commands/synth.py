"""
``synth``: write a synthetic two-class dataset.
"""

import io

from mcm_dynamics.commands.common import add_shared_flags, emit
from mcm_dynamics.config import settings
from mcm_dynamics.services.data import SYNTHETIC_KINDS, make_synthetic, write_csv

DEFAULT_SAMPLES = 40


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="Generate a synthetic dataset as CSV")
    add_shared_flags(parser)
    parser.add_argument("--kind", choices=SYNTHETIC_KINDS, default="separable-blobs", help="Generator")
    parser.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, metavar="N", help="Sample count")
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    seed = args.seed if args.seed is not None else settings.random_seed
    dataset = make_synthetic(args.kind, args.samples, seed)
    buffer = io.StringIO()
    write_csv(dataset, buffer)
    emit(buffer.getvalue(), args.out)
    return 0
