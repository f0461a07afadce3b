"""
``predict``: label new points with a saved model.
"""

import io
import csv

from mcm_dynamics.commands.common import add_shared_flags, emit
from mcm_dynamics.exceptions import InvalidParameterError
from mcm_dynamics.services.data import apply_scaling, load_feature_matrix
from mcm_dynamics.services.mcm import load_model, predict_batch


def register(subparsers) -> None:
    parser = subparsers.add_parser("predict", help="Predict labels for a feature file")
    add_shared_flags(parser)
    parser.add_argument("--model", metavar="PATH", help="Model file written by train")
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    if not args.model:
        raise InvalidParameterError("--model is required")
    if not args.data:
        raise InvalidParameterError("--data is required")
    model = load_model(args.model)
    features = load_feature_matrix(args.data, drop_column=args.label_col)
    if model.scaling is not None:
        features = apply_scaling(model.scaling, features)
    labels, scores = predict_batch(model, features)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["label", "score"])
    for label, score in zip(labels, scores):
        writer.writerow([int(label), f"{score:.17g}"])
    emit(buffer.getvalue(), args.out)
    return 0
