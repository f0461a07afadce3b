"""
``train``: fit a classifier and save it.
"""

import logging

from mcm_dynamics.commands.common import (
    add_shared_flags,
    dynamics_config,
    kernel_spec,
    load_dataset,
    log_slow_defaults_hint,
    scaling_kind,
)
from mcm_dynamics.exceptions import NON_CONVERGENCE_EXIT_CODE
from mcm_dynamics.services.data import scale_dataset
from mcm_dynamics.services.mcm import save_model, support_vectors, training_accuracy
from mcm_dynamics.services.training import training_service

logger = logging.getLogger(__name__)

DEFAULT_MODEL_PATH = "model.json"


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train a classifier and write the model file")
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    dataset = scale_dataset(load_dataset(args), scaling_kind(args))
    config, k = dynamics_config(args)
    log_slow_defaults_hint(args, k)
    outcome = training_service.train(
        dataset,
        C=args.C,
        kernel=kernel_spec(args, dataset),
        backend=args.backend,
        dynamics_config=config,
        k=k,
    )
    model = outcome.model
    save_model(model, args.out or DEFAULT_MODEL_PATH)

    sv_count = support_vectors(model, dataset=dataset).count
    accuracy = training_accuracy(model, dataset)
    print(
        f"h={model.h:.10g} objective={outcome.objective:.10g} support_vectors={sv_count} "
        f"converged={'yes' if outcome.converged else 'no'} training_accuracy={accuracy:.2f}%"
    )
    if not outcome.converged:
        logger.warning("Integration stopped at max_time before reaching equilibrium")
        return NON_CONVERGENCE_EXIT_CODE
    return 0
