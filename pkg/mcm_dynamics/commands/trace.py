"""
``trace``: record the trajectory of the training dynamics as CSV.
"""

import io

from mcm_dynamics.commands.common import (
    add_shared_flags,
    dynamics_config,
    emit,
    kernel_spec,
    load_dataset,
    scaling_kind,
)
from mcm_dynamics.exceptions import NON_CONVERGENCE_EXIT_CODE, InvalidParameterError
from mcm_dynamics.services.data import scale_dataset
from mcm_dynamics.services.dynamics import export_trace_csv
from mcm_dynamics.services.training import training_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("trace", help="Export the convergence trace of training")
    add_shared_flags(parser)
    parser.add_argument("--trace-stride", type=int, metavar="N", help="Record every N-th step")
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    if args.backend != "dynamics":
        raise InvalidParameterError("trace needs the dynamics backend")
    dataset = scale_dataset(load_dataset(args), scaling_kind(args))
    config, k = dynamics_config(args)
    outcome = training_service.train(
        dataset,
        C=args.C,
        kernel=kernel_spec(args, dataset),
        dynamics_config=config,
        k=k,
    )
    buffer = io.StringIO()
    export_trace_csv(outcome.integration.trace, buffer)
    emit(buffer.getvalue(), args.out)
    return 0 if outcome.converged else NON_CONVERGENCE_EXIT_CODE
