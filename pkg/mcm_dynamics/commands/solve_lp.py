"""
``solve-lp``: solve a plain-text LP with either backend.
"""

import json
import logging

import numpy as np

from mcm_dynamics.commands.common import add_shared_flags, dynamics_config, emit
from mcm_dynamics.exceptions import CROSS_CHECK_MISMATCH_EXIT_CODE, NON_CONVERGENCE_EXIT_CODE, InvalidParameterError
from mcm_dynamics.services.dynamics import integrate
from mcm_dynamics.services.glop import solve_glop
from mcm_dynamics.services.lp_core import solve_reference
from mcm_dynamics.services.lp_io import read_lp
from mcm_dynamics.services.stability import recommend_k

logger = logging.getLogger(__name__)

CROSS_CHECK_RTOL = {"oracle": 1e-6, "dynamics": 1e-3}


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve-lp", help="Solve an LP file and print the optimum")
    add_shared_flags(parser)
    parser.add_argument("--cross-check", action="store_true", help="Compare the value against OR-Tools GLOP")
    parser.set_defaults(handler=handle)


def _vector(values) -> str:
    return " ".join(f"{value:.12g}" for value in values)


def handle(args) -> int:
    if not args.data:
        raise InvalidParameterError("--data is required")
    lp = read_lp(args.data)

    if args.backend == "oracle":
        primal, dual, value = solve_reference(lp)
        converged = True
    else:
        config, k = dynamics_config(args)
        if k == "auto":
            config = config.model_copy(update={"k": recommend_k(lp).k})
        result = integrate(lp, config)
        primal, dual = result.state.X, result.state.Z
        value = lp.objective_value(primal)
        converged = result.converged

    document = {
        "status": "optimal" if converged else "not-converged",
        "value": float(value),
        "variables": list(lp.variable_names),
        "primal": [float(v) for v in primal],
        "dual": [float(v) for v in dual],
    }
    mismatch = False
    if args.cross_check:
        _, glop_value = solve_glop(lp)
        tolerance = CROSS_CHECK_RTOL[args.backend] * (1.0 + abs(glop_value))
        mismatch = not np.isclose(value, glop_value, rtol=0.0, atol=tolerance)
        document["glop_value"] = float(glop_value)
        document["cross_check"] = "mismatch" if mismatch else "ok"
        if mismatch:
            logger.warning(f"Backend value {value:.12g} differs from GLOP value {glop_value:.12g}")

    if args.format == "json":
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    else:
        lines = [
            f"status {document['status']}",
            f"value {value:.12g}",
            f"x {_vector(primal)}",
            f"y {_vector(dual)}",
        ]
        if args.cross_check:
            lines.append(f"glop_value {document['glop_value']:.12g}")
            lines.append(f"cross_check {document['cross_check']}")
        text = "\n".join(lines) + "\n"
    emit(text, args.out)

    if not converged:
        return NON_CONVERGENCE_EXIT_CODE
    return CROSS_CHECK_MISMATCH_EXIT_CODE if mismatch else 0
