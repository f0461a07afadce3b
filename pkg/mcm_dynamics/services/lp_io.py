"""
Plain-text LP format.

    n_vars m_cons sense
    c_1 ... c_n
    G_11 ... G_1n | p_1
    ...
    G_m1 ... G_mn | p_m
    sign_1 ... sign_n

Blank lines and lines starting with ``#`` are ignored. Sign tokens are
``nonnegative`` / ``free`` (or ``+`` / ``f``).
"""

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from mcm_dynamics.exceptions import DataIOError, LPFormatError
from mcm_dynamics.schemas.lp import Sense, StandardFormLP, VariableSign

SENSE_TOKENS = {
    "maximize": Sense.MAXIMIZE,
    "max": Sense.MAXIMIZE,
    "minimize": Sense.MINIMIZE,
    "min": Sense.MINIMIZE,
}

SIGN_TOKENS = {
    "nonnegative": VariableSign.NONNEGATIVE,
    "+": VariableSign.NONNEGATIVE,
    "free": VariableSign.FREE,
    "f": VariableSign.FREE,
}


def _number(value: float) -> str:
    return f"{value:.17g}"


def format_lp(lp: StandardFormLP) -> str:
    """Render ``lp`` in the plain-text format."""
    lines = [f"{lp.n_vars} {lp.m_cons} {lp.sense.value}"]
    lines.append(" ".join(_number(v) for v in lp.objective))
    for row, rhs in zip(lp.constraint_matrix, lp.rhs):
        lines.append(" ".join(_number(v) for v in row) + f" | {_number(rhs)}")
    lines.append(" ".join(sign.value for sign in lp.sign_mask))
    return "\n".join(lines) + "\n"


def _floats(tokens: List[str], line_no: int) -> List[float]:
    values = []
    for position, token in enumerate(tokens):
        try:
            values.append(float(token))
        except ValueError:
            raise LPFormatError(
                f"Line {line_no}: '{token}' is not a number",
                row=line_no,
                column=str(position + 1),
            )
    return values


def parse_lp(text: str) -> StandardFormLP:
    """Parse the plain-text format into a ``StandardFormLP``."""
    lines: List[Tuple[int, str]] = [
        (number, line.strip())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines:
        raise LPFormatError("Empty LP file")

    header_no, header = lines[0]
    parts = header.split()
    if len(parts) != 3:
        raise LPFormatError(f"Line {header_no}: expected 'n_vars m_cons sense'", row=header_no)
    try:
        n_vars, m_cons = int(parts[0]), int(parts[1])
        sense = SENSE_TOKENS[parts[2].lower()]
    except (KeyError, ValueError):
        raise LPFormatError(f"Line {header_no}: bad header '{header}'", row=header_no)

    expected = 1 + 1 + m_cons + 1
    if len(lines) != expected:
        raise LPFormatError(f"Expected {expected} non-empty lines, found {len(lines)}")

    objective_no, objective_line = lines[1]
    objective = _floats(objective_line.split(), objective_no)
    if len(objective) != n_vars:
        raise LPFormatError(
            f"Line {objective_no}: objective has {len(objective)} entries, expected {n_vars}",
            row=objective_no,
        )

    matrix, rhs = [], []
    for line_no, line in lines[2:2 + m_cons]:
        if line.count("|") != 1:
            raise LPFormatError(f"Line {line_no}: constraint rows read 'G ... | p'", row=line_no)
        left, right = line.split("|")
        row = _floats(left.split(), line_no)
        bound = _floats(right.split(), line_no)
        if len(row) != n_vars or len(bound) != 1:
            raise LPFormatError(
                f"Line {line_no}: expected {n_vars} coefficients and one bound",
                row=line_no,
            )
        matrix.append(row)
        rhs.append(bound[0])

    sign_no, sign_line = lines[-1]
    tokens = sign_line.split()
    if len(tokens) != n_vars:
        raise LPFormatError(f"Line {sign_no}: expected {n_vars} sign tokens", row=sign_no)
    try:
        sign_mask = tuple(SIGN_TOKENS[token.lower()] for token in tokens)
    except KeyError as exc:
        raise LPFormatError(f"Line {sign_no}: unknown sign token {exc}", row=sign_no)

    return StandardFormLP(
        objective=objective,
        constraint_matrix=np.array(matrix, dtype=float).reshape(m_cons, n_vars),
        rhs=rhs,
        sense=sense,
        sign_mask=sign_mask,
    )


def read_lp(path: Union[str, Path]) -> StandardFormLP:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"Cannot read LP file {path}: {exc}")
    return parse_lp(text)


def write_lp(lp: StandardFormLP, path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(format_lp(lp), encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"Cannot write LP file {path}: {exc}")
