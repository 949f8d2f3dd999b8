"""Flat key=value experiment configuration with section headers.

Grammar (documented in the README): blank lines and ``#`` comments are
ignored; a line ``[experiment]`` opens the single settings section and each
``[cell]`` line opens one experiment cell.  Values are whitespace-separated
tokens.  Example::

    [experiment]
    master_seed = 42
    reps = 200
    bootstrap = 99
    levels = 0.05 0.10

    [cell]
    dist = iid-normal
    regressor = unit-root
    n = 100
    truth = fixed 0 0
    constraint = slope
    hypothesis = sum
    schemes = standard power:0.5
"""

from __future__ import annotations

import numpy as np

from .constrained_ls import BoundaryNull, ConstraintSpec, SimpleNull
from .dgp import (
    Arch1,
    CorrelatedWithRegressor,
    Fixed,
    IidNormal,
    LocalDrift,
    LocalToBoundary,
    NearUnitRoot,
    Stationary,
    UnitRoot,
)
from .montecarlo import CellSpec, ExperimentPlan, slope_constraint, sum_hypothesis
from .wild_bootstrap import SchemeSpec


class ConfigError(ValueError):
    """Raised on malformed configuration text; carries the offending line."""

    def __init__(self, line_no: int | None, message: str):
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message}")
        self.line_no = line_no


def _split_sections(text: str):
    sections: list[tuple[str, int, dict[str, tuple[str, int]]]] = []
    current: dict[str, tuple[str, int]] | None = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            current = {}
            sections.append((name, i, current))
            continue
        if "=" not in line:
            raise ConfigError(i, f"expected 'key = value', got {raw.strip()!r}")
        if current is None:
            raise ConfigError(i, "key=value before any [section] header")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if key in current:
            raise ConfigError(i, f"duplicate key {key!r} in section")
        current[key] = (value.strip(), i)
    return sections


def _take(fields: dict, key: str, line_no: int, required: bool = True):
    if key not in fields:
        if required:
            raise ConfigError(line_no, f"missing required key {key!r}")
        return None, line_no
    value, ln = fields.pop(key)
    return value, ln


def _floats(value: str, count: int, line_no: int, what: str) -> tuple[float, ...]:
    parts = value.replace(",", " ").split()
    if len(parts) != count:
        raise ConfigError(line_no, f"{what} needs {count} numbers, got {value!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(line_no, f"bad number in {what}: {exc}") from exc


def _parse_dist(value: str, line_no: int):
    name, _, arg = value.partition(":")
    name = name.strip()
    if name == "iid-normal":
        return IidNormal()
    if name == "arch":
        if arg:
            omega, alpha = _floats(arg, 2, line_no, "arch parameters")
            return Arch1(omega=omega, alpha=alpha)
        return Arch1()
    if name == "correlated":
        if arg:
            (weight,) = _floats(arg, 1, line_no, "correlation weight")
            return CorrelatedWithRegressor(weight=weight)
        return CorrelatedWithRegressor()
    raise ConfigError(line_no, f"unknown dist {value!r}")


def _parse_regressor(value: str, line_no: int):
    name, _, arg = value.partition(":")
    name = name.strip()
    try:
        if name == "unit-root":
            return UnitRoot()
        if name == "near-unit-root":
            (c,) = _floats(arg, 1, line_no, "near-unit-root rate")
            return NearUnitRoot(c=c)
        if name == "stationary":
            (rho,) = _floats(arg, 1, line_no, "AR coefficient") if arg else (0.5,)
            return Stationary(rho=rho)
    except ValueError as exc:
        raise ConfigError(line_no, str(exc)) from exc
    raise ConfigError(line_no, f"unknown regressor {value!r}")


def _parse_truth(value: str, line_no: int):
    parts = value.split()
    kind = parts[0] if parts else ""
    rest = " ".join(parts[1:])
    if kind == "fixed":
        t = _floats(rest, 2, line_no, "fixed true value")
        return Fixed(t)
    if kind == "drift":
        a = _floats(rest, 2, line_no, "drift anchor")
        return LocalDrift(a)
    if kind == "local":
        vals = _floats(rest, 4, line_no, "local-to-boundary values")
        return LocalToBoundary(vals[:2], vals[2:])
    raise ConfigError(line_no, f"unknown truth {value!r}")


def _parse_constraint(value: str, line_no: int):
    parts = value.split()
    kind = parts[0] if parts else ""
    if kind == "slope":
        return slope_constraint()
    if kind == "affine":
        vals = _floats(" ".join(parts[1:]), 3, line_no, "affine constraint")
        return ConstraintSpec.from_affine(np.array(vals[:2]), vals[2])
    raise ConfigError(line_no, f"unknown constraint {value!r}")


def _parse_hypothesis(value: str, line_no: int):
    parts = value.split()
    kind = parts[0] if parts else ""
    if kind == "sum":
        return sum_hypothesis()
    if kind == "boundary":
        return BoundaryNull()
    if kind == "point":
        vals = _floats(" ".join(parts[1:]), 2, line_no, "simple-null point")
        return SimpleNull(np.array(vals))
    raise ConfigError(line_no, f"unknown hypothesis {value!r}")


def _parse_scheme(token: str, line_no: int) -> SchemeSpec:
    name, _, arg = token.partition(":")
    try:
        if name == "standard":
            return SchemeSpec.standard()
        if name == "restricted":
            return SchemeSpec.restricted()
        if name == "power":
            return SchemeSpec.power_corrected(float(arg))
        if name == "rate":
            return SchemeSpec.rate_corrected(float(arg))
        if name == "transform-fs":
            return SchemeSpec.transform_fs(float(arg))
        if name == "numerical-hl":
            return SchemeSpec.numerical_hl(float(arg)) if arg else SchemeSpec.numerical_hl()
    except ValueError as exc:
        raise ConfigError(line_no, f"bad scheme {token!r}: {exc}") from exc
    raise ConfigError(line_no, f"unknown scheme {token!r}")


def parse_plan_text(text: str, threads: int | None = None) -> ExperimentPlan:
    """Parse configuration text into an :class:`ExperimentPlan`.

    Raises :class:`ConfigError` with a line diagnostic on any malformed or
    missing field; a master seed is mandatory.
    """
    sections = _split_sections(text)
    exp_sections = [s for s in sections if s[0] == "experiment"]
    if len(exp_sections) != 1:
        raise ConfigError(None, "config needs exactly one [experiment] section")
    _, exp_line, exp_fields = exp_sections[0]
    exp_fields = dict(exp_fields)

    seed_val, seed_line = _take(exp_fields, "master_seed", exp_line)
    try:
        master_seed = int(seed_val)
    except ValueError as exc:
        raise ConfigError(seed_line, f"master_seed must be an integer: {seed_val!r}") from exc
    reps_val, reps_line = _take(exp_fields, "reps", exp_line)
    try:
        reps = int(reps_val)
    except ValueError as exc:
        raise ConfigError(reps_line, f"reps must be an integer: {reps_val!r}") from exc
    b_val, b_line = _take(exp_fields, "bootstrap", exp_line)
    try:
        B = int(b_val)
    except ValueError as exc:
        raise ConfigError(b_line, f"bootstrap must be an integer: {b_val!r}") from exc
    levels_val, levels_line = _take(exp_fields, "levels", exp_line)
    try:
        levels = tuple(float(t) for t in levels_val.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(levels_line, f"bad levels {levels_val!r}") from exc
    if not levels or not all(0.0 < q < 1.0 for q in levels):
        raise ConfigError(levels_line, "levels must lie strictly inside (0, 1)")
    threads_val, threads_line = _take(exp_fields, "threads", exp_line, required=False)
    if threads is None and threads_val is not None:
        try:
            threads = int(threads_val)
        except ValueError as exc:
            raise ConfigError(threads_line, f"threads must be an integer: {threads_val!r}") from exc
    if exp_fields:
        key = next(iter(exp_fields))
        raise ConfigError(exp_fields[key][1], f"unknown experiment key {key!r}")

    cells = []
    for name, line_no, fields in sections:
        if name == "experiment":
            continue
        if name != "cell":
            raise ConfigError(line_no, f"unknown section [{name}]")
        fields = dict(fields)
        dist = _parse_dist(*_take(fields, "dist", line_no))
        regressor = _parse_regressor(*_take(fields, "regressor", line_no))
        n_val, n_line = _take(fields, "n", line_no)
        try:
            n = int(n_val)
        except ValueError as exc:
            raise ConfigError(n_line, f"n must be an integer: {n_val!r}") from exc
        truth = _parse_truth(*_take(fields, "truth", line_no))
        constraint = _parse_constraint(*_take(fields, "constraint", line_no))
        hypothesis = _parse_hypothesis(*_take(fields, "hypothesis", line_no))
        schemes_val, schemes_line = _take(fields, "schemes", line_no)
        schemes = tuple(_parse_scheme(tok, schemes_line) for tok in schemes_val.split())
        if not schemes:
            raise ConfigError(schemes_line, "cell needs at least one scheme")
        if fields:
            key = next(iter(fields))
            raise ConfigError(fields[key][1], f"unknown cell key {key!r}")
        cell = CellSpec(
            errors=dist,
            regressor=regressor,
            n=n,
            truth=truth,
            hypothesis=hypothesis,
            constraint=constraint,
            schemes=schemes,
            levels=levels,
        )
        try:
            cell.validate()
        except ValueError as exc:
            raise ConfigError(line_no, str(exc)) from exc
        cells.append(cell)
    if not cells:
        raise ConfigError(None, "config needs at least one [cell] section")
    plan = ExperimentPlan(
        cells=tuple(cells), reps=reps, B=B, master_seed=master_seed, threads=threads
    )
    try:
        plan.validate()
    except ValueError as exc:
        raise ConfigError(None, str(exc)) from exc
    return plan
