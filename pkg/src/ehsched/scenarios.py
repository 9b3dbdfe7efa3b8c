"""Built-in benchmark scenarios and JSON scenario files.

Scenario files are JSON objects with keys ``name``, ``bandwidth_hz``,
``noise_density``, ``path_loss_db`` (list), ``slot_lengths`` (list),
``harvests`` (list) and an optional ``solver`` object whose entries override
:class:`SolverOptions` fields.  Bandwidth defaults to 1 kHz and noise density
to 1e-6 W/Hz.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .model import EnergyProfile, SolverOptions, SystemParams, make_users

__all__ = [
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "scenario_from_dict",
    "builtin_scenarios",
    "sweep_user_scenario",
    "TABLE1_SEQUENCES",
    "TABLE1_REFERENCE",
    "TABLE2_ROWS",
    "SWEEP_CASES",
]

DEFAULT_BANDWIDTH_HZ = 1000.0
DEFAULT_NOISE_DENSITY = 1e-6

# the common 10-harvest arrival pattern used by most built-in scenarios (J)
STANDARD_HARVESTS = [20.0, 100.0, 1.0, 1.0, 1.0, 70.0, 100.0, 1.0, 10.0, 40.0]

# five users, strongest first, 3 dB apart
FIVE_USER_LOSSES_DB = [25.0, 28.0, 31.0, 34.0, 37.0]

# four slot-length sequences: two unequal, two periodic with the same frame
TABLE1_SEQUENCES = {
    "s1": [10.0, 12.0, 5.0, 7.0, 4.0, 15.0, 20.0, 2.0, 10.0, 15.0],
    "s1tilde": [10.0] * 10,
    "s2": [25.0, 44.0, 14.0, 7.0, 3.0, 32.0, 47.0, 19.0, 26.0, 38.0],
    "s2tilde": [25.5] * 10,
}

# reference results per sequence: utility, improvement over SG+TDMA (%),
# and outer iterations to convergence
TABLE1_REFERENCE = {
    "s1": (75.7273, 8.5449, 11),
    "s1tilde": (75.7325, 9.6133, 8),
    "s2": (78.2339, 9.0566, 16),
    "s2tilde": (78.2314, 9.9830, 18),
}

# harvest-pattern study: six users, periodic 10 s slots (frame length grows
# with the harvest count); reference improvement percentages are soft targets
SIX_USER_LOSSES_DB = [19.0, 22.0, 25.0, 28.0, 31.0, 34.0]
TABLE2_ROWS = [
    ([20, 100, 10, 60, 10, 70, 100, 10, 10, 40], 2.7111),
    ([20, 100, 1, 1, 1, 70, 100, 1, 10, 40], 7.8467),
    ([20, 60, 100, 1, 1, 1, 70, 85, 100, 1, 10, 40], 7.2562),
    ([20, 60, 100, 0.5, 1, 0.5, 70, 85, 100, 0.5, 10, 40], 8.4308),
    ([20, 60, 100, 0.5, 50, 0.5, 70, 85, 100, 0.5, 10, 40], 6.7132),
    ([20, 60, 100, 1, 0.5, 0.5, 1, 1, 100, 0.5, 10, 40], 8.5150),
]

# user sweeps: strongest user's path loss per case, new users 3 dB weaker each
SWEEP_CASES = {"a": 13.0, "b": 19.0, "c": 25.0}


@dataclass(frozen=True)
class Scenario:
    name: str
    params: SystemParams
    path_losses_db: tuple
    profile: EnergyProfile
    solver: SolverOptions = field(default_factory=SolverOptions)

    def users(self):
        return make_users(self.path_losses_db, self.params)


class ScenarioError(ValueError):
    """Scenario file rejected; carries the offending 1-based line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message)


def _find_line(raw: str | None, key: str) -> int | None:
    if raw is None:
        return None
    needle = f'"{key}"'
    for i, text in enumerate(raw.splitlines(), start=1):
        if needle in text:
            return i
    return None


def _fail(raw, key, message):
    line = _find_line(raw, key)
    where = f"line {line}: " if line else ""
    raise ScenarioError(f"{where}{message}", line=line)


def scenario_from_dict(data: dict, raw: str | None = None, name: str | None = None) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    known = {
        "name", "bandwidth_hz", "noise_density", "path_loss_db",
        "slot_lengths", "harvests", "solver",
    }
    for key in data:
        if key not in known:
            _fail(raw, key, f"unknown key {key!r}")

    bandwidth = data.get("bandwidth_hz", DEFAULT_BANDWIDTH_HZ)
    noise = data.get("noise_density", DEFAULT_NOISE_DENSITY)
    for key, val in (("bandwidth_hz", bandwidth), ("noise_density", noise)):
        if not isinstance(val, (int, float)) or val <= 0:
            _fail(raw, key, f"{key} must be a positive number")

    losses = data.get("path_loss_db")
    if not isinstance(losses, list) or not losses:
        _fail(raw, "path_loss_db", "path_loss_db must be a non-empty list")
    if not all(isinstance(v, (int, float)) for v in losses):
        _fail(raw, "path_loss_db", "path_loss_db entries must be numbers")

    slots = data.get("slot_lengths")
    if not isinstance(slots, list) or not slots:
        _fail(raw, "slot_lengths", "slot_lengths must be a non-empty list")
    if not all(isinstance(v, (int, float)) and v > 0 for v in slots):
        _fail(raw, "slot_lengths", "slot_lengths entries must be positive numbers")

    harvests = data.get("harvests")
    if not isinstance(harvests, list) or len(harvests) != len(slots):
        _fail(raw, "harvests", "harvests must be a list matching slot_lengths")
    if not all(isinstance(v, (int, float)) and v >= 0 for v in harvests):
        _fail(raw, "harvests", "harvests entries must be nonnegative numbers")
    if not any(v > 0 for v in harvests):
        _fail(raw, "harvests", "at least one harvest must be positive")

    solver_cfg = data.get("solver", {})
    if not isinstance(solver_cfg, dict):
        _fail(raw, "solver", "solver must be an object")
    try:
        solver = SolverOptions(**solver_cfg)
    except (TypeError, ValueError) as exc:
        _fail(raw, "solver", f"bad solver options: {exc}")

    return Scenario(
        name=str(data.get("name", name or "scenario")),
        params=SystemParams(bandwidth_hz=float(bandwidth), noise_density=float(noise)),
        path_losses_db=tuple(float(v) for v in losses),
        profile=EnergyProfile(
            slot_lengths=[float(v) for v in slots],
            harvests=[float(v) for v in harvests],
        ),
        solver=solver,
    )


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}: {exc.msg}", line=exc.lineno) from exc
    return scenario_from_dict(data, raw=raw, name=str(path))


def builtin_scenarios() -> dict[str, Scenario]:
    """All named built-in scenarios, keyed by name."""
    out = {}
    for key, slots in TABLE1_SEQUENCES.items():
        name = f"table1-{key}"
        out[name] = Scenario(
            name=name,
            params=SystemParams(DEFAULT_BANDWIDTH_HZ, DEFAULT_NOISE_DENSITY),
            path_losses_db=tuple(FIVE_USER_LOSSES_DB),
            profile=EnergyProfile(slot_lengths=slots, harvests=STANDARD_HARVESTS),
        )
    for i, (harvests, _) in enumerate(TABLE2_ROWS):
        name = f"table2-r{i + 1}"
        out[name] = Scenario(
            name=name,
            params=SystemParams(DEFAULT_BANDWIDTH_HZ, DEFAULT_NOISE_DENSITY),
            path_losses_db=tuple(SIX_USER_LOSSES_DB),
            profile=EnergyProfile(
                slot_lengths=[10.0] * len(harvests),
                harvests=[float(v) for v in harvests],
            ),
        )
    return out


def sweep_user_scenario(case: str, n_users: int) -> Scenario:
    """Scenario for the user-count sweep: n users starting at the case's
    strongest path loss, each following user 3 dB weaker, standard harvests."""
    strongest = SWEEP_CASES[case]
    losses = [strongest + 3.0 * i for i in range(n_users)]
    return Scenario(
        name=f"sweep-{case}-n{n_users}",
        params=SystemParams(DEFAULT_BANDWIDTH_HZ, DEFAULT_NOISE_DENSITY),
        path_losses_db=tuple(losses),
        profile=EnergyProfile(slot_lengths=[10.0] * 10, harvests=STANDARD_HARVESTS),
    )
