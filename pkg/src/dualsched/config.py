"""JSON problem configs: topology, flows, K, and solver settings."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, InputError
from .model import Network
from .solver import SolverConfig
from .utility import UTILITY_KINDS

_TOP_KEYS = {"nodes", "links", "flows", "K", "C", "prices", "solver"}
_SOLVER_KEYS = {"delta", "iterations", "mode", "seed", "initial_prices"}


@dataclass(frozen=True)
class LoadedConfig:
    net: Network
    k: int
    display_capacity: float | None   # purely cosmetic rate scale for reports
    prices: np.ndarray | None
    solver: SolverConfig
    sha256: str
    path: str


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def load_config(path) -> LoadedConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    raw = p.read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ConfigError(f"{p}: not valid UTF-8 ({e})") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{p}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e

    _require(isinstance(data, dict), f"{p}: top level must be a JSON object")
    unknown = sorted(set(data) - _TOP_KEYS)
    _require(not unknown, f"{p}: unknown fields {unknown}; allowed: {sorted(_TOP_KEYS)}")
    for key in ("nodes", "links", "K"):
        _require(key in data, f"{p}: missing required field {key!r}")

    nodes = data["nodes"]
    _require(isinstance(nodes, list) and nodes and all(_is_int(n) for n in nodes),
             f"{p}: nodes must be a nonempty list of integers")

    links_raw = data["links"]
    _require(isinstance(links_raw, list),
             f"{p}: links must be a list of [tail, head, alpha] triples")
    links = []
    for i, item in enumerate(links_raw):
        _require(isinstance(item, list) and len(item) == 3
                 and _is_int(item[0]) and _is_int(item[1]) and _is_number(item[2]),
                 f"{p}: links[{i}] must be [tail, head, alpha] with integer endpoints")
        links.append((item[0], item[1], float(item[2])))

    flows_raw = data.get("flows", [])
    _require(isinstance(flows_raw, list),
             f"{p}: flows must be a list of [source, dest, kind, weight] entries")
    flows = []
    for i, item in enumerate(flows_raw):
        _require(isinstance(item, list) and len(item) == 4
                 and _is_int(item[0]) and _is_int(item[1])
                 and isinstance(item[2], str) and _is_number(item[3]),
                 f"{p}: flows[{i}] must be [source, dest, kind, weight]")
        _require(item[2] in UTILITY_KINDS,
                 f"{p}: flows[{i}]: unknown utility kind {item[2]!r}; expected one of {UTILITY_KINDS}")
        flows.append((item[0], item[1], item[2], float(item[3])))

    k = data["K"]
    _require(_is_int(k) and k >= 1, f"{p}: K must be an integer >= 1")

    display_capacity = None
    if "C" in data:
        _require(_is_number(data["C"]) and data["C"] > 0,
                 f"{p}: C must be a positive number")
        display_capacity = float(data["C"])

    prices = None
    if "prices" in data:
        raw_prices = data["prices"]
        _require(isinstance(raw_prices, list) and all(_is_number(v) for v in raw_prices),
                 f"{p}: prices must be a list of numbers")
        _require(len(raw_prices) == len(links),
                 f"{p}: expected {len(links)} prices (one per link), got {len(raw_prices)}")
        _require(all(v >= 0 for v in raw_prices), f"{p}: prices must be nonnegative")
        prices = np.array([float(v) for v in raw_prices])

    solver_raw = data.get("solver", {})
    _require(isinstance(solver_raw, dict), f"{p}: solver must be an object")
    unknown = sorted(set(solver_raw) - _SOLVER_KEYS)
    _require(not unknown,
             f"{p}: unknown solver fields {unknown}; allowed: {sorted(_SOLVER_KEYS)}")
    kwargs = {}
    if "delta" in solver_raw:
        _require(_is_number(solver_raw["delta"]), f"{p}: solver.delta must be a number")
        kwargs["delta"] = float(solver_raw["delta"])
    if "iterations" in solver_raw:
        _require(_is_int(solver_raw["iterations"]), f"{p}: solver.iterations must be an integer")
        kwargs["iterations"] = solver_raw["iterations"]
    if "mode" in solver_raw:
        _require(isinstance(solver_raw["mode"], str), f"{p}: solver.mode must be a string")
        kwargs["mode"] = solver_raw["mode"]
    if "seed" in solver_raw:
        _require(_is_int(solver_raw["seed"]), f"{p}: solver.seed must be an integer")
        kwargs["seed"] = solver_raw["seed"]
    if "initial_prices" in solver_raw:
        ip = solver_raw["initial_prices"]
        _require(isinstance(ip, list) and all(_is_number(v) for v in ip),
                 f"{p}: solver.initial_prices must be a list of numbers")
        _require(len(ip) == len(links),
                 f"{p}: expected {len(links)} initial prices (one per link), got {len(ip)}")
        kwargs["initial_prices"] = tuple(float(v) for v in ip)

    try:
        solver = SolverConfig(**kwargs)
        net = Network.build(nodes, links, flows)
    except InputError as e:
        raise ConfigError(f"{p}: {e}") from e
    return LoadedConfig(
        net=net, k=k, display_capacity=display_capacity, prices=prices,
        solver=solver, sha256=digest, path=str(p),
    )
