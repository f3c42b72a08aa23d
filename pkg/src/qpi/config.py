"""Instance-file loading (TOML or JSON) with field-level diagnostics."""

import json
from pathlib import Path

try:
    import tomllib as _toml
except ImportError:      # Python < 3.11
    import tomli as _toml

from .mdp import DemandDistribution, InventoryParams, build_inventory_mdp


class ConfigError(ValueError):
    """Bad instance file; the message names the offending key or syntax."""


REQUIRED_KEYS = ("holding_cost", "lost_sales_cost", "gamma",
                 "max_inventory", "max_order", "demand_pmf")
OPTIONAL_KEYS = ("unit_order_cost", "seed")


def load_raw(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"instance file not found: {path}")
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    try:
        return _toml.loads(text.decode("utf-8"))
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def load_instance(path):
    """Parse an instance file and build the MDP. Returns (mdp, raw dict)."""
    raw = load_raw(path)
    if not isinstance(raw, dict):
        raise ConfigError(f"instance file must define a table, got {type(raw).__name__}")
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing key '{key}'")
    unknown = set(raw) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS)
    if unknown:
        raise ConfigError(f"unknown key '{sorted(unknown)[0]}'")
    try:
        pmf = [float(p) for p in raw["demand_pmf"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key 'demand_pmf' must be an array of numbers: {exc}") from exc
    try:
        demand = DemandDistribution(pmf)
    except ValueError as exc:
        raise ConfigError(f"key 'demand_pmf': {exc}") from exc
    try:
        params = InventoryParams(
            holding_cost=float(raw["holding_cost"]),
            lost_sales_cost=float(raw["lost_sales_cost"]),
            unit_order_cost=float(raw.get("unit_order_cost", 0.0)),
            gamma=float(raw["gamma"]),
            max_inventory=int(raw["max_inventory"]),
            max_order=int(raw["max_order"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameter value: {exc}") from exc
    try:
        mdp = build_inventory_mdp(params, demand)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return mdp, raw


def parse_rate(text):
    """Rate values like '1kHz*2pi', '2.5e3', '10MHz*2pi' -> cycle rate.

    The '*2pi' annotation is accepted and stripped: rates are carried as
    plain cycle rates throughout.
    """
    s = str(text).strip().lower().replace(" ", "")
    for token in ("*2pi", "x2pi", "*2*pi"):
        if s.endswith(token):
            s = s[: -len(token)]
            break
    scale = 1.0
    for suffix, mult in (("ghz", 1e9), ("mhz", 1e6), ("khz", 1e3), ("hz", 1.0)):
        if s.endswith(suffix):
            s = s[: -len(suffix)]
            scale = mult
            break
    try:
        return float(s) * scale
    except ValueError as exc:
        raise ConfigError(f"cannot parse rate {text!r}") from exc
