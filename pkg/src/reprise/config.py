"""Strict key/value configuration files.

Format: `[section]` headers followed by `key = value` lines; `#` starts a
comment. Sections are the shared model blocks ([grammar], [py], [noise])
plus one block per CLI command. Unknown sections or keys are rejected by
name, as are duplicates; values are cast per a declared schema.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codec import NoiseModel
from .grammar import Grammar
from .library import PitmanYorParams
from .terms import DEFAULT_PRIMITIVES


class ConfigError(ValueError):
    pass


def parse_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {line_no}: empty section name")
            if name in sections:
                raise ConfigError(f"line {line_no}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value'")
        if current is None:
            raise ConfigError(f"line {line_no}: key outside any [section]")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {line_no}: malformed 'key = value'")
        if key in sections[current]:
            raise ConfigError(f"line {line_no}: duplicate key {key!r} in [{current}]")
        sections[current][key] = value
    return sections


def _cast_bool(v: str) -> bool:
    if v.lower() in ("true", "yes", "1"):
        return True
    if v.lower() in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _cast_int_list(v: str) -> list[int]:
    return [int(x) for x in v.split(",") if x.strip()]


def _cast_float_list(v: str) -> list[float]:
    return [float(x) for x in v.split(",") if x.strip()]


CASTERS = {
    "int": int,
    "float": float,
    "str": str,
    "bool": _cast_bool,
    "ints": _cast_int_list,
    "floats": _cast_float_list,
}

GRAMMAR_SCHEMA = {
    "p_terminal": "float",
    "k_decay": "float",
    "max_k": "int",
    "max_depth": "int",
    "count_max": "int",
    "time_max": "int",
    "primitives": "str",
}
PY_SCHEMA = {"alpha": "float", "discount": "float"}
NOISE_SCHEMA = {"epsilon": "float"}


def _apply_schema(section: str, values: dict[str, str], schema: dict[str, str]) -> dict:
    out = {}
    for key, raw in values.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        try:
            out[key] = CASTERS[schema[key]](raw)
        except ValueError as e:
            raise ConfigError(f"bad value for {key!r} in [{section}]: {e}") from None
    return out


def grammar_from_values(values: dict) -> Grammar:
    kwargs = {}
    if "p_terminal" in values:
        kwargs["p_terminal"] = values["p_terminal"]
    if "k_decay" in values:
        kwargs["k_decay"] = values["k_decay"]
    if "max_k" in values:
        kwargs["max_k"] = values["max_k"]
    if "max_depth" in values:
        kwargs["max_depth"] = values["max_depth"]
    if "count_max" in values:
        kwargs["count_alphabet"] = tuple(range(1, values["count_max"] + 1))
    if "time_max" in values:
        kwargs["time_alphabet"] = tuple(range(1, values["time_max"] + 1))
    if "primitives" in values:
        wanted = {name.strip() for name in values["primitives"].split(",")}
        table = {p.name: p for p in DEFAULT_PRIMITIVES}
        unknown = wanted - set(table)
        if unknown:
            raise ConfigError(f"unknown primitives: {sorted(unknown)}")
        kwargs["primitives"] = tuple(table[n] for n in sorted(wanted))
    return Grammar(**kwargs)


def grammar_to_values(grammar: Grammar) -> dict:
    """Echo of the effective grammar, for run metadata."""
    return {
        "p_terminal": grammar.p_terminal,
        "k_decay": grammar.k_decay,
        "max_k": grammar.max_k,
        "max_depth": grammar.max_depth,
        "count_max": max(grammar.alphabets["c"]),
        "time_max": max(grammar.alphabets["m"]),
        "primitives": ",".join(p.name for p in grammar.primitives),
    }


@dataclass
class RunSetup:
    grammar: Grammar
    py: PitmanYorParams
    noise: NoiseModel
    command_values: dict


def load_setup(text: str, command: str, command_schema: dict[str, str]) -> RunSetup:
    """Validate a config file against the shared blocks plus one command block."""
    sections = parse_sections(text)
    known = {"grammar", "py", "noise", command}
    for name in sections:
        if name not in known:
            raise ConfigError(f"unknown section [{name}] (expected one of {sorted(known)})")
    gvals = _apply_schema("grammar", sections.get("grammar", {}), GRAMMAR_SCHEMA)
    pyvals = _apply_schema("py", sections.get("py", {}), PY_SCHEMA)
    nvals = _apply_schema("noise", sections.get("noise", {}), NOISE_SCHEMA)
    cvals = _apply_schema(command, sections.get(command, {}), command_schema)
    return RunSetup(
        grammar=grammar_from_values(gvals),
        py=PitmanYorParams(**pyvals),
        noise=NoiseModel(**nvals),
        command_values=cvals,
    )
