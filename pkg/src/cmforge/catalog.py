"""Instance catalog: TOML schema, validation and parsing."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

import tomli

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed catalog or configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExtensionData:
    name: str
    polynomial: tuple[int, ...]
    basis: tuple[tuple[Fraction, ...], ...]
    omega: tuple[Fraction, ...]
    automorphisms: dict
    class_number: int
    torsion_unit: tuple[Fraction, ...]
    torsion_order: int
    fundamental_units: tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class InstanceCatalogEntry:
    label: str
    d: int
    modulus: tuple[tuple[Fraction, Fraction], ...]
    ray_moduli: tuple[tuple[tuple[Fraction, Fraction], ...], ...] = ()
    extension: Optional[ExtensionData] = None
    params: dict = field(default_factory=dict)


def _rat(x, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ConfigError(f"{where}: expected integer or 'p/q' string, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: bad rational {x!r}") from exc


def _rat_list(xs, where: str) -> tuple[Fraction, ...]:
    if not isinstance(xs, list) or not xs:
        raise ConfigError(f"{where}: expected a nonempty list")
    return tuple(_rat(x, where) for x in xs)


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{where}: expected integer, got {x!r}")
    return x


def _gens(xs, where: str) -> tuple[tuple[Fraction, Fraction], ...]:
    if not isinstance(xs, list) or not xs:
        raise ConfigError(f"{where}: expected a nonempty list of [a, b] pairs")
    out = []
    for g in xs:
        pair = _rat_list(g, where)
        if len(pair) != 2:
            raise ConfigError(f"{where}: generator {g!r} is not a pair")
        out.append(pair)
    return tuple(out)


def _extension(raw: dict, where: str) -> ExtensionData:
    need = ["name", "polynomial", "basis", "omega", "automorphisms", "class_number",
            "torsion_unit", "torsion_order", "fundamental_units"]
    missing = [k for k in need if k not in raw]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    poly = tuple(_int(c, f"{where}.polynomial") for c in raw["polynomial"])
    auts = raw["automorphisms"]
    if not isinstance(auts, dict) or not auts:
        raise ConfigError(f"{where}.automorphisms: expected a table")
    return ExtensionData(
        name=str(raw["name"]),
        polynomial=poly,
        basis=tuple(_rat_list(r, f"{where}.basis") for r in raw["basis"]),
        omega=_rat_list(raw["omega"], f"{where}.omega"),
        automorphisms={str(k): _rat_list(v, f"{where}.automorphisms.{k}") for k, v in auts.items()},
        class_number=_int(raw["class_number"], f"{where}.class_number"),
        torsion_unit=_rat_list(raw["torsion_unit"], f"{where}.torsion_unit"),
        torsion_order=_int(raw["torsion_order"], f"{where}.torsion_order"),
        fundamental_units=tuple(_rat_list(u, f"{where}.fundamental_units")
                                for u in raw["fundamental_units"]),
    )


def parse_catalog(raw: dict) -> list[InstanceCatalogEntry]:
    if raw.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"catalog schema must be {SCHEMA_VERSION}")
    insts = raw.get("instance")
    if not isinstance(insts, list) or not insts:
        raise ConfigError("catalog has no [[instance]] entries")
    out, seen = [], set()
    for k, inst in enumerate(insts):
        where = f"instance[{k}]"
        if not isinstance(inst, dict):
            raise ConfigError(f"{where}: not a table")
        for key in ("label", "d", "modulus"):
            if key not in inst:
                raise ConfigError(f"{where}: missing key {key!r}")
        label = str(inst["label"])
        if label in seen:
            raise ConfigError(f"duplicate instance label {label!r}")
        seen.add(label)
        ext = inst.get("extension")
        out.append(InstanceCatalogEntry(
            label=label,
            d=_int(inst["d"], f"{where}.d"),
            modulus=_gens(inst["modulus"], f"{where}.modulus"),
            ray_moduli=tuple(_gens(m, f"{where}.ray_moduli") for m in inst.get("ray_moduli", [])),
            extension=_extension(ext, f"{where}.extension") if ext is not None else None,
            params=dict(inst.get("params", {})),
        ))
    return out


def load_catalog(path: Optional[str | Path] = None) -> list[InstanceCatalogEntry]:
    """Read and validate a catalog file (the bundled one when ``path`` is None)."""
    try:
        if path is None:
            text = resources.files("cmforge").joinpath("data/catalog.toml").read_text()
        else:
            text = Path(path).read_text()
        raw = tomli.loads(text)
    except (OSError, tomli.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read catalog: {exc}") from exc
    return parse_catalog(raw)
