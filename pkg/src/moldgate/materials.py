"""Material database: bundled case-study rows plus an optional user file."""

from __future__ import annotations

import logging
import os
import tomllib
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Optional

from .constants import MATERIAL_FIELDS, MATERIALS_ENV_VAR
from .errors import MaterialError, UnknownMaterialError
from .rheology import MaterialParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MaterialRecord:
    params: MaterialParams
    case: Optional[int]
    source: str

    @property
    def key(self) -> str:
        if self.case is None:
            return self.params.name
        return f"{self.params.name}:{self.case}"


def _records_from_toml(text: str, source: str) -> List[MaterialRecord]:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise MaterialError(f"Invalid material database {source}: {exc}")

    records = []
    for index, entry in enumerate(data.get("material", []), start=1):
        missing = [f for f in ("name", *MATERIAL_FIELDS) if f not in entry]
        if missing:
            raise MaterialError(
                f"{source}: material #{index} is missing {', '.join(missing)}"
            )
        try:
            params = MaterialParams(
                name=str(entry["name"]),
                **{f: float(entry[f]) for f in MATERIAL_FIELDS},
            )
        except (TypeError, ValueError) as exc:
            raise MaterialError(f"{source}: material #{index}: {exc}")
        case = entry.get("case")
        records.append(
            MaterialRecord(
                params=params,
                case=int(case) if case is not None else None,
                source=source,
            )
        )
    return records


class MaterialDatabase:
    """Ordered material records; earlier records win on lookup."""

    def __init__(self, records: List[MaterialRecord]):
        self.records = records

    @classmethod
    def load(cls, environ: Optional[Mapping[str, str]] = None) -> "MaterialDatabase":
        """Bundled rows, preceded by rows from $MOLDGATE_MATERIALS if set."""
        environ = os.environ if environ is None else environ
        bundled = (
            resources.files("moldgate").joinpath("materials.toml").read_text("utf-8")
        )
        records = _records_from_toml(bundled, "bundled materials.toml")

        user_path = environ.get(MATERIALS_ENV_VAR)
        if user_path:
            path = Path(user_path)
            if not path.is_file():
                raise MaterialError(
                    f"{MATERIALS_ENV_VAR} points to a missing file: {user_path}"
                )
            user = _records_from_toml(path.read_text("utf-8"), str(path))
            logger.debug("Loaded %d material(s) from %s", len(user), path)
            records = user + records
        return cls(records)

    @property
    def names(self) -> List[str]:
        seen: Dict[str, None] = {}
        for record in self.records:
            seen.setdefault(record.params.name, None)
            seen.setdefault(record.key, None)
        return list(seen)

    def get(self, key: str) -> MaterialParams:
        """Look up ``NAME`` or ``NAME:CASE`` (case-insensitive).

        A bare name resolves to its lowest case number within the file
        that defines it first.
        """
        name, _, case = key.strip().partition(":")
        name = name.strip().lower()
        matches = [r for r in self.records if r.params.name.lower() == name]

        if case:
            try:
                wanted = int(case)
            except ValueError:
                raise UnknownMaterialError(key, self.names)
            matches = [r for r in matches if r.case == wanted]
        elif matches:
            source = matches[0].source
            matches = sorted(
                (r for r in matches if r.source == source),
                key=lambda r: (r.case is not None, r.case or 0),
            )

        if not matches:
            raise UnknownMaterialError(key, self.names)
        return matches[0].params


def resolve_material(
    database: MaterialDatabase,
    name: Optional[str],
    overrides: Mapping[str, Optional[float]],
) -> MaterialParams:
    """Named material with inline overrides, or a fully inline material."""
    given = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(given) - set(MATERIAL_FIELDS)
    if unknown:
        raise MaterialError(f"Unknown material field(s): {', '.join(sorted(unknown))}")

    if name:
        base = database.get(name)
        return replace(base, **given) if given else base

    missing = [f for f in MATERIAL_FIELDS if f not in given]
    if missing:
        raise MaterialError(
            "No --material given; inline parameters missing: " + ", ".join(missing)
        )
    return MaterialParams(name="custom", **given)
