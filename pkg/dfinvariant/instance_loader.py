"""InstanceLoader: finds, parses and builds DF instance files.

Instances are UTF-8 JSON documents matching ``InstanceFile``. Bundled
examples live in the package's instances/ directory and can be named
directly (``a1_pgl2.json`` or just ``a1_pgl2``).
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import pydantic

from dfinvariant.core.polytope_lab import HPolytope, PLFunction, VPolytope, canonical_constraint, hull
from dfinvariant.core.root_system import RootSystem, build_root_system
from dfinvariant.errors import DimensionMismatch, ParseError
from dfinvariant.models.df_models import InstanceFile, InstanceOptions

logger = logging.getLogger(__name__)

INSTANCES_DIR = Path(__file__).parent / "instances"


@dataclass
class Instance:
    """A parsed instance with its engine objects built."""

    root_system: RootSystem
    polytope: HPolytope
    function: PLFunction | None
    options: InstanceOptions
    source: str = ""


def _field_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc)


class InstanceLoader:
    """Resolves instance names to files and turns them into engine objects."""

    def __init__(self, instances_dir: Path | None = None):
        self._dir = instances_dir or INSTANCES_DIR

    def list_instances(self) -> list[dict]:
        """List bundled instances."""
        found = []
        if self._dir.is_dir():
            for f in sorted(self._dir.glob("*.json")):
                found.append({"id": f.stem, "name": f.name, "path": str(f)})
        return found

    def resolve(self, reference: str) -> Path:
        """A filesystem path, or the name of a bundled instance."""
        path = Path(reference)
        if path.is_file():
            return path
        for candidate in (self._dir / reference, self._dir / f"{reference}.json"):
            if candidate.is_file():
                return candidate
        raise ParseError(f"No instance file at '{reference}' and no bundled instance of that name", field="input")

    def parse(self, text: str, source: str = "<string>") -> InstanceFile:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{source}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
        try:
            return InstanceFile.model_validate(raw)
        except pydantic.ValidationError as exc:
            first = exc.errors()[0]
            where = _field_path(first["loc"])
            raise ParseError(f"{source}: {where}: {first['msg']}", field=where) from exc

    def load(self, reference: str) -> InstanceFile:
        path = self.resolve(reference)
        logger.info("Loading instance %s", path)
        return self.parse(path.read_text(encoding="utf-8"), source=str(path))


def _build_polytope(spec: InstanceFile, rs: RootSystem) -> HPolytope:
    if spec.polytope.v_rep is not None:
        points = tuple(tuple(v) for v in spec.polytope.v_rep.vertices)
        if any(len(v) != rs.n for v in points):
            raise DimensionMismatch(f"vertices must have length {rs.n}", field="polytope.v_rep.vertices")
        return hull(VPolytope(points), rs.lattice)

    h_rep = spec.polytope.h_rep
    for normal, offset in zip(h_rep.normals, h_rep.offsets):
        if len(normal) != rs.n:
            raise DimensionMismatch(f"normal {normal} must have length {rs.n}", field="polytope.h_rep.normals")
        canon = canonical_constraint(normal, offset, rs.lattice)
        if canon.normal != tuple(normal):
            logger.warning(
                "Normal %s renormalized to primitive %s (offset %s -> %s)",
                [str(x) for x in normal], [str(x) for x in canon.normal], offset, canon.offset,
            )
    return HPolytope.from_inequalities(h_rep.normals, h_rep.offsets, rs.lattice)


def _build_function(spec: InstanceFile, rs: RootSystem) -> PLFunction | None:
    if spec.function is None:
        return None
    for piece in spec.function.pieces:
        if len(piece.b) != rs.n:
            raise DimensionMismatch(f"piece slope {piece.b} must have length {rs.n}", field="function.pieces")
    return PLFunction.from_pieces((piece.b, piece.k) for piece in spec.function.pieces)


def build_instance(spec: InstanceFile, source: str = "") -> Instance:
    root = spec.root_system
    rs = build_root_system(root if isinstance(root, str) else root.model_dump())
    return Instance(
        root_system=rs,
        polytope=_build_polytope(spec, rs),
        function=_build_function(spec, rs),
        options=spec.options,
        source=source,
    )
