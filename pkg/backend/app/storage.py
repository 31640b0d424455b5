"""Reading and writing the JSON files used by the command line."""
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .construct import Quasigroup, latin_quasigroup
from .designs import IncidenceStructure, Mosaic, make_mosaic, mosaic_from_function
from .errors import HashDesignError
from .hash_family import BUILDERS, HashFamily, from_table, index_table
from .models import FunctionTableFile, IncidenceFile, LatinSquareFile, MosaicFile, SourceFile
from .privacy import JointSource, make_source

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def dumps(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def save_json(data: Any, path: Optional[PathLike]) -> None:
    """Write sorted-key JSON to path, or to stdout for None / '-'."""
    text = dumps(data)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)
    logger.debug(f"wrote {path}")


def read_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text())


def family_to_file(f: HashFamily, notes: Optional[dict] = None) -> dict:
    model = FunctionTableFile(
        name=f.name,
        x_labels=list(f.x_labels),
        s_labels=list(f.s_labels),
        a_labels=list(f.a_labels),
        rows=index_table(f).tolist(),
        params=_jsonable(f.params),
        notes=notes or {},
    )
    return model.model_dump()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return str(value)


def _rebuild(model: FunctionTableFile) -> Optional[HashFamily]:
    """The closed-form family behind a file, when its params name one and the table agrees."""
    params = dict(model.params)
    kind = params.pop("kind", None)
    if kind not in BUILDERS:
        return None
    if kind == "transversal":
        params["include_infinity"] = params.pop("infinity", False)
    try:
        f = BUILDERS[kind](**params)
    except (HashDesignError, TypeError):
        return None
    if f.x_labels != tuple(model.x_labels) or f.s_labels != tuple(model.s_labels) or f.a_labels != tuple(model.a_labels):
        return None
    if not np.array_equal(index_table(f), np.asarray(model.rows)):
        return None
    return f


def load_family(path: PathLike) -> HashFamily:
    model = FunctionTableFile.model_validate(read_json(path))
    rebuilt = _rebuild(model)
    if rebuilt is not None:
        return rebuilt
    f = from_table(model.x_labels, model.s_labels, model.a_labels, model.rows, name=model.name)
    f.params.update(model.params)
    return f


def save_family(f: HashFamily, path: Optional[PathLike], notes: Optional[dict] = None) -> None:
    save_json(family_to_file(f, notes), path)


def incidence_to_file(D: IncidenceStructure) -> dict:
    return IncidenceFile(points=list(D.points), block_indices=list(D.blocks), rows=D.matrix.tolist()).model_dump()


def mosaic_to_file(M: Mosaic) -> dict:
    return MosaicFile(
        points=list(M.points),
        block_indices=list(M.blocks),
        a_labels=list(M.a_labels),
        members=[m.matrix.tolist() for m in M.members],
    ).model_dump()


def load_structure(path: PathLike) -> Union[HashFamily, Mosaic, IncidenceStructure]:
    """A family, mosaic or incidence file, told apart by its keys."""
    data = read_json(path)
    if "members" in data:
        model = MosaicFile.model_validate(data)
        return make_mosaic([np.asarray(m) for m in model.members], model.a_labels, model.points, model.block_indices)
    if "block_indices" in data:
        model = IncidenceFile.model_validate(data)
        return IncidenceStructure(np.asarray(model.rows), tuple(model.points), tuple(model.block_indices))
    return load_family(path)


def load_mosaic(path: PathLike) -> Mosaic:
    item = load_structure(path)
    if isinstance(item, HashFamily):
        return mosaic_from_function(item)
    if isinstance(item, IncidenceStructure):
        raise HashDesignError(f"{path} holds a single incidence structure, not a mosaic")
    return item


def load_source(path: PathLike) -> JointSource:
    model = SourceFile.model_validate(read_json(path))
    return make_source(model.x_labels, model.z_labels, model.matrix())


def load_latin_square(path: PathLike) -> Quasigroup:
    model = LatinSquareFile.model_validate(read_json(path))
    return latin_quasigroup(model.rows, model.labels)
