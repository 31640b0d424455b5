import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings
from pydantic import ValidationError

from backend.app import storage
from backend.app.construct import cyclic_quasigroup, seed_extension
from backend.app.designs import mosaic_from_function, sum_mosaic
from backend.app.errors import HashDesignError
from backend.app.hash_family import index_table, toeplitz, transversal
from backend.app.models import SourceFile, parse_rational, rational_str
from backend.config import get_settings, override_settings, reset_settings


def test_rational_text():
    assert rational_str(Fraction(2, 4)) == "1/2"
    assert rational_str(3) == "3/1"
    assert parse_rational(" 3/9 ") == Fraction(1, 3)
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("half")


def test_built_in_survives_a_file(tmp_path):
    f = transversal(3, H=[0, 2], include_infinity=True)
    path = tmp_path / "t.json"
    storage.save_family(f, path)
    back = storage.load_family(path)
    assert back.params["kind"] == "transversal"
    assert back.x_group is None and back.a_group is not None
    assert back.x_labels == f.x_labels
    assert np.array_equal(index_table(back), index_table(f))


def test_edited_table_loads_as_plain_table(tmp_path):
    path = tmp_path / "g.json"
    storage.save_family(toeplitz(2, 1, 2), path)
    data = json.loads(path.read_text())
    data["rows"][0][0] = 1
    path.write_text(json.dumps(data))
    back = storage.load_family(path)
    assert back.table is not None
    assert back.params["kind"] == "toeplitz"
    assert index_table(back)[0, 0] == 1


def test_constructed_family_round_trip(tmp_path):
    f = seed_extension(toeplitz(2, 1, 2), cyclic_quasigroup(2))
    path = tmp_path / "ext.json"
    storage.save_family(f, path, notes={"source": "test"})
    data = json.loads(path.read_text())
    assert data["notes"] == {"source": "test"}
    assert list(data) == sorted(data)
    assert np.array_equal(index_table(storage.load_family(path)), index_table(f))


def test_structures_are_told_apart(tmp_path):
    M = mosaic_from_function(toeplitz(2, 1, 2))
    mosaic_path = tmp_path / "m.json"
    storage.save_json(storage.mosaic_to_file(M), mosaic_path)
    loaded = storage.load_mosaic(mosaic_path)
    assert np.array_equal(loaded.stack(), M.stack())

    total_path = tmp_path / "sum.json"
    storage.save_json(storage.incidence_to_file(sum_mosaic(M)), total_path)
    loaded = storage.load_structure(total_path)
    assert loaded.blocks == sum_mosaic(M).blocks
    with pytest.raises(HashDesignError):
        storage.load_mosaic(total_path)


def test_source_file_checks_mass():
    with pytest.raises(ValidationError):
        SourceFile(x_labels=["0"], z_labels=["z"], probabilities=[["1/2"]])
    with pytest.raises(ValidationError):
        SourceFile(x_labels=["0", "0"], z_labels=["z"], probabilities=[["1/2"], ["1/2"]])
    src = SourceFile(x_labels=["0", "1"], z_labels=["z"], probabilities=[["1/3"], ["2/3"]])
    assert src.matrix() == [[Fraction(1, 3)], [Fraction(2, 3)]]


def test_latin_square_file(tmp_path):
    path = tmp_path / "latin.json"
    path.write_text(json.dumps({"labels": ["0", "1"], "rows": [["1", "0"], ["0", "1"]]}))
    Q = storage.load_latin_square(path)
    assert Q.table.tolist() == [[1, 0], [0, 1]]


def test_settings_override(monkeypatch):
    monkeypatch.setenv("UHASH_JOBS", "3")
    assert get_settings().jobs == 3
    settings = override_settings(table_budget=50, jobs=None)
    assert settings.table_budget == 50
    assert settings.jobs == 3
    with pytest.raises(ValidationError):
        override_settings(jobs=0)


def test_random_seed_follows_environment(monkeypatch, rng):
    assert rng.random() == random.Random(get_settings().rng_seed).random()
    monkeypatch.setenv("UHASH_RNG_SEED", "17")
    reset_settings()
    assert get_settings().rng_seed == 17


def test_hypothesis_runs_are_reproducible_by_default():
    assert hypothesis_settings.get_profile("reproducible").derandomize
    assert not hypothesis_settings.get_profile("explore").derandomize
