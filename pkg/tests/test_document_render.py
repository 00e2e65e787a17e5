import json

import pytest

from dirichlet_atlas import errors, make_preset
from dirichlet_atlas.cli import analyse, cached_zeros, partition_document
from dirichlet_atlas.document import AtlasDocument, Cache, cache_key, provenance
from dirichlet_atlas.render import render_svg
from dirichlet_atlas.window import GridWindow


@pytest.fixture(scope="module")
def doc(zeta, zeta_wide):
    spec, w, _ = zeta_wide
    d = partition_document(spec, w, 2, 1e-10, Cache(None))
    d.provenance = provenance({"tol": 1e-10}, "test")
    return d


def test_json_round_trip(doc, tmp_path):
    path = doc.save(tmp_path / "sub" / "doc.json")
    back = AtlasDocument.load(path)
    assert back.to_json() == doc.to_json()
    assert len(back.domains) == 2 and len(back.eta_arcs) == 1
    assert back.dangling_references() == []


def test_dangling_reference_detected(doc):
    d = AtlasDocument.from_json(doc.to_json())
    d.domains[0].contains_zero = "f:999"
    assert ("domain", d.domains[0].index, "f:999") in d.dangling_references()


def test_provenance_fields(doc):
    p = doc.provenance
    assert p["tool"] == "dirichlet_atlas" and p["tolerances"] == {"tol": 1e-10}
    assert p["created"].endswith("Z")


def test_cache_key_depends_on_inputs():
    w = GridWindow(0, 1, 0, 1, 64, 64).to_dict()
    a = cache_key("h", "zeros:f", w, {"tol": 1e-10})
    assert a == cache_key("h", "zeros:f", w, {"tol": 1e-10})
    assert a != cache_key("h", "zeros:f", w, {"tol": 1e-9})
    assert a != cache_key("h", "zeros:f-prime", w, {"tol": 1e-10})


def test_cache_hit_is_bit_identical(zeta, tmp_path):
    cache = Cache(tmp_path)
    w = GridWindow(0, 1, 10, 30, 64, 64)
    first = cached_zeros(zeta, "f", w, 1e-10, cache)
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    raw = files[0].read_bytes()
    second = cached_zeros(zeta, "f", w, 1e-10, cache)
    assert [z.to_dict() for z in first] == [z.to_dict() for z in second]
    assert files[0].read_bytes() == raw


def test_cached_analysis_matches_fresh(zeta, tmp_path):
    w = GridWindow(-2, 3, 10, 26, 128, 128)
    cache = Cache(tmp_path)
    fresh = analyse(zeta, w, 1e-10, cache)
    again = analyse(zeta, w, 1e-10, cache)
    for a, b in zip(fresh, again):
        assert json.dumps([x.to_dict() for x in a]) == json.dumps([x.to_dict() for x in b])


def test_cache_env_variable(monkeypatch, tmp_path):
    monkeypatch.setenv("ATLAS_CACHE_DIR", str(tmp_path))
    c = Cache()
    c.put("k", {"a": 1})
    assert c.get("k") == {"a": 1}
    assert (tmp_path / "k.json").exists()


def test_disabled_cache(monkeypatch):
    monkeypatch.delenv("ATLAS_CACHE_DIR", raising=False)
    c = Cache()
    c.put("k", [1])
    assert c.get("k") is None


# -- rendering ---------------------------------------------------------------

def test_svg_is_deterministic(doc, tmp_path):
    a = render_svg(doc, path=tmp_path / "a.svg")
    b = render_svg(AtlasDocument.from_json(doc.to_json()), path=tmp_path / "b.svg")
    assert a == b
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    for layer in ("domains", "real", "eta", "zeros", "branch"):
        assert f'<g id="{layer}"' in a


def test_layer_subset(doc):
    svg = render_svg(doc, ["zeros"])
    assert '<g id="zeros"' in svg and '<g id="domains"' not in svg


def test_empty_document_gives_axes():
    svg = render_svg(AtlasDocument(make_preset("zeta").descriptor()))
    assert svg.startswith("<svg") and "Re s" in svg and "<g id=" not in svg


def test_missing_layer(doc):
    with pytest.raises(errors.MissingLayer):
        render_svg(doc, ["circles"])
    with pytest.raises(errors.MissingLayer):
        render_svg(doc, ["nonsense"])
