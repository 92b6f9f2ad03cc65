import json
import math

import pytest

from covplan.config import PlannerConfig, load_config
from covplan.errors import InvalidROIError, InvalidSpecError
from covplan.io import dumps_canonical, load_rois, partition_set_to_document, rois_from_document, rois_to_document
from covplan.decompose import decompose
from covplan.roi import PolygonROI

from helpers import ring


def test_defaults():
    cfg = PlannerConfig()
    assert cfg.width == 10.0 and cfg.alpha == 0.99 and cfg.rho == 0.15
    assert math.isinf(cfg.limits.j_max)
    ga = cfg.ga_config()
    assert (ga.population, ga.generations, ga.lambda_turns) == (450, 350, 0.15)


def test_yaml_config_and_override(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("footprint: {altitude: 10, half_angle: 0.7853981633974483}\nalpha: 0.95\n"
                    "limits: {v_max: 3, a_max: 1, j_max: 2}\nseed: 7\n")
    cfg = load_config(path)
    assert cfg.width == pytest.approx(20.0)
    assert cfg.limits.j_max == 2.0 and cfg.seed == 7
    over = cfg.override(width=4.0, rho=None, seed=9)
    assert over.width == 4.0 and over.rho == cfg.rho and over.seed == 9


def test_json_config_round_trip(tmp_path):
    cfg = PlannerConfig().override(alpha=0.9, width=7.5)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg


@pytest.mark.parametrize("doc", [{"alpha": 0}, {"rho": -1}, {"bogus": 1}, {"footprint": {"wdth": 2}},
                                 {"ga": {"population": 0}}, {"exact_limit": 0}, {"limits": {"v_max": 0}}])
def test_bad_config(doc):
    with pytest.raises(InvalidSpecError):
        PlannerConfig.from_dict(doc)


def test_roi_documents(tmp_path):
    rois = [PolygonROI([(0, 0), (4, 0), (4, 4), (0, 4)], [[(1, 1), (2, 1), (2, 2), (1, 2)]], id="a"),
            PolygonROI([(0, 0), (1, 0), (0, 1)], id="b")]
    doc = rois_to_document(rois)
    assert rois_from_document(doc) == rois
    assert rois_from_document(doc["polygons"]) == rois
    assert rois_from_document(doc["polygons"][0]) == rois[:1]
    p = tmp_path / "r.json"
    p.write_text(json.dumps(doc))
    assert load_rois(p) == rois
    with pytest.raises(InvalidROIError):
        rois_from_document({"polygons": [{"id": "x"}]})


def test_partition_document_is_canonical():
    doc = partition_set_to_document(decompose(ring(2.0)), "ring")
    assert len(doc["polygons"]) == 2
    text = dumps_canonical(doc)
    assert dumps_canonical(json.loads(text)) == text
    for p in doc["polygons"]:
        assert p["feasible_axes"] and p["outer"]
