import io
import json

import azure.functions as func

from data import write_csv
from data.request_context import RequestContext
from function_app import fit_plan, transform_rows


def call(function, req:func.HttpRequest) -> func.HttpResponse:
    return function.build().get_user_function()(req)


def test_request_context_reads_body_then_params():
    req = func.HttpRequest("POST", "/api/fit", params={"label": "target", "alpha": "0.2"}, body=json.dumps({"n-trees": 7, "label": "y"}).encode("utf-8"))
    context = RequestContext(req)
    assert context.label == "y"
    assert context.get_req_val("alpha") == "0.2"
    assert context.get_req_val("missing", "fallback") == "fallback"

    cfg = context.build_config()
    assert cfg.gbdt.n_trees == 7
    assert cfg.selector.alpha == 0.2


def test_request_context_ignores_non_json_body():
    req = func.HttpRequest("POST", "/api/fit", params={"mode": "rand"}, body=b"a,b,y\n1,2,0\n")
    context = RequestContext(req)
    assert context.body is None
    assert context.build_config().mode == "rand"


def test_fit_route_returns_a_plan(small_data):
    buffer = io.StringIO()
    write_csv(small_data, buffer, "y")
    req = func.HttpRequest("POST", "/api/fit", params={"label": "y", "n-trees": "10", "max-depth": "3"}, body=buffer.getvalue().encode("utf-8"))

    response = call(fit_plan, req)
    assert response.status_code == 200
    body = json.loads(response.get_body())
    assert body["psi"]["format"] == "safe-psi"
    assert len(body["trace"]) == 1
    assert {row["feature"] for row in body["report"]} >= set(small_data.names)


def test_fit_route_rejects_bad_settings(small_data):
    req = func.HttpRequest("POST", "/api/fit", params={"label": "y", "mode": "greedy"}, body=b"x1,y\n1,0\n2,1\n")
    response = call(fit_plan, req)
    assert response.status_code == 400
    assert "Unknown mode" in json.loads(response.get_body())["error"]


def test_transform_route():
    psi = {"format": "safe-psi", "version": 1, "features": ["a", "mul(a,b)"]}
    req = func.HttpRequest("POST", "/api/transform", body=json.dumps({"psi": psi, "rows": [{"a": 2, "b": 5}, {"a": 3, "b": 7}]}).encode("utf-8"))
    response = call(transform_rows, req)
    assert response.status_code == 200
    body = json.loads(response.get_body())
    assert body["columns"] == ["a", "mul(a,b)"]
    assert body["rows"] == [{"a": 2.0, "mul(a,b)": 10.0}, {"a": 3.0, "mul(a,b)": 21.0}]


def test_transform_route_errors():
    missing_plan = func.HttpRequest("POST", "/api/transform", body=json.dumps({"rows": []}).encode("utf-8"))
    assert call(transform_rows, missing_plan).status_code == 400

    psi = {"format": "safe-psi", "version": 1, "features": ["mul(a,b)"]}
    missing_column = func.HttpRequest("POST", "/api/transform", body=json.dumps({"psi": psi, "rows": [{"a": 1}]}).encode("utf-8"))
    response = call(transform_rows, missing_column)
    assert response.status_code == 400
    assert json.loads(response.get_body())["error"] == "Missing base feature column(s): 'b'"


def test_request_settings_override_a_nested_named_config(monkeypatch):
    monkeypatch.setenv("CONFIG_QUICK", json.dumps({"name": "quick", "gbdt": {"n-trees": 20, "max-depth": 3}, "selector": {"alpha": 0.05}}))
    req = func.HttpRequest("POST", "/api/fit", params={"config": "quick", "n-trees": "5"}, body=b"")
    cfg = RequestContext(req).build_config()
    assert cfg.name == "quick"
    assert cfg.gbdt.n_trees == 5
    assert cfg.gbdt.max_depth == 3
    assert cfg.selector.alpha == 0.05
