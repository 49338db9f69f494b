import azure.functions as func
import json
import logging

app = func.FunctionApp(http_auth_level=func.AuthLevel.FUNCTION)

logging.getLogger("azure").setLevel(logging.ERROR) ## Only log the ERRORs from the azure libraries (some of which are otherwise quite verbose in their logging)


def _json_response(body:any, status_code:int = 200) -> func.HttpResponse:
    return func.HttpResponse(
        body=json.dumps(body, indent=4),
        status_code=status_code,
        headers={
            "content-type": "application/json",
        }
    )


def _error_response(e:Exception) -> func.HttpResponse:
    message = e.args[0] if isinstance(e, KeyError) and len(e.args) > 0 else str(e)
    logging.warning(f"Rejected request: {message}")
    return _json_response({"error": message}, 400)


@app.route(route="fit", methods=["POST"])
def fit_plan(req: func.HttpRequest) -> func.HttpResponse:
    """
    Fit a plan on the CSV training data in the request body; settings come from the query string
    """
    import io
    from data import load_csv, serialize
    from data.request_context import RequestContext
    from engine import run

    context = RequestContext(req)
    try:
        cfg = context.build_config()
        train = load_csv(io.BytesIO(req.get_body()), context.label, context.missing_policy)
        plan, report, trace = run(train, None, cfg)
    except (ValueError, KeyError) as e:
        return _error_response(e)

    return _json_response({
        "psi": json.loads(serialize(plan)),
        "report": report.rows(),
        "trace": [record.to_dict() for record in trace.iterations],
        "fallback": trace.fallback,
    })


@app.route(route="transform", methods=["POST"])
def transform_rows(req: func.HttpRequest) -> func.HttpResponse:
    """
    Real-time inference: apply the plan in the body ("psi") to the rows in the body ("rows")
    """
    import pandas as pd
    from data import deserialize, from_frame
    from data.request_context import RequestContext
    from operators import apply_plan

    context = RequestContext(req)
    try:
        document = context.get_req_val("psi", None)
        if document is None:
            raise ValueError("No plan ('psi') specified")
        rows = context.get_req_val("rows", None)
        if not isinstance(rows, list):
            raise ValueError("No 'rows' list specified")

        plan = deserialize(document if isinstance(document, str) else json.dumps(document))
        frame = pd.DataFrame(rows)
        missing = [name for name in plan.base_names() if name not in frame.columns]
        if len(rows) > 0 and len(missing) > 0:
            raise KeyError(f"Missing base feature column(s): {', '.join(repr(m) for m in missing)}")

        transformed = []
        if len(rows) > 0:
            out = apply_plan(plan, from_frame(frame[plan.base_names()], None))
            transformed = out.to_frame(None).to_dict(orient="records")
    except (ValueError, KeyError) as e:
        return _error_response(e)

    return _json_response({
        "columns": plan.names,
        "rows": transformed,
    })
