import azure.functions as func

from utils import load_named_config
from .dataset import DEFAULT_LABEL_COLUMN, MISSING_REJECT
from .safe_config import SafeConfig

## Request fields that are not configuration
NON_CONFIG_FIELDS = ["config", "label", "missing-policy", "psi", "rows", "code"]


class RequestContext:
    req:func.HttpRequest = None
    body:dict = None
    """The JSON body, None when the body is not a JSON object (eg. a CSV upload)"""
    config_name:str = None
    label:str = DEFAULT_LABEL_COLUMN
    missing_policy:str = MISSING_REJECT

    def __init__(self, req:func.HttpRequest) -> None:
        self.req = req
        ## Body must be parsed first, as it can be used to set other values
        self.__parse_req_body(req)
        self.config_name = self.get_req_val("config", None)
        self.label = self.get_req_val("label", DEFAULT_LABEL_COLUMN)
        self.missing_policy = self.get_req_val("missing-policy", MISSING_REJECT)

    def get_req_val(self, field:str, default_val:any = None) -> any:
        """
        Get a value from the body of the request, or return a default value if no value is provided for the field
        """
        val = None
        if self.body is not None:
            val = self.body.get(field, None)
        if val is None:
            val = self.req.params.get(field, None)
        if val is None:
            val = self.req.route_params.get(field, None)
        return val if val is not None else default_val

    def build_config(self) -> SafeConfig:
        """
        The named config (if one is requested) overlaid with the settings given on the request.
        Settings use the same keys as config files, eg. `?mode=rand&n-iter=2&alpha=0.05`
        """
        config_item = dict(load_named_config(self.config_name)) if self.config_name else {}
        for source in (self.req.params, self.body or {}):
            for key, val in source.items():
                if key not in NON_CONFIG_FIELDS:
                    config_item[key] = val
        return SafeConfig.from_dict(config_item, self.config_name or "request")

    def __parse_req_body(self, req:func.HttpRequest):
        try:
            body = req.get_json()
        except ValueError:
            body = None
        self.body = body if isinstance(body, dict) else None
