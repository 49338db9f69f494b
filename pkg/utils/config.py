import os
import json

from .fs import read_first_matching_file

CACHED_CONFIGS = {}

CONFIG_SEARCH_PATHS = ["configs", "data-configs"]

def load_named_config(name:str) -> dict:
    """
    Loads a configuration with the specified name from one of the following locations:
    * The CONFIG_<NAME> environment variable (a JSON document)
    * A file named <name>, <name>.json or <name>.conf in one of the config folders
    """
    global CACHED_CONFIGS

    ## Check if the config is already loaded
    if name in CACHED_CONFIGS:
        return CACHED_CONFIGS[name]

    config_item = None

    ## Check if the config is specified in the environment variables
    config_str = os.environ.get(f"CONFIG_{name.upper().replace('-', '_')}", None)
    if config_str is not None:
        config_item = json.loads(config_str)

    ## Check if the config is specified in a file
    if config_item is None:
        config_str = read_first_matching_file(name, CONFIG_SEARCH_PATHS, [".json", ".conf"])
        if config_str is not None:
            config_item = json.loads(config_str)

    ## If config is not found, raise an error
    if config_item is None:
        raise ValueError(f"The Configuration with name '{name}' was not found")
    if not isinstance(config_item, dict):
        raise ValueError(f"The Configuration with name '{name}' must be a JSON object")

    ## Cache the config
    CACHED_CONFIGS[name] = config_item

    return config_item


def resolve_config_value(val:any) -> any:
    """
    If the value is a reference to an environment variable (eg. "${SAFE_SEED}"),
    then replace it with the value of that env variable
    """
    if type(val) is str and val.startswith("${") and val.endswith("}"):
        return os.getenv(val[2:-1], None)
    return val


def clear_config_cache():
    global CACHED_CONFIGS
    CACHED_CONFIGS = {}
