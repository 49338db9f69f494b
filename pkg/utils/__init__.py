
from .config import load_named_config, resolve_config_value, clear_config_cache
from .fs import read_first_matching_file, output_path, write_text
from .parallel import parallel_map, set_thread_count, get_thread_count
