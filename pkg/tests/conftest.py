import pytest

from data import Dataset, write_csv
from utils import clear_config_cache, set_thread_count
from tests.helpers import make_dataset


@pytest.fixture
def xor_train() -> Dataset:
    return make_dataset(3000, 6, seed=11)


@pytest.fixture
def xor_test() -> Dataset:
    return make_dataset(2000, 6, seed=12)


@pytest.fixture
def small_data() -> Dataset:
    return make_dataset(400, 4, seed=3)


@pytest.fixture
def write_dataset(tmp_path):
    def write(d:Dataset, file_name:str, label_column:str = "y") -> str:
        path = str(tmp_path / file_name)
        write_csv(d, path, label_column)
        return path
    return write


@pytest.fixture(autouse=True)
def reset_globals():
    clear_config_cache()
    yield
    set_thread_count(None)
    clear_config_cache()
