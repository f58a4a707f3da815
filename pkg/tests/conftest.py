import pytest

from bloodsmear.synthetic import write_manifest, write_suite


@pytest.fixture(scope="session")
def suite(tmp_path_factory):
    """Rendered twelve-image suite plus its manifest, shared across tests."""
    directory = tmp_path_factory.mktemp("suite")
    rows = write_suite(directory)
    manifest = write_manifest(directory, rows)
    return directory, rows, manifest
