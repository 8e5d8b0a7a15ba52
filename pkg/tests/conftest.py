import pytest

from sbrbench import datagen
from sbrbench.corpus import BugReport, Dataset, load_dataset
from sbrbench.metrics import NSBR, SBR


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """The five synthetic replica CSVs, generated once per session."""
    path = tmp_path_factory.mktemp("corpus")
    datagen.write_corpus(path)
    return path


@pytest.fixture(scope="session")
def datasets(corpus_dir):
    return {
        name: load_dataset(corpus_dir / f"{name}.csv", name)
        for name in datagen.PROJECT_NAMES
    }


def make_dataset(texts_and_labels, name="toy"):
    """Dataset from (text, label) pairs; ids and ranks follow list order."""
    reports = tuple(
        BugReport(id=str(i + 1), text=text, label=label, rank=i)
        for i, (text, label) in enumerate(texts_and_labels)
    )
    return Dataset(name=name, reports=reports)


def sbr(text):
    return (text, SBR)


def nsbr(text):
    return (text, NSBR)
