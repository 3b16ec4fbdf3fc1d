import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evirank.config import EngineConfig
from evirank.corpus import build_index, load_corpus_jsonl, load_topics_tsv
from evirank.pipeline import SearchPipeline
from evirank.providers import build_provider_set

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(scope="session")
def providers():
    return build_provider_set({})


@pytest.fixture(scope="session")
def fixture_docs():
    return load_corpus_jsonl(FIXTURES / "corpus.jsonl")


@pytest.fixture(scope="session")
def fixture_index(fixture_docs):
    return build_index(fixture_docs)


@pytest.fixture(scope="session")
def fixture_topics():
    return load_topics_tsv(FIXTURES / "topics.tsv")


@pytest.fixture(scope="session")
def fixture_pipeline(fixture_index, providers):
    config = EngineConfig(articles_per_query=5)
    return SearchPipeline(fixture_index, providers, config)


@pytest.fixture()
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def synth(tmp_path_factory):
    from synthbench import build_benchmark

    bench = build_benchmark()
    paths = bench.write(tmp_path_factory.mktemp("synth"))
    return bench, paths


@pytest.fixture(scope="session")
def synth_pipeline(synth):
    bench, paths = synth
    docs = load_corpus_jsonl(paths["corpus"])
    index = build_index(docs)
    providers = build_provider_set({}, kb_fixture_path=paths["kb"])
    return SearchPipeline(index, providers, EngineConfig())
