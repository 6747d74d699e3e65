from unittest.mock import MagicMock, patch

import pytest

from ukblab.algebra.core import generate_algebra
from ukblab.harness import suite as suite_module
from ukblab.harness.catalog import catalog_algebra
from ukblab.harness.suite import (
    CLASSIFIED_STATES,
    CONTEXTS_PER_INSTANCE,
    DEFAULT_SAMPLES,
    DISTANCE_TRIPLES,
    Instance,
    build_contexts,
    build_instances,
    classification_section,
    correspondence_section,
    determinism_section,
    distance_section,
    gelfand_section,
    hereditary_section,
    ideal_section,
    structure_section,
    verify_all,
)
from ukblab.utils.report import CheckSuite

SECTION_NAMES = [
    "structure_section",
    "distance_section",
    "gelfand_section",
    "ideal_section",
    "hereditary_section",
    "classification_section",
    "subbundle_section",
    "correspondence_section",
    "determinism_section",
]


@pytest.fixture(scope="module")
def small_instances():
    return [Instance(name, catalog_algebra(name)) for name in ("M2", "M2+M3", "CI2")]


@pytest.fixture(scope="module")
def small_contexts(small_instances):
    return build_contexts(small_instances[:2])


def test_build_instances(m2):
    names = [instance.name for instance in build_instances()]
    assert names == ["M2", "M3", "M2+M3", "CI2", "M2x2", "D3", "random-1", "random-2"]

    instances = build_instances(algebra=m2, random_instances=1)
    assert [instance.name for instance in instances][-2:] == ["input", "random-1"]
    assert instances[-2].algebra is m2


def test_build_instances_reproducible():
    first = build_instances(random_instances=1)[-1].algebra
    second = build_instances(random_instances=1)[-1].algebra
    assert first.dim == second.dim
    assert first.ambient_dim == second.ambient_dim


def test_build_contexts(small_instances):
    contexts = build_contexts(small_instances[:2])
    assert [context.name for context in contexts] == [
        "M2:unit",
        "M2:corner-1",
        "M2:corner-2",
        "M2+M3:unit",
        "M2+M3:corner-1",
        "M2+M3:corner-2",
    ]
    assert len(contexts) == 2 * (1 + CONTEXTS_PER_INSTANCE)


def test_build_contexts_skips_zero_algebra():
    assert build_contexts([Instance("zero", generate_algebra(2, []))]) == []


@pytest.mark.parametrize(
    "section,name",
    [
        (structure_section, "structure"),
        (distance_section, "distance"),
        (gelfand_section, "gelfand"),
        (ideal_section, "ideals"),
    ],
)
def test_instance_sections(section, name, small_instances):
    result = section(small_instances, 3)
    assert isinstance(result, CheckSuite)
    assert result.name == name
    assert result.results
    assert result.passed, result.failures()


@pytest.mark.parametrize(
    "section,name",
    [
        (hereditary_section, "hereditary_roundtrips"),
        (classification_section, "classification"),
        (correspondence_section, "ideal_correspondence"),
    ],
)
def test_context_sections(section, name, small_contexts):
    result = section(small_contexts, 3)
    assert result.name == name
    assert result.passed, result.failures()


def test_distance_section_clauses(small_instances):
    result = distance_section(small_instances, 2)
    for clause in ("metric_axioms", "cross_fiber", "fiber_diameter"):
        assert result.result(clause).passed


def test_distance_section_default_counts(small_instances):
    # a default run draws the full number of triples per fiber
    with patch.object(
        suite_module, "point_distance", wraps=suite_module.point_distance
    ) as distance:
        distance_section(small_instances[:1], DEFAULT_SAMPLES)
    # five distances per triple, plus the diameter of the single fiber of M_2
    assert distance.call_count == 5 * DISTANCE_TRIPLES + 1
    with patch.object(
        suite_module, "point_distance", wraps=suite_module.point_distance
    ) as distance:
        distance_section(small_instances[:1], DEFAULT_SAMPLES // 10)
    assert distance.call_count == 5 * DISTANCE_TRIPLES // 10 + 1


def test_classification_section_default_counts(small_contexts):
    with patch.object(
        suite_module, "distance_to_xi_image", wraps=suite_module.distance_to_xi_image
    ) as distance:
        result = classification_section(small_contexts[:1], DEFAULT_SAMPLES)
    assert distance.call_count >= CLASSIFIED_STATES
    assert result.result("region_agreement").passed


def test_determinism_section():
    result = determinism_section(2)
    assert result.name == "determinism"
    assert result.result("identical_reports").passed


def section_mocks():
    return {name: MagicMock(return_value=CheckSuite(name)) for name in SECTION_NAMES}


@patch("ukblab.harness.suite.build_contexts")
@patch("ukblab.harness.suite.build_instances")
def test_verify_all(mock_build_instances, mock_build_contexts, m2):
    mock_build_instances.return_value = ["instances"]
    mock_build_contexts.return_value = ["contexts"]
    mocks = section_mocks()
    with patch.multiple("ukblab.harness.suite", **mocks):
        results = verify_all(algebra=m2, samples=7)

    assert [result.name for result in results] == SECTION_NAMES
    mock_build_instances.assert_called_once()
    assert mock_build_instances.call_args.args[1] is m2
    mock_build_contexts.assert_called_once_with(["instances"], suite_module.DEFAULT_TOLERANCES)
    mocks["structure_section"].assert_called_once_with(["instances"], 7, suite_module.DEFAULT_TOLERANCES)
    mocks["hereditary_section"].assert_called_once_with(["contexts"], 7, suite_module.DEFAULT_TOLERANCES)
    mocks["subbundle_section"].assert_called_once_with(["instances"], 7, suite_module.DEFAULT_TOLERANCES)
    mocks["determinism_section"].assert_called_once_with(7, suite_module.DEFAULT_TOLERANCES)


@patch("ukblab.harness.suite.tqdm")
@patch("ukblab.harness.suite.build_contexts")
@patch("ukblab.harness.suite.build_instances")
def test_verify_all_progress(mock_build_instances, mock_build_contexts, mock_tqdm):
    mock_tqdm.return_value.__iter__.return_value = iter([])
    assert verify_all(progress=True) == []
    kwargs = mock_tqdm.call_args.kwargs
    assert kwargs["desc"] == "Verifying"
    assert kwargs["disable"] is False

    verify_all(progress=False)
    assert mock_tqdm.call_args.kwargs["disable"] is True
