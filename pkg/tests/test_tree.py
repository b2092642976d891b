import pytest

from app.core.errors import DataError
from app.models.schemas import TreeParams
from app.pipelines.datagen import generate_dataset
from app.services.features import DT2_FEATURES
from app.services.tree import Leaf, Split, describe_split, extract_rules, gini, predict, train_tree
from conftest import make_record

ONE_LEAF = TreeParams(min_leaf=1)


def _ages(*pairs):
    return [make_record(age=age, admitted=label) for age, label in pairs]


@pytest.fixture
def stump():
    records = _ages((10, False), (20, False), (60, True), (70, True))
    return train_tree(records, ["age"], ONE_LEAF, name="stump")


def test_gini():
    assert gini(0, 0) == 0.0
    assert gini(2, 2) == 0.0
    assert gini(1, 2) == 0.5
    assert gini(1, 4) == pytest.approx(0.375)


def test_one_dimensional_split_at_midpoint(stump):
    root = stump.root
    assert isinstance(root, Split)
    assert root.feature == "age" and root.threshold == 40.0
    assert isinstance(root.left, Leaf) and root.left.counts == (2, 0)
    assert isinstance(root.right, Leaf) and root.right.counts == (0, 2)
    assert root.gain == pytest.approx(0.5)
    assert describe_split(root) == "age < 40"


def test_training_log_names_the_root_split(caplog):
    records = _ages((10, False), (20, False), (60, True), (70, True))
    with caplog.at_level("INFO", logger="app.services.tree"):
        train_tree(records, ["age"], ONE_LEAF, name="stump")
    assert "root split age < 40" in caplog.text


def test_stump_predictions(stump):
    assert predict(stump, make_record(age=15)) is False
    assert predict(stump, make_record(age=65)) is True
    assert predict(stump, make_record(age=40)) is True
    record = make_record(age=39.9)
    assert stump.predict(record) == stump.predict(record)


def test_stump_rules(stump):
    rules = extract_rules(stump)
    assert len(rules.clauses) == 1
    assert rules.clauses[0].render() == ["age >= 40"]


def test_identical_labels_give_single_leaf():
    records = _ages((10, True), (50, True), (90, True))
    tree = train_tree(records, ["age"], ONE_LEAF)
    assert isinstance(tree.root, Leaf)
    assert tree.depth() == 0
    rules = extract_rules(tree)
    assert len(rules.clauses) == 1
    assert rules.clauses[0].render() == ["(always)"]


def test_single_no_leaf_never_admits():
    tree = train_tree(_ages((10, False), (30, False)), ["age"], ONE_LEAF)
    assert tree.predict(make_record(age=80)) is False
    assert extract_rules(tree).clauses == ()


def test_max_depth_one_is_a_stump():
    records = _ages((10, False), (20, True), (30, False), (40, True), (50, False), (60, True))
    tree = train_tree(records, ["age"], TreeParams(max_depth=1, min_leaf=1))
    assert tree.depth() <= 1


def test_empty_training_set_rejected():
    with pytest.raises(DataError):
        train_tree([], ["age"])


def test_categorical_split_isolates_saturday():
    days = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"]
    records = [make_record(day=d, admitted=(d == "Sat")) for d in days for _ in range(2)]
    tree = train_tree(records, DT2_FEATURES, ONE_LEAF)
    root = tree.root
    assert isinstance(root, Split) and root.feature == "arrival_day"
    assert "Sat" not in root.categories
    assert "Mon" in root.categories
    assert tree.predict(make_record(day="Sat")) is True
    assert tree.predict(make_record(day="Wed")) is False
    rules = extract_rules(tree)
    assert rules.clauses[0].render() == ["arrival_day in {Sat}"]


def test_equal_gain_prefers_earlier_feature():
    records = [
        make_record(age=10, hour=1.0, admitted=False),
        make_record(age=20, hour=2.0, admitted=False),
        make_record(age=60, hour=20.0, admitted=True),
        make_record(age=70, hour=21.0, admitted=True),
    ]
    tree = train_tree(records, DT2_FEATURES, ONE_LEAF)
    assert tree.root.feature == "age"


def test_split_minimises_weighted_child_gini():
    # age < 25 separates the labels, so the gain is the whole parent impurity
    records = _ages((10, False), (20, False), (30, True), (40, True), (50, True))
    tree = train_tree(records, ["age"], TreeParams(max_depth=1, min_leaf=1))
    assert tree.root.threshold == 25.0
    assert tree.root.gain == pytest.approx(gini(3, 5))


def test_min_leaf_blocks_small_children():
    records = _ages((10, True), (20, False), (30, False), (40, False))
    tree = train_tree(records, ["age"], TreeParams(min_leaf=2))
    assert tree.root.threshold == 25.0


def test_extracted_rules_agree_with_tree():
    records = generate_dataset(1500, seed=11)
    tree = train_tree(records[:1000], DT2_FEATURES, name="DT2")
    rules = extract_rules(tree)
    for record in records:
        assert rules.predict(record) == tree.predict(record)


def test_render_marks_leaves():
    records = generate_dataset(300, seed=3)
    tree = train_tree(records, DT2_FEATURES, name="DT2")
    text = tree.render()
    assert text.startswith("DT2: features=")
    assert "1) root" in text
    assert text.count(" *\n") == len(tree.leaves())
    assert "importance:" in text
    assert sum(tree.importance().values()) == pytest.approx(1.0) or tree.depth() == 0
