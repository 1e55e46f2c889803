import json
import math

import sdforge

STUDENT = json.dumps(
    {
        "schema_id": "student",
        "tables": [
            {
                "name": "student",
                "columns": [
                    {"name": "name", "type": "text", "values": ["amy", "bob", "carol"]},
                    {"name": "height", "type": "number", "values": ["170", "180", "165"]},
                    {"name": "age", "type": "number", "values": ["17", "18"]},
                    {"name": "class", "type": "text", "values": ["alpha", "beta"]},
                ],
            }
        ],
    }
)


def test_tokenize():
    assert sdforge.tokenize("Who's there?") == ["who", "'", "s", "there", "?"]
    assert sdforge.normalize_phrase("The  Highest") == "the highest"


def test_canonical_sql_round_trip():
    sql = "select max(height) from student"
    canonical = sdforge.canonical_sql(sql, STUDENT)
    assert canonical == "SELECT MAX(student.height) FROM student"
    assert sdforge.canonical_sql(canonical, STUDENT) == canonical


def test_sampling_is_deterministic():
    a = sdforge.sample_sql(STUDENT, 25, seed=7)
    b = sdforge.sample_sql(STUDENT, 25, seed=7)
    c = sdforge.sample_sql(STUDENT, 25, seed=8)
    assert a == b
    assert a != c
    for sql in a:
        assert sdforge.canonical_sql(sql, STUDENT) == sql


def test_label_pair_worked_example():
    record = json.loads(
        sdforge.label_pair(
            "show height of the student who is the highest in the class",
            "SELECT MAX(height) FROM student",
            STUDENT,
        )
    )
    assert record["schema_id"] == "student"
    deps = record["dependencies"]
    assert all(0.0 < d["score"] <= 1.0 for d in deps)
    agg = [d for d in deps if d["label"] == "SELECT-Agg"]
    assert agg and agg[0]["head"] == "student.height" and agg[0]["span"] == [7, 9]


def test_ngram_match():
    hit = sdforge.ngram_match("list the students in class alpha", "student", tau=0.3)
    assert hit is not None
    begin, end, confidence = hit
    assert (begin, end) == (2, 3)
    assert 0.0 < confidence <= 1.0
    assert sdforge.ngram_match("nothing relevant here", "zebra", tau=0.1) is None


def test_competence():
    assert sdforge.competence(0, 10, 0.3) == 0.3
    assert sdforge.competence(10, 10, 0.3) == 1.0
    assert abs(sdforge.competence(1, 2, 0.2) - math.sqrt(0.52)) <= 1e-12


def test_joint_loss():
    assert abs(sdforge.joint_loss(1.0, 1.0, 1.0, 1.0, 1.0, 1.0) - 1.5) <= 1e-12
    loss, d_alpha, _, _ = sdforge.joint_loss_with_grads(1.0, 0.4, 0.9, 1.0, 1.0, 1.0)
    assert loss > 0.0
    assert abs(d_alpha) <= 1e-12  # stationary at alpha**2 == l_mlm


def test_seed_streams():
    assert sdforge.splitmix64(0) != sdforge.splitmix64(1)
    assert sdforge.derive_seed(5, "a") != sdforge.derive_seed(5, "b")
    assert sdforge.derive_seed(5, "a") == sdforge.derive_seed(5, "a")


def test_dependency_type_table():
    assert len(sdforge.DEPENDENCY_TYPES) == 17
    assert sdforge.DEPENDENCY_TYPES[0] == "None"
    assert "SELECT-Agg" in sdforge.DEPENDENCY_TYPES
    assert "LIMIT-Value" in sdforge.DEPENDENCY_TYPES
