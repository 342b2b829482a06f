import json
from pathlib import Path

import numpy as np
import pytest

from pepcd.dataio import csv_text, dumps_json, load_config, load_csv, write_atomic
from pepcd.errors import ConfigError, MissingLabel, NonNumericFeature, ParseError

IRIS = Path(__file__).parent / "data" / "iris.csv"


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCSV:
    def test_iris(self):
        ds = load_csv(IRIS)
        assert ds.X.shape == (150, 4) and ds.n_classes == 3
        assert ds.class_names[0] == "setosa" and np.bincount(ds.y).tolist() == [50, 50, 50]

    def test_headerless_numeric_labels(self, tmp_path):
        ds = load_csv(write(tmp_path, "1,2,0\n3,4,1\n5,6,0\n"))
        assert ds.X.tolist() == [[1, 2], [3, 4], [5, 6]] and ds.y.tolist() == [0, 1, 0]
        assert ds.feature_names == ["x0", "x1"]

    def test_label_by_name_and_first_column(self, tmp_path):
        p = write(tmp_path, "cls,a,b\nu,1,2\nv,3,4\n")
        ds = load_csv(p, label_col="cls")
        assert ds.feature_names == ["a", "b"] and ds.class_names == ["u", "v"]
        assert load_csv(p, label_col=0).X.tolist() == [[1, 2], [3, 4]]

    def test_unlabelled(self, tmp_path):
        ds = load_csv(write(tmp_path, "1,2\n3,4\n"), label_col=None)
        assert ds.y is None and ds.X.shape == (2, 2)

    def test_forced_header(self, tmp_path):
        ds = load_csv(write(tmp_path, "1,2,0\n3,4,1\n"), header=True)
        assert ds.X.shape == (1, 2) and ds.feature_names == ["1", "2"]

    def test_blank_lines_skipped(self, tmp_path):
        assert load_csv(write(tmp_path, "1,2,a\n\n3,4,b\n")).X.shape == (2, 2)

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, "a,b,c\n"))

    @pytest.mark.parametrize("bad", ["nan", "inf", "-Infinity"])
    def test_non_finite_reports_position(self, tmp_path, bad):
        with pytest.raises(NonNumericFeature) as exc:
            load_csv(write(tmp_path, f"1,2,a\n3,{bad},b\n"))
        assert exc.value.row == 2 and exc.value.col == 2
        assert "row 2, column 2" in str(exc.value)

    def test_text_feature(self, tmp_path):
        with pytest.raises(NonNumericFeature) as exc:
            load_csv(write(tmp_path, "1,2,a\n3,x,b\n"))
        assert exc.value.row == 2

    def test_ragged(self, tmp_path):
        with pytest.raises(ParseError) as exc:
            load_csv(write(tmp_path, "1,2,a\n3,b\n"))
        assert exc.value.row == 2

    def test_missing_label(self, tmp_path):
        with pytest.raises(MissingLabel):
            load_csv(write(tmp_path, "1,2,a\n3,4,\n"))

    def test_unknown_label_name(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, "a,b\n1,2\n"), label_col="y")

    def test_label_index_out_of_range(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, "1,2\n"), label_col=5)


class TestOutput:
    def test_write_atomic(self, tmp_path):
        p = tmp_path / "sub" / "out.txt"
        write_atomic(p, "one")
        write_atomic(p, "two")
        assert p.read_text() == "two"
        assert [f.name for f in p.parent.iterdir()] == ["out.txt"]

    def test_dumps_json_is_deterministic(self):
        obj = {"b": np.arange(2), "a": np.float64(0.5), 3: (1, 2)}
        text = dumps_json(obj)
        assert text == dumps_json(dict(reversed(list(obj.items()))))
        assert json.loads(text) == {"3": [1, 2], "a": 0.5, "b": [0, 1]}

    def test_csv_text(self):
        out = csv_text(["a", "b"], [[0.1, None], [1, "x"]], comments=["seed: 3"])
        assert out == "# seed: 3\na,b\n0.1,\n1,x\n"


class TestConfig:
    def test_key_value(self, tmp_path):
        p = write(tmp_path, "# run\nd = 3\nr-grid = 1:3:0.5\n", "c.cfg")
        assert load_config(p) == {"d": "3", "r_grid": "1:3:0.5"}

    def test_json_object_and_output_meta(self, tmp_path):
        assert load_config(write(tmp_path, '{"d": 2}', "a.json")) == {"d": 2}
        p = write(tmp_path, json.dumps({"meta": {"config": {"q": 0.1}}, "x": 1}), "b.json")
        assert load_config(p) == {"q": 0.1}

    def test_ndjson_first_line(self, tmp_path):
        p = write(tmp_path, '{"meta": {"config": {"d": 5}}}\n{"row": 1}\n', "c.ndjson")
        assert load_config(p) == {"d": 5}

    def test_csv_comment(self, tmp_path):
        p = write(tmp_path, '# config: {"zeta": 0.5}\n# seed: 1\na,b\n', "r.csv")
        assert load_config(p) == {"zeta": 0.5}

    def test_bad_line(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "d 3\n", "c.cfg"))

    def test_json_array_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "[1, 2]", "y.json"))


def test_comment_lines_skipped(tmp_path):
    ds = load_csv(write(tmp_path, "# seed: 1\npc1,label\n0.5,a\n# tail\n1.5,b\n"))
    assert ds.X.tolist() == [[0.5], [1.5]] and ds.class_names == ["a", "b"]
