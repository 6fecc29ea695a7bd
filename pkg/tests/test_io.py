import numpy as np
import numpy.testing as npt
import pytest

from triptych import (
    ScreeTable,
    read_edges,
    read_table,
    read_weights,
    write_coordinates,
    write_manifest,
    write_scree,
)


def make_file(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestReadTable:
    def test_comma_sniffed(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a,b\nr1,1,2\nr2,3.5,4\n")
        ds = read_table(path, "measurements")
        npt.assert_array_equal(ds.matrix, [[1.0, 2.0], [3.5, 4.0]])
        assert ds.row_labels == ("r1", "r2")
        assert ds.col_labels == ("a", "b")
        assert ds.kind == "measurements"

    def test_tab_sniffed(self, tmp_path):
        path = make_file(tmp_path, "t.tsv", "id\ta\tb\nr1\t1\t2\n")
        ds = read_table(path, "measurements")
        npt.assert_array_equal(ds.matrix, [[1.0, 2.0]])

    def test_forced_delimiter(self, tmp_path):
        # commas inside a tab-separated file stay in the labels when forced
        path = make_file(tmp_path, "t.txt", "id\ta,x\tb\nr1\t1\t2\n")
        ds = read_table(path, "measurements", delimiter="\t")
        assert ds.col_labels == ("a,x", "b")

    def test_blank_lines_skipped(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a\n\nr1,1\n\n\nr2,2\n")
        ds = read_table(path, "measurements")
        assert ds.row_labels == ("r1", "r2")

    def test_bad_cell_named(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a,b\nr1,1,2\nr2,oops,4\n")
        with pytest.raises(ValueError, match="row 'r2', column 'a'"):
            read_table(path, "measurements")

    def test_nonfinite_cell_named(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a\nr1,inf\n")
        with pytest.raises(ValueError, match="not finite"):
            read_table(path, "measurements")

    def test_ragged_row(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a,b\nr1,1\n")
        with pytest.raises(ValueError, match="row 'r1' has 1 cells"):
            read_table(path, "measurements")

    def test_duplicate_labels(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a,a\nr1,1,2\n")
        with pytest.raises(ValueError, match="duplicate column"):
            read_table(path, "measurements")
        path2 = make_file(tmp_path, "u.csv", "id,a\nr1,1\nr1,2\n")
        with pytest.raises(ValueError, match="duplicate row"):
            read_table(path2, "measurements")

    def test_empty_file(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "")
        with pytest.raises(ValueError, match="empty"):
            read_table(path, "measurements")

    def test_unknown_kind(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a\nr1,1\n")
        with pytest.raises(ValueError, match="unknown kind"):
            read_table(path, "nope")
        with pytest.raises(ValueError, match="read_edges"):
            read_table(path, "edges")

    def test_contingency_negative(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a,b\nr1,1,-2\n")
        with pytest.raises(ValueError, match="negative count"):
            read_table(path, "contingency")

    def test_contingency_drops_zero_margins(self, tmp_path):
        path = make_file(
            tmp_path, "t.csv",
            "id,a,b,c\nr1,1,0,2\nr2,0,0,0\nr3,3,0,4\n",
        )
        with pytest.warns(UserWarning, match="r2") as rec:
            ds = read_table(path, "contingency")
        assert "b" in str(rec[0].message)
        assert ds.row_labels == ("r1", "r3")
        assert ds.col_labels == ("a", "c")
        npt.assert_array_equal(ds.matrix, [[1.0, 2.0], [3.0, 4.0]])

    def test_contingency_all_zero(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,a,b\nr1,0,0\nr2,0,0\n")
        with pytest.warns(UserWarning):
            with pytest.raises(ValueError, match="no positive counts"):
                read_table(path, "contingency")

    def test_groups_must_be_binary(self, tmp_path):
        path = make_file(tmp_path, "t.csv", "id,g1,g2\nr1,1,0\nr2,0,2\n")
        with pytest.raises(ValueError, match="0/1"):
            read_table(path, "groups")


class TestReadEdges:
    def test_path_graph(self, tmp_path):
        path = make_file(tmp_path, "e.csv", "a,b\nb,c\n")
        g = read_edges(path)
        assert g.node_labels == ("a", "b", "c")
        npt.assert_array_equal(g.degrees, [1, 2, 1])

    def test_header_skipped(self, tmp_path):
        path = make_file(tmp_path, "e.csv", "source,target\na,b\n")
        g = read_edges(path)
        assert g.node_labels == ("a", "b")
        assert g.n_edges == 1

    def test_duplicate_and_reversed_edges_collapse(self, tmp_path):
        path = make_file(tmp_path, "e.csv", "a,b\nb,a\na,b\n")
        g = read_edges(path)
        assert g.n_edges == 1

    def test_self_loop_line_number(self, tmp_path):
        path = make_file(tmp_path, "e.csv", "a,b\nc,c\n")
        with pytest.raises(ValueError, match="line 2: self loop"):
            read_edges(path)

    def test_wrong_cell_count(self, tmp_path):
        path = make_file(tmp_path, "e.csv", "a,b,c\n")
        with pytest.raises(ValueError, match="expected two node labels"):
            read_edges(path)

    def test_tab_delimited(self, tmp_path):
        path = make_file(tmp_path, "e.tsv", "x\ty\ny\tz\n")
        assert read_edges(path).node_labels == ("x", "y", "z")


class TestReadWeights:
    def test_basic(self, tmp_path):
        path = make_file(tmp_path, "w.txt", "1.5\n\n2\n0.25\n")
        npt.assert_array_equal(read_weights(path), [1.5, 2.0, 0.25])

    def test_bad_line(self, tmp_path):
        path = make_file(tmp_path, "w.txt", "1\nxyz\n")
        with pytest.raises(ValueError, match="line 2"):
            read_weights(path)

    def test_empty(self, tmp_path):
        path = make_file(tmp_path, "w.txt", "\n\n")
        with pytest.raises(ValueError, match="no weights"):
            read_weights(path)


class TestWriters:
    def test_scree_round_trip_exact(self, tmp_path):
        lam = np.array([np.pi, np.e / 3, 0.0123456789012345678])
        scree = ScreeTable.from_eigenvalues(lam)
        path = str(tmp_path / "x_scree.tsv")
        write_scree(path, scree)
        lines = open(path).read().splitlines()
        assert lines[0] == "axis\teigenvalue\tinertia_pct\tcumulative_pct"
        got = np.array([line.split("\t")[1] for line in lines[1:]], dtype=float)
        npt.assert_array_equal(got, lam)

    def test_coordinates_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(80)
        coords = rng.standard_normal((4, 3))
        path = str(tmp_path / "x_rows.tsv")
        write_coordinates(path, ["a", "b", "c", "d"], coords)
        lines = open(path).read().splitlines()
        assert lines[0] == "label\taxis_1\taxis_2\taxis_3"
        back = np.array(
            [line.split("\t")[1:] for line in lines[1:]], dtype=float
        )
        npt.assert_array_equal(back, coords)

    def test_coordinates_custom_axis_names(self, tmp_path):
        path = str(tmp_path / "x_rows.tsv")
        write_coordinates(path, ["n1"], [[0.5, 1.5]], axis_names=["mu", "nu"])
        assert open(path).read().splitlines()[0] == "label\tmu\tnu"

    def test_coordinates_shape_mismatch(self, tmp_path):
        with pytest.raises(ValueError, match="does not match"):
            write_coordinates(str(tmp_path / "x.tsv"), ["a", "b"], [[1.0]])

    def test_manifest(self, tmp_path):
        path = str(tmp_path / "x_manifest.txt")
        write_manifest(path, {"tool": "triptych", "axes": 2})
        assert open(path).read() == "tool: triptych\naxes: 2\n"

    def test_atomic_replace(self, tmp_path):
        path = str(tmp_path / "x_scree.tsv")
        scree = ScreeTable.from_eigenvalues([2.0, 1.0])
        write_scree(path, scree)
        write_scree(path, ScreeTable.from_eigenvalues([5.0]))
        lines = open(path).read().splitlines()
        assert len(lines) == 2
        leftovers = [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]
        assert not leftovers


class TestScreeTable:
    def test_empty(self):
        t = ScreeTable.from_eigenvalues([])
        assert len(t) == 0
        assert t.format() == "axis\teigenvalue\tinertia_pct\tcumulative_pct"

    def test_rows_and_percentages(self):
        t = ScreeTable.from_eigenvalues([3.0, 1.0])
        rows = list(t)
        assert [r.index for r in rows] == [1, 2]
        npt.assert_allclose([r.inertia_pct for r in rows], [75.0, 25.0])
        npt.assert_allclose([r.cumulative_pct for r in rows], [75.0, 100.0])

    def test_format_precision(self):
        t = ScreeTable.from_eigenvalues([0.123456, 0.054321])
        body = t.format().splitlines()[1]
        assert body.split("\t")[1] == "0.12346"

    def test_ordering_enforced(self):
        with pytest.raises(ValueError, match="nonincreasing"):
            ScreeTable.from_eigenvalues([1.0, 2.0])

    def test_zero_total_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            ScreeTable.from_eigenvalues([0.0, 0.0])
