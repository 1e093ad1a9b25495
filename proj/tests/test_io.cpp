#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "mixdag/io.hpp"
#include "test_helpers.hpp"

using namespace mixdag;

TEST_CASE("graph json round trips", "[io]") {
    Dag d(4, {{0, 1}, {2, 3}}, {"a", "b", "c", "d"});
    json jd = to_json(d);
    CHECK(jd["nodes"] == json::array({"a", "b", "c", "d"}));
    Dag d2 = dag_from_json(jd);
    CHECK(d2 == d);
    CHECK(d2.labels() == d.labels());

    MixedGraph m(4, {{0, 1}}, {{1, 2}});
    MixedGraph m2 = mixed_graph_from_json(to_json(m));
    CHECK(m2 == m);

    Pag::MarkMap marks;
    marks[{0, 1}] = {Mark::Circle, Mark::Arrow};
    marks[{1, 2}] = {Mark::Arrow, Mark::Arrow};
    Pag p(3, marks);
    json jp = to_json(p);
    CHECK(jp["marks"]["0-1"] == json::array({"circle", "arrow"}));
    CHECK(pag_from_json(jp) == p);
}

TEST_CASE("malformed graph json is rejected", "[io]") {
    CHECK_THROWS_AS(dag_from_json(json::object()), std::invalid_argument);
    json bad;
    bad["nodes"] = {"a", "b"};
    bad["directed"] = {{0, 1, 2}};
    CHECK_THROWS_AS(dag_from_json(bad), std::invalid_argument);
    json cyc;
    cyc["nodes"] = {"a", "b"};
    cyc["directed"] = {{0, 1}, {1, 0}};
    CHECK_THROWS_AS(dag_from_json(cyc), std::invalid_argument);
}

TEST_CASE("mixture spec json round trips", "[io]") {
    MixtureSpec spec = test::running_example_spec();
    json j = to_json(spec);
    MixtureSpec back = mixture_spec_from_json(j);
    CHECK(back.components.size() == 2);
    CHECK(back.components[0] == spec.components[0]);
    CHECK(back.components[1] == spec.components[1]);
    CHECK(back.v_inv == spec.v_inv);
    CHECK(back.mixing_weights == spec.mixing_weights);
}

TEST_CASE("csv writes and reads samples with labels", "[io]") {
    CsvData csv;
    csv.column_labels = {"X1", "X2"};
    csv.data.resize(3, 2);
    csv.data << 1.5, -2.25, 0.0, 3.125, 4.0, 1e-3;
    csv.labels = std::vector<int>{0, 1, 0};
    std::ostringstream out;
    write_csv(out, csv, {"seed=7"});
    const std::string text = out.str();
    CHECK(text.find("# seed=7") == 0);
    CHECK(text.find("X1,X2,label") != std::string::npos);

    std::istringstream in(text);
    CsvData back = read_csv(in);
    CHECK(back.column_labels == csv.column_labels);
    REQUIRE(back.labels.has_value());
    CHECK(*back.labels == *csv.labels);
    CHECK(back.data == csv.data);
}

TEST_CASE("csv without a label column", "[io]") {
    std::istringstream in("A,B\n1,2\n3,4\n");
    CsvData csv = read_csv(in);
    CHECK(csv.column_labels == std::vector<std::string>{"A", "B"});
    CHECK_FALSE(csv.labels.has_value());
    CHECK(csv.data(1, 1) == 4.0);
}

TEST_CASE("csv failure modes", "[io]") {
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv(empty), std::runtime_error);
    std::istringstream ragged("A,B\n1\n");
    CHECK_THROWS_AS(read_csv(ragged), std::runtime_error);
    std::istringstream text("A,B\n1,zebra\n");
    CHECK_THROWS_AS(read_csv(text), std::runtime_error);
    std::istringstream headless("label\n1\n");
    CHECK_THROWS_AS(read_csv(headless), std::runtime_error);
}

TEST_CASE("config fingerprints are stable", "[io]") {
    CHECK(fnv1a("abc") == fnv1a("abc"));
    CHECK(fnv1a("abc") != fnv1a("abd"));
}
