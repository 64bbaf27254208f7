#include <doctest.h>

#include "appendix_tables.hpp"
#include "ehrbench/formats.hpp"
#include "random_tables.hpp"

using namespace ehrbench;

namespace {

Table small() { return parse_tsv("ID\tINCOME\n001\t45000", Schema({{"ID", CellType::Text}, {"INCOME", CellType::Integer}})); }

}  // namespace

TEST_CASE("grammar examples") {
    CHECK(serialize(small(), InputFormat::PlainText) == "ID\tINCOME\n001\t45000");
    CHECK(serialize(small(), InputFormat::SpecialChar) == "ID | INCOME\n--- | ---\n001 | 45000");
    CHECK(serialize(small(), InputFormat::GraphStructured) == "(row_1) -[ID]-> 001\n(row_1) -[INCOME]-> 45000");
    CHECK(serialize(small(), InputFormat::NaturalLanguage) == "Row 1: ID is 001; INCOME is 45000.");
}

TEST_CASE("schema templates for natural language") {
    const auto t = parse_tsv(appendix::kSyntheaDU1);
    const auto nl = serialize(t, InputFormat::NaturalLanguage);
    CHECK(nl.rfind("Patient 001 is a White Male with income 45000.\n", 0) == 0);
    const auto eicu = parse_tsv(appendix::kEicuDR1);
    const auto lines = serialize(eicu, InputFormat::NaturalLanguage);
    CHECK(lines.find("Patient 001 has Temperature (TEMP ORAL) of 36.6.") != std::string::npos);
    CHECK(lines.find("Row 9: PATIENT is 003; DESCRIPTION is Pain Assessment; UNITS is WDL.") != std::string::npos);
    CHECK(content_complete(eicu, lines));
}

TEST_CASE("escaping") {
    const Schema schema({{"a|b", CellType::Text}, {"c]d", CellType::Text}});
    const Table t(schema, {{std::string("x | y"), std::string("p ]-> q")}, {Empty{}, Empty{}}});
    const auto special = serialize(t, InputFormat::SpecialChar);
    CHECK(special == "a||b | c]d\n--- | ---\nx || y | p ]-> q\n | ");
    const auto graph = serialize(t, InputFormat::GraphStructured);
    CHECK(graph == "(row_1) -[a|b]-> x | y\n(row_1) -[c]]d]-> p ]-> q\n(row_2)");
    CHECK(deserialize(special, InputFormat::SpecialChar, schema) == t);
    CHECK(deserialize(graph, InputFormat::GraphStructured, schema) == t);
    CHECK(content_complete(t, special));
    CHECK(content_complete(t, graph));
}

TEST_CASE("format selector") {
    for (auto f : kAllFormats) CHECK(parse_format(to_string(f)) == f);
    CHECK_FALSE(parse_format("markdown"));
}

TEST_CASE("malformed input") {
    const Schema schema({{"ID", CellType::Text}, {"INCOME", CellType::Integer}});
    CHECK_THROWS_AS(deserialize("ID | INCOME", InputFormat::SpecialChar, schema), TableError);
    CHECK_THROWS_AS(deserialize("ID | INCOME\n--- | ---\n001|5", InputFormat::SpecialChar, schema), TableError);
    CHECK_THROWS_AS(deserialize("(row_2) -[ID]-> 001", InputFormat::GraphStructured, schema), TableError);
    CHECK_THROWS_AS(deserialize("(row_1) -[NOPE]-> 001", InputFormat::GraphStructured, schema), TableError);
    CHECK_THROWS_AS(deserialize("x", InputFormat::NaturalLanguage, schema), std::invalid_argument);
}

TEST_CASE("property: lossless, complete, deterministic, length grows with rows") {
    Rng rng(2024);
    for (int i = 0; i < 500; ++i) {
        const auto t = testgen::random_table(rng, i % 2 == 0);
        for (auto f : kAllFormats) {
            const auto text = serialize(t, f);
            CHECK(text == serialize(t, f));
            CHECK(content_complete(t, text));
            if (f != InputFormat::NaturalLanguage) CHECK(deserialize(text, f, t.schema()) == t);
            if (t.row_count() > 0) {
                std::vector<Row> fewer(t.rows().begin(), t.rows().end() - 1);
                CHECK(serialize(Table(t.schema(), fewer), f).size() < text.size());
            }
        }
    }
}
