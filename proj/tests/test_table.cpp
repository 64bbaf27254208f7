#include "doctest.h"

#include "appendix_tables.hpp"
#include "ehrbench/table.hpp"
#include "random_tables.hpp"

using namespace ehrbench;

namespace {

TableError::Kind error_kind(auto&& fn) {
    try {
        fn();
    } catch (const TableError& e) {
        return e.kind();
    }
    FAIL("expected TableError");
    return TableError::Kind::EmptyInput;
}

}  // namespace

TEST_CASE("parse_tsv infers column types") {
    const auto t = parse_tsv("ID\tINCOME\n001\t45000");
    REQUIRE(t.row_count() == 1);
    CHECK(t.schema().columns()[0].type == CellType::Text);
    CHECK(t.schema().columns()[1].type == CellType::Integer);
    CHECK(std::get<std::string>(t.at(0, "ID")) == "001");
    CHECK(std::get<std::int64_t>(t.at(0, "INCOME")) == 45000);
}

TEST_CASE("parse_tsv reads the appendix demographics table") {
    const auto t = parse_tsv(appendix::kSyntheaDU1);
    CHECK(t.row_count() == 4);
    CHECK(t.schema().names() == std::vector<std::string>{"ID", "RACE", "GENDER", "INCOME"});
}

TEST_CASE("mixed numeric and text values degrade to text") {
    const auto t = parse_tsv(appendix::kEicuDR1);
    const auto& value = t.schema().columns()[t.schema().require("VALUE")];
    CHECK(value.type == CellType::Text);
    CHECK(is_empty(t.at(8, "VALUE")));
    CHECK(render_tsv(t) == appendix::kEicuDR1);
}

TEST_CASE("decimal columns keep per-cell scale through render") {
    const auto t = parse_tsv(appendix::kSyntheaDR4);
    CHECK(t.schema().columns()[3].type == CellType::Decimal);
    CHECK(render_tsv(t) == appendix::kSyntheaDR4);
    CHECK(render_tsv(t).find("179235.89") != std::string::npos);
    CHECK(render_cell(Decimal{3423554, 2}) == "34235.54");
}

TEST_CASE("dates accept both separators and render as ISO") {
    const auto t = parse_tsv(appendix::kSyntheaKU1);
    CHECK(t.schema().columns()[0].type == CellType::Date);
    CHECK(render_cell(t.at(0, "START")) == "2005-04-12");
    CHECK_FALSE(Date::parse("2021-02-29"));
    CHECK(Date::parse("2020-02-29"));
}

TEST_CASE("header-only table renders as its header") {
    const Table t(Schema({{"ID", CellType::Text}}), {});
    CHECK(render_tsv(t) == "ID");
    CHECK(parse_tsv("ID") == t);
}

TEST_CASE("malformed input is rejected") {
    CHECK(error_kind([] { parse_tsv("A\tB\n1"); }) == TableError::Kind::RaggedRow);
    CHECK(error_kind([] { parse_tsv("A\tA\n1\t2"); }) == TableError::Kind::DuplicateColumn);
    CHECK(error_kind([] { parse_tsv(""); }) == TableError::Kind::EmptyInput);
    CHECK(error_kind([] { parse_tsv("A\tB\nx\t1", Schema({{"B", CellType::Date}})); }) ==
          TableError::Kind::TypeMismatch);
    CHECK(error_kind([] {
              Table(Schema({{"A", CellType::Integer}}), {{std::string("x")}});
          }) == TableError::Kind::TypeMismatch);
}

TEST_CASE("Empty is distinct from empty text") {
    CHECK_FALSE(CellValue{Empty{}} == CellValue{std::string()});
    CHECK(type_of(CellValue{std::string()}) == CellType::Text);
    CHECK_FALSE(type_of(CellValue{Empty{}}));
}

TEST_CASE("a trailing newline is tolerated") {
    const auto a = parse_tsv(appendix::kSyntheaDU1);
    const auto b = parse_tsv(std::string(appendix::kSyntheaDU1) + "\n");
    CHECK(a == b);
}

TEST_CASE("filter_rows") {
    const auto t = parse_tsv(appendix::kSyntheaDU1);

    SUBCASE("always-true keeps the table") {
        CHECK(filter_rows(t, std::span<const Condition>{}) == t);
        CHECK(filter_rows(t, [](const RowView&) { return true; }) == t);
    }
    SUBCASE("always-false keeps the schema") {
        const auto none = filter_rows(t, [](const RowView&) { return false; });
        CHECK(none.row_count() == 0);
        CHECK(none.schema() == t.schema());
    }
    SUBCASE("white and income over 30000") {
        const Condition conds[] = {{"RACE", CompareOp::Eq, std::string("White")},
                                   {"INCOME", CompareOp::Gt, std::int64_t{30000}}};
        const auto out = filter_rows(t, conds);
        REQUIRE(out.row_count() == 2);
        CHECK(render_cell(out.at(0, "ID")) == "001");
        CHECK(render_cell(out.at(1, "ID")) == "004");
    }
    SUBCASE("unknown columns are reported") {
        const Condition conds[] = {{"AGE", CompareOp::Gt, std::int64_t{1}}};
        CHECK(error_kind([&] { filter_rows(t, conds); }) == TableError::Kind::UnknownColumn);
        CHECK(error_kind([&] { filter_rows(t, [](const RowView& r) { return is_empty(r["AGE"]); }); }) ==
              TableError::Kind::UnknownColumn);
    }
    SUBCASE("numeric comparison across integer and decimal") {
        CHECK(matches(std::int64_t{3}, CompareOp::Eq, Decimal{30, 1}));
        CHECK_FALSE(matches(Empty{}, CompareOp::Ne, std::int64_t{3}));
        CHECK_FALSE(matches(std::string("3"), CompareOp::Eq, std::int64_t{3}));
    }
}

TEST_CASE("property: render/parse round trip and filter invariants") {
    Rng rng(20240607);
    for (int i = 0; i < 500; ++i) {
        const auto t = testgen::random_table(rng);
        bool has_empty_text = false;
        for (const auto& row : t.rows())
            for (const auto& c : row)
                if (const auto* s = std::get_if<std::string>(&c); s && s->empty()) has_empty_text = true;
        if (has_empty_text || (t.column_count() == 1 && t.row_count() > 0 && is_empty(t.rows().back()[0])))
            continue;
        const auto back = parse_tsv(render_tsv(t), t.schema());
        REQUIRE(back == t);

        const auto col = t.schema().columns()[0].name;
        const auto kept = filter_rows(t, [&](const RowView& r) { return !is_empty(r[col]); });
        CHECK(kept.schema() == t.schema());
        CHECK(kept.row_count() <= t.row_count());
        std::size_t j = 0;
        for (const auto& row : t.rows())
            if (j < kept.row_count() && row == kept.rows()[j]) ++j;
        CHECK(j == kept.row_count());
    }
}
