#include "doctest.h"

#include "ehrbench/decimal.hpp"

using ehrbench::Decimal;

TEST_CASE("decimal parse and render preserve scale") {
    for (const char* s : {"0", "7", "-13725.74", "34235.54", "0.05", "-0.5", "145000.35", "20000.8", "3.0"}) {
        auto d = Decimal::parse(s);
        REQUIRE(d);
        CHECK(d->to_string() == s);
    }
    CHECK_FALSE(Decimal::parse(""));
    CHECK_FALSE(Decimal::parse("1."));
    CHECK_FALSE(Decimal::parse(".5"));
    CHECK_FALSE(Decimal::parse("1,000"));
    CHECK_FALSE(Decimal::parse("12a"));
}

TEST_CASE("decimal arithmetic is exact") {
    auto d = [](const char* s) { return *Decimal::parse(s); };
    CHECK((d("179235.89") - d("145000.35")).to_string() == "34235.54");
    CHECK((d("67890.25") + d("82450.75")).to_string() == "150341.00");
    CHECK((d("9800.3") + d("10200.5")).to_string() == "20000.8");
    CHECK((d("68.4") - d("70.5")).to_string() == "-2.1");
    CHECK((d("1") + d("0.25")).to_string() == "1.25");
}

TEST_CASE("rounding is half away from zero") {
    auto d = [](const char* s) { return *Decimal::parse(s); };
    CHECK(d("0.25").rounded(1).to_string() == "0.3");
    CHECK(d("0.24").rounded(1).to_string() == "0.2");
    CHECK(d("-0.25").rounded(1).to_string() == "-0.3");
    CHECK(d("3").rounded(1).to_string() == "3.0");
    CHECK(d("9").divided(3, 1).to_string() == "3.0");
    CHECK(d("147.2").divided(4, 1).to_string() == "36.8");
    CHECK(d("1").divided(8, 1).to_string() == "0.1");
    CHECK(d("0.5").divided(2, 1).to_string() == "0.3");
    CHECK(d("10").divided(3, 2).to_string() == "3.33");
    CHECK(d("2.50").trimmed().to_string() == "2.5");
    CHECK(d("2.00").trimmed().to_string() == "2");
}

TEST_CASE("numeric comparison ignores scale") {
    auto d = [](const char* s) { return *Decimal::parse(s); };
    CHECK(numeric_compare(d("3.0"), d("3")) == 0);
    CHECK(numeric_compare(d("2.99"), d("3")) < 0);
    CHECK(numeric_compare(d("-1"), d("-1.5")) > 0);
    CHECK_FALSE(d("3.0") == d("3"));
}
