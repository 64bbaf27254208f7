#include "ehrbench/json_io.hpp"

#include <stdexcept>

namespace ehrbench {

using nlohmann::json;

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

json parsed_to_json(const ParsedAnswer& answer) {
    return std::visit(overloaded{
                          [](const IdSet& a) { return json{{"kind", "ids"}, {"ids", a.ids}}; },
                          [](const Number& a) { return json{{"kind", "number"}, {"value", a.value.to_string()}}; },
                          [](const Binary& a) { return json{{"kind", "binary"}, {"value", a.value}}; },
                          [](const BinaryVector& a) { return json{{"kind", "bits"}, {"value", to_string(a.bits)}}; },
                          [](const Word& a) { return json{{"kind", "word"}, {"value", a.value}}; },
                          [](const Invalid& a) { return json{{"kind", "invalid"}, {"reason", a.reason}}; },
                      },
                      answer);
}

ParsedAnswer parsed_from_json(const json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "ids") return IdSet{j.at("ids").get<std::vector<std::string>>()};
        if (kind == "number") {
            auto d = Decimal::parse(j.at("value").get<std::string>());
            if (!d) throw std::invalid_argument("bad number");
            return Number{*d};
        }
        if (kind == "binary") {
            const int v = j.at("value").get<int>();
            if (v != 0 && v != 1) throw std::invalid_argument("bad binary");
            return Binary{v};
        }
        if (kind == "bits") {
            const auto text = j.at("value").get<std::string>();
            Bits10 bits{};
            if (text.size() != 19) throw std::invalid_argument("bad bits");
            for (std::size_t i = 0; i < 10; ++i) {
                const char c = text[2 * i];
                if ((c != '0' && c != '1') || (i < 9 && text[2 * i + 1] != ','))
                    throw std::invalid_argument("bad bits");
                bits[i] = static_cast<std::uint8_t>(c - '0');
            }
            return BinaryVector{bits};
        }
        if (kind == "word") return Word{j.at("value").get<std::string>()};
        if (kind == "invalid") return Invalid{j.at("reason").get<std::string>()};
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad answer record: ") + e.what());
    }
    throw std::invalid_argument("unknown answer kind");
}

}  // namespace ehrbench
