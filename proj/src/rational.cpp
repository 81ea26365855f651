#include "steiner/rational.hpp"

#include "steiner/errors.hpp"

#include <charconv>

namespace steiner {

std::string to_string(const Q& x) {
    auto num = boost::multiprecision::numerator(x);
    auto den = boost::multiprecision::denominator(x);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

Q parse_rational(std::string_view s) {
    auto fail = [&] { throw ParseError("bad rational: " + std::string(s)); };
    if (s.empty()) fail();
    try {
        if (auto slash = s.find('/'); slash != std::string_view::npos) {
            BigInt a(std::string(s.substr(0, slash)));
            BigInt b(std::string(s.substr(slash + 1)));
            if (b == 0) fail();
            return Q(a, b);
        }
        if (auto dot = s.find('.'); dot != std::string_view::npos) {
            std::string digits = std::string(s.substr(0, dot)) + std::string(s.substr(dot + 1));
            BigInt scale = 1;
            for (std::size_t i = dot + 1; i < s.size(); ++i) scale *= 10;
            return Q(BigInt(digits), scale);
        }
        return Q(BigInt(std::string(s)));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        fail();
    }
    return {};
}

}  // namespace steiner
