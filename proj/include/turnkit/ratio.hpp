#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace turnkit {

/// An exact count ratio such as "turns passing / turns evaluated".
struct Ratio {
    uint64_t numerator = 0;
    uint64_t denominator = 1;

    Ratio() = default;
    Ratio(uint64_t num, uint64_t den) : numerator(num), denominator(den) {
        if (den == 0) throw std::invalid_argument("ratio with zero denominator");
        if (num > den) throw std::invalid_argument("ratio above one");
    }

    double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }

    Ratio complement() const { return Ratio(denominator - numerator, denominator); }

    /// Cross-multiplied equality, so 2/4 == 1/2.
    friend bool operator==(const Ratio& a, const Ratio& b) {
        return static_cast<unsigned __int128>(a.numerator) * b.denominator ==
               static_cast<unsigned __int128>(b.numerator) * a.denominator;
    }

    std::string to_string() const {
        return std::to_string(numerator) + "/" + std::to_string(denominator);
    }

    /// Fixed-point rendering with round-half-up on the exact value.
    std::string decimal(int places = 3) const {
        unsigned __int128 scale = 1;
        for (int i = 0; i < places; ++i) scale *= 10;
        const unsigned __int128 scaled =
            (static_cast<unsigned __int128>(numerator) * scale * 2 + denominator) / (2 * static_cast<unsigned __int128>(denominator));
        const auto whole = static_cast<uint64_t>(scaled / scale);
        auto frac = static_cast<uint64_t>(scaled % scale);
        std::string out = std::to_string(whole);
        if (places > 0) {
            std::string digits = std::to_string(frac);
            out += "." + std::string(static_cast<size_t>(places) - digits.size(), '0') + digits;
        }
        return out;
    }
};

}  // namespace turnkit
