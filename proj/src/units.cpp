#include "nanonmr/units.hpp"

#include <cctype>
#include <cstdlib>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace nanonmr {

namespace {

struct Suffix {
    const char* name;
    int pow10;      // decimal exponent shift, applied textually
    double factor;  // extra non-decimal factor (minutes, hours, gauss)
};

// Equivalent spellings must produce bit-identical doubles, so power-of-ten
// units are applied by rewriting the decimal exponent before the single
// strtod call instead of multiplying afterwards.
double parse_with_suffixes(const std::string& text,
                           std::initializer_list<Suffix> suffixes,
                           const char* what)
{
    const char* begin = text.c_str();
    char* end = nullptr;
    std::strtod(begin, &end);
    if (end == begin)
        throw std::invalid_argument(std::string(what) + ": cannot parse '" + text + "'");
    std::string number(begin, static_cast<std::size_t>(end - begin));
    std::string suffix(end);
    while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.front())))
        suffix.erase(suffix.begin());
    while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.back())))
        suffix.pop_back();

    int pow10 = 0;
    double factor = 1.0;
    if (!suffix.empty()) {
        bool found = false;
        for (const auto& s : suffixes) {
            if (suffix == s.name) {
                pow10 = s.pow10;
                factor = s.factor;
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument(std::string(what) + ": unknown unit '" + suffix
                                        + "' in '" + text + "'");
    }

    if (pow10 != 0) {
        const auto epos = number.find_first_of("eE");
        if (epos == std::string::npos) {
            number += "e" + std::to_string(pow10);
        } else {
            const int exp = std::stoi(number.substr(epos + 1)) + pow10;
            number = number.substr(0, epos) + "e" + std::to_string(exp);
        }
    }
    const double value = std::strtod(number.c_str(), nullptr);
    return factor == 1.0 ? value : value * factor;
}

}  // namespace

double parse_time(const std::string& text)
{
    return parse_with_suffixes(text,
                               {{"ns", -9, 1.0},
                                {"us", -6, 1.0},
                                {"\xc2\xb5s", -6, 1.0},  // µs
                                {"ms", -3, 1.0},
                                {"s", 0, 1.0},
                                {"min", 0, 60.0},
                                {"h", 0, 3600.0},
                                {"hour", 0, 3600.0},
                                {"hours", 0, 3600.0}},
                               "parse_time");
}

double parse_frequency(const std::string& text)
{
    return parse_with_suffixes(text,
                               {{"Hz", 0, 1.0},
                                {"kHz", 3, 1.0},
                                {"MHz", 6, 1.0},
                                {"GHz", 9, 1.0},
                                {"mHz", -3, 1.0}},
                               "parse_frequency");
}

double parse_field(const std::string& text)
{
    return parse_with_suffixes(text,
                               {{"T", 0, 1.0},
                                {"mT", -3, 1.0},
                                {"uT", -6, 1.0},
                                {"nT", -9, 1.0},
                                {"G", -4, 1.0}},
                               "parse_field");
}

double parse_length(const std::string& text)
{
    return parse_with_suffixes(
        text, {{"m", 0, 1.0}, {"mm", -3, 1.0}, {"um", -6, 1.0}, {"nm", -9, 1.0}},
        "parse_length");
}

double parse_number(const std::string& text)
{
    return parse_with_suffixes(text, {}, "parse_number");
}

}  // namespace nanonmr
