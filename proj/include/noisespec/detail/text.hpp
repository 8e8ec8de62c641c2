#ifndef NOISESPEC_DETAIL_TEXT_HPP
#define NOISESPEC_DETAIL_TEXT_HPP

#include <cctype>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "noisespec/errors.hpp"

namespace noisespec::detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

inline double parse_double(const std::string& context, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ValidationError(context + ": not a number: '" + value + "'");
    }
}

inline long long parse_int(const std::string& context, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ValidationError(context + ": not an integer: '" + value + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& context, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t x = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ValidationError(context + ": not an unsigned integer: '" + value + "'");
    }
}

inline bool parse_bool(const std::string& context, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError(context + ": not a boolean: '" + value + "'");
}

}  // namespace noisespec::detail

#endif
