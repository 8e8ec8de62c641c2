#ifndef NOISESPEC_VERSION_HPP
#define NOISESPEC_VERSION_HPP

#include <string>

namespace noisespec {

inline constexpr const char* kVersion = "0.1.0";

inline std::string version_string() { return std::string("noisespec ") + kVersion; }

}  // namespace noisespec

#endif
