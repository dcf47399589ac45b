#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace harvest::similarity {

inline constexpr double kWinklerScale = 0.1;
inline constexpr std::size_t kWinklerMaxPrefix = 4;

/// Jaro similarity over code points. Match window is
/// max(floor(max(|a|, |b|) / 2) - 1, 0); 1 for equal strings, 0 without matches.
double jaro(std::u32string_view a, std::u32string_view b);

/// jaro(a, b) + l * p * (1 - jaro(a, b)) with l the common prefix capped at
/// `max_prefix`. No boost threshold.
double jaro_winkler(std::u32string_view a, std::u32string_view b, double p = kWinklerScale,
                    std::size_t max_prefix = kWinklerMaxPrefix);

/// UTF-8 overloads; invalid sequences decode to U+FFFD.
double jaro(std::string_view a, std::string_view b);
double jaro_winkler(std::string_view a, std::string_view b);

}  // namespace harvest::similarity
