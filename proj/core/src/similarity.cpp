#include "harvest/similarity.hpp"

#include <algorithm>
#include <vector>

#include "harvest/text.hpp"

namespace harvest::similarity {

double jaro(std::u32string_view a, std::u32string_view b) {
    if (a == b) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    const std::size_t longer = std::max(a.size(), b.size());
    const std::size_t window = longer / 2 > 0 ? longer / 2 - 1 : 0;

    std::vector<char> a_matched(a.size(), 0);
    std::vector<char> b_matched(b.size(), 0);
    std::size_t m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(b.size(), i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!b_matched[j] && a[i] == b[j]) {
                a_matched[i] = b_matched[j] = 1;
                ++m;
                break;
            }
        }
    }
    if (m == 0) return 0.0;

    std::size_t half_transpositions = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a_matched[i]) continue;
        while (!b_matched[k]) ++k;
        if (a[i] != b[k]) ++half_transpositions;
        ++k;
    }
    const double md = static_cast<double>(m);
    const double t = static_cast<double>(half_transpositions) / 2.0;
    return (md / static_cast<double>(a.size()) + md / static_cast<double>(b.size()) + (md - t) / md) / 3.0;
}

double jaro_winkler(std::u32string_view a, std::u32string_view b, double p, std::size_t max_prefix) {
    const double j = jaro(a, b);
    std::size_t l = 0;
    const std::size_t cap = std::min({max_prefix, a.size(), b.size()});
    while (l < cap && a[l] == b[l]) ++l;
    return j + static_cast<double>(l) * p * (1.0 - j);
}

double jaro(std::string_view a, std::string_view b) {
    return jaro(text::to_code_points(a), text::to_code_points(b));
}

double jaro_winkler(std::string_view a, std::string_view b) {
    return jaro_winkler(text::to_code_points(a), text::to_code_points(b));
}

}  // namespace harvest::similarity
