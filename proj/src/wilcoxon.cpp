#include "ihr/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ihr/errors.hpp"

namespace ihr {

namespace {

struct RankedDiffs {
    std::vector<double> ranks; // mid-ranks of |d|, in |d| order
    double w_plus = 0.0;       // rank sum of positive differences
};

// Drops zeros, mid-ranks ties on |d|. Empty result means all differences were zero.
RankedDiffs rank_differences(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeMismatch("wilcoxon: length mismatch");
    if (a.size() < 10) throw InvalidConfig("wilcoxon: need at least 10 pairs");
    std::vector<std::pair<double, bool>> diffs; // |d|, positive?
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.emplace_back(std::fabs(d), d > 0.0);
    }
    std::sort(diffs.begin(), diffs.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    RankedDiffs out;
    out.ranks.resize(diffs.size());
    std::size_t i = 0;
    while (i < diffs.size()) {
        std::size_t j = i;
        while (j < diffs.size() && diffs[j].first == diffs[i].first) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            out.ranks[t] = mid;
            if (diffs[t].second) out.w_plus += mid;
        }
        i = j;
    }
    return out;
}

double normal_p_from_ranks(const RankedDiffs& rd) {
    if (rd.ranks.empty()) return 1.0;
    double sum = 0.0, sumsq = 0.0;
    for (double r : rd.ranks) {
        sum += r;
        sumsq += r * r;
    }
    const double mu = sum / 2.0;
    const double var = sumsq / 4.0; // each rank enters W+ with probability 1/2
    if (var == 0.0) return 1.0;
    double dev = std::fabs(rd.w_plus - mu);
    dev = std::max(0.0, dev - 0.5); // continuity correction
    const double z = dev / std::sqrt(var);
    double p = std::erfc(z / std::sqrt(2.0));
    return std::min(1.0, p);
}

double exact_p_from_ranks(const RankedDiffs& rd) {
    const std::size_t m = rd.ranks.size();
    if (m == 0) return 1.0;
    double sum = 0.0;
    for (double r : rd.ranks) sum += r;
    const double mu = sum / 2.0;
    const double dev = std::fabs(rd.w_plus - mu);
    // All 2^m sign assignments are equally likely under H0; mid-ranks are
    // multiples of 0.5, so sums are exact in floating point.
    const std::uint64_t total = 1ULL << m;
    std::uint64_t extreme = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1ULL << i)) w += rd.ranks[i];
        if (std::fabs(w - mu) >= dev - 1e-12) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

} // namespace

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    const RankedDiffs rd = rank_differences(a, b);
    return rd.ranks.size() <= 12 ? exact_p_from_ranks(rd) : normal_p_from_ranks(rd);
}

double wilcoxon_exact_p(std::span<const double> a, std::span<const double> b) {
    const RankedDiffs rd = rank_differences(a, b);
    if (rd.ranks.size() > 20) throw InvalidConfig("wilcoxon exact route limited to 20 differences");
    return exact_p_from_ranks(rd);
}

double wilcoxon_normal_p(std::span<const double> a, std::span<const double> b) {
    return normal_p_from_ranks(rank_differences(a, b));
}

} // namespace ihr
