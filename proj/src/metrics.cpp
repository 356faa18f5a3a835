#include "codesum/metrics.hpp"

#include <fmt/format.h>

#include <map>
#include <utility>

namespace codesum {

ConfusionCounts confusion(std::span<const Outcome> outcomes) {
    if (outcomes.empty()) {
        throw MetricsError("confusion counts of an empty prediction list");
    }
    ConfusionCounts c;
    for (const auto& o : outcomes) {
        if (o.predicted) {
            (o.truth ? c.tp : c.fp) += 1;
        } else {
            (o.truth ? c.fn : c.tn) += 1;
        }
    }
    return c;
}

const char* to_string(Averaging averaging) {
    return averaging == Averaging::binary ? "binary" : "weighted";
}

Averaging parse_averaging(const std::string& s) {
    if (s == "binary") {
        return Averaging::binary;
    }
    if (s == "weighted") {
        return Averaging::weighted;
    }
    throw MetricsError(fmt::format("unknown averaging mode '{}'", s));
}

double f1_score(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
    if (den == 0) {
        degenerate = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport classification_report(const ConfusionCounts& c, Averaging averaging) {
    const auto total = c.total();
    if (total == 0) {
        throw MetricsError("classification report of zero predictions");
    }
    EvalReport r;
    r.counts = c;
    r.averaging = averaging;
    r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);

    const double p_pos = ratio(c.tp, c.tp + c.fp, r.precision_degenerate);
    const double r_pos = ratio(c.tp, c.tp + c.fn, r.recall_degenerate);
    if (averaging == Averaging::binary) {
        r.precision = p_pos;
        r.recall = r_pos;
        r.f1 = f1_score(p_pos, r_pos);
        return r;
    }

    bool neg_p_degenerate = false;
    bool neg_r_degenerate = false;
    const double p_neg = ratio(c.tn, c.tn + c.fn, neg_p_degenerate);
    const double r_neg = ratio(c.tn, c.tn + c.fp, neg_r_degenerate);
    const double w_pos = static_cast<double>(c.tp + c.fn) / static_cast<double>(total);
    const double w_neg = static_cast<double>(c.tn + c.fp) / static_cast<double>(total);
    r.precision_degenerate = r.precision_degenerate || neg_p_degenerate;
    r.recall_degenerate = r.recall_degenerate || neg_r_degenerate;
    r.precision = w_pos * p_pos + w_neg * p_neg;
    r.recall = w_pos * r_pos + w_neg * r_neg;
    r.f1 = w_pos * f1_score(p_pos, r_pos) + w_neg * f1_score(p_neg, r_neg);
    return r;
}

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

u128 choose2(std::uint64_t n) { return n < 2 ? 0 : static_cast<u128>(n) * (n - 1) / 2; }

}  // namespace

double adjusted_rand_index(std::span<const long long> truth, std::span<const long long> pred) {
    if (truth.size() != pred.size()) {
        throw MetricsError(fmt::format("label lengths differ: {} vs {}", truth.size(), pred.size()));
    }
    if (truth.size() < 2) {
        throw MetricsError("adjusted Rand index needs at least two points");
    }
    std::map<std::pair<long long, long long>, std::uint64_t> cells;
    std::map<long long, std::uint64_t> class_sizes;
    std::map<long long, std::uint64_t> cluster_sizes;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++cells[{pred[i], truth[i]}];
        ++class_sizes[truth[i]];
        ++cluster_sizes[pred[i]];
    }
    u128 index = 0;
    for (const auto& [cell, count] : cells) {
        index += choose2(count);
    }
    u128 sum_clusters = 0;
    for (const auto& [label, count] : cluster_sizes) {
        sum_clusters += choose2(count);
    }
    u128 sum_classes = 0;
    for (const auto& [label, count] : class_sizes) {
        sum_classes += choose2(count);
    }
    const u128 total_pairs = choose2(truth.size());

    // ARI = (index - a*b/c) / ((a+b)/2 - a*b/c); multiply through by 2c.
    const i128 ab = static_cast<i128>(sum_clusters * sum_classes);
    const i128 numerator = 2 * (static_cast<i128>(index * total_pairs) - ab);
    const i128 denominator = static_cast<i128>((sum_clusters + sum_classes) * total_pairs) - 2 * ab;
    if (denominator == 0) {
        // Both partitions are all-singletons or a single cluster: identical.
        return 1.0;
    }
    return static_cast<double>(static_cast<long double>(numerator) / static_cast<long double>(denominator));
}

}  // namespace codesum
