#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace codesum {

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Outcome {
    bool predicted = false;
    bool truth = false;
};

// Throws MetricsError on empty input.
ConfusionCounts confusion(std::span<const Outcome> outcomes);

enum class Averaging {
    binary,    // the clone class only
    weighted,  // clone and non-clone classes, weighted by support
};

const char* to_string(Averaging averaging);
Averaging parse_averaging(const std::string& s);

struct EvalReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ConfusionCounts counts;
    Averaging averaging = Averaging::weighted;
    // A 0/0 ratio was reported as 0.
    bool precision_degenerate = false;
    bool recall_degenerate = false;
};

// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

/// Accuracy, precision, recall and F1 from confusion counts. In weighted
/// mode precision/recall/F1 are computed per class (clone, non-clone) and
/// averaged with class support as the weight.
EvalReport classification_report(const ConfusionCounts& counts, Averaging averaging = Averaging::weighted);

/// Adjusted Rand Index of two labelings of the same points. Pair counts are
/// accumulated exactly in 128-bit integers; only the final ratio is floating point.
double adjusted_rand_index(std::span<const long long> truth, std::span<const long long> pred);

}  // namespace codesum
