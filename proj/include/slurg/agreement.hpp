#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slurg/span_model.hpp"

namespace slurg {

/// Per-character coverage of one tier-1 label over a sample's text, stored
/// as sorted, disjoint, non-adjacent runs [begin, end).
class LabelMask {
public:
    LabelMask() = default;
    explicit LabelMask(std::size_t length) : length_(length) {}

    static LabelMask from_bits(const std::vector<bool>& bits);

    /// Adds [begin, end) clipped to the mask length, merging runs.
    void cover(std::size_t begin, std::size_t end);

    std::size_t length() const noexcept { return length_; }
    std::size_t count() const noexcept;
    const std::vector<std::pair<std::size_t, std::size_t>>& runs() const noexcept { return runs_; }
    std::vector<bool> bits() const;

    friend bool operator==(const LabelMask&, const LabelMask&) = default;

private:
    std::size_t length_ = 0;
    std::vector<std::pair<std::size_t, std::size_t>> runs_;
};

LabelMask label_mask(const AnnotatedSample& sample, Tier1 label);

/// |A∩B| / |A∪B|, computed on the runs. Two empty masks agree perfectly
/// (1.0). Throws LengthMismatch.
double jaccard_iou(const LabelMask& a, const LabelMask& b);

using AnnotatorPair = std::pair<std::string, std::string>;  // first < second
using LabelScores = std::array<double, 3>;                 // indexed by Tier1

struct PairScore {
    LabelScores per_label{};
    double overall = 0.0;
    std::size_t shared_samples = 0;
};

struct AgreementReport {
    std::vector<std::string> annotators;  // sorted
    std::map<AnnotatorPair, PairScore> pair_scores;
    std::map<std::string, std::map<AnnotatorPair, LabelScores>> per_sample;
    // annotator x annotator overall means; empty optional when a pair shares
    // no samples.
    std::vector<std::vector<std::optional<double>>> matrix;

    /// Mean over annotator pairs covering the sample of the label-averaged
    /// IoU; nullopt when fewer than two annotators saw it.
    std::optional<double> sample_agreement(const std::string& sample_id) const;

    nlohmann::ordered_json to_json() const;
    std::string matrix_csv() const;
};

using AnnotationSets = std::map<std::string, Corpus>;  // annotator id -> corpus

/// Groups a flat list of annotations by annotator_id. Throws DataError when
/// one annotator has two records for the same sample.
AnnotationSets group_by_annotator(std::span<const AnnotatedSample> annotations);

AgreementReport pairwise_agreement(const AnnotationSets& annotations);

/// Keeps samples whose agreement is strictly above `threshold` and picks one
/// annotator's version of each uniformly with a generator seeded by `seed`.
/// Output is ordered by sample id.
Corpus select_gold(const AnnotationSets& annotations, const AgreementReport& report,
                   double threshold, std::uint64_t seed);
Corpus select_gold(const AnnotationSets& annotations, double threshold, std::uint64_t seed);

}  // namespace slurg
