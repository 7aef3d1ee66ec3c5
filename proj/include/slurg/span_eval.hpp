#pragma once

#include <array>
#include <cstddef>
#include <string>

#include <json.hpp>

#include "slurg/span_model.hpp"

namespace slurg {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Precision and recall from (possibly fractional) true-positive mass.
/// Each ratio is 0 when its denominator is 0; f1 is 0 when both are 0.
Prf make_prf(double tp_mass, std::size_t n_pred, std::size_t n_gold);

struct LabelBreakdown {
    Prf strict;
    Prf relaxed;
    std::size_t n_gold = 0;
    std::size_t n_pred = 0;
    std::size_t strict_tp = 0;
    double relaxed_mass = 0.0;
};

struct EvalReport {
    std::string split_name;
    Prf strict;
    Prf relaxed;
    std::array<LabelBreakdown, 3> per_label{};  // indexed by Tier1
    std::size_t n_gold_spans = 0;
    std::size_t n_pred_spans = 0;
    std::size_t strict_tp = 0;
    double relaxed_mass = 0.0;
    std::size_t drift_count = 0;

    nlohmann::ordered_json to_json() const;
};

/// IoU of two half-open intervals; 0 when disjoint.
double interval_iou(std::size_t a_start, std::size_t a_end, std::size_t b_start, std::size_t b_end);

/// Exact (start, end, tier1) matches, micro-averaged. Samples are joined on
/// sample_id; a sample whose predicted text differs from the gold text
/// (drift) matches nothing but still counts its spans in both denominators.
/// Throws JoinFailure when the two corpora cover different ids.
EvalReport strict_f1(const Corpus& gold, const Corpus& pred);

/// Same-label spans paired one-to-one by descending IoU (ties: earlier gold
/// start, then earlier predicted start); matched IoU is fractional TP mass.
EvalReport relaxed_f1(const Corpus& gold, const Corpus& pred);

/// Both metrics with the per-label breakdown, tagged with the split name.
EvalReport evaluate_split(const std::string& split_name, const Corpus& gold, const Corpus& pred);

/// CSV shaped like the published F1 table: split, strict F1, relaxed F1.
std::string f1_table_csv(const std::vector<EvalReport>& reports);

}  // namespace slurg
