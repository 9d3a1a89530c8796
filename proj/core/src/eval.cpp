#include "lpsvm/eval.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <numeric>

namespace lpsvm {

ConfusionMatrix::ConfusionMatrix(const std::size_t num_classes) :
    num_classes_{ num_classes },
    counts_(num_classes * num_classes, 0) {}

std::size_t ConfusionMatrix::at(const class_index truth, const class_index predicted) const {
    if (truth >= num_classes_ || predicted >= num_classes_) {
        throw consistency_error{ fmt::format("class pair ({}, {}) outside a {}-class matrix", truth, predicted, num_classes_) };
    }
    return counts_[truth * num_classes_ + predicted];
}

void ConfusionMatrix::add(const class_index truth, const class_index predicted) {
    if (truth >= num_classes_ || predicted >= num_classes_) {
        throw consistency_error{ fmt::format("class pair ({}, {}) outside a {}-class matrix", truth, predicted, num_classes_) };
    }
    ++counts_[truth * num_classes_ + predicted];
    ++total_;
}

ConfusionMatrix ConfusionMatrix::permuted(const std::span<const class_index> perm) const {
    if (perm.size() != num_classes_) {
        throw length_error{ "permutation size does not match the class count" };
    }
    ConfusionMatrix out{ num_classes_ };
    for (class_index t = 0; t < num_classes_; ++t) {
        for (class_index p = 0; p < num_classes_; ++p) {
            out.counts_[perm[t] * num_classes_ + perm[p]] = counts_[t * num_classes_ + p];
        }
    }
    out.total_ = total_;
    return out;
}

ConfusionMatrix confusion(const std::span<const class_index> truth, const std::span<const class_index> predicted,
                          const std::size_t num_classes) {
    if (truth.size() != predicted.size()) {
        throw length_error{ fmt::format("{} true labels but {} predictions", truth.size(), predicted.size()) };
    }
    ConfusionMatrix cm{ num_classes };
    for (std::size_t i = 0; i < truth.size(); ++i) {
        cm.add(truth[i], predicted[i]);
    }
    return cm;
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix &cm) {
    const std::size_t c = cm.num_classes();
    std::vector<ClassScores> out(c);
    for (class_index k = 0; k < c; ++k) {
        std::size_t tp = cm.at(k, k);
        std::size_t predicted = 0;
        std::size_t actual = 0;
        for (class_index j = 0; j < c; ++j) {
            predicted += cm.at(j, k);
            actual += cm.at(k, j);
        }
        ClassScores &s = out[k];
        s.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        s.recall = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
        s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    }
    return out;
}

double f_measure(const ConfusionMatrix &cm, const averaging mode) {
    if (cm.total() == 0) {
        throw consistency_error{ "F-measure of an empty confusion matrix" };
    }
    if (mode == averaging::macro) {
        const std::vector<ClassScores> scores = per_class_scores(cm);
        double sum = 0.0;
        for (const ClassScores &s : scores) {
            sum += s.f1;
        }
        return sum / static_cast<double>(scores.size());
    }
    // pooled: every off-diagonal count is one FP and one FN
    std::size_t tp = 0;
    for (class_index k = 0; k < cm.num_classes(); ++k) {
        tp += cm.at(k, k);
    }
    const auto tp_d = static_cast<double>(tp);
    const auto wrong = static_cast<double>(cm.total() - tp);
    return tp == 0 ? 0.0 : 2.0 * tp_d / (2.0 * tp_d + 2.0 * wrong);
}

std::vector<double> labeled_percentage(const std::span<const IterationLog> logs, const std::size_t initial_u) {
    std::vector<double> out;
    out.reserve(logs.size());
    if (initial_u == 0) {
        out.assign(logs.size(), 1.0);
        return out;
    }
    std::size_t cumulative = 0;
    for (const IterationLog &log : logs) {
        cumulative += log.newly_labeled;
        if (cumulative > initial_u) {
            throw consistency_error{ fmt::format("logs label {} records but only {} were unlabeled", cumulative, initial_u) };
        }
        out.push_back(static_cast<double>(cumulative) / static_cast<double>(initial_u));
    }
    return out;
}

EvalReport make_report(const ConfusionMatrix &cm, std::vector<double> labeled_trajectory, const double training_ms) {
    EvalReport r;
    r.per_class = per_class_scores(cm);
    r.macro_f1 = f_measure(cm, averaging::macro);
    r.micro_f1 = f_measure(cm, averaging::micro);
    std::size_t tp = 0;
    for (class_index k = 0; k < cm.num_classes(); ++k) {
        tp += cm.at(k, k);
    }
    r.accuracy = static_cast<double>(tp) / static_cast<double>(cm.total());
    r.labeled_trajectory = std::move(labeled_trajectory);
    r.training_ms = training_ms;
    r.confusion = cm;
    return r;
}

}  // namespace lpsvm
