/**
 * @file
 * @brief Confusion matrices, precision / recall / F-measure and labeling statistics.
 */

#ifndef LPSVM_EVAL_HPP_
#define LPSVM_EVAL_HPP_
#pragma once

#include "lpsvm/data.hpp"
#include "lpsvm/hybrid.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lpsvm {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
  public:
    explicit ConfusionMatrix(std::size_t num_classes = 0);

    [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
    [[nodiscard]] std::size_t at(class_index truth, class_index predicted) const;
    void add(class_index truth, class_index predicted);
    [[nodiscard]] std::size_t total() const noexcept { return total_; }
    /// Returns a matrix with classes renamed by @p perm (class c becomes perm[c]).
    [[nodiscard]] ConfusionMatrix permuted(std::span<const class_index> perm) const;

    friend bool operator==(const ConfusionMatrix &, const ConfusionMatrix &) = default;

  private:
    std::size_t num_classes_;
    std::vector<std::size_t> counts_;
    std::size_t total_{ 0 };
};

/// @throws length_error on mismatched lengths, consistency_error on a label >= num_classes.
[[nodiscard]] ConfusionMatrix confusion(std::span<const class_index> truth, std::span<const class_index> predicted,
                                        std::size_t num_classes);

enum class averaging { macro, micro };

struct ClassScores {
    double precision{};
    double recall{};
    double f1{};
};

/// Per-class scores; 0 wherever a denominator is 0.
[[nodiscard]] std::vector<ClassScores> per_class_scores(const ConfusionMatrix &cm);

/// @throws consistency_error if the matrix is empty.
[[nodiscard]] double f_measure(const ConfusionMatrix &cm, averaging mode = averaging::macro);

/**
 * @brief Cumulative fraction of the initially unlabeled records labeled after each iteration.
 *        With @p initial_u == 0 every entry is 1.
 */
[[nodiscard]] std::vector<double> labeled_percentage(std::span<const IterationLog> logs, std::size_t initial_u);

struct EvalReport {
    std::vector<ClassScores> per_class;
    double macro_f1{};
    double micro_f1{};
    double accuracy{};
    std::vector<double> labeled_trajectory;
    double training_ms{};
    ConfusionMatrix confusion;
};

[[nodiscard]] EvalReport make_report(const ConfusionMatrix &cm, std::vector<double> labeled_trajectory = {}, double training_ms = 0.0);

[[nodiscard]] std::string report_to_json(const EvalReport &report);

}  // namespace lpsvm

#endif  // LPSVM_EVAL_HPP_
