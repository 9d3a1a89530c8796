/**
 * @file
 * @brief Agreement-gated co-labeling: label propagation and a supervised classifier label the
 *        unlabeled records together, one batch per iteration.
 *
 * Each iteration
 *   1. propagates labels over all training records (labeled + still unlabeled),
 *   2. fits the classifier on the labeled records only,
 *   3. labels every unlabeled record whose predicted class k has propagation probability >= threshold,
 *   4. stops when nothing is left unlabeled or nothing was labeled.
 *
 * The propagation result and the classifier are fixed for the whole sweep of step 3, so the
 * outcome of an iteration does not depend on the order in which records are visited.
 */

#ifndef LPSVM_HYBRID_HPP_
#define LPSVM_HYBRID_HPP_
#pragma once

#include "lpsvm/classifier.hpp"
#include "lpsvm/data.hpp"
#include "lpsvm/graph_lp.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lpsvm {

struct HybridConfig {
    /// Minimum propagation probability of the classifier's class. 0 accepts every prediction.
    double threshold{ 0.8 };
    ClassifierKind classifier{};
    LpParams lp{};
    /// Retrain the classifier on the final labeled set before returning. When false the model
    /// fitted at the start of the last iteration is kept.
    bool refit_final{ true };
    std::uint64_t seed{ 0 };

    /// @throws config_error if threshold is outside [0,1] or a nested parameter is invalid.
    void validate() const;
};

struct LabelDecision {
    std::size_t id{};
    class_index label{};
    /// Propagation probability of @ref label at the time of the decision.
    double lp_probability{};

    friend bool operator==(const LabelDecision &, const LabelDecision &) = default;
};

struct IterationLog {
    std::size_t iteration{};
    std::size_t newly_labeled{};
    std::size_t labeled_total{};
    std::size_t unlabeled_remaining{};
    double lp_ms{};
    double fit_ms{};
    double label_ms{};
    double merge_ms{};
    bool lp_converged{};
    std::size_t lp_iterations{};
    /// One entry per record labeled in this iteration, ordered by id.
    std::vector<LabelDecision> decisions;
};

enum class termination_reason { all_labeled, no_progress };

[[nodiscard]] std::string to_string(termination_reason reason);

struct HybridResult {
    TrainedModel model;
    /// Training records after co-labeling, in their original order.
    Dataset labeled;
    std::vector<IterationLog> iterations;
    termination_reason reason{ termination_reason::all_labeled };
    std::size_t initial_unlabeled{ 0 };
    /// Propagation output of the last iteration, if any iteration ran.
    std::optional<ProbabilityMatrix> last_lp;
};

struct LabelStepResult {
    std::vector<Record> newly_labeled;
    std::vector<Record> remaining;
    std::vector<LabelDecision> decisions;
};

/**
 * @brief The agreement gate on precomputed classifier outputs: record k is labeled with
 *        @p predictions[k] iff its propagation probability for that class is >= @p threshold.
 *
 * Outputs are ordered by record id.
 *
 * @throws consistency_error if a record has no propagation row or the sizes disagree.
 */
[[nodiscard]] LabelStepResult gate_records(std::span<const Record> unlabeled, std::span<const class_index> predictions,
                                           const ProbabilityMatrix &lp, double threshold);

/// Predicts every record with @p model and applies gate_records().
[[nodiscard]] LabelStepResult label_step(std::span<const Record> unlabeled, const ProbabilityMatrix &lp,
                                         const TrainedModel &model, double threshold);

/**
 * @brief Runs the co-labeling loop on @p train.
 * @throws consistency_error if a class has no labeled record; training and numeric errors of
 *         the inner steps propagate.
 */
[[nodiscard]] HybridResult hybrid_fit(const Dataset &train, const HybridConfig &cfg);

/// @throws dimension_error if @p x does not match the training dimension.
[[nodiscard]] class_index predict(const HybridResult &result, std::span<const double> x);

/// One JSON object per line; field names match IterationLog.
void write_iteration_log(std::ostream &out, const IterationLog &log);
void write_iteration_logs(std::ostream &out, std::span<const IterationLog> logs);

}  // namespace lpsvm

#endif  // LPSVM_HYBRID_HPP_
