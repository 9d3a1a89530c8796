#ifndef LPSVM_SRC_HYBRID_DETAIL_HPP_
#define LPSVM_SRC_HYBRID_DETAIL_HPP_
#pragma once

#include "lpsvm/hybrid.hpp"

#include <chrono>
#include <unordered_map>

namespace lpsvm::detail {

class Stopwatch {
  public:
    Stopwatch() : start_{ std::chrono::steady_clock::now() } {}

    [[nodiscard]] double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

/// Mutable training set shared by the serial and parallel loops. Records keep their original
/// positions; only labels change.
class WorkingSet {
  public:
    explicit WorkingSet(const Dataset &train);

    [[nodiscard]] const Dataset &dataset() const noexcept { return current_; }
    /// Labeled records only, in original order: the classifier's training input.
    [[nodiscard]] Dataset labeled_only() const;
    /// Unlabeled records ordered by id.
    [[nodiscard]] std::vector<Record> unlabeled_by_id() const;
    void apply(const std::vector<LabelDecision> &decisions);

  private:
    Dataset current_;
    std::unordered_map<std::size_t, std::size_t> position_;
};

/// Graph construction is a function of the features only, which do not change during the loop.
[[nodiscard]] TransitionMatrix build_transitions(const Dataset &train, const LpParams &lp);

void check_fit_inputs(const Dataset &train, const HybridConfig &cfg);

[[nodiscard]] IterationLog make_log(std::size_t iteration, const WorkingSet &ws, std::vector<LabelDecision> decisions);

}  // namespace lpsvm::detail

#endif  // LPSVM_SRC_HYBRID_DETAIL_HPP_
