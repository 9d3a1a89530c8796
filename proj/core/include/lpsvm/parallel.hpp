/**
 * @file
 * @brief Parallel co-labeling. Per iteration: propagation and classifier fitting run as two
 *        concurrent tasks, then the unlabeled records are split into contiguous chunks that are
 *        predicted and gated by independent tasks, and the chunk outputs are merged by record id.
 *
 * Tasks only read immutable snapshots and return their outputs; each phase ends with a barrier.
 * Results are identical to hybrid_fit() for every task count.
 */

#ifndef LPSVM_PARALLEL_HPP_
#define LPSVM_PARALLEL_HPP_
#pragma once

#include "lpsvm/classifier.hpp"
#include "lpsvm/hybrid.hpp"

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lpsvm {

struct ParallelConfig {
    HybridConfig hybrid{};
    /// Labeling tasks per iteration; defaults to the hardware concurrency capped at the number
    /// of unlabeled records.
    std::optional<std::size_t> tasks;
    /// Each task sleeps a pseudo-random time up to this bound before starting. Used to shake
    /// out ordering assumptions in tests.
    std::chrono::microseconds max_start_jitter{ 0 };

    void validate() const;
};

struct ChunkRange {
    std::size_t start{};
    std::size_t end{};

    [[nodiscard]] std::size_t size() const noexcept { return end - start; }
    friend bool operator==(const ChunkRange &, const ChunkRange &) = default;
};

using ChunkPlan = std::vector<ChunkRange>;

/**
 * @brief Splits [0, u_count) into @p no_of_tasks contiguous ranges of floor(u / tasks) records;
 *        the u mod tasks leftover records go one each to the last chunks, so sizes differ by at
 *        most one and nothing is dropped. Chunks may be empty when u_count < no_of_tasks.
 */
[[nodiscard]] ChunkPlan plan_chunks(std::size_t u_count, std::size_t no_of_tasks);

/// Hardware concurrency capped at @p u_count, at least 1.
[[nodiscard]] std::size_t default_task_count(std::size_t u_count);

[[nodiscard]] HybridResult parallel_hybrid_fit(const Dataset &train, const ParallelConfig &cfg);

/// Predictions for @p records in input order, computed by @p no_of_tasks tasks.
/// @throws dimension_error on a feature-count mismatch.
[[nodiscard]] std::vector<class_index> parallel_predict(const TrainedModel &model, std::span<const Record> records,
                                                        std::size_t no_of_tasks);

}  // namespace lpsvm

#endif  // LPSVM_PARALLEL_HPP_
