/**
 * @file
 * @brief One-vs-one multiclass wrapper around the binary SVM.
 */

#ifndef LPSVM_OVO_HPP_
#define LPSVM_OVO_HPP_
#pragma once

#include "lpsvm/data.hpp"
#include "lpsvm/svm.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace lpsvm {

struct OvoParams {
    SmoParams smo{};
    /// Pairwise problems trained concurrently. Results do not depend on this value.
    std::size_t threads{ 1 };
};

class OvoModel {
  public:
    OvoModel() = default;
    /// @p models[k] separates pairs[k].first (label -1) from pairs[k].second (label +1).
    OvoModel(std::size_t num_classes, std::size_t dimension, std::vector<SvmBinaryModel> models);

    [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] const std::vector<SvmBinaryModel> &models() const noexcept { return models_; }
    [[nodiscard]] const std::vector<std::pair<class_index, class_index>> &pairs() const noexcept { return pairs_; }
    /// Index into models() of the (i, j) classifier, i < j.
    [[nodiscard]] std::size_t pair_index(class_index i, class_index j) const;

  private:
    std::size_t num_classes_{ 0 };
    std::size_t dimension_{ 0 };
    std::vector<SvmBinaryModel> models_;
    std::vector<std::pair<class_index, class_index>> pairs_;
};

/// All unordered class pairs (i, j), i < j, in lexicographic order.
[[nodiscard]] std::vector<std::pair<class_index, class_index>> class_pairs(std::size_t num_classes);

/**
 * @brief Trains one binary SVM per class pair on the labeled records of @p ds. Unlabeled
 *        records are ignored.
 * @throws training_error naming the pair when one side has no records.
 */
[[nodiscard]] OvoModel ovo_train(const Dataset &ds, const OvoParams &params = {});

struct OvoVotes {
    std::vector<std::size_t> votes;
    /// Per class, sum of |decision| over the binary models that voted for it.
    std::vector<double> strength;
};

/// A decision value > 0 votes for the pair's second class, otherwise for the first.
[[nodiscard]] OvoVotes ovo_votes(const OvoModel &model, std::span<const double> x);

/**
 * @brief Majority vote. Ties go to the tied class with the largest vote strength, then to the
 *        lowest class index.
 */
[[nodiscard]] class_index ovo_predict(const OvoModel &model, std::span<const double> x);

}  // namespace lpsvm

#endif  // LPSVM_OVO_HPP_
