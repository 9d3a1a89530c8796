/**
 * @file
 * @brief One-vs-rest L2-regularised logistic regression, trained by full-batch gradient descent.
 */

#ifndef LPSVM_LOGREG_HPP_
#define LPSVM_LOGREG_HPP_
#pragma once

#include "lpsvm/data.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lpsvm {

struct LogregParams {
    double l2{ 1e-3 };
    double learning_rate{ 0.1 };
    std::size_t epochs{ 500 };

    void validate() const;
};

class LogregModel {
  public:
    LogregModel() = default;
    /// @p weights is row-major, one row of @p dimension values per class.
    LogregModel(std::size_t num_classes, std::size_t dimension, std::vector<double> weights, std::vector<double> biases,
                LogregParams params, double gradient_norm);

    [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::span<const double> weights(class_index c) const;
    [[nodiscard]] const std::vector<double> &all_weights() const noexcept { return weights_; }
    [[nodiscard]] const std::vector<double> &biases() const noexcept { return biases_; }
    [[nodiscard]] const LogregParams &params() const noexcept { return params_; }
    /// Euclidean norm of the full objective gradient (all classes) at the returned parameters.
    [[nodiscard]] double gradient_norm() const noexcept { return gradient_norm_; }

    /// w_c . x + b_c for every class.
    [[nodiscard]] std::vector<double> scores(std::span<const double> x) const;
    /// Highest score, lowest index on ties.
    [[nodiscard]] class_index predict(std::span<const double> x) const;

  private:
    std::size_t num_classes_{ 0 };
    std::size_t dimension_{ 0 };
    std::vector<double> weights_;
    std::vector<double> biases_;
    LogregParams params_{};
    double gradient_norm_{ 0.0 };
};

/**
 * Binary objective for one one-vs-rest problem:
 *
 *     J(w, b) = 1/n sum_i [ log(1 + exp(z_i)) - t_i z_i ] + l2/2 |w|^2,   z_i = w . x_i + b
 *
 * @p theta is (w_1..w_d, b); @p x holds n rows of @p dimension values; @p targets are 0 or 1.
 */
[[nodiscard]] double logreg_objective(std::span<const double> theta, std::span<const double> x, std::size_t dimension,
                                      std::span<const double> targets, double l2);

/// Analytic gradient of logreg_objective() with respect to theta.
[[nodiscard]] std::vector<double> logreg_gradient(std::span<const double> theta, std::span<const double> x,
                                                  std::size_t dimension, std::span<const double> targets, double l2);

/**
 * @brief Fits one binary model per class on the labeled records of @p ds.
 *
 * Each epoch takes a gradient step on the data term and applies the L2 term as the proximal
 * shrink w <- w / (1 + lr * l2), which is stable for any l2. The bias is not regularised.
 *
 * @throws training_error if a class has no labeled record or the objective becomes non-finite.
 */
[[nodiscard]] LogregModel logreg_train(const Dataset &ds, const LogregParams &params = {});

}  // namespace lpsvm

#endif  // LPSVM_LOGREG_HPP_
