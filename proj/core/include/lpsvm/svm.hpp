/**
 * @file
 * @brief Soft-margin binary C-SVM trained by sequential minimal optimization.
 *
 * The dual problem solved is
 *
 *     min_a  1/2 a^T Q a - e^T a   s.t.  0 <= a_i <= C,  y^T a = 0,   Q_ij = y_i y_j K(x_i, x_j)
 *
 * Each step picks the maximal violating pair (i from the "up" set with the largest -y G, j from the
 * "low" set with the smallest -y G), optimises the two multipliers analytically and stops once
 * the violation m(a) - M(a) drops below the tolerance. The scan order is the record order and ties
 * go to the lowest index, so training is deterministic.
 */

#ifndef LPSVM_SVM_HPP_
#define LPSVM_SVM_HPP_
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lpsvm {

enum class kernel_type { linear, rbf };

struct Kernel {
    kernel_type type{ kernel_type::linear };
    /// exp(-gamma |x - z|^2); unused for the linear kernel.
    double gamma{ 1.0 };

    [[nodiscard]] double operator()(std::span<const double> x, std::span<const double> z) const;
    [[nodiscard]] std::string to_string() const;
    friend bool operator==(const Kernel &, const Kernel &) = default;
};

struct SmoParams {
    double c_reg{ 1.0 };
    Kernel kernel{};
    double tol{ 1e-3 };
    /// The solver gives up after max_passes * n pair updates.
    std::size_t max_passes{ 1000 };

    void validate() const;
};

/// Full solver output: one multiplier per training row.
struct SmoSolution {
    std::vector<double> alphas;
    double bias{ 0.0 };
    bool converged{ false };
    std::size_t iterations{ 0 };
    /// m(a) - M(a) when the solver stopped.
    double violation{ 0.0 };
};

/**
 * @brief Solves the dual for row-major @p x (n rows of @p dimension) and labels @p y in {-1,+1}.
 * @throws training_error if only one class is present or fewer than two rows are given.
 */
[[nodiscard]] SmoSolution smo_solve(std::span<const double> x, std::size_t dimension, std::span<const int> y,
                                    const SmoParams &params);

/// Decision function sum_i a_i y_i K(sv_i, x) + b, stored over support vectors only.
class SvmBinaryModel {
  public:
    SvmBinaryModel() = default;
    SvmBinaryModel(std::size_t dimension, std::vector<double> support_vectors, std::vector<int> sv_labels,
                   std::vector<double> sv_alphas, double bias, SmoParams params, bool converged);

    [[nodiscard]] double decision(std::span<const double> x) const;

    /// w = sum_i a_i y_i x_i; only meaningful for the linear kernel.
    [[nodiscard]] std::vector<double> linear_weights() const;

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t num_support_vectors() const noexcept { return sv_alphas_.size(); }
    [[nodiscard]] std::span<const double> support_vector(std::size_t k) const;
    [[nodiscard]] const std::vector<double> &support_vectors() const noexcept { return support_vectors_; }
    [[nodiscard]] const std::vector<int> &sv_labels() const noexcept { return sv_labels_; }
    [[nodiscard]] const std::vector<double> &sv_alphas() const noexcept { return sv_alphas_; }
    [[nodiscard]] double bias() const noexcept { return bias_; }
    [[nodiscard]] const SmoParams &params() const noexcept { return params_; }
    [[nodiscard]] bool converged() const noexcept { return converged_; }

  private:
    std::size_t dimension_{ 0 };
    std::vector<double> support_vectors_;
    std::vector<int> sv_labels_;
    std::vector<double> sv_alphas_;
    double bias_{ 0.0 };
    SmoParams params_{};
    bool converged_{ false };
};

/// Trains on @p x / @p y and keeps the rows with a positive multiplier as support vectors.
[[nodiscard]] SvmBinaryModel smo_train(std::span<const double> x, std::size_t dimension, std::span<const int> y,
                                       const SmoParams &params);

/// @throws dimension_error if @p x does not match the model dimension.
[[nodiscard]] double svm_decision(const SvmBinaryModel &model, std::span<const double> x);

}  // namespace lpsvm

#endif  // LPSVM_SVM_HPP_
