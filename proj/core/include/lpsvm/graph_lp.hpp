/**
 * @file
 * @brief Dense similarity graphs and clamped label propagation over labeled + unlabeled records.
 *
 * The graph is fully connected with RBF weights w_ij = exp(-|x_i - x_j|^2 / sigma^2). Propagation
 * repeatedly applies the row-normalised transition matrix to the class-probability matrix and
 * resets labeled rows to their one-hot labels; its fixed point is the harmonic solution, which
 * closed_form_lp() computes directly.
 */

#ifndef LPSVM_GRAPH_LP_HPP_
#define LPSVM_GRAPH_LP_HPP_
#pragma once

#include "lpsvm/data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace lpsvm {

struct WeightMatrix {
    Eigen::MatrixXd weights;
    double sigma{};

    [[nodiscard]] Eigen::Index size() const noexcept { return weights.rows(); }
};

struct TransitionMatrix {
    Eigen::MatrixXd transitions;

    [[nodiscard]] Eigen::Index size() const noexcept { return transitions.rows(); }
};

/**
 * @brief Class probabilities for every record of a propagation input, one row per record.
 *
 * Rows are stored in the order of the input dataset and looked up by record id.
 */
class ProbabilityMatrix {
  public:
    ProbabilityMatrix() = default;
    ProbabilityMatrix(std::vector<std::size_t> ids, Eigen::MatrixXd probabilities);

    [[nodiscard]] std::size_t rows() const noexcept { return ids_.size(); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return static_cast<std::size_t>(probabilities_.cols()); }
    [[nodiscard]] const std::vector<std::size_t> &ids() const noexcept { return ids_; }
    [[nodiscard]] const Eigen::MatrixXd &matrix() const noexcept { return probabilities_; }

    [[nodiscard]] bool contains(std::size_t id) const { return index_.contains(id); }
    /// @throws consistency_error if @p id has no row.
    [[nodiscard]] std::size_t row_of(std::size_t id) const;
    [[nodiscard]] double probability(std::size_t id, class_index c) const;
    [[nodiscard]] Eigen::RowVectorXd row(std::size_t id) const;

  private:
    std::vector<std::size_t> ids_;
    Eigen::MatrixXd probabilities_;
    std::unordered_map<std::size_t, std::size_t> index_;
};

struct PropagationResult {
    ProbabilityMatrix probabilities;
    bool converged{ false };
    std::size_t iterations{ 0 };
    /// Largest absolute change in the final iteration.
    double last_change{ 0.0 };
};

struct LpParams {
    /// Kernel bandwidth; default_sigma() is used when empty.
    std::optional<double> sigma;
    double tol{ 1e-6 };
    std::size_t max_iter{ 1000 };
    /// Seed for the pair sample of default_sigma().
    std::uint64_t seed{ 0 };
};

/**
 * @throws numeric_error if a feature is not finite or @p sigma is not positive.
 * @throws dimension_error if fewer than two records are given.
 */
[[nodiscard]] WeightMatrix build_weights(std::span<const Record> records, double sigma);

/// One third of the mean pairwise distance. All pairs are used when there are at most
/// @p max_pairs of them, otherwise @p max_pairs pairs are drawn with @p seed. Never smaller
/// than machine epsilon.
[[nodiscard]] double default_sigma(std::span<const Record> records, std::uint64_t seed = 0, std::size_t max_pairs = 1000);

/// @throws normalization_error if a row has no positive weight.
[[nodiscard]] TransitionMatrix row_normalize(const WeightMatrix &w);

/**
 * @brief Clamped iterative propagation. Starts from one-hot labeled rows and uniform unlabeled
 *        rows, then repeats F <- T F with labeled rows reset, until the largest change is below
 *        @p tol or @p max_iter iterations ran.
 *
 * @throws consistency_error if the sizes disagree or a class has no labeled record.
 * @throws numeric_error if a non-finite value appears.
 */
[[nodiscard]] PropagationResult propagate(const TransitionMatrix &t, const Dataset &ds, double tol = 1e-6,
                                          std::size_t max_iter = 1000);

/// Harmonic solution f_U = (I - T_uu)^-1 T_ul Y_L by LU decomposition. Limited to 2000 records.
/// @throws oracle_error if the system is singular or too large.
[[nodiscard]] ProbabilityMatrix closed_form_lp(const TransitionMatrix &t, const Dataset &ds);

/// 1/2 sum_ij w_ij |f_i - f_j|^2, evaluated as trace(F^T (D - W) F).
[[nodiscard]] double energy(const ProbabilityMatrix &f, const WeightMatrix &w);

/// Builds the graph for @p ds and propagates; sigma is taken from @p params or default_sigma().
[[nodiscard]] PropagationResult run_label_propagation(const Dataset &ds, const LpParams &params);

/// CSV dump: `id,p_0,...,p_{C-1}` with a header line.
void write_probability_csv(std::ostream &out, const ProbabilityMatrix &f);

}  // namespace lpsvm

#endif  // LPSVM_GRAPH_LP_HPP_
