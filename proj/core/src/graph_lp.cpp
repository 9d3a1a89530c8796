#include "lpsvm/graph_lp.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace lpsvm {

ProbabilityMatrix::ProbabilityMatrix(std::vector<std::size_t> ids, Eigen::MatrixXd probabilities) :
    ids_{ std::move(ids) },
    probabilities_{ std::move(probabilities) } {
    if (static_cast<Eigen::Index>(ids_.size()) != probabilities_.rows()) {
        throw consistency_error{ fmt::format("{} ids for {} probability rows", ids_.size(), probabilities_.rows()) };
    }
    index_.reserve(ids_.size());
    for (std::size_t r = 0; r < ids_.size(); ++r) {
        if (!index_.emplace(ids_[r], r).second) {
            throw consistency_error{ fmt::format("duplicate record id {} in probability matrix", ids_[r]) };
        }
    }
}

std::size_t ProbabilityMatrix::row_of(const std::size_t id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        throw consistency_error{ fmt::format("record {} has no label propagation row", id) };
    }
    return it->second;
}

double ProbabilityMatrix::probability(const std::size_t id, const class_index c) const {
    if (c >= num_classes()) {
        throw consistency_error{ fmt::format("class {} out of range for {} classes", c, num_classes()) };
    }
    return probabilities_(static_cast<Eigen::Index>(row_of(id)), static_cast<Eigen::Index>(c));
}

Eigen::RowVectorXd ProbabilityMatrix::row(const std::size_t id) const {
    return probabilities_.row(static_cast<Eigen::Index>(row_of(id)));
}

WeightMatrix build_weights(const std::span<const Record> records, const double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw numeric_error{ fmt::format("sigma must be positive and finite, got {}", sigma) };
    }
    if (records.size() < 2) {
        throw dimension_error{ "a similarity graph needs at least two records" };
    }
    for (const Record &r : records) {
        if (!std::all_of(r.features.begin(), r.features.end(), [](const double v) { return std::isfinite(v); })) {
            throw numeric_error{ fmt::format("record {} has a non-finite feature", r.id) };
        }
    }
    const auto n = static_cast<Eigen::Index>(records.size());
    const double inv_sigma2 = 1.0 / (sigma * sigma);
    WeightMatrix w{ Eigen::MatrixXd::Zero(n, n), sigma };
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::vector<double> &xi = records[static_cast<std::size_t>(i)].features;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const std::vector<double> &xj = records[static_cast<std::size_t>(j)].features;
            double d2 = 0.0;
            for (std::size_t k = 0; k < xi.size(); ++k) {
                const double diff = xi[k] - xj[k];
                d2 += diff * diff;
            }
            const double value = std::exp(-d2 * inv_sigma2);
            w.weights(i, j) = value;
            w.weights(j, i) = value;
        }
    }
    return w;
}

double default_sigma(const std::span<const Record> records, const std::uint64_t seed, const std::size_t max_pairs) {
    if (records.size() < 2) {
        throw dimension_error{ "default_sigma needs at least two records" };
    }
    const auto distance = [&](const std::size_t i, const std::size_t j) {
        const std::vector<double> &a = records[i].features;
        const std::vector<double> &b = records[j].features;
        double d2 = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            d2 += (a[k] - b[k]) * (a[k] - b[k]);
        }
        return std::sqrt(d2);
    };

    const std::size_t n = records.size();
    double total = 0.0;
    std::size_t pairs = 0;
    if (n * (n - 1) / 2 <= max_pairs) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                total += distance(i, j);
                ++pairs;
            }
        }
    } else {
        std::mt19937_64 rng{ seed };
        std::uniform_int_distribution<std::size_t> first{ 0, n - 1 };
        std::uniform_int_distribution<std::size_t> offset{ 1, n - 1 };
        for (; pairs < max_pairs; ++pairs) {
            const std::size_t i = first(rng);
            const std::size_t j = (i + offset(rng)) % n;
            total += distance(i, j);
        }
    }
    return std::max(total / static_cast<double>(pairs) / 3.0, std::numeric_limits<double>::epsilon());
}

TransitionMatrix row_normalize(const WeightMatrix &w) {
    TransitionMatrix t{ w.weights };
    for (Eigen::Index i = 0; i < t.transitions.rows(); ++i) {
        const double sum = t.transitions.row(i).sum();
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            throw normalization_error{ fmt::format("row {} of the weight matrix has sum {}", i, sum) };
        }
        t.transitions.row(i) /= sum;
    }
    return t;
}

namespace {

struct Partition {
    std::vector<Eigen::Index> labeled;
    std::vector<Eigen::Index> unlabeled;
};

Partition partition_and_check(const TransitionMatrix &t, const Dataset &ds) {
    if (t.size() != static_cast<Eigen::Index>(ds.size())) {
        throw consistency_error{ fmt::format("transition matrix has {} rows, dataset has {} records", t.size(), ds.size()) };
    }
    if (!ds.all_classes_labeled()) {
        throw consistency_error{ "label propagation needs every class among the labeled records" };
    }
    Partition p;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        (ds.records()[i].is_labeled() ? p.labeled : p.unlabeled).push_back(static_cast<Eigen::Index>(i));
    }
    return p;
}

std::vector<std::size_t> record_ids(const Dataset &ds) {
    std::vector<std::size_t> ids;
    ids.reserve(ds.size());
    for (const Record &r : ds.records()) {
        ids.push_back(r.id);
    }
    return ids;
}

Eigen::MatrixXd one_hot_labels(const Dataset &ds, const std::vector<Eigen::Index> &rows) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.num_classes()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(*ds.records()[static_cast<std::size_t>(rows[k])].label)) = 1.0;
    }
    return y;
}

// Row-stochastic renormalisation; rows without mass become uniform.
void normalize_rows(Eigen::MatrixXd &f) {
    const double uniform = 1.0 / static_cast<double>(f.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const double sum = f.row(i).sum();
        if (sum > 0.0) {
            f.row(i) /= sum;
        } else {
            f.row(i).setConstant(uniform);
        }
    }
}

}  // namespace

PropagationResult propagate(const TransitionMatrix &t, const Dataset &ds, const double tol, const std::size_t max_iter) {
    if (!(tol > 0.0) || max_iter == 0) {
        throw config_error{ "propagate needs tol > 0 and max_iter >= 1" };
    }
    const Partition part = partition_and_check(t, ds);
    const auto n = static_cast<Eigen::Index>(ds.size());
    const auto classes = static_cast<Eigen::Index>(ds.num_classes());

    const Eigen::MatrixXd y_l = one_hot_labels(ds, part.labeled);
    Eigen::MatrixXd f(n, classes);
    for (std::size_t k = 0; k < part.labeled.size(); ++k) {
        f.row(part.labeled[k]) = y_l.row(static_cast<Eigen::Index>(k));
    }

    PropagationResult result;
    if (part.unlabeled.empty()) {
        result.probabilities = ProbabilityMatrix{ record_ids(ds), std::move(f) };
        result.converged = true;
        return result;
    }

    // Only unlabeled rows move: F_u <- T_uu F_u + T_ul Y_l.
    const Eigen::MatrixXd t_uu = t.transitions(part.unlabeled, part.unlabeled);
    const Eigen::MatrixXd source = t.transitions(part.unlabeled, part.labeled) * y_l;
    Eigen::MatrixXd f_u = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(part.unlabeled.size()), classes, 1.0 / static_cast<double>(classes));
    Eigen::MatrixXd next(f_u.rows(), f_u.cols());

    for (result.iterations = 1; result.iterations <= max_iter; ++result.iterations) {
        next.noalias() = t_uu * f_u;
        next += source;
        normalize_rows(next);
        if (!next.allFinite()) {
            throw numeric_error{ fmt::format("non-finite probability in propagation iteration {}", result.iterations) };
        }
        result.last_change = (next - f_u).cwiseAbs().maxCoeff();
        f_u.swap(next);
        if (result.last_change < tol) {
            result.converged = true;
            break;
        }
    }
    result.iterations = std::min(result.iterations, max_iter);

    for (std::size_t k = 0; k < part.unlabeled.size(); ++k) {
        f.row(part.unlabeled[k]) = f_u.row(static_cast<Eigen::Index>(k));
    }
    result.probabilities = ProbabilityMatrix{ record_ids(ds), std::move(f) };
    return result;
}

ProbabilityMatrix closed_form_lp(const TransitionMatrix &t, const Dataset &ds) {
    constexpr std::size_t max_records = 2000;
    if (ds.size() > max_records) {
        throw oracle_error{ fmt::format("closed_form_lp is limited to {} records, got {}", max_records, ds.size()) };
    }
    const Partition part = partition_and_check(t, ds);
    const auto n = static_cast<Eigen::Index>(ds.size());
    const auto classes = static_cast<Eigen::Index>(ds.num_classes());

    const Eigen::MatrixXd y_l = one_hot_labels(ds, part.labeled);
    Eigen::MatrixXd f(n, classes);
    for (std::size_t k = 0; k < part.labeled.size(); ++k) {
        f.row(part.labeled[k]) = y_l.row(static_cast<Eigen::Index>(k));
    }
    if (!part.unlabeled.empty()) {
        const auto u = static_cast<Eigen::Index>(part.unlabeled.size());
        const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(u, u) - t.transitions(part.unlabeled, part.unlabeled);
        const Eigen::MatrixXd rhs = t.transitions(part.unlabeled, part.labeled) * y_l;
        const Eigen::FullPivLU<Eigen::MatrixXd> lu{ system };
        if (!lu.isInvertible()) {
            throw oracle_error{ "I - T_uu is singular; some unlabeled component has no labeled record" };
        }
        const Eigen::MatrixXd f_u = lu.solve(rhs);
        if (!f_u.allFinite()) {
            throw oracle_error{ "closed-form solution is not finite" };
        }
        for (Eigen::Index k = 0; k < u; ++k) {
            f.row(part.unlabeled[static_cast<std::size_t>(k)]) = f_u.row(k);
        }
    }
    return ProbabilityMatrix{ record_ids(ds), std::move(f) };
}

double energy(const ProbabilityMatrix &f, const WeightMatrix &w) {
    if (static_cast<Eigen::Index>(f.rows()) != w.size()) {
        throw consistency_error{ fmt::format("probability matrix has {} rows, weight matrix {}", f.rows(), w.size()) };
    }
    const Eigen::VectorXd degree = w.weights.rowwise().sum();
    const Eigen::MatrixXd &x = f.matrix();
    // trace(F^T D F) - trace(F^T W F)
    const double diagonal = (x.array().square().colwise() * degree.array()).sum();
    const double off_diagonal = (x.transpose() * w.weights * x).trace();
    return std::max(0.0, diagonal - off_diagonal);
}

PropagationResult run_label_propagation(const Dataset &ds, const LpParams &params) {
    const double sigma = params.sigma ? *params.sigma : default_sigma(ds.records(), params.seed);
    const TransitionMatrix t = row_normalize(build_weights(ds.records(), sigma));
    return propagate(t, ds, params.tol, params.max_iter);
}

void write_probability_csv(std::ostream &out, const ProbabilityMatrix &f) {
    out << "id";
    for (std::size_t c = 0; c < f.num_classes(); ++c) {
        out << ",p_" << c;
    }
    out << '\n';
    for (std::size_t r = 0; r < f.rows(); ++r) {
        out << f.ids()[r];
        for (Eigen::Index c = 0; c < f.matrix().cols(); ++c) {
            out << fmt::format(",{}", f.matrix()(static_cast<Eigen::Index>(r), c));
        }
        out << '\n';
    }
}

}  // namespace lpsvm
