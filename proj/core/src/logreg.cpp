#include "lpsvm/logreg.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <cmath>

namespace lpsvm {

namespace {

double softplus(const double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(const double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double linear_score(const std::span<const double> w, const double b, const std::span<const double> x) {
    double z = b;
    for (std::size_t k = 0; k < w.size(); ++k) {
        z += w[k] * x[k];
    }
    return z;
}

void check_problem(const std::span<const double> theta, const std::span<const double> x, const std::size_t dimension,
                   const std::span<const double> targets) {
    if (theta.size() != dimension + 1 || x.size() != targets.size() * dimension || targets.empty()) {
        throw dimension_error{ "logistic objective arguments have inconsistent sizes" };
    }
}

}  // namespace

void LogregParams::validate() const {
    if (!(l2 >= 0.0) || !(learning_rate > 0.0) || epochs == 0) {
        throw config_error{ fmt::format("invalid logistic regression parameters (l2={}, lr={}, epochs={})", l2, learning_rate, epochs) };
    }
}

LogregModel::LogregModel(const std::size_t num_classes, const std::size_t dimension, std::vector<double> weights,
                         std::vector<double> biases, LogregParams params, const double gradient_norm) :
    num_classes_{ num_classes },
    dimension_{ dimension },
    weights_{ std::move(weights) },
    biases_{ std::move(biases) },
    params_{ params },
    gradient_norm_{ gradient_norm } {
    if (weights_.size() != num_classes_ * dimension_ || biases_.size() != num_classes_) {
        throw dimension_error{ "logistic model parameter arrays have inconsistent sizes" };
    }
}

std::span<const double> LogregModel::weights(const class_index c) const {
    return std::span<const double>{ weights_ }.subspan(c * dimension_, dimension_);
}

std::vector<double> LogregModel::scores(const std::span<const double> x) const {
    if (x.size() != dimension_) {
        throw dimension_error{ fmt::format("expected {} features, got {}", dimension_, x.size()) };
    }
    std::vector<double> s(num_classes_);
    for (class_index c = 0; c < num_classes_; ++c) {
        s[c] = linear_score(weights(c), biases_[c], x);
    }
    return s;
}

class_index LogregModel::predict(const std::span<const double> x) const {
    const std::vector<double> s = scores(x);
    return static_cast<class_index>(std::distance(s.begin(), std::max_element(s.begin(), s.end())));
}

double logreg_objective(const std::span<const double> theta, const std::span<const double> x, const std::size_t dimension,
                        const std::span<const double> targets, const double l2) {
    check_problem(theta, x, dimension, targets);
    const std::span<const double> w = theta.first(dimension);
    const double b = theta[dimension];
    double loss = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double z = linear_score(w, b, x.subspan(i * dimension, dimension));
        loss += softplus(z) - targets[i] * z;
    }
    double norm2 = 0.0;
    for (const double v : w) {
        norm2 += v * v;
    }
    return loss / static_cast<double>(targets.size()) + 0.5 * l2 * norm2;
}

std::vector<double> logreg_gradient(const std::span<const double> theta, const std::span<const double> x,
                                    const std::size_t dimension, const std::span<const double> targets, const double l2) {
    check_problem(theta, x, dimension, targets);
    const std::span<const double> w = theta.first(dimension);
    const double b = theta[dimension];
    std::vector<double> g(dimension + 1, 0.0);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const std::span<const double> xi = x.subspan(i * dimension, dimension);
        const double residual = sigmoid(linear_score(w, b, xi)) - targets[i];
        for (std::size_t k = 0; k < dimension; ++k) {
            g[k] += residual * xi[k];
        }
        g[dimension] += residual;
    }
    const double inv_n = 1.0 / static_cast<double>(targets.size());
    for (std::size_t k = 0; k < dimension; ++k) {
        g[k] = g[k] * inv_n + l2 * w[k];
    }
    g[dimension] *= inv_n;
    return g;
}

LogregModel logreg_train(const Dataset &ds, const LogregParams &params) {
    params.validate();
    const std::vector<Record> labeled = ds.labeled_records();
    const std::vector<std::size_t> counts = ds.class_counts();
    for (class_index c = 0; c < ds.num_classes(); ++c) {
        if (counts[c] == 0) {
            throw training_error{ fmt::format("logistic regression: class {} has no labeled records", c) };
        }
    }
    const std::size_t d = ds.dimension();
    const std::vector<double> x = feature_matrix(labeled);

    std::vector<double> weights(ds.num_classes() * d, 0.0);
    std::vector<double> biases(ds.num_classes(), 0.0);
    double grad_norm2 = 0.0;
    std::vector<double> targets(labeled.size());
    for (class_index c = 0; c < ds.num_classes(); ++c) {
        for (std::size_t i = 0; i < labeled.size(); ++i) {
            targets[i] = *labeled[i].label == c ? 1.0 : 0.0;
        }
        std::vector<double> theta(d + 1, 0.0);
        const double shrink = 1.0 / (1.0 + params.learning_rate * params.l2);
        for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
            // data-term gradient only; the L2 term is applied by the shrink below
            const std::vector<double> g = logreg_gradient(theta, x, d, targets, 0.0);
            for (std::size_t k = 0; k < d; ++k) {
                theta[k] = (theta[k] - params.learning_rate * g[k]) * shrink;
            }
            theta[d] -= params.learning_rate * g[d];
            if (!std::all_of(theta.begin(), theta.end(), [](const double v) { return std::isfinite(v); })) {
                throw training_error{ fmt::format("logistic regression diverged for class {} at epoch {}", c, epoch) };
            }
        }
        const double objective = logreg_objective(theta, x, d, targets, params.l2);
        if (!std::isfinite(objective)) {
            throw training_error{ fmt::format("logistic regression objective is not finite for class {}", c) };
        }
        for (const double v : logreg_gradient(theta, x, d, targets, params.l2)) {
            grad_norm2 += v * v;
        }
        std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d), weights.begin() + static_cast<std::ptrdiff_t>(c * d));
        biases[c] = theta[d];
    }
    return LogregModel{ ds.num_classes(), d, std::move(weights), std::move(biases), params, std::sqrt(grad_norm2) };
}

}  // namespace lpsvm
