#include "lpsvm/svm.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace lpsvm {

double Kernel::operator()(const std::span<const double> x, const std::span<const double> z) const {
    double acc = 0.0;
    if (type == kernel_type::linear) {
        for (std::size_t k = 0; k < x.size(); ++k) {
            acc += x[k] * z[k];
        }
        return acc;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - z[k];
        acc += d * d;
    }
    return std::exp(-gamma * acc);
}

std::string Kernel::to_string() const {
    return type == kernel_type::linear ? std::string{ "linear" } : fmt::format("rbf({})", gamma);
}

void SmoParams::validate() const {
    if (!(c_reg > 0.0) || !std::isfinite(c_reg)) {
        throw config_error{ fmt::format("C must be positive, got {}", c_reg) };
    }
    if (!(tol > 0.0)) {
        throw config_error{ fmt::format("SMO tolerance must be positive, got {}", tol) };
    }
    if (max_passes == 0) {
        throw config_error{ "max_passes must be at least 1" };
    }
    if (kernel.type == kernel_type::rbf && !(kernel.gamma > 0.0)) {
        throw config_error{ fmt::format("rbf gamma must be positive, got {}", kernel.gamma) };
    }
}

namespace {

/// Kernel rows on demand. Small problems get the whole matrix up front; larger ones keep the two
/// most recently used rows, which is all one SMO step needs.
class KernelRows {
  public:
    static constexpr std::size_t full_matrix_limit = 3000;

    KernelRows(const std::span<const double> x, const std::size_t dimension, const Kernel &kernel) :
        x_{ x },
        d_{ dimension },
        n_{ x.size() / dimension },
        kernel_{ kernel },
        diagonal_(n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            diagonal_[i] = kernel_(point(i), point(i));
        }
        if (n_ <= full_matrix_limit) {
            full_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                full_[i * n_ + i] = diagonal_[i];
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double v = kernel_(point(i), point(j));
                    full_[i * n_ + j] = v;
                    full_[j * n_ + i] = v;
                }
            }
        } else {
            for (auto &slot : slots_) {
                slot.values.resize(n_);
            }
        }
    }

    [[nodiscard]] double diagonal(const std::size_t i) const { return diagonal_[i]; }

    [[nodiscard]] const double *row(const std::size_t i) {
        if (!full_.empty()) {
            return full_.data() + i * n_;
        }
        for (std::size_t s = 0; s < slots_.size(); ++s) {
            if (slots_[s].id == i) {
                mru_ = s;
                return slots_[s].values.data();
            }
        }
        const std::size_t s = 1 - mru_;
        Slot &slot = slots_[s];
        slot.id = i;
        for (std::size_t t = 0; t < n_; ++t) {
            slot.values[t] = kernel_(point(i), point(t));
        }
        mru_ = s;
        return slot.values.data();
    }

  private:
    struct Slot {
        std::size_t id{ std::numeric_limits<std::size_t>::max() };
        std::vector<double> values;
    };

    [[nodiscard]] std::span<const double> point(const std::size_t i) const { return x_.subspan(i * d_, d_); }

    std::span<const double> x_;
    std::size_t d_;
    std::size_t n_;
    Kernel kernel_;
    std::vector<double> diagonal_;
    std::vector<double> full_;
    std::array<Slot, 2> slots_{};
    std::size_t mru_{ 0 };
};

constexpr double tau = 1e-12;

}  // namespace

SmoSolution smo_solve(const std::span<const double> x, const std::size_t dimension, const std::span<const int> y,
                      const SmoParams &params) {
    params.validate();
    if (dimension == 0 || x.size() != y.size() * dimension) {
        throw dimension_error{ fmt::format("{} values do not form {} rows of dimension {}", x.size(), y.size(), dimension) };
    }
    const std::size_t n = y.size();
    if (n < 2) {
        throw training_error{ "SMO needs at least two training rows" };
    }
    if (!std::all_of(y.begin(), y.end(), [](const int v) { return v == 1 || v == -1; })) {
        throw training_error{ "binary labels must be -1 or +1" };
    }
    if (std::all_of(y.begin(), y.end(), [&](const int v) { return v == y.front(); })) {
        throw training_error{ "SMO needs both classes present" };
    }
    if (!std::all_of(x.begin(), x.end(), [](const double v) { return std::isfinite(v); })) {
        throw numeric_error{ "non-finite feature value in SVM training data" };
    }

    const double c = params.c_reg;
    KernelRows k{ x, dimension, params.kernel };
    SmoSolution sol;
    sol.alphas.assign(n, 0.0);
    std::vector<double> &alpha = sol.alphas;
    std::vector<double> grad(n, -1.0);  // G = Q a - e

    const auto in_up = [&](const std::size_t t) { return y[t] == 1 ? alpha[t] < c : alpha[t] > 0.0; };
    const auto in_low = [&](const std::size_t t) { return y[t] == 1 ? alpha[t] > 0.0 : alpha[t] < c; };

    const std::size_t max_iterations = params.max_passes * n;
    while (true) {
        std::size_t i = n;
        std::size_t j = n;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        sol.violation = (i == n || j == n) ? 0.0 : g_max - g_min;
        if (sol.violation < params.tol) {
            sol.converged = true;
            break;
        }
        if (sol.iterations >= max_iterations) {
            break;
        }
        ++sol.iterations;

        const double *k_i = k.row(i);
        const double *k_j = k.row(j);
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = k.diagonal(i) + k.diagonal(j) - 2.0 * k_i[j];
            if (quad <= 0.0) {
                quad = tau;
            }
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = k.diagonal(i) + k.diagonal(j) - 2.0 * k_i[j];
            if (quad <= 0.0) {
                quad = tau;
            }
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        // Q_ti = y_t y_i K_ti
        const double dyi = static_cast<double>(y[i]) * (alpha[i] - old_ai);
        const double dyj = static_cast<double>(y[j]) * (alpha[j] - old_aj);
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += static_cast<double>(y[t]) * (k_i[t] * dyi + k_j[t] * dyj);
        }
    }

    // rho from free multipliers, or the midpoint of the feasible interval when none are free
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = static_cast<double>(y[t]) * grad[t];
        if (alpha[t] >= c) {
            if (y[t] == -1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
    sol.bias = -rho;
    return sol;
}

SvmBinaryModel::SvmBinaryModel(const std::size_t dimension, std::vector<double> support_vectors, std::vector<int> sv_labels,
                               std::vector<double> sv_alphas, const double bias, SmoParams params, const bool converged) :
    dimension_{ dimension },
    support_vectors_{ std::move(support_vectors) },
    sv_labels_{ std::move(sv_labels) },
    sv_alphas_{ std::move(sv_alphas) },
    bias_{ bias },
    params_{ params },
    converged_{ converged } {
    if (sv_labels_.size() != sv_alphas_.size() || support_vectors_.size() != sv_alphas_.size() * dimension_) {
        throw consistency_error{ "support vector arrays have inconsistent sizes" };
    }
}

double SvmBinaryModel::decision(const std::span<const double> x) const {
    double acc = bias_;
    for (std::size_t k = 0; k < sv_alphas_.size(); ++k) {
        acc += sv_alphas_[k] * static_cast<double>(sv_labels_[k]) * params_.kernel(support_vector(k), x);
    }
    return acc;
}

std::vector<double> SvmBinaryModel::linear_weights() const {
    std::vector<double> w(dimension_, 0.0);
    for (std::size_t k = 0; k < sv_alphas_.size(); ++k) {
        const double coef = sv_alphas_[k] * static_cast<double>(sv_labels_[k]);
        const std::span<const double> sv = support_vector(k);
        for (std::size_t j = 0; j < dimension_; ++j) {
            w[j] += coef * sv[j];
        }
    }
    return w;
}

std::span<const double> SvmBinaryModel::support_vector(const std::size_t k) const {
    return std::span<const double>{ support_vectors_ }.subspan(k * dimension_, dimension_);
}

SvmBinaryModel smo_train(const std::span<const double> x, const std::size_t dimension, const std::span<const int> y,
                         const SmoParams &params) {
    const SmoSolution sol = smo_solve(x, dimension, y, params);
    std::vector<double> svs;
    std::vector<int> labels;
    std::vector<double> alphas;
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (sol.alphas[t] > 0.0) {
            svs.insert(svs.end(), x.begin() + static_cast<std::ptrdiff_t>(t * dimension),
                       x.begin() + static_cast<std::ptrdiff_t>((t + 1) * dimension));
            labels.push_back(y[t]);
            alphas.push_back(sol.alphas[t]);
        }
    }
    return SvmBinaryModel{ dimension, std::move(svs), std::move(labels), std::move(alphas), sol.bias, params, sol.converged };
}

double svm_decision(const SvmBinaryModel &model, const std::span<const double> x) {
    if (x.size() != model.dimension()) {
        throw dimension_error{ fmt::format("expected {} features, got {}", model.dimension(), x.size()) };
    }
    return model.decision(x);
}

}  // namespace lpsvm
