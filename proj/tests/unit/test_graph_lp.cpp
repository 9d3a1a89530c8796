#include "lpsvm/exceptions.hpp"
#include "lpsvm/graph_lp.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

namespace lpsvm {
namespace {

using testing::make_dataset;
using testing::random_dataset;

// harmonic solution via the Laplacian: (D_uu - W_uu) F_u = W_ul Y_l
Eigen::MatrixXd laplacian_oracle(const WeightMatrix &w, const Dataset &ds) {
    std::vector<Eigen::Index> lab;
    std::vector<Eigen::Index> unl;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        (ds.records()[i].label ? lab : unl).push_back(static_cast<Eigen::Index>(i));
    }
    const auto n = static_cast<Eigen::Index>(ds.size());
    const auto c = static_cast<Eigen::Index>(ds.num_classes());
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lab.size()), c);
    for (std::size_t k = 0; k < lab.size(); ++k) {
        y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(*ds.records()[static_cast<std::size_t>(lab[k])].label)) = 1.0;
    }
    const Eigen::VectorXd degree = w.weights.rowwise().sum();
    const Eigen::MatrixXd lap = Eigen::MatrixXd(degree.asDiagonal()) - w.weights;
    const Eigen::MatrixXd f_u = lap(unl, unl).partialPivLu().solve(w.weights(unl, lab) * y);
    Eigen::MatrixXd f(n, c);
    f(lab, Eigen::all) = y;
    f(unl, Eigen::all) = f_u;
    return f;
}

double brute_energy(const Eigen::MatrixXd &f, const Eigen::MatrixXd &w) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        for (Eigen::Index j = 0; j < f.rows(); ++j) {
            e += w(i, j) * (f.row(i) - f.row(j)).squaredNorm();
        }
    }
    return 0.5 * e;
}

TEST(Weights, AnalyticValues) {
    const Dataset ds = make_dataset({ { 0, 0 }, { 0, 0 }, { 3, 4 } }, { 0, 1, std::nullopt }, 2);
    const WeightMatrix w = build_weights(ds.records(), 5.0);
    EXPECT_DOUBLE_EQ(w.weights(0, 1), 1.0);
    EXPECT_NEAR(w.weights(0, 2), 0.36787944117144233, 1e-15);
    EXPECT_EQ(w.weights(0, 0), 0.0);
}

TEST(Weights, SymmetricNonNegative) {
    const Dataset ds = random_dataset(5, 3, 2, 4);
    const WeightMatrix w = build_weights(ds.records(), 0.7);
    EXPECT_TRUE(w.weights == w.weights.transpose());
    EXPECT_GE(w.weights.minCoeff(), 0.0);
    EXPECT_EQ(w.weights.diagonal().sum(), 0.0);
}

TEST(Weights, Errors) {
    const Dataset ds = make_dataset({ { 0.0 }, { NAN } }, { 0, 1 }, 2);
    EXPECT_THROW((void)build_weights(ds.records(), 1.0), numeric_error);
    const Dataset ok = make_dataset({ { 0.0 }, { 1.0 } }, { 0, 1 }, 2);
    EXPECT_THROW((void)build_weights(ok.records(), 0.0), numeric_error);
}

TEST(Sigma, Examples) {
    const Dataset two = make_dataset({ { 0, 0 }, { 3, 0 } }, { 0, 1 }, 2);
    EXPECT_DOUBLE_EQ(default_sigma(two.records()), 1.0);

    const Dataset square = make_dataset({ { 0, 0 }, { 1, 0 }, { 0, 1 }, { 1, 1 } }, { 0, 1, 0, 1 }, 2);
    EXPECT_NEAR(default_sigma(square.records()), (4.0 + 2.0 * std::sqrt(2.0)) / 6.0 / 3.0, 1e-12);
    EXPECT_NEAR(default_sigma(square.records()), 0.3794, 1e-4);

    const Dataset same = make_dataset({ { 1, 1 }, { 1, 1 }, { 1, 1 } }, { 0, 1, 0 }, 2);
    const double eps = default_sigma(same.records());
    EXPECT_GT(eps, 0.0);
    EXPECT_EQ(build_weights(same.records(), eps).weights(0, 1), 1.0);
}

TEST(Sigma, SampledIsDeterministic) {
    const Dataset ds = random_dataset(100, 2, 2, 1);
    EXPECT_EQ(default_sigma(ds.records(), 3, 50), default_sigma(ds.records(), 3, 50));
    EXPECT_GT(default_sigma(ds.records(), 3, 50), 0.0);
}

TEST(Normalize, Rows) {
    WeightMatrix w;
    w.weights = Eigen::MatrixXd{ { 1, 1 }, { 0, 2 } };
    w.sigma = 1.0;
    const TransitionMatrix t = row_normalize(w);
    EXPECT_DOUBLE_EQ(t.transitions(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(t.transitions(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(t.transitions(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(t.transitions(1, 1), 1.0);
    w.weights(1, 1) = 0.0;
    EXPECT_THROW((void)row_normalize(w), normalization_error);

    const Dataset ds = random_dataset(30, 4, 3, 2);
    const TransitionMatrix r = row_normalize(build_weights(ds.records(), 0.5));
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        EXPECT_NEAR(r.transitions.row(i).sum(), 1.0, 1e-9);
    }
}

TEST(Propagate, SingleSource) {
    const Dataset ds = make_dataset({ { 0.0 }, { 1.0 } }, { 0, std::nullopt }, 3);
    // a 3-class dataset needs every class labeled, so use a 2-node graph with C=1 on the wire
    const Dataset two = make_dataset({ { 0.0 }, { 1.0 }, { 10.0 }, { 20.0 } }, { 0, std::nullopt, 1, 2 }, 3);
    const auto t = row_normalize(build_weights(two.records(), 1.0));
    const auto res = propagate(t, two);
    EXPECT_NEAR(res.probabilities.probability(1, 0), 1.0, 1e-6);
    (void)ds;
}

TEST(Propagate, CollinearMidpoint) {
    const Dataset ds = make_dataset({ { 0.0 }, { 1.0 }, { 2.0 } }, { 0, std::nullopt, 1 }, 2);
    const auto t = row_normalize(build_weights(ds.records(), 1.0));
    const auto res = propagate(t, ds);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.probabilities.probability(1, 0), 0.5, 1e-12);
    EXPECT_NEAR(res.probabilities.probability(1, 1), 0.5, 1e-12);
    const auto cf = closed_form_lp(t, ds);
    EXPECT_NEAR(cf.probability(1, 0), 0.5, 1e-12);
}

TEST(Propagate, MatchesClosedFormAndLaplacianOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset ds = random_dataset(10 + 4 * seed, 3, 3, seed);
        const WeightMatrix w = build_weights(ds.records(), default_sigma(ds.records()));
        const auto t = row_normalize(w);
        const auto it = propagate(t, ds, 1e-10, 100000);
        const auto cf = closed_form_lp(t, ds);
        const Eigen::MatrixXd oracle = laplacian_oracle(w, ds);
        EXPECT_LE((it.probabilities.matrix() - cf.matrix()).cwiseAbs().maxCoeff(), 1e-5) << "seed " << seed;
        EXPECT_LE((cf.matrix() - oracle).cwiseAbs().maxCoeff(), 1e-9) << "seed " << seed;
    }
}

TEST(Propagate, RowsStochasticAndLabeledOneHot) {
    const Dataset ds = random_dataset(40, 2, 4, 11);
    const auto res = run_label_propagation(ds, {});
    for (const Record &r : ds.records()) {
        const Eigen::RowVectorXd row = res.probabilities.row(r.id);
        EXPECT_NEAR(row.sum(), 1.0, 1e-6);
        EXPECT_GE(row.minCoeff(), 0.0);
        if (r.label) {
            EXPECT_EQ(row(static_cast<Eigen::Index>(*r.label)), 1.0);
            EXPECT_EQ(row.sum(), 1.0);
        }
    }
}

TEST(Propagate, PermutationInvariant) {
    const Dataset ds = random_dataset(30, 3, 3, 5);
    std::vector<Record> shuffled = ds.records();
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64{ 9 });
    const Dataset permuted = ds.with_records(shuffled);
    const double sigma = default_sigma(ds.records());
    const auto a = propagate(row_normalize(build_weights(ds.records(), sigma)), ds);
    const auto b = propagate(row_normalize(build_weights(permuted.records(), sigma)), permuted);
    for (const Record &r : ds.records()) {
        EXPECT_LE((a.probabilities.row(r.id) - b.probabilities.row(r.id)).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Propagate, IterationCapReportsNotConverged) {
    const Dataset ds = random_dataset(30, 3, 3, 5);
    const auto t = row_normalize(build_weights(ds.records(), default_sigma(ds.records())));
    const auto res = propagate(t, ds, 1e-12, 2);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.iterations, 2u);
}

TEST(Propagate, MismatchIsConsistencyError) {
    const Dataset ds = random_dataset(10, 2, 2, 5);
    const Dataset other = random_dataset(12, 2, 2, 5);
    const auto t = row_normalize(build_weights(other.records(), 0.5));
    EXPECT_THROW((void)propagate(t, ds), consistency_error);
}

TEST(ClosedForm, AllLabeled) {
    const Dataset ds = random_dataset(8, 2, 2, 1, 1.0);
    const auto cf = closed_form_lp(row_normalize(build_weights(ds.records(), 0.5)), ds);
    for (const Record &r : ds.records()) {
        EXPECT_EQ(cf.probability(r.id, *r.label), 1.0);
    }
}

TEST(Energy, Examples) {
    const ProbabilityMatrix same{ { 0, 1, 2 }, Eigen::MatrixXd{ { 0.2, 0.8 }, { 0.2, 0.8 }, { 0.2, 0.8 } } };
    const Dataset three = random_dataset(3, 2, 2, 0);
    EXPECT_NEAR(energy(same, build_weights(three.records(), 1.0)), 0.0, 1e-12);

    const ProbabilityMatrix f{ { 0, 1 }, Eigen::MatrixXd{ { 1, 0 }, { 0, 1 } } };
    WeightMatrix w;
    w.weights = Eigen::MatrixXd{ { 0, 1 }, { 1, 0 } };
    EXPECT_DOUBLE_EQ(energy(f, w), 2.0);
}

TEST(Energy, MatchesDoubleSum) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset ds = random_dataset(15, 2, 3, seed);
        const WeightMatrix w = build_weights(ds.records(), 0.4);
        const auto res = propagate(row_normalize(w), ds);
        EXPECT_NEAR(energy(res.probabilities, w), brute_energy(res.probabilities.matrix(), w.weights), 1e-9);
    }
}

TEST(Energy, HarmonicSolutionIsMinimal) {
    const Dataset ds = random_dataset(25, 2, 3, 17);
    const WeightMatrix w = build_weights(ds.records(), default_sigma(ds.records()));
    const auto res = propagate(row_normalize(w), ds, 1e-10, 100000);
    const double best = energy(res.probabilities, w);

    Eigen::MatrixXd start = res.probabilities.matrix();
    std::mt19937_64 rng{ 1 };
    std::uniform_real_distribution<double> noise{ -0.05, 0.05 };
    for (const Record &r : ds.records()) {
        if (!r.label) {
            start.row(static_cast<Eigen::Index>(r.id)).setConstant(1.0 / 3.0);
        }
    }
    EXPECT_LE(best, energy(ProbabilityMatrix{ res.probabilities.ids(), start }, w) + 1e-12);

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd perturbed = res.probabilities.matrix();
        for (const Record &r : ds.records()) {
            if (!r.label) {
                for (Eigen::Index c = 0; c < 3; ++c) {
                    perturbed(static_cast<Eigen::Index>(r.id), c) += noise(rng);
                }
            }
        }
        EXPECT_LE(best, brute_energy(perturbed, w.weights) + 1e-9);
    }
}

TEST(ProbabilityCsv, Header) {
    const ProbabilityMatrix f{ { 4, 9 }, Eigen::MatrixXd{ { 1, 0 }, { 0.25, 0.75 } } };
    std::ostringstream out;
    write_probability_csv(out, f);
    EXPECT_EQ(out.str(), "id,p_0,p_1\n4,1,0\n9,0.25,0.75\n");
    EXPECT_THROW((void)f.row_of(5), consistency_error);
}

}  // namespace
}  // namespace lpsvm
