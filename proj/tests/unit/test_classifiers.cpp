#include "lpsvm/classifier.hpp"
#include "lpsvm/exceptions.hpp"
#include "lpsvm/logreg.hpp"
#include "lpsvm/ovo.hpp"
#include "lpsvm/svm.hpp"

#include "svm_oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace lpsvm {
namespace {

using testing::make_dataset;

TEST(Smo, SymmetricPair) {
    const std::vector<double> x{ -1.0, 1.0 };
    const std::vector<int> y{ -1, 1 };
    SmoParams p;
    p.c_reg = 100.0;
    p.tol = 1e-9;
    const SvmBinaryModel m = smo_train(x, 1, y, p);
    ASSERT_EQ(m.linear_weights().size(), 1u);
    EXPECT_NEAR(m.linear_weights()[0], 1.0, 1e-9);
    EXPECT_NEAR(m.bias(), 0.0, 1e-9);
    EXPECT_NEAR(svm_decision(m, std::vector<double>{ 0.0 }), 0.0, 1e-9);
    EXPECT_NEAR(svm_decision(m, std::vector<double>{ 1.0 }), 1.0, 1e-9);
    EXPECT_NEAR(svm_decision(m, std::vector<double>{ -1.0 }), -1.0, 1e-9);
    EXPECT_THROW((void)svm_decision(m, std::vector<double>{ 0.0, 1.0 }), dimension_error);
}

TEST(Smo, SingleClassIsError) {
    const std::vector<double> x{ 0.0, 1.0 };
    const std::vector<int> y{ 1, 1 };
    EXPECT_THROW((void)smo_solve(x, 1, y, {}), training_error);
}

TEST(Smo, MatchesActiveSetOracle) {
    std::mt19937_64 rng{ 123 };
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = testing::random_binary_instance(rng, 2 + static_cast<std::size_t>(trial % 5), 2, trial % 2 == 0);
        SmoParams p;
        p.c_reg = trial % 3 == 0 ? 0.5 : 10.0;
        p.tol = 1e-6;
        const SmoSolution sol = smo_solve(inst.x, inst.dimension, inst.y, p);
        const auto best = testing::active_set_dual_optimum(inst.x, inst.dimension, inst.y, p.c_reg);
        ASSERT_TRUE(best.has_value()) << "trial " << trial;
        const double dual = testing::dual_objective(inst.x, inst.dimension, inst.y, sol.alphas);
        EXPECT_NEAR(dual, *best, 1e-4) << "trial " << trial;
    }
}

TEST(Smo, DualFeasibleKktAndSmallGap) {
    std::mt19937_64 rng{ 7 };
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = testing::random_binary_instance(rng, 10 + static_cast<std::size_t>(trial), 3, true);
        SmoParams p;
        p.c_reg = 1.0;
        p.tol = 1e-4;
        const SmoSolution sol = smo_solve(inst.x, inst.dimension, inst.y, p);
        EXPECT_TRUE(sol.converged);
        const auto check = testing::check_solution(inst.x, inst.dimension, inst.y, sol, p.c_reg, 1e-3);
        EXPECT_TRUE(check.box_feasible);
        EXPECT_LE(std::abs(check.equality_residual), 1e-6);
        EXPECT_GE(check.kkt_fraction, 0.99);
        EXPECT_LE(check.relative_gap, 1e-3);
    }
}

TEST(Smo, RbfDecisionMatchesExpansion) {
    std::mt19937_64 rng{ 3 };
    const auto inst = testing::random_binary_instance(rng, 20, 2, false);
    SmoParams p;
    p.kernel = Kernel{ kernel_type::rbf, 2.0 };
    const SvmBinaryModel m = smo_train(inst.x, inst.dimension, inst.y, p);
    const std::vector<double> probe{ 0.3, -0.2 };
    double expected = m.bias();
    for (std::size_t k = 0; k < m.num_support_vectors(); ++k) {
        const auto sv = m.support_vector(k);
        const double d2 = (sv[0] - probe[0]) * (sv[0] - probe[0]) + (sv[1] - probe[1]) * (sv[1] - probe[1]);
        expected += m.sv_alphas()[k] * m.sv_labels()[k] * std::exp(-2.0 * d2);
    }
    EXPECT_NEAR(m.decision(probe), expected, 1e-12);
}

TEST(Smo, LinearDecisionEqualsExplicitWeights) {
    std::mt19937_64 rng{ 5 };
    const auto inst = testing::random_binary_instance(rng, 30, 3, false);
    const SvmBinaryModel m = smo_train(inst.x, inst.dimension, inst.y, {});
    const std::vector<double> w = m.linear_weights();
    for (std::size_t i = 0; i < 30; ++i) {
        const std::span<const double> xi{ inst.x.data() + i * 3, 3 };
        EXPECT_NEAR(m.decision(xi), w[0] * xi[0] + w[1] * xi[1] + w[2] * xi[2] + m.bias(), 1e-9);
    }
}

Dataset three_blobs() {
    std::vector<std::vector<double>> x;
    std::vector<std::optional<class_index>> y;
    std::mt19937_64 rng{ 1 };
    std::uniform_real_distribution<double> u{ -0.5, 0.5 };
    const double centers[3][2] = { { 0, 0 }, { 5, 0 }, { 0, 5 } };
    for (std::size_t i = 0; i < 60; ++i) {
        const std::size_t c = i % 3;
        x.push_back({ centers[c][0] + u(rng), centers[c][1] + u(rng) });
        y.emplace_back(c);
    }
    return make_dataset(x, y, 3);
}

TEST(Ovo, PairCounts) {
    EXPECT_EQ(class_pairs(2).size(), 1u);
    EXPECT_EQ(class_pairs(10).size(), 45u);
    EXPECT_EQ(class_pairs(3), (std::vector<std::pair<class_index, class_index>>{ { 0, 1 }, { 0, 2 }, { 1, 2 } }));
    const OvoModel m = ovo_train(three_blobs());
    EXPECT_EQ(m.models().size(), 3u);
    EXPECT_EQ(m.pair_index(1, 2), 2u);
}

TEST(Ovo, SeparatedBlobsTrainPerfectly) {
    const Dataset ds = three_blobs();
    const OvoModel m = ovo_train(ds);
    for (const Record &r : ds.records()) {
        EXPECT_EQ(ovo_predict(m, r.features), *r.label);
    }
}

TEST(Ovo, ThreadedTrainingIsIdentical) {
    const Dataset ds = three_blobs();
    OvoParams p;
    p.threads = 3;
    const OvoModel a = ovo_train(ds);
    const OvoModel b = ovo_train(ds, p);
    EXPECT_EQ(model_to_json(a), model_to_json(b));
}

TEST(Ovo, MissingClassNamesPair) {
    const Dataset ds = make_dataset({ { 0 }, { 1 }, { 2 } }, { 0, 1, std::nullopt }, 3);
    try {
        (void)ovo_train(ds);
        FAIL();
    } catch (const training_error &e) {
        EXPECT_NE(std::string{ e.what() }.find("(0, 2)"), std::string::npos) << e.what();
    }
}

// constant decision values: one support vector at the origin, decision = bias
SvmBinaryModel constant_model(double value) {
    return SvmBinaryModel{ 1, { 0.0 }, { 1 }, { 0.0 }, value, SmoParams{}, true };
}

TEST(Ovo, VotingAndTieBreak) {
    // (0,1) -> 0, (0,2) -> 0, (1,2) -> 1: votes (2,1,0)
    const OvoModel majority{ 3, 1, { constant_model(-1.0), constant_model(-1.0), constant_model(-1.0) } };
    EXPECT_EQ(ovo_predict(majority, std::vector<double>{ 0.0 }), 0u);

    // cyclic: (0,1) -> 0 at 0.5, (0,2) -> 2 at 2.0, (1,2) -> 1 at 1.0
    const OvoModel cyclic{ 3, 1, { constant_model(-0.5), constant_model(2.0), constant_model(-1.0) } };
    const OvoVotes v = ovo_votes(cyclic, std::vector<double>{ 0.0 });
    EXPECT_EQ(v.votes, (std::vector<std::size_t>{ 1, 1, 1 }));
    EXPECT_EQ(v.strength, (std::vector<double>{ 0.5, 1.0, 2.0 }));
    for (int run = 0; run < 5; ++run) {
        EXPECT_EQ(ovo_predict(cyclic, std::vector<double>{ 0.0 }), 2u);
    }

    // equal strengths fall back to the lowest index
    const OvoModel flat{ 3, 1, { constant_model(-1.0), constant_model(1.0), constant_model(-1.0) } };
    EXPECT_EQ(ovo_predict(flat, std::vector<double>{ 0.0 }), 0u);

    const OvoModel binary{ 2, 1, { constant_model(0.25) } };
    EXPECT_EQ(ovo_predict(binary, std::vector<double>{ 0.0 }), 1u);
}

TEST(Ovo, TrainingOrderInvariant) {
    const Dataset ds = testing::blobs(90, 3, 2.5, 4);
    std::vector<Record> reversed(ds.records().rbegin(), ds.records().rend());
    const OvoModel a = ovo_train(ds);
    const OvoModel b = ovo_train(ds.with_records(reversed));
    std::mt19937_64 rng{ 2 };
    std::normal_distribution<double> probe{ 1.0, 2.0 };
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x{ probe(rng), probe(rng), probe(rng) };
        EXPECT_EQ(ovo_predict(a, x), ovo_predict(b, x));
    }
}

TEST(Logreg, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng{ 11 };
    std::normal_distribution<double> g{ 0.0, 1.0 };
    for (int dataset = 0; dataset < 3; ++dataset) {
        const std::size_t n = 20;
        const std::size_t d = 4;
        std::vector<double> x(n * d);
        std::vector<double> t(n);
        for (double &v : x) {
            v = g(rng);
        }
        for (double &v : t) {
            v = g(rng) > 0 ? 1.0 : 0.0;
        }
        for (int point = 0; point < 5; ++point) {
            std::vector<double> theta(d + 1);
            for (double &v : theta) {
                v = g(rng);
            }
            const auto grad = logreg_gradient(theta, x, d, t, 0.1);
            for (std::size_t k = 0; k < theta.size(); ++k) {
                const double h = 1e-5;
                std::vector<double> plus = theta;
                std::vector<double> minus = theta;
                plus[k] += h;
                minus[k] -= h;
                const double fd = (logreg_objective(plus, x, d, t, 0.1) - logreg_objective(minus, x, d, t, 0.1)) / (2 * h);
                EXPECT_LE(std::abs(fd - grad[k]), 1e-4 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST(Logreg, SymmetricPair) {
    const Dataset ds = make_dataset({ { -1.0 }, { 1.0 } }, { 0, 1 }, 2);
    const LogregModel m = logreg_train(ds);
    EXPECT_GT(m.weights(1)[0], 0.0);
    EXPECT_LT(m.weights(0)[0], 0.0);
    const auto hi = m.scores(std::vector<double>{ 1.0 });
    const auto lo = m.scores(std::vector<double>{ -1.0 });
    EXPECT_NEAR(std::abs(hi[1]), std::abs(lo[1]), 1e-9);
    EXPECT_EQ(m.predict(std::vector<double>{ 0.7 }), 1u);
    EXPECT_EQ(m.predict(std::vector<double>{ -0.7 }), 0u);
}

TEST(Logreg, StrongPenaltyPredictsPrior) {
    const Dataset ds = make_dataset({ { -2 }, { -1 }, { 0 }, { 1 }, { 2 }, { 3 } }, { 0, 1, 0, 1, 0, 0 }, 2);
    const LogregModel m = logreg_train(ds, { 1e6, 0.1, 500 });
    EXPECT_LT(std::abs(m.weights(0)[0]), 1e-6);
    for (const double x : { -5.0, 0.0, 5.0 }) {
        EXPECT_EQ(m.predict(std::vector<double>{ x }), 0u);
    }
}

TEST(Logreg, Errors) {
    const Dataset ds = make_dataset({ { 0 }, { 1 }, { 2 } }, { 0, 1, std::nullopt }, 3);
    EXPECT_THROW((void)logreg_train(ds), training_error);
    const Dataset huge = make_dataset({ { -1e200 }, { 1e200 } }, { 0, 1 }, 2);
    EXPECT_THROW((void)logreg_train(huge, { 0.0, 1e10, 50 }), training_error);
}

TEST(Dispatch, MatchesUnderlyingPredictors) {
    const Dataset ds = three_blobs();
    const ClassifierKind svm = ClassifierKind::svm();
    const ClassifierKind lr = ClassifierKind::logreg();
    const TrainedModel ms = fit_classifier(svm, ds);
    const TrainedModel ml = fit_classifier(lr, ds);
    for (const Record &r : ds.records()) {
        EXPECT_EQ(predict_with(svm, ms, r.features), ovo_predict(std::get<OvoModel>(ms), r.features));
        const auto scores = std::get<LogregModel>(ml).scores(r.features);
        const auto best = static_cast<class_index>(std::max_element(scores.begin(), scores.end()) - scores.begin());
        EXPECT_EQ(predict_with(lr, ml, r.features), best);
    }
    EXPECT_THROW((void)predict_with(svm, ml, ds.records()[0].features), dispatch_error);
    EXPECT_THROW((void)classifier_kind_from_string("forest"), dispatch_error);
    EXPECT_TRUE(classifier_kind_from_string("svm").is_svm());
    EXPECT_FALSE(classifier_kind_from_string("logreg").is_svm());
}

TEST(ModelJson, RoundTrip) {
    const Dataset ds = three_blobs();
    for (const ClassifierKind &kind : { ClassifierKind::svm(), ClassifierKind::logreg() }) {
        const TrainedModel m = fit_classifier(kind, ds);
        const std::string text = model_to_json(m);
        const TrainedModel back = model_from_json(text);
        EXPECT_EQ(model_to_json(back), text);
        for (const Record &r : ds.records()) {
            EXPECT_EQ(predict(back, r.features), predict(m, r.features));
        }
    }
    EXPECT_THROW((void)model_from_json("{}"), io_error);
    EXPECT_THROW((void)model_from_json("not json"), io_error);
}

}  // namespace
}  // namespace lpsvm
