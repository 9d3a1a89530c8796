#include "lpsvm/exceptions.hpp"
#include "lpsvm/hybrid.hpp"

#include "audit.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace lpsvm {
namespace {

using testing::make_dataset;

ProbabilityMatrix two_class_lp(std::vector<std::size_t> ids, const std::vector<std::pair<double, double>> &rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m(static_cast<Eigen::Index>(i), 0) = rows[i].first;
        m(static_cast<Eigen::Index>(i), 1) = rows[i].second;
    }
    return ProbabilityMatrix{ std::move(ids), std::move(m) };
}

Record unlabeled_record(std::size_t id) {
    return Record{ id, { 0.0 }, std::nullopt };
}

TEST(Gate, Examples) {
    const std::vector<Record> one{ unlabeled_record(0) };
    const auto lp = two_class_lp({ 0 }, { { 0.9, 0.1 } });
    const std::vector<class_index> says_one{ 1 };
    const std::vector<class_index> says_zero{ 0 };
    EXPECT_TRUE(gate_records(one, says_one, lp, 0.5).newly_labeled.empty());

    const auto agree = gate_records(one, says_zero, lp, 0.8);
    ASSERT_EQ(agree.newly_labeled.size(), 1u);
    EXPECT_EQ(agree.newly_labeled[0].label, 0u);
    EXPECT_EQ(agree.decisions[0].lp_probability, 0.9);

    const auto boundary = two_class_lp({ 0 }, { { 0.94, 0.06 } });
    EXPECT_TRUE(gate_records(one, says_zero, boundary, 0.95).newly_labeled.empty());
    EXPECT_EQ(gate_records(one, says_zero, boundary, 0.94).newly_labeled.size(), 1u);
}

TEST(Gate, MissingIdIsConsistencyError) {
    const std::vector<Record> one{ unlabeled_record(3) };
    const std::vector<class_index> pred{ 0 };
    EXPECT_THROW((void)gate_records(one, pred, two_class_lp({ 0 }, { { 1.0, 0.0 } }), 0.5), consistency_error);
}

TEST(Gate, OrderIndependentAndSortedById) {
    std::mt19937_64 rng{ 4 };
    std::uniform_real_distribution<double> u{ 0.0, 1.0 };
    std::vector<std::size_t> ids(30);
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<std::pair<double, double>> rows;
    std::vector<Record> recs;
    std::vector<class_index> pred;
    for (const std::size_t id : ids) {
        const double p = u(rng);
        rows.emplace_back(p, 1.0 - p);
        recs.push_back(unlabeled_record(id));
        pred.push_back(u(rng) < 0.5 ? 0 : 1);
    }
    const auto lp = two_class_lp(ids, rows);
    const auto base = gate_records(recs, pred, lp, 0.6);

    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Record> recs2;
    std::vector<class_index> pred2;
    for (const std::size_t k : order) {
        recs2.push_back(recs[k]);
        pred2.push_back(pred[k]);
    }
    const auto shuffled = gate_records(recs2, pred2, lp, 0.6);
    ASSERT_EQ(shuffled.newly_labeled.size(), base.newly_labeled.size());
    for (std::size_t i = 0; i < base.newly_labeled.size(); ++i) {
        EXPECT_EQ(shuffled.newly_labeled[i].id, base.newly_labeled[i].id);
        EXPECT_EQ(shuffled.newly_labeled[i].label, base.newly_labeled[i].label);
    }
    EXPECT_TRUE(std::is_sorted(base.remaining.begin(), base.remaining.end(),
                               [](const Record &a, const Record &b) { return a.id < b.id; }));
    EXPECT_EQ(base.newly_labeled.size() + base.remaining.size(), recs.size());
}

TEST(Hybrid, NothingUnlabeled) {
    const Dataset ds = testing::blobs(30, 3, 5.0, 1);
    const HybridResult res = hybrid_fit(ds, {});
    EXPECT_TRUE(res.iterations.empty());
    EXPECT_EQ(res.reason, termination_reason::all_labeled);
    EXPECT_EQ(model_to_json(res.model), model_to_json(fit_classifier(ClassifierKind::svm(), ds)));
}

TEST(Hybrid, UnreachableThresholdStopsAfterOneIteration) {
    const Dataset ds = testing::random_dataset(20, 2, 2, 3, 0.3);
    HybridConfig cfg;
    cfg.threshold = 1.0;
    const HybridResult res = hybrid_fit(ds, cfg);
    ASSERT_EQ(res.iterations.size(), 1u);
    EXPECT_EQ(res.iterations[0].newly_labeled, 0u);
    EXPECT_EQ(res.reason, termination_reason::no_progress);
}

TEST(Hybrid, SeparatedBlobsFromTwoSeeds) {
    const Dataset full = testing::blobs(42, 2, 8.0, 5);
    const Dataset scaled = MinMaxScaler::fit(full).transform(full);
    const MaskedDataset m = mask_labels(scaled, 40.0 / 42.0, 2);
    ASSERT_EQ(m.dataset.labeled_count(), 2u);
    HybridConfig cfg;
    cfg.threshold = 0.7;
    const HybridResult res = hybrid_fit(m.dataset, cfg);
    EXPECT_EQ(res.reason, termination_reason::all_labeled);
    EXPECT_LE(res.iterations.size(), 3u);
    for (const Record &r : res.labeled.records()) {
        ASSERT_TRUE(r.label);
        EXPECT_EQ(*r.label, *full.records()[r.id].label);
    }
    // unseen points at the blob centers
    BlobSpec spec;
    spec.num_classes = 2;
    spec.separation = 8.0;
    for (class_index c = 0; c < 2; ++c) {
        Dataset probe = testing::make_dataset({ blob_center(spec, c) }, { c }, 2);
        probe = MinMaxScaler::fit(full).transform(probe);
        EXPECT_EQ(predict(res, probe.records()[0].features), c);
        EXPECT_EQ(predict(res, probe.records()[0].features), predict(res, probe.records()[0].features));
    }
}

TEST(Hybrid, ZeroThresholdLabelsEverythingWithClassifier) {
    const MaskedDataset m = testing::masked_blobs(60, 3, 3.0, 0.8, 9);
    HybridConfig cfg;
    cfg.threshold = 0.0;
    const HybridResult res = hybrid_fit(m.dataset, cfg);
    ASSERT_EQ(res.iterations.size(), 1u);
    EXPECT_EQ(res.iterations[0].newly_labeled, m.dataset.unlabeled_count());
    const TrainedModel first = fit_classifier(cfg.classifier, m.dataset.with_records(m.dataset.labeled_records()));
    for (const LabelDecision &d : res.iterations[0].decisions) {
        EXPECT_EQ(d.label, predict(first, m.dataset.records()[d.id].features));
    }
}

TEST(Hybrid, LogsMatchReplayedLoop) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const MaskedDataset m = testing::masked_blobs(90, 3, 3.0, 0.8, seed);
        for (const ClassifierKind &kind : { ClassifierKind::svm(), ClassifierKind::logreg() }) {
            HybridConfig cfg;
            cfg.classifier = kind;
            cfg.threshold = 0.6;
            const HybridResult res = hybrid_fit(m.dataset, cfg);
            const auto audit = testing::audit_run(m.dataset, cfg, res);
            EXPECT_TRUE(audit.ok()) << audit.problems.front();
            EXPECT_EQ(audit.decisions_checked, m.dataset.unlabeled_count() - res.labeled.unlabeled_count());
        }
    }
}

TEST(Hybrid, StrictModeKeepsLastLoopModel) {
    const MaskedDataset m = testing::masked_blobs(60, 3, 4.0, 0.7, 2);
    HybridConfig cfg;
    cfg.refit_final = false;
    const HybridResult strict = hybrid_fit(m.dataset, cfg);
    cfg.refit_final = true;
    const HybridResult refit = hybrid_fit(m.dataset, cfg);
    EXPECT_EQ(strict.labeled, refit.labeled);
    EXPECT_EQ(model_to_json(refit.model), model_to_json(fit_classifier(cfg.classifier, refit.labeled.with_records(refit.labeled.labeled_records()))));
}

TEST(Hybrid, ConfigValidation) {
    HybridConfig cfg;
    cfg.threshold = 1.5;
    EXPECT_THROW(cfg.validate(), config_error);
    cfg.threshold = -0.1;
    EXPECT_THROW(cfg.validate(), config_error);
}

TEST(Hybrid, IterationLogJsonLines) {
    const MaskedDataset m = testing::masked_blobs(40, 2, 4.0, 0.8, 1);
    const HybridResult res = hybrid_fit(m.dataset, {});
    std::ostringstream out;
    write_iteration_logs(out, res.iterations);
    const std::string text = out.str();
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), res.iterations.size());
    EXPECT_NE(text.find("\"lp_ms\""), std::string::npos);
    EXPECT_NE(text.find("\"merge_ms\""), std::string::npos);
}

}  // namespace
}  // namespace lpsvm
