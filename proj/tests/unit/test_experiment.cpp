#include "lpsvm/exceptions.hpp"
#include "lpsvm/experiment.hpp"
#include "lpsvm/synthetic.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace lpsvm {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("lpsvm_test_" + name);
    fs::remove_all(p);
    return p;
}

std::size_t count_lines(const fs::path &p) {
    std::ifstream in{ p };
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        ++n;
    }
    return n;
}

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.datasets.push_back({ "", "blobs:n=120,c=3,sep=4,seed=1", {}, std::nullopt });
    return spec;
}

TEST(Blobs, Balanced) {
    const Dataset ds = testing::blobs(300, 3, 6.0, 0);
    for (const std::size_t c : ds.class_counts()) {
        EXPECT_NEAR(static_cast<double>(c), 100.0, 1.0);
    }
    EXPECT_EQ(testing::blobs(301, 3, 6.0, 0).class_counts(), (std::vector<std::size_t>{ 101, 100, 100 }));
}

TEST(Blobs, Deterministic) {
    EXPECT_EQ(testing::blobs(50, 2, 6.0, 7), testing::blobs(50, 2, 6.0, 7));
    EXPECT_FALSE(testing::blobs(50, 2, 6.0, 7) == testing::blobs(50, 2, 6.0, 8));
}

TEST(Blobs, CenterDistanceAndBayesError) {
    BlobSpec spec;
    spec.num_classes = 2;
    spec.separation = 6.0;
    const auto a = blob_center(spec, 0);
    const auto b = blob_center(spec, 1);
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d2 += (a[k] - b[k]) * (a[k] - b[k]);
    }
    EXPECT_NEAR(std::sqrt(d2), 6.0, 1e-12);

    // nearest-center rule: Bayes error is Phi(-3), about 0.135%
    spec.n = 20000;
    spec.seed = 3;
    const Dataset ds = gen_blobs(spec);
    std::size_t wrong = 0;
    for (const Record &r : ds.records()) {
        double da = 0.0;
        double db = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            da += (r.features[k] - a[k]) * (r.features[k] - a[k]);
            db += (r.features[k] - b[k]) * (r.features[k] - b[k]);
        }
        wrong += (da < db ? 0u : 1u) != *r.label ? 1 : 0;
    }
    EXPECT_LT(static_cast<double>(wrong) / 20000.0, 0.003);
}

TEST(Blobs, SpecStringRoundTrip) {
    BlobSpec spec;
    spec.n = 77;
    spec.separation = 2.5;
    spec.seed = 9;
    const BlobSpec back = blob_spec_from_string(spec.to_string());
    EXPECT_EQ(back.to_string(), spec.to_string());
    EXPECT_THROW((void)blob_spec_from_string("blobs:n=x"), config_error);
    EXPECT_THROW((void)blob_spec_from_string("blobs:n=1,c=2"), config_error);
}

TEST(Experiment, SinglePointSingleRow) {
    ExperimentSpec spec = small_spec();
    spec.out_dir = scratch("single");
    const auto rows = run_experiment(spec);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].error.empty()) << rows[0].error;
    EXPECT_EQ(count_lines(*spec.out_dir / "summary.csv"), 2u);
    EXPECT_GE(count_lines(*spec.out_dir / "iterations.jsonl"), 1u);
    EXPECT_TRUE(fs::exists(*spec.out_dir / "models" / (rows[0].config_hash + ".json")));
    EXPECT_EQ(rows[0].train_size, 84u);
    EXPECT_EQ(rows[0].test_size, 36u);
}

TEST(Experiment, CartesianRowCount) {
    ExperimentSpec spec = small_spec();
    spec.axis = sweep_axis::threshold;
    spec.values = { 0.5, 0.6, 0.7, 0.8, 0.9 };
    spec.seeds = { 0, 1, 2 };
    spec.save_models = false;
    spec.out_dir = scratch("sweep");
    const auto rows = run_experiment(spec);
    EXPECT_EQ(rows.size(), 15u);
    EXPECT_EQ(count_lines(*spec.out_dir / "summary.csv"), 16u);
    std::set<std::string> hashes;
    for (const auto &r : rows) {
        hashes.insert(r.config_hash);
    }
    EXPECT_EQ(hashes.size(), 15u);
}

TEST(Experiment, ConfigReproducesMetrics) {
    ExperimentSpec spec = small_spec();
    spec.axis = sweep_axis::tasks;
    spec.values = { 1, 3 };
    spec.seeds = { 4 };
    const auto first = run_experiment(spec);
    const auto second = run_experiment(spec);
    ASSERT_EQ(first.size(), 2u);
    for (std::size_t i = 0; i < first.size(); ++i) {
        EXPECT_EQ(first[i].config_hash, second[i].config_hash);
        EXPECT_EQ(first[i].macro_f1, second[i].macro_f1);
        EXPECT_EQ(first[i].micro_f1, second[i].micro_f1);
        EXPECT_EQ(first[i].iterations, second[i].iterations);
    }
    // serial and parallel engines agree, though their hashes differ
    EXPECT_EQ(first[0].macro_f1, first[1].macro_f1);
    EXPECT_NE(first[0].config_hash, first[1].config_hash);
}

TEST(Experiment, ErrorsAreRecordedPerRow) {
    ExperimentSpec spec;
    spec.datasets.push_back({ "missing", "/nonexistent/file.csv", {}, std::nullopt });
    spec.datasets.push_back({ "", "blobs:n=60,c=2,sep=5", {}, std::nullopt });
    const auto rows = run_experiment(spec);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].error.empty());
    EXPECT_TRUE(rows[1].error.empty());
}

TEST(Experiment, InvalidSweepValues) {
    ExperimentSpec spec = small_spec();
    spec.axis = sweep_axis::threshold;
    spec.values = { 0.0 };
    EXPECT_THROW(spec.validate(), config_error);
    spec.axis = sweep_axis::unlabeled_fraction;
    spec.values = { 1.0 };
    EXPECT_THROW(spec.validate(), config_error);
    spec.axis = sweep_axis::tasks;
    spec.values = { 1.5 };
    EXPECT_THROW(spec.validate(), config_error);
    spec.axis = sweep_axis::threshold;
    spec.values.clear();
    EXPECT_EQ(spec.points(spec.datasets[0]).size(), default_threshold_grid().size());
}

TEST(Baselines, FullyLabeledSystemsCoincide) {
    ExperimentSpec spec = small_spec();
    spec.split.unlabeled_fraction = 0.0;
    const auto rows = compare_baselines(spec);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].error.empty()) << rows[0].error;
    EXPECT_EQ(rows[0].hybrid_macro, rows[0].supervised_macro);
    EXPECT_EQ(rows[0].hybrid_macro, rows[0].lp_alone_macro);
}

TEST(Baselines, WritesCompareCsv) {
    ExperimentSpec spec = small_spec();
    spec.seeds = { 0, 1 };
    spec.out_dir = scratch("compare");
    const auto rows = compare_baselines(spec);
    EXPECT_EQ(rows.size(), 2u);
    EXPECT_EQ(count_lines(*spec.out_dir / "compare.csv"), 3u);
}

TEST(Skew, PipelineEmitsBothAveragings) {
    ExperimentSpec spec;
    spec.datasets.push_back({ "", "blobs:n=400,c=2,sep=4,seed=2", {}, 8.0 });
    const auto rows = run_experiment(spec);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].error.empty()) << rows[0].error;
    EXPECT_GT(rows[0].macro_f1, 0.0);
    EXPECT_GT(rows[0].micro_f1, 0.0);
}

TEST(Bench, RowsPerCombination) {
    BenchSpec spec;
    spec.sizes = { 60, 120 };
    spec.tasks = { 0, 2 };
    spec.out_dir = scratch("bench");
    const auto rows = bench_scaling(spec);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto &r : rows) {
        EXPECT_GT(r.wall_ms, 0.0);
    }
    EXPECT_EQ(count_lines(*spec.out_dir / "bench.csv"), 5u);
}

}  // namespace
}  // namespace lpsvm
