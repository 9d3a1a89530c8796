/**
 * @file
 * @brief Experiment harness: sweeps over thresholds, unlabeled fractions or task counts;
 *        baseline comparisons; timing scans. Every sweep point is split, masked, fitted and
 *        evaluated on the held-out test set, and each output row carries a hash of its full
 *        configuration.
 */

#ifndef LPSVM_EXPERIMENT_HPP_
#define LPSVM_EXPERIMENT_HPP_
#pragma once

#include "lpsvm/data.hpp"
#include "lpsvm/eval.hpp"
#include "lpsvm/hybrid.hpp"
#include "lpsvm/parallel.hpp"
#include "lpsvm/synthetic.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lpsvm {

enum class sweep_axis { none, threshold, unlabeled_fraction, tasks };

[[nodiscard]] sweep_axis sweep_axis_from_string(const std::string &name);
[[nodiscard]] std::string to_string(sweep_axis axis);

/// Default threshold grid for threshold sweeps.
[[nodiscard]] std::vector<double> default_threshold_grid();

struct DatasetSource {
    /// Name used in reports; defaults to the file stem or "blobs".
    std::string name;
    /// A file path, or a `blobs:...` generator specification.
    std::string location;
    LoadOptions load{};
    /// Downsample to this majority:minority ratio (>= 8) before splitting.
    std::optional<double> skew_ratio;

    [[nodiscard]] Dataset load_data() const;
    [[nodiscard]] std::string display_name() const;
};

/// Everything that determines one sweep point's outcome.
struct PointConfig {
    std::string dataset;
    std::string location;
    std::optional<double> skew_ratio;
    SplitSpec split{};
    HybridConfig hybrid{};
    /// Empty: serial engine. Otherwise the parallel engine with this many tasks.
    std::optional<std::size_t> tasks;

    [[nodiscard]] std::string canonical() const;
    /// 16 hex digits of FNV-1a over canonical().
    [[nodiscard]] std::string hash() const;
};

struct PreparedSplit {
    /// Scaled, masked training set.
    Dataset train;
    /// Scaled, fully labeled test set.
    Dataset test;
    ShadowLabels shadow;
};

/// Skew (optional), shuffle split, min-max scaling fitted on train, then masking.
[[nodiscard]] PreparedSplit prepare_split(const Dataset &full, const PointConfig &cfg);

[[nodiscard]] HybridResult fit_point(const Dataset &train, const PointConfig &cfg);

/// Evaluates @p model on @p test.
[[nodiscard]] ConfusionMatrix evaluate(const TrainedModel &model, const Dataset &test, std::size_t tasks = 1);

struct PointOutcome {
    HybridResult result;
    EvalReport report;
    std::size_t train_size{};
    std::size_t test_size{};
    std::size_t initial_labeled{};
};

[[nodiscard]] PointOutcome run_point(const Dataset &full, const PointConfig &cfg);

/// Every unlabeled record takes its propagation argmax (lowest class on ties); the classifier is
/// then fitted once on the whole training set, which makes the baseline inductive.
[[nodiscard]] TrainedModel lp_alone_fit(const Dataset &train, const HybridConfig &cfg);

/// The classifier fitted on the initially labeled records only.
[[nodiscard]] TrainedModel supervised_fit(const Dataset &train, const HybridConfig &cfg);

struct ExperimentSpec {
    std::vector<DatasetSource> datasets;
    SplitSpec split{};
    HybridConfig hybrid{};
    std::optional<std::size_t> tasks;
    sweep_axis axis{ sweep_axis::none };
    std::vector<double> values;
    std::vector<std::uint64_t> seeds{ 0 };
    std::optional<std::filesystem::path> out_dir;
    bool save_models{ true };
    bool dump_lp{ false };

    /// @throws config_error if a sweep value is invalid for its axis or nothing would run.
    void validate() const;
    /// Point configurations in output order: dataset, sweep value, seed.
    [[nodiscard]] std::vector<std::pair<double, PointConfig>> points(const DatasetSource &source) const;
};

struct SummaryRow {
    std::string dataset;
    std::string axis;
    double value{};
    std::uint64_t seed{};
    std::string config_hash;
    std::string classifier;
    double threshold{};
    double train_fraction{};
    double unlabeled_fraction{};
    std::size_t tasks{};
    bool refit_final{};
    std::size_t train_size{};
    std::size_t test_size{};
    std::size_t initial_labeled{};
    std::size_t initial_unlabeled{};
    double final_labeled_fraction{};
    std::size_t iterations{};
    std::string termination;
    double macro_f1{};
    double micro_f1{};
    double accuracy{};
    double training_ms{};
    std::string error;
};

void write_summary_csv(std::ostream &out, const std::vector<SummaryRow> &rows);

/**
 * @brief Runs every point of @p spec. Failures are recorded in the row's error column and the
 *        sweep continues. With an output directory, writes summary.csv, iterations.jsonl and
 *        models/<hash>.json (and lp/<hash>.csv with dump_lp).
 */
[[nodiscard]] std::vector<SummaryRow> run_experiment(const ExperimentSpec &spec);

struct BaselineRow {
    std::string dataset;
    std::uint64_t seed{};
    std::string config_hash;
    double hybrid_macro{};
    double hybrid_micro{};
    double lp_alone_macro{};
    double lp_alone_micro{};
    double supervised_macro{};
    double supervised_micro{};
    std::string error;
};

[[nodiscard]] BaselineRow run_baselines(const Dataset &full, const PointConfig &cfg);

void write_baseline_csv(std::ostream &out, const std::vector<BaselineRow> &rows);

/// Hybrid, propagation-only and supervised-only on identical splits, per dataset and seed.
/// Writes compare.csv when an output directory is set.
[[nodiscard]] std::vector<BaselineRow> compare_baselines(const ExperimentSpec &spec);

struct BenchSpec {
    std::vector<std::size_t> sizes{ 500, 1000, 2000 };
    std::vector<std::size_t> dims{ 2 };
    /// 0 selects the serial engine.
    std::vector<std::size_t> tasks{ 0 };
    std::size_t num_classes{ 3 };
    double separation{ 4.0 };
    double unlabeled_fraction{ 0.8 };
    HybridConfig hybrid{};
    std::uint64_t seed{ 0 };
    std::optional<std::filesystem::path> out_dir;
};

struct BenchRow {
    std::size_t size{};
    std::size_t dim{};
    std::size_t tasks{};
    std::string classifier;
    double wall_ms{};
    double lp_ms{};
    double fit_ms{};
    double label_ms{};
    double merge_ms{};
    std::size_t iterations{};
};

void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows);

/// Wall time of a full fit for each size x dim x tasks combination on blob data. Writes
/// bench.csv when an output directory is set.
[[nodiscard]] std::vector<BenchRow> bench_scaling(const BenchSpec &spec);

}  // namespace lpsvm

#endif  // LPSVM_EXPERIMENT_HPP_
