#include "lpsvm/experiment.hpp"

#include "lpsvm/exceptions.hpp"

#include "hybrid_detail.hpp"
#include "json_io.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace lpsvm {

namespace {

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    return out + '"';
}

std::uint64_t fnv1a(const std::string &text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string classifier_signature(const ClassifierKind &kind) {
    if (const auto *svm = std::get_if<OvoParams>(&kind.params)) {
        return fmt::format("svm(c={},kernel={},tol={},max_passes={})", svm->smo.c_reg, svm->smo.kernel.to_string(), svm->smo.tol,
                           svm->smo.max_passes);
    }
    const auto &lr = std::get<LogregParams>(kind.params);
    return fmt::format("logreg(l2={},lr={},epochs={})", lr.l2, lr.learning_rate, lr.epochs);
}

// masking draws from a different stream than the shuffle
constexpr std::uint64_t mask_seed_offset = 0x5DEECE66DULL;

std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out{ path };
    if (!out) {
        throw io_error{ fmt::format("cannot write '{}'", path.string()) };
    }
    return out;
}

}  // namespace

sweep_axis sweep_axis_from_string(const std::string &name) {
    if (name == "none") {
        return sweep_axis::none;
    }
    if (name == "threshold") {
        return sweep_axis::threshold;
    }
    if (name == "unlabeled_fraction" || name == "unlabeled-fraction") {
        return sweep_axis::unlabeled_fraction;
    }
    if (name == "tasks") {
        return sweep_axis::tasks;
    }
    throw config_error{ fmt::format("unknown sweep axis '{}'", name) };
}

std::string to_string(const sweep_axis axis) {
    switch (axis) {
        case sweep_axis::none:
            return "none";
        case sweep_axis::threshold:
            return "threshold";
        case sweep_axis::unlabeled_fraction:
            return "unlabeled_fraction";
        case sweep_axis::tasks:
            return "tasks";
    }
    return "none";
}

std::vector<double> default_threshold_grid() {
    return { 0.5, 0.6, 0.7, 0.8, 0.9, 0.95 };
}

Dataset DatasetSource::load_data() const {
    if (location.rfind("blobs:", 0) == 0) {
        return gen_blobs(blob_spec_from_string(location));
    }
    return load_dataset(location, load);
}

std::string DatasetSource::display_name() const {
    if (!name.empty()) {
        return name;
    }
    if (location.rfind("blobs:", 0) == 0) {
        return "blobs";
    }
    return std::filesystem::path{ location }.stem().string();
}

std::string PointConfig::canonical() const {
    const LpParams &lp = hybrid.lp;
    return fmt::format(
        "dataset={};location={};skew={};train_fraction={};unlabeled_fraction={};split_seed={};threshold={};classifier={};"
        "lp_sigma={};lp_tol={};lp_max_iter={};lp_seed={};refit_final={};seed={};tasks={}",
        dataset, location, skew_ratio ? fmt::format("{}", *skew_ratio) : "none", split.train_fraction, split.unlabeled_fraction,
        split.seed, hybrid.threshold, classifier_signature(hybrid.classifier), lp.sigma ? fmt::format("{}", *lp.sigma) : "auto", lp.tol,
        lp.max_iter, lp.seed, hybrid.refit_final, hybrid.seed, tasks ? fmt::format("{}", *tasks) : "serial");
}

std::string PointConfig::hash() const {
    return fmt::format("{:016x}", fnv1a(canonical()));
}

PreparedSplit prepare_split(const Dataset &full, const PointConfig &cfg) {
    cfg.split.validate();
    const Dataset source = cfg.skew_ratio ? make_skewed(full, *cfg.skew_ratio, cfg.split.seed) : full;
    const TrainTestSplit split = shuffle_split(source, cfg.split.train_fraction, cfg.split.seed);
    auto [train, test] = min_max_scale(split.train, split.test);
    MaskedDataset masked = mask_labels(train, cfg.split.unlabeled_fraction, cfg.split.seed ^ mask_seed_offset);
    return { std::move(masked.dataset), std::move(test), std::move(masked.shadow) };
}

HybridResult fit_point(const Dataset &train, const PointConfig &cfg) {
    if (cfg.tasks) {
        ParallelConfig pc;
        pc.hybrid = cfg.hybrid;
        pc.tasks = cfg.tasks;
        return parallel_hybrid_fit(train, pc);
    }
    return hybrid_fit(train, cfg.hybrid);
}

ConfusionMatrix evaluate(const TrainedModel &model, const Dataset &test, const std::size_t tasks) {
    const std::vector<class_index> predicted = parallel_predict(model, test.records(), tasks);
    std::vector<class_index> truth;
    truth.reserve(test.size());
    for (const Record &r : test.records()) {
        if (!r.label) {
            throw consistency_error{ fmt::format("test record {} has no label", r.id) };
        }
        truth.push_back(*r.label);
    }
    return confusion(truth, predicted, test.num_classes());
}

PointOutcome run_point(const Dataset &full, const PointConfig &cfg) {
    const PreparedSplit prepared = prepare_split(full, cfg);
    detail::Stopwatch timer;
    HybridResult result = fit_point(prepared.train, cfg);
    const double training_ms = timer.elapsed_ms();
    const ConfusionMatrix cm = evaluate(result.model, prepared.test, cfg.tasks.value_or(1));
    PointOutcome out;
    out.report = make_report(cm, labeled_percentage(result.iterations, result.initial_unlabeled), training_ms);
    out.train_size = prepared.train.size();
    out.test_size = prepared.test.size();
    out.initial_labeled = prepared.train.labeled_count();
    out.result = std::move(result);
    return out;
}

TrainedModel lp_alone_fit(const Dataset &train, const HybridConfig &cfg) {
    if (train.unlabeled_count() == 0) {
        return fit_classifier(cfg.classifier, train);
    }
    const PropagationResult lp = run_label_propagation(train, cfg.lp);
    std::vector<Record> records = train.records();
    for (Record &r : records) {
        if (!r.label) {
            const Eigen::RowVectorXd row = lp.probabilities.row(r.id);
            Eigen::Index best = 0;
            row.maxCoeff(&best);
            r.label = static_cast<class_index>(best);
        }
    }
    return fit_classifier(cfg.classifier, train.with_records(std::move(records)));
}

TrainedModel supervised_fit(const Dataset &train, const HybridConfig &cfg) {
    return fit_classifier(cfg.classifier, train.with_records(train.labeled_records()));
}

void ExperimentSpec::validate() const {
    if (datasets.empty()) {
        throw config_error{ "no dataset given" };
    }
    if (seeds.empty()) {
        throw config_error{ "at least one seed is required" };
    }
    split.validate();
    hybrid.validate();
    if (tasks && *tasks == 0) {
        throw config_error{ "tasks must be at least 1" };
    }
    if (axis != sweep_axis::none && axis != sweep_axis::threshold && values.empty()) {
        throw config_error{ fmt::format("sweep over {} needs values", to_string(axis)) };
    }
    for (const double v : values) {
        switch (axis) {
            case sweep_axis::threshold:
                if (!(v > 0.0 && v <= 1.0)) {
                    throw config_error{ fmt::format("threshold sweep value {} outside (0,1]", v) };
                }
                break;
            case sweep_axis::unlabeled_fraction:
                if (!(v >= 0.0 && v < 1.0)) {
                    throw config_error{ fmt::format("unlabeled fraction sweep value {} outside [0,1)", v) };
                }
                break;
            case sweep_axis::tasks:
                if (!(v >= 1.0) || std::floor(v) != v) {
                    throw config_error{ fmt::format("task sweep value {} is not a positive integer", v) };
                }
                break;
            case sweep_axis::none:
                break;
        }
    }
    if (axis == sweep_axis::none && !(hybrid.threshold > 0.0)) {
        throw config_error{ "threshold must be in (0,1]" };
    }
}

std::vector<std::pair<double, PointConfig>> ExperimentSpec::points(const DatasetSource &source) const {
    std::vector<double> grid = values;
    if (axis == sweep_axis::none) {
        grid = { 0.0 };
    } else if (axis == sweep_axis::threshold && grid.empty()) {
        grid = default_threshold_grid();
    }
    std::vector<std::pair<double, PointConfig>> out;
    for (const double value : grid) {
        for (const std::uint64_t seed : seeds) {
            PointConfig p;
            p.dataset = source.display_name();
            p.location = source.location;
            p.skew_ratio = source.skew_ratio;
            p.split = split;
            p.split.seed = seed;
            p.hybrid = hybrid;
            p.hybrid.seed = seed;
            p.hybrid.lp.seed = seed;
            p.tasks = tasks;
            switch (axis) {
                case sweep_axis::threshold:
                    p.hybrid.threshold = value;
                    break;
                case sweep_axis::unlabeled_fraction:
                    p.split.unlabeled_fraction = value;
                    break;
                case sweep_axis::tasks:
                    p.tasks = static_cast<std::size_t>(value);
                    break;
                case sweep_axis::none:
                    break;
            }
            out.emplace_back(value, std::move(p));
        }
    }
    return out;
}

void write_summary_csv(std::ostream &out, const std::vector<SummaryRow> &rows) {
    out << "dataset,axis,value,seed,config_hash,classifier,threshold,train_fraction,unlabeled_fraction,tasks,refit_final,"
           "train_size,test_size,initial_labeled,initial_unlabeled,final_labeled_fraction,iterations,termination,"
           "macro_f1,micro_f1,accuracy,training_ms,error\n";
    for (const SummaryRow &r : rows) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.dataset), r.axis, r.value,
                           r.seed, r.config_hash, r.classifier, r.threshold, r.train_fraction, r.unlabeled_fraction, r.tasks,
                           r.refit_final ? 1 : 0, r.train_size, r.test_size, r.initial_labeled, r.initial_unlabeled,
                           r.final_labeled_fraction, r.iterations, r.termination, r.macro_f1, r.micro_f1, r.accuracy, r.training_ms,
                           csv_field(r.error));
    }
}

std::vector<SummaryRow> run_experiment(const ExperimentSpec &spec) {
    spec.validate();
    std::ofstream summary_out;
    std::ofstream iterations_out;
    if (spec.out_dir) {
        std::filesystem::create_directories(*spec.out_dir);
        if (spec.save_models) {
            std::filesystem::create_directories(*spec.out_dir / "models");
        }
        if (spec.dump_lp) {
            std::filesystem::create_directories(*spec.out_dir / "lp");
        }
        summary_out = open_output(*spec.out_dir / "summary.csv");
        iterations_out = open_output(*spec.out_dir / "iterations.jsonl");
        write_summary_csv(summary_out, {});
    }

    std::vector<SummaryRow> rows;
    for (const DatasetSource &source : spec.datasets) {
        std::optional<Dataset> full;
        std::string load_error;
        try {
            full = source.load_data();
        } catch (const std::exception &e) {
            load_error = e.what();
        }
        for (const auto &[value, point] : spec.points(source)) {
            SummaryRow row;
            row.dataset = point.dataset;
            row.axis = to_string(spec.axis);
            row.value = value;
            row.seed = point.split.seed;
            row.config_hash = point.hash();
            row.classifier = point.hybrid.classifier.name();
            row.threshold = point.hybrid.threshold;
            row.train_fraction = point.split.train_fraction;
            row.unlabeled_fraction = point.split.unlabeled_fraction;
            row.tasks = point.tasks.value_or(0);
            row.refit_final = point.hybrid.refit_final;
            row.error = load_error;
            if (full) {
                try {
                    const PointOutcome outcome = run_point(*full, point);
                    const HybridResult &res = outcome.result;
                    row.train_size = outcome.train_size;
                    row.test_size = outcome.test_size;
                    row.initial_labeled = outcome.initial_labeled;
                    row.initial_unlabeled = res.initial_unlabeled;
                    row.final_labeled_fraction = outcome.report.labeled_trajectory.empty() ? (res.initial_unlabeled == 0 ? 1.0 : 0.0)
                                                                                           : outcome.report.labeled_trajectory.back();
                    row.iterations = res.iterations.size();
                    row.termination = to_string(res.reason);
                    row.macro_f1 = outcome.report.macro_f1;
                    row.micro_f1 = outcome.report.micro_f1;
                    row.accuracy = outcome.report.accuracy;
                    row.training_ms = outcome.report.training_ms;
                    if (spec.out_dir) {
                        for (const IterationLog &log : res.iterations) {
                            nlohmann::json line = detail::to_json(log);
                            line["dataset"] = row.dataset;
                            line["seed"] = row.seed;
                            line["axis"] = row.axis;
                            line["value"] = row.value;
                            line["config_hash"] = row.config_hash;
                            iterations_out << line.dump() << '\n';
                        }
                        if (spec.save_models) {
                            std::ofstream model_out = open_output(*spec.out_dir / "models" / (row.config_hash + ".json"));
                            model_out << model_to_json(res.model) << '\n';
                        }
                        if (spec.dump_lp && res.last_lp) {
                            std::ofstream lp_out = open_output(*spec.out_dir / "lp" / (row.config_hash + ".csv"));
                            write_probability_csv(lp_out, *res.last_lp);
                        }
                    }
                } catch (const std::exception &e) {
                    row.error = e.what();
                }
            }
            if (spec.out_dir) {
                std::ostringstream line;
                write_summary_csv(line, { row });
                const std::string text = line.str();
                summary_out << text.substr(text.find('\n') + 1);
                summary_out.flush();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

BaselineRow run_baselines(const Dataset &full, const PointConfig &cfg) {
    BaselineRow row;
    row.dataset = cfg.dataset;
    row.seed = cfg.split.seed;
    row.config_hash = cfg.hash();
    const PreparedSplit prepared = prepare_split(full, cfg);
    const std::size_t tasks = cfg.tasks.value_or(1);

    const HybridResult hybrid = fit_point(prepared.train, cfg);
    const ConfusionMatrix cm_hybrid = evaluate(hybrid.model, prepared.test, tasks);
    row.hybrid_macro = f_measure(cm_hybrid, averaging::macro);
    row.hybrid_micro = f_measure(cm_hybrid, averaging::micro);

    const ConfusionMatrix cm_lp = evaluate(lp_alone_fit(prepared.train, cfg.hybrid), prepared.test, tasks);
    row.lp_alone_macro = f_measure(cm_lp, averaging::macro);
    row.lp_alone_micro = f_measure(cm_lp, averaging::micro);

    const ConfusionMatrix cm_sup = evaluate(supervised_fit(prepared.train, cfg.hybrid), prepared.test, tasks);
    row.supervised_macro = f_measure(cm_sup, averaging::macro);
    row.supervised_micro = f_measure(cm_sup, averaging::micro);
    return row;
}

void write_baseline_csv(std::ostream &out, const std::vector<BaselineRow> &rows) {
    out << "dataset,seed,config_hash,hybrid_macro_f1,hybrid_micro_f1,lp_alone_macro_f1,lp_alone_micro_f1,"
           "supervised_macro_f1,supervised_micro_f1,lp_alone_protocol,error\n";
    for (const BaselineRow &r : rows) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},inductive,{}\n", csv_field(r.dataset), r.seed, r.config_hash, r.hybrid_macro,
                           r.hybrid_micro, r.lp_alone_macro, r.lp_alone_micro, r.supervised_macro, r.supervised_micro, csv_field(r.error));
    }
}

std::vector<BaselineRow> compare_baselines(const ExperimentSpec &spec) {
    ExperimentSpec base = spec;
    base.axis = sweep_axis::none;
    base.values.clear();
    base.validate();

    std::vector<BaselineRow> rows;
    for (const DatasetSource &source : base.datasets) {
        std::optional<Dataset> full;
        std::string load_error;
        try {
            full = source.load_data();
        } catch (const std::exception &e) {
            load_error = e.what();
        }
        for (const auto &[value, point] : base.points(source)) {
            BaselineRow row;
            row.dataset = point.dataset;
            row.seed = point.split.seed;
            row.config_hash = point.hash();
            row.error = load_error;
            if (full) {
                try {
                    row = run_baselines(*full, point);
                } catch (const std::exception &e) {
                    row.error = e.what();
                }
            }
            rows.push_back(std::move(row));
        }
    }
    if (spec.out_dir) {
        std::filesystem::create_directories(*spec.out_dir);
        std::ofstream out = open_output(*spec.out_dir / "compare.csv");
        write_baseline_csv(out, rows);
    }
    return rows;
}

void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows) {
    out << "size,dim,tasks,classifier,wall_ms,lp_ms,fit_ms,label_ms,merge_ms,iterations\n";
    for (const BenchRow &r : rows) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.size, r.dim, r.tasks, r.classifier, r.wall_ms, r.lp_ms, r.fit_ms, r.label_ms,
                           r.merge_ms, r.iterations);
    }
}

std::vector<BenchRow> bench_scaling(const BenchSpec &spec) {
    spec.hybrid.validate();
    std::vector<BenchRow> rows;
    for (const std::size_t size : spec.sizes) {
        for (const std::size_t dim : spec.dims) {
            BlobSpec blobs;
            blobs.n = size;
            blobs.num_classes = spec.num_classes;
            blobs.separation = spec.separation;
            blobs.dimension = dim;
            blobs.seed = spec.seed;
            const Dataset full = gen_blobs(blobs);
            for (const std::size_t tasks : spec.tasks) {
                PointConfig point;
                point.dataset = blobs.to_string();
                point.location = point.dataset;
                point.split = SplitSpec{ 0.7, spec.unlabeled_fraction, spec.seed };
                point.hybrid = spec.hybrid;
                if (tasks > 0) {
                    point.tasks = tasks;
                }
                const PreparedSplit prepared = prepare_split(full, point);
                detail::Stopwatch timer;
                const HybridResult res = fit_point(prepared.train, point);
                BenchRow row;
                row.wall_ms = timer.elapsed_ms();
                row.size = size;
                row.dim = full.dimension();
                row.tasks = tasks;
                row.classifier = spec.hybrid.classifier.name();
                for (const IterationLog &log : res.iterations) {
                    row.lp_ms += log.lp_ms;
                    row.fit_ms += log.fit_ms;
                    row.label_ms += log.label_ms;
                    row.merge_ms += log.merge_ms;
                }
                row.iterations = res.iterations.size();
                rows.push_back(row);
            }
        }
    }
    if (spec.out_dir) {
        std::filesystem::create_directories(*spec.out_dir);
        std::ofstream out = open_output(*spec.out_dir / "bench.csv");
        write_bench_csv(out, rows);
    }
    return rows;
}

}  // namespace lpsvm
