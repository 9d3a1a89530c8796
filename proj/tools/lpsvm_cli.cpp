#include "lpsvm/classifier.hpp"
#include "lpsvm/exceptions.hpp"
#include "lpsvm/experiment.hpp"
#include "lpsvm/parallel.hpp"
#include "lpsvm/synthetic.hpp"

#include "CLI11.hpp"
#include "fmt/core.h"
#include "fmt/ostream.h"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct ClassifierFlags {
    std::string name{ "svm" };
    double c_reg{ 1.0 };
    std::string kernel{ "linear" };
    double gamma{ 1.0 };
    double l2{ 1e-3 };
    double learning_rate{ 0.1 };
    std::size_t epochs{ 500 };
    std::size_t pair_threads{ 1 };

    void add_to(CLI::App &app) {
        app.add_option("--classifier", name, "Classifier used by the loop")->check(CLI::IsMember({ "svm", "logreg" }));
        app.add_option("--c-reg", c_reg, "SVM soft-margin penalty")->check(CLI::PositiveNumber);
        app.add_option("--kernel", kernel, "SVM kernel")->check(CLI::IsMember({ "linear", "rbf" }));
        app.add_option("--gamma", gamma, "RBF kernel width")->check(CLI::PositiveNumber);
        app.add_option("--l2", l2, "Logistic regression L2 penalty")->check(CLI::NonNegativeNumber);
        app.add_option("--lr", learning_rate, "Logistic regression learning rate")->check(CLI::PositiveNumber);
        app.add_option("--epochs", epochs, "Logistic regression epochs")->check(CLI::PositiveNumber);
        app.add_option("--pair-threads", pair_threads, "Threads for pairwise SVM training")->check(CLI::PositiveNumber);
    }

    [[nodiscard]] lpsvm::ClassifierKind make() const {
        if (name == "logreg") {
            return lpsvm::ClassifierKind::logreg({ l2, learning_rate, epochs });
        }
        lpsvm::OvoParams p;
        p.smo.c_reg = c_reg;
        p.smo.kernel = lpsvm::Kernel{ kernel == "rbf" ? lpsvm::kernel_type::rbf : lpsvm::kernel_type::linear, gamma };
        p.threads = pair_threads;
        return lpsvm::ClassifierKind::svm(p);
    }
};

struct RunFlags {
    std::vector<std::string> datasets;
    std::string format{ "csv" };
    bool csv_header{ false };
    std::optional<double> skew;
    double train_fraction{ 0.7 };
    double unlabeled_fraction{ 0.8 };
    double threshold{ 0.8 };
    std::optional<double> sigma;
    std::size_t lp_max_iter{ 1000 };
    double lp_tol{ 1e-6 };
    std::optional<std::size_t> tasks;
    std::vector<std::uint64_t> seeds{ 0 };
    std::string sweep{ "none" };
    std::vector<double> values;
    std::string out{ "out" };
    bool strict{ false };
    bool dump_lp{ false };
    bool no_models{ false };
    ClassifierFlags classifier;

    void add_to(CLI::App &app) {
        app.add_option("--dataset", datasets, "Dataset file or blobs:n=..,c=..,sep=.. generator spec (repeatable)")->required();
        app.add_option("--format", format, "Dataset file format")->check(CLI::IsMember({ "csv", "libsvm" }));
        app.add_flag("--csv-header", csv_header, "CSV files start with a header line");
        app.add_option("--skew", skew, "Downsample to this majority:minority ratio first")->check(CLI::Range(8.0, 1e9));
        app.add_option("--train-fraction", train_fraction, "Share of records used for training")->check(CLI::Range(0.0, 1.0));
        app.add_option("--unlabeled-fraction", unlabeled_fraction, "Share of training labels hidden")->check(CLI::Range(0.0, 1.0));
        app.add_option("--threshold", threshold, "Propagation probability required to accept a label");
        app.add_option("--sigma", sigma, "RBF graph width (default: estimated from the data)")->check(CLI::PositiveNumber);
        app.add_option("--lp-max-iter", lp_max_iter, "Propagation iteration cap")->check(CLI::PositiveNumber);
        app.add_option("--lp-tol", lp_tol, "Propagation convergence tolerance")->check(CLI::PositiveNumber);
        app.add_option("--tasks", tasks, "Use the parallel engine with N tasks")->check(CLI::PositiveNumber);
        app.add_option("--seed,--seeds", seeds, "Seeds; each one is a repetition")->delimiter(',');
        app.add_option("--sweep", sweep, "Sweep axis")->check(CLI::IsMember({ "none", "threshold", "unlabeled_fraction", "tasks" }));
        app.add_option("--values", values, "Sweep values")->delimiter(',');
        app.add_option("--out", out, "Output directory");
        app.add_flag("--strict-paper", strict, "Keep the model from the last loop iteration instead of refitting");
        app.add_flag("--dump-lp", dump_lp, "Write the last propagation matrix of each point");
        app.add_flag("--no-save-models", no_models, "Skip writing models/<hash>.json");
        classifier.add_to(app);
    }

    [[nodiscard]] lpsvm::ExperimentSpec make() const {
        lpsvm::ExperimentSpec spec;
        lpsvm::LoadOptions load;
        load.format = lpsvm::file_format_from_string(format);
        load.csv_header = csv_header;
        for (const std::string &d : datasets) {
            spec.datasets.push_back({ "", d, load, skew });
        }
        spec.split.train_fraction = train_fraction;
        spec.split.unlabeled_fraction = unlabeled_fraction;
        spec.hybrid.threshold = threshold;
        spec.hybrid.classifier = classifier.make();
        spec.hybrid.lp.sigma = sigma;
        spec.hybrid.lp.tol = lp_tol;
        spec.hybrid.lp.max_iter = lp_max_iter;
        spec.hybrid.refit_final = !strict;
        spec.tasks = tasks;
        spec.axis = lpsvm::sweep_axis_from_string(sweep);
        spec.values = values;
        spec.seeds = seeds;
        spec.out_dir = out;
        spec.save_models = !no_models;
        spec.dump_lp = dump_lp;
        return spec;
    }
};

int cmd_run(const RunFlags &flags) {
    const lpsvm::ExperimentSpec spec = flags.make();
    const auto rows = lpsvm::run_experiment(spec);
    std::size_t failed = 0;
    for (const auto &r : rows) {
        if (!r.error.empty()) {
            ++failed;
            fmt::print(stderr, "{} seed={} value={}: {}\n", r.dataset, r.seed, r.value, r.error);
        } else {
            fmt::print("{} {}={} seed={} macro_f1={:.4f} micro_f1={:.4f} iterations={} ({})\n", r.dataset, r.axis, r.value, r.seed,
                       r.macro_f1, r.micro_f1, r.iterations, r.termination);
        }
    }
    fmt::print("{} rows written to {}\n", rows.size(), (*spec.out_dir / "summary.csv").string());
    return failed == rows.size() ? 1 : 0;
}

int cmd_compare(const RunFlags &flags) {
    const lpsvm::ExperimentSpec spec = flags.make();
    const auto rows = lpsvm::compare_baselines(spec);
    write_baseline_csv(std::cout, rows);
    return 0;
}

struct BenchFlags {
    std::vector<std::size_t> sizes{ 500, 1000, 2000 };
    std::vector<std::size_t> dims{ 2 };
    std::vector<std::size_t> tasks{ 0 };
    std::size_t classes{ 3 };
    double separation{ 4.0 };
    double unlabeled_fraction{ 0.8 };
    double threshold{ 0.8 };
    std::uint64_t seed{ 0 };
    std::string out{ "out" };
    ClassifierFlags classifier;

    void add_to(CLI::App &app) {
        app.add_option("--sizes", sizes, "Dataset sizes")->delimiter(',');
        app.add_option("--dims", dims, "Feature dimensions")->delimiter(',');
        app.add_option("--tasks", tasks, "Task counts, 0 for the serial engine")->delimiter(',');
        app.add_option("--classes", classes, "Number of classes")->check(CLI::Range(2, 1000));
        app.add_option("--separation", separation, "Center distance in cluster widths")->check(CLI::PositiveNumber);
        app.add_option("--unlabeled-fraction", unlabeled_fraction, "Share of training labels hidden")->check(CLI::Range(0.0, 1.0));
        app.add_option("--threshold", threshold, "Propagation probability required to accept a label");
        app.add_option("--seed", seed, "Generator and split seed");
        app.add_option("--out", out, "Output directory");
        classifier.add_to(app);
    }
};

int cmd_bench(const BenchFlags &flags) {
    lpsvm::BenchSpec spec;
    spec.sizes = flags.sizes;
    spec.dims = flags.dims;
    spec.tasks = flags.tasks;
    spec.num_classes = flags.classes;
    spec.separation = flags.separation;
    spec.unlabeled_fraction = flags.unlabeled_fraction;
    spec.hybrid.threshold = flags.threshold;
    spec.hybrid.classifier = flags.classifier.make();
    spec.seed = flags.seed;
    spec.out_dir = flags.out;
    write_bench_csv(std::cout, lpsvm::bench_scaling(spec));
    return 0;
}

struct GenFlags {
    lpsvm::BlobSpec blobs;
    std::optional<double> skew;
    std::string format{ "csv" };
    bool csv_header{ false };
    std::string out;

    void add_to(CLI::App &app) {
        app.add_option("-n,--records", blobs.n, "Number of records");
        app.add_option("-c,--classes", blobs.num_classes, "Number of classes");
        app.add_option("--separation", blobs.separation, "Center distance in cluster widths");
        app.add_option("--dim", blobs.dimension, "Feature dimension (raised to the class count if smaller)");
        app.add_option("--sigma", blobs.cluster_sigma, "Cluster standard deviation");
        app.add_option("--seed", blobs.seed, "Generator seed");
        app.add_option("--skew", skew, "Downsample to this majority:minority ratio")->check(CLI::Range(8.0, 1e9));
        app.add_option("--format", format, "Output format")->check(CLI::IsMember({ "csv", "libsvm" }));
        app.add_flag("--csv-header", csv_header, "Write a CSV header line");
        app.add_option("--out", out, "Output file (default: stdout)");
    }
};

int cmd_gen(const GenFlags &flags) {
    lpsvm::Dataset ds = lpsvm::gen_blobs(flags.blobs);
    if (flags.skew) {
        ds = lpsvm::make_skewed(ds, *flags.skew, flags.blobs.seed);
    }
    const lpsvm::file_format format = lpsvm::file_format_from_string(flags.format);
    if (flags.out.empty()) {
        lpsvm::write_dataset(std::cout, ds, format, flags.csv_header);
    } else {
        lpsvm::save_dataset(flags.out, ds, format, flags.csv_header);
    }
    return 0;
}

struct PredictFlags {
    std::string model;
    std::string dataset;
    std::string format{ "csv" };
    bool csv_header{ false };
    std::size_t tasks{ 1 };

    void add_to(CLI::App &app) {
        app.add_option("--model", model, "Model JSON written by run")->required()->check(CLI::ExistingFile);
        app.add_option("--dataset", dataset, "Records to classify (already scaled)")->required()->check(CLI::ExistingFile);
        app.add_option("--format", format, "Dataset file format")->check(CLI::IsMember({ "csv", "libsvm" }));
        app.add_flag("--csv-header", csv_header, "CSV file starts with a header line");
        app.add_option("--tasks", tasks, "Prediction tasks")->check(CLI::PositiveNumber);
    }
};

int cmd_predict(const PredictFlags &flags) {
    std::ifstream in{ flags.model };
    std::stringstream text;
    text << in.rdbuf();
    const lpsvm::TrainedModel model = lpsvm::model_from_json(text.str());
    lpsvm::LoadOptions load;
    load.format = lpsvm::file_format_from_string(flags.format);
    load.csv_header = flags.csv_header;
    load.libsvm_dimension = lpsvm::model_dimension(model);
    const lpsvm::Dataset ds = lpsvm::load_dataset(flags.dataset, load);
    const auto predicted = lpsvm::parallel_predict(model, ds.records(), flags.tasks);
    std::size_t correct = 0;
    std::size_t labeled = 0;
    fmt::print("id,predicted\n");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto &r = ds.records()[i];
        fmt::print("{},{}\n", r.id, predicted[i]);
        if (r.label) {
            ++labeled;
            correct += *r.label == predicted[i] ? 1 : 0;
        }
    }
    if (labeled > 0) {
        fmt::print(stderr, "accuracy {:.4f} on {} labeled records\n", static_cast<double>(correct) / static_cast<double>(labeled), labeled);
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{ "Semi-supervised classification with label propagation and SVMs" };
    app.set_config("--config", "", "Read options from a TOML/INI file; command line flags win");
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App *run = app.add_subcommand("run", "Run a sweep and write summary.csv, iterations.jsonl and models/");
    run_flags.add_to(*run);

    RunFlags compare_flags;
    CLI::App *compare = app.add_subcommand("compare", "Compare the loop with propagation-only and supervised baselines");
    compare_flags.add_to(*compare);

    BenchFlags bench_flags;
    CLI::App *bench = app.add_subcommand("bench", "Time full fits over sizes, dimensions and task counts");
    bench_flags.add_to(*bench);

    GenFlags gen_flags;
    CLI::App *gen = app.add_subcommand("gen", "Write a synthetic Gaussian blob dataset");
    gen_flags.add_to(*gen);

    PredictFlags predict_flags;
    CLI::App *predict = app.add_subcommand("predict", "Classify records with a saved model");
    predict_flags.add_to(*predict);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(run_flags);
        }
        if (compare->parsed()) {
            return cmd_compare(compare_flags);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_flags);
        }
        if (gen->parsed()) {
            return cmd_gen(gen_flags);
        }
        return cmd_predict(predict_flags);
    } catch (const lpsvm::exception &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    }
}
