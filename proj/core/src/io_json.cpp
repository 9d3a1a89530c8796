#include "json_io.hpp"

#include "lpsvm/classifier.hpp"
#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

#include <ostream>

namespace lpsvm {

namespace {

constexpr const char *model_format = "lpsvm-model";
constexpr int model_version = 1;

using nlohmann::json;

json svm_to_json(const OvoModel &m) {
    json models = json::array();
    for (std::size_t k = 0; k < m.models().size(); ++k) {
        const SvmBinaryModel &b = m.models()[k];
        json svs = json::array();
        for (std::size_t s = 0; s < b.num_support_vectors(); ++s) {
            const auto sv = b.support_vector(s);
            svs.push_back(std::vector<double>(sv.begin(), sv.end()));
        }
        models.push_back({ { "classes", { m.pairs()[k].first, m.pairs()[k].second } },
                           { "bias", b.bias() },
                           { "converged", b.converged() },
                           { "alphas", b.sv_alphas() },
                           { "labels", b.sv_labels() },
                           { "support_vectors", std::move(svs) } });
    }
    const SmoParams &p = m.models().empty() ? SmoParams{} : m.models().front().params();
    return { { "kind", "svm_ovo" },
             { "num_classes", m.num_classes() },
             { "dimension", m.dimension() },
             { "hyperparameters",
               { { "c_reg", p.c_reg },
                 { "kernel", p.kernel.type == kernel_type::linear ? "linear" : "rbf" },
                 { "gamma", p.kernel.gamma },
                 { "tol", p.tol },
                 { "max_passes", p.max_passes } } },
             { "models", std::move(models) } };
}

OvoModel svm_from_json(const json &doc) {
    const json &h = doc.at("hyperparameters");
    SmoParams p;
    p.c_reg = h.at("c_reg").get<double>();
    const std::string kernel = h.at("kernel").get<std::string>();
    if (kernel != "linear" && kernel != "rbf") {
        throw io_error{ fmt::format("unknown kernel '{}'", kernel) };
    }
    p.kernel.type = kernel == "linear" ? kernel_type::linear : kernel_type::rbf;
    p.kernel.gamma = h.at("gamma").get<double>();
    p.tol = h.at("tol").get<double>();
    p.max_passes = h.at("max_passes").get<std::size_t>();

    const auto c = doc.at("num_classes").get<std::size_t>();
    const auto d = doc.at("dimension").get<std::size_t>();
    const auto pairs = class_pairs(c);
    const json &models = doc.at("models");
    if (models.size() != pairs.size()) {
        throw io_error{ fmt::format("{} classes need {} pairwise models, document has {}", c, pairs.size(), models.size()) };
    }
    std::vector<SvmBinaryModel> binary;
    for (std::size_t k = 0; k < models.size(); ++k) {
        const json &m = models[k];
        const auto classes = m.at("classes").get<std::vector<std::size_t>>();
        if (classes.size() != 2 || classes[0] != pairs[k].first || classes[1] != pairs[k].second) {
            throw io_error{ fmt::format("pairwise model {} is out of order", k) };
        }
        std::vector<double> svs;
        for (const json &sv : m.at("support_vectors")) {
            const auto v = sv.get<std::vector<double>>();
            svs.insert(svs.end(), v.begin(), v.end());
        }
        binary.emplace_back(d, std::move(svs), m.at("labels").get<std::vector<int>>(), m.at("alphas").get<std::vector<double>>(),
                            m.at("bias").get<double>(), p, m.at("converged").get<bool>());
    }
    return OvoModel{ c, d, std::move(binary) };
}

json logreg_to_json(const LogregModel &m) {
    json weights = json::array();
    for (class_index c = 0; c < m.num_classes(); ++c) {
        const auto w = m.weights(c);
        weights.push_back(std::vector<double>(w.begin(), w.end()));
    }
    return { { "kind", "logreg" },
             { "num_classes", m.num_classes() },
             { "dimension", m.dimension() },
             { "hyperparameters",
               { { "l2", m.params().l2 }, { "learning_rate", m.params().learning_rate }, { "epochs", m.params().epochs } } },
             { "weights", std::move(weights) },
             { "biases", m.biases() },
             { "gradient_norm", m.gradient_norm() } };
}

LogregModel logreg_from_json(const json &doc) {
    const json &h = doc.at("hyperparameters");
    LogregParams p;
    p.l2 = h.at("l2").get<double>();
    p.learning_rate = h.at("learning_rate").get<double>();
    p.epochs = h.at("epochs").get<std::size_t>();
    const auto c = doc.at("num_classes").get<std::size_t>();
    const auto d = doc.at("dimension").get<std::size_t>();
    std::vector<double> weights;
    for (const json &row : doc.at("weights")) {
        const auto w = row.get<std::vector<double>>();
        weights.insert(weights.end(), w.begin(), w.end());
    }
    return LogregModel{ c, d, std::move(weights), doc.at("biases").get<std::vector<double>>(), p, doc.at("gradient_norm").get<double>() };
}

}  // namespace

std::string model_to_json(const TrainedModel &model) {
    json doc = std::holds_alternative<OvoModel>(model) ? svm_to_json(std::get<OvoModel>(model)) : logreg_to_json(std::get<LogregModel>(model));
    doc["format"] = model_format;
    doc["version"] = model_version;
    return doc.dump(2);
}

TrainedModel model_from_json(const std::string_view text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("format").get<std::string>() != model_format) {
            throw io_error{ "not an lpsvm model document" };
        }
        if (const int version = doc.at("version").get<int>(); version != model_version) {
            throw io_error{ fmt::format("unsupported model version {}", version) };
        }
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind == "svm_ovo") {
            return svm_from_json(doc);
        }
        if (kind == "logreg") {
            return logreg_from_json(doc);
        }
        throw io_error{ fmt::format("unknown model kind '{}'", kind) };
    } catch (const json::exception &e) {
        throw io_error{ fmt::format("invalid model document: {}", e.what()) };
    } catch (const lpsvm::io_error &) {
        throw;
    } catch (const lpsvm::exception &e) {
        throw io_error{ fmt::format("invalid model document: {}", e.what()) };
    }
}

namespace detail {

nlohmann::json to_json(const IterationLog &log) {
    json decisions = json::array();
    for (const LabelDecision &d : log.decisions) {
        decisions.push_back({ d.id, d.label, d.lp_probability });
    }
    return { { "iteration", log.iteration },
             { "newly_labeled", log.newly_labeled },
             { "labeled_total", log.labeled_total },
             { "unlabeled_remaining", log.unlabeled_remaining },
             { "lp_ms", log.lp_ms },
             { "fit_ms", log.fit_ms },
             { "label_ms", log.label_ms },
             { "merge_ms", log.merge_ms },
             { "lp_converged", log.lp_converged },
             { "lp_iterations", log.lp_iterations },
             { "decisions", std::move(decisions) } };
}

nlohmann::json to_json(const EvalReport &report) {
    json per_class = json::array();
    for (const ClassScores &s : report.per_class) {
        per_class.push_back({ { "precision", s.precision }, { "recall", s.recall }, { "f1", s.f1 } });
    }
    json cm = json::array();
    for (class_index t = 0; t < report.confusion.num_classes(); ++t) {
        json row = json::array();
        for (class_index p = 0; p < report.confusion.num_classes(); ++p) {
            row.push_back(report.confusion.at(t, p));
        }
        cm.push_back(std::move(row));
    }
    return { { "per_class", std::move(per_class) },
             { "macro_f1", report.macro_f1 },
             { "micro_f1", report.micro_f1 },
             { "accuracy", report.accuracy },
             { "labeled_trajectory", report.labeled_trajectory },
             { "training_ms", report.training_ms },
             { "confusion", std::move(cm) } };
}

}  // namespace detail

void write_iteration_log(std::ostream &out, const IterationLog &log) {
    out << detail::to_json(log).dump() << '\n';
}

void write_iteration_logs(std::ostream &out, const std::span<const IterationLog> logs) {
    for (const IterationLog &log : logs) {
        write_iteration_log(out, log);
    }
}

std::string report_to_json(const EvalReport &report) {
    return detail::to_json(report).dump(2);
}

}  // namespace lpsvm
