#include "lpsvm/hybrid.hpp"

#include "lpsvm/exceptions.hpp"

#include "hybrid_detail.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <cmath>

namespace lpsvm {

namespace detail {

WorkingSet::WorkingSet(const Dataset &train) :
    current_{ train } {
    position_.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (!position_.emplace(train.records()[i].id, i).second) {
            throw consistency_error{ fmt::format("duplicate record id {} in training set", train.records()[i].id) };
        }
    }
}

Dataset WorkingSet::labeled_only() const {
    return current_.with_records(current_.labeled_records());
}

std::vector<Record> WorkingSet::unlabeled_by_id() const {
    std::vector<Record> out = current_.unlabeled_records();
    std::sort(out.begin(), out.end(), [](const Record &a, const Record &b) { return a.id < b.id; });
    return out;
}

void WorkingSet::apply(const std::vector<LabelDecision> &decisions) {
    if (decisions.empty()) {
        return;
    }
    std::vector<Record> records = current_.records();
    for (const LabelDecision &d : decisions) {
        Record &r = records[position_.at(d.id)];
        if (r.label) {
            throw consistency_error{ fmt::format("record {} is already labeled", d.id) };
        }
        r.label = d.label;
    }
    current_ = current_.with_records(std::move(records));
}

TransitionMatrix build_transitions(const Dataset &train, const LpParams &lp) {
    const double sigma = lp.sigma ? *lp.sigma : default_sigma(train.records(), lp.seed);
    return row_normalize(build_weights(train.records(), sigma));
}

void check_fit_inputs(const Dataset &train, const HybridConfig &cfg) {
    cfg.validate();
    if (train.labeled_count() == 0) {
        throw consistency_error{ "co-labeling needs at least one labeled record" };
    }
    if (!train.all_classes_labeled()) {
        throw consistency_error{ "co-labeling needs every class among the labeled records" };
    }
}

IterationLog make_log(const std::size_t iteration, const WorkingSet &ws, std::vector<LabelDecision> decisions) {
    IterationLog log;
    log.iteration = iteration;
    log.newly_labeled = decisions.size();
    log.labeled_total = ws.dataset().labeled_count();
    log.unlabeled_remaining = ws.dataset().unlabeled_count();
    log.decisions = std::move(decisions);
    return log;
}

}  // namespace detail

void HybridConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw config_error{ fmt::format("threshold must be in [0,1], got {}", threshold) };
    }
    if (!(lp.tol > 0.0) || lp.max_iter == 0) {
        throw config_error{ "label propagation needs tol > 0 and max_iter >= 1" };
    }
    if (lp.sigma && !(*lp.sigma > 0.0)) {
        throw config_error{ fmt::format("sigma must be positive, got {}", *lp.sigma) };
    }
    classifier.validate();
}

std::string to_string(const termination_reason reason) {
    return reason == termination_reason::all_labeled ? "all_labeled" : "no_progress";
}

LabelStepResult gate_records(const std::span<const Record> unlabeled, const std::span<const class_index> predictions,
                             const ProbabilityMatrix &lp, const double threshold) {
    if (unlabeled.size() != predictions.size()) {
        throw consistency_error{ fmt::format("{} records but {} predictions", unlabeled.size(), predictions.size()) };
    }
    std::vector<std::size_t> order(unlabeled.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        order[k] = k;
    }
    std::sort(order.begin(), order.end(), [&](const std::size_t a, const std::size_t b) { return unlabeled[a].id < unlabeled[b].id; });

    LabelStepResult out;
    for (const std::size_t k : order) {
        const Record &r = unlabeled[k];
        const class_index predicted = predictions[k];
        const double p = lp.probability(r.id, predicted);
        if (p >= threshold) {
            Record labeled = r;
            labeled.label = predicted;
            out.newly_labeled.push_back(std::move(labeled));
            out.decisions.push_back({ r.id, predicted, p });
        } else {
            out.remaining.push_back(r);
        }
    }
    return out;
}

LabelStepResult label_step(const std::span<const Record> unlabeled, const ProbabilityMatrix &lp, const TrainedModel &model,
                           const double threshold) {
    std::vector<class_index> predictions;
    predictions.reserve(unlabeled.size());
    for (const Record &r : unlabeled) {
        if (!lp.contains(r.id)) {
            throw consistency_error{ fmt::format("record {} has no label propagation row", r.id) };
        }
        predictions.push_back(predict(model, r.features));
    }
    return gate_records(unlabeled, predictions, lp, threshold);
}

HybridResult hybrid_fit(const Dataset &train, const HybridConfig &cfg) {
    detail::check_fit_inputs(train, cfg);
    detail::WorkingSet ws{ train };
    HybridResult result;
    result.initial_unlabeled = train.unlabeled_count();

    if (result.initial_unlabeled == 0) {
        result.model = fit_classifier(cfg.classifier, ws.labeled_only());
        result.labeled = ws.dataset();
        result.reason = termination_reason::all_labeled;
        return result;
    }

    detail::Stopwatch graph_timer;
    const TransitionMatrix transitions = detail::build_transitions(train, cfg.lp);
    double pending_graph_ms = graph_timer.elapsed_ms();

    std::optional<TrainedModel> model;
    bool stale_model = false;
    for (std::size_t iteration = 1; ws.dataset().unlabeled_count() > 0; ++iteration) {
        detail::Stopwatch lp_timer;
        PropagationResult lp = propagate(transitions, ws.dataset(), cfg.lp.tol, cfg.lp.max_iter);
        const double lp_ms = lp_timer.elapsed_ms() + pending_graph_ms;
        pending_graph_ms = 0.0;

        detail::Stopwatch fit_timer;
        model = fit_classifier(cfg.classifier, ws.labeled_only());
        const double fit_ms = fit_timer.elapsed_ms();

        detail::Stopwatch label_timer;
        const std::vector<Record> unlabeled = ws.unlabeled_by_id();
        LabelStepResult step = label_step(unlabeled, lp.probabilities, *model, cfg.threshold);
        const double label_ms = label_timer.elapsed_ms();

        detail::Stopwatch merge_timer;
        ws.apply(step.decisions);
        const double merge_ms = merge_timer.elapsed_ms();

        IterationLog log = detail::make_log(iteration, ws, std::move(step.decisions));
        log.lp_ms = lp_ms;
        log.fit_ms = fit_ms;
        log.label_ms = label_ms;
        log.merge_ms = merge_ms;
        log.lp_converged = lp.converged;
        log.lp_iterations = lp.iterations;
        stale_model = log.newly_labeled > 0;
        result.iterations.push_back(std::move(log));
        result.last_lp = std::move(lp.probabilities);

        if (!stale_model) {
            result.reason = termination_reason::no_progress;
            break;
        }
    }
    if (stale_model) {
        result.reason = termination_reason::all_labeled;
    }

    // a model fitted in an iteration that labeled nothing already saw the final labeled set
    result.model = (cfg.refit_final && stale_model) ? fit_classifier(cfg.classifier, ws.labeled_only()) : std::move(*model);
    result.labeled = ws.dataset();
    return result;
}

class_index predict(const HybridResult &result, const std::span<const double> x) {
    if (x.size() != model_dimension(result.model)) {
        throw dimension_error{ fmt::format("expected {} features, got {}", model_dimension(result.model), x.size()) };
    }
    return predict(result.model, x);
}

}  // namespace lpsvm
