#include "lpsvm/parallel.hpp"

#include "lpsvm/exceptions.hpp"

#include "hybrid_detail.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <exception>
#include <functional>
#include <future>
#include <random>
#include <thread>

namespace lpsvm {

namespace {

/// Runs every job as its own task and waits for all of them before rethrowing the first error.
void run_all(std::vector<std::function<void()>> &jobs, const std::chrono::microseconds max_jitter, const std::uint64_t jitter_seed) {
    std::vector<std::future<void>> running;
    running.reserve(jobs.size());
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        std::chrono::microseconds delay{ 0 };
        if (max_jitter.count() > 0) {
            std::mt19937_64 rng{ jitter_seed * 0x9E3779B97F4A7C15ULL + k };
            delay = std::chrono::microseconds{ static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_jitter.count() + 1)) };
        }
        running.push_back(std::async(std::launch::async, [&job = jobs[k], delay] {
            if (delay.count() > 0) {
                std::this_thread::sleep_for(delay);
            }
            job();
        }));
    }
    std::exception_ptr first_error;
    for (auto &f : running) {
        try {
            f.get();
        } catch (...) {
            if (!first_error) {
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace

void ParallelConfig::validate() const {
    hybrid.validate();
    if (tasks && *tasks == 0) {
        throw config_error{ "no_of_tasks must be at least 1" };
    }
    if (max_start_jitter.count() < 0) {
        throw config_error{ "start jitter must not be negative" };
    }
}

ChunkPlan plan_chunks(const std::size_t u_count, const std::size_t no_of_tasks) {
    if (no_of_tasks == 0) {
        throw config_error{ "no_of_tasks must be at least 1" };
    }
    const std::size_t base = u_count / no_of_tasks;
    const std::size_t extra = u_count % no_of_tasks;
    ChunkPlan plan;
    plan.reserve(no_of_tasks);
    std::size_t start = 0;
    for (std::size_t k = 0; k < no_of_tasks; ++k) {
        const std::size_t size = base + (k >= no_of_tasks - extra ? 1 : 0);
        plan.push_back({ start, start + size });
        start += size;
    }
    return plan;
}

std::size_t default_task_count(const std::size_t u_count) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(hw, u_count));
}

HybridResult parallel_hybrid_fit(const Dataset &train, const ParallelConfig &cfg) {
    cfg.validate();
    const HybridConfig &hc = cfg.hybrid;
    detail::check_fit_inputs(train, hc);
    detail::WorkingSet ws{ train };
    HybridResult result;
    result.initial_unlabeled = train.unlabeled_count();
    const std::size_t tasks = cfg.tasks.value_or(default_task_count(result.initial_unlabeled));

    if (result.initial_unlabeled == 0) {
        result.model = fit_classifier(hc.classifier, ws.labeled_only());
        result.labeled = ws.dataset();
        result.reason = termination_reason::all_labeled;
        return result;
    }

    detail::Stopwatch graph_timer;
    const TransitionMatrix transitions = detail::build_transitions(train, hc.lp);
    double pending_graph_ms = graph_timer.elapsed_ms();

    std::optional<TrainedModel> model;
    bool stale_model = false;
    for (std::size_t iteration = 1; ws.dataset().unlabeled_count() > 0; ++iteration) {
        const std::uint64_t jitter_seed = hc.seed ^ (iteration << 32U);

        // phase 1: propagation and fitting on the same snapshot
        const Dataset snapshot = ws.dataset();
        const Dataset labeled_snapshot = ws.labeled_only();
        std::optional<PropagationResult> lp;
        double lp_ms = 0.0;
        double fit_ms = 0.0;
        {
            std::vector<std::function<void()>> jobs;
            jobs.emplace_back([&] {
                detail::Stopwatch t;
                lp = propagate(transitions, snapshot, hc.lp.tol, hc.lp.max_iter);
                lp_ms = t.elapsed_ms();
            });
            jobs.emplace_back([&] {
                detail::Stopwatch t;
                model = fit_classifier(hc.classifier, labeled_snapshot);
                fit_ms = t.elapsed_ms();
            });
            run_all(jobs, cfg.max_start_jitter, jitter_seed);
        }
        lp_ms += pending_graph_ms;
        pending_graph_ms = 0.0;

        // phases 2 and 3: chunked prediction and gating
        detail::Stopwatch label_timer;
        const std::vector<Record> unlabeled = ws.unlabeled_by_id();
        const ChunkPlan plan = plan_chunks(unlabeled.size(), tasks);
        std::vector<class_index> predictions(unlabeled.size());
        std::vector<LabelStepResult> chunk_results(plan.size());
        {
            const std::span<const Record> all{ unlabeled };
            const TrainedModel &snapshot_model = *model;
            const ProbabilityMatrix &snapshot_lp = lp->probabilities;
            std::vector<std::function<void()>> jobs;
            for (std::size_t k = 0; k < plan.size(); ++k) {
                if (plan[k].size() == 0) {
                    continue;
                }
                jobs.emplace_back([&, k] {
                    const ChunkRange range = plan[k];
                    for (std::size_t i = range.start; i < range.end; ++i) {
                        predictions[i] = predict(snapshot_model, unlabeled[i].features);
                    }
                    chunk_results[k] = gate_records(all.subspan(range.start, range.size()),
                                                    std::span<const class_index>{ predictions }.subspan(range.start, range.size()),
                                                    snapshot_lp, hc.threshold);
                });
            }
            run_all(jobs, cfg.max_start_jitter, jitter_seed + 1);
        }
        const double label_ms = label_timer.elapsed_ms();

        // phase 4: merge in chunk order, then by id
        detail::Stopwatch merge_timer;
        std::vector<LabelDecision> decisions;
        for (LabelStepResult &chunk : chunk_results) {
            decisions.insert(decisions.end(), chunk.decisions.begin(), chunk.decisions.end());
        }
        std::sort(decisions.begin(), decisions.end(), [](const LabelDecision &a, const LabelDecision &b) { return a.id < b.id; });
        ws.apply(decisions);
        const double merge_ms = merge_timer.elapsed_ms();

        IterationLog log = detail::make_log(iteration, ws, std::move(decisions));
        log.lp_ms = lp_ms;
        log.fit_ms = fit_ms;
        log.label_ms = label_ms;
        log.merge_ms = merge_ms;
        log.lp_converged = lp->converged;
        log.lp_iterations = lp->iterations;
        stale_model = log.newly_labeled > 0;
        result.iterations.push_back(std::move(log));
        result.last_lp = std::move(lp->probabilities);

        if (!stale_model) {
            result.reason = termination_reason::no_progress;
            break;
        }
    }
    if (stale_model) {
        result.reason = termination_reason::all_labeled;
    }
    result.model = (hc.refit_final && stale_model) ? fit_classifier(hc.classifier, ws.labeled_only()) : std::move(*model);
    result.labeled = ws.dataset();
    return result;
}

std::vector<class_index> parallel_predict(const TrainedModel &model, const std::span<const Record> records, const std::size_t no_of_tasks) {
    const std::size_t d = model_dimension(model);
    for (const Record &r : records) {
        if (r.features.size() != d) {
            throw dimension_error{ fmt::format("record {} has {} features, model expects {}", r.id, r.features.size(), d) };
        }
    }
    std::vector<class_index> out(records.size());
    const ChunkPlan plan = plan_chunks(records.size(), std::max<std::size_t>(1, no_of_tasks));
    std::vector<std::function<void()>> jobs;
    for (const ChunkRange &range : plan) {
        if (range.size() == 0) {
            continue;
        }
        jobs.emplace_back([&, range] {
            for (std::size_t i = range.start; i < range.end; ++i) {
                out[i] = predict(model, records[i].features);
            }
        });
    }
    run_all(jobs, std::chrono::microseconds{ 0 }, 0);
    return out;
}

}  // namespace lpsvm
