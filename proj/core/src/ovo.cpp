#include "lpsvm/ovo.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <exception>
#include <future>

namespace lpsvm {

std::vector<std::pair<class_index, class_index>> class_pairs(const std::size_t num_classes) {
    std::vector<std::pair<class_index, class_index>> pairs;
    pairs.reserve(num_classes * (num_classes - 1) / 2);
    for (class_index i = 0; i < num_classes; ++i) {
        for (class_index j = i + 1; j < num_classes; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

OvoModel::OvoModel(const std::size_t num_classes, const std::size_t dimension, std::vector<SvmBinaryModel> models) :
    num_classes_{ num_classes },
    dimension_{ dimension },
    models_{ std::move(models) },
    pairs_{ class_pairs(num_classes) } {
    if (models_.size() != pairs_.size()) {
        throw consistency_error{ fmt::format("{} classes need {} pairwise models, got {}", num_classes_, pairs_.size(), models_.size()) };
    }
    for (const SvmBinaryModel &m : models_) {
        if (m.dimension() != dimension_) {
            throw dimension_error{ fmt::format("pairwise model has dimension {}, expected {}", m.dimension(), dimension_) };
        }
    }
}

std::size_t OvoModel::pair_index(const class_index i, const class_index j) const {
    if (!(i < j && j < num_classes_)) {
        throw consistency_error{ fmt::format("invalid class pair ({}, {})", i, j) };
    }
    // pairs before row i: sum_{r<i} (C-1-r)
    return i * (2 * num_classes_ - i - 1) / 2 + (j - i - 1);
}

OvoModel ovo_train(const Dataset &ds, const OvoParams &params) {
    if (ds.num_classes() < 2) {
        throw training_error{ "one-vs-one training needs at least two classes" };
    }
    params.smo.validate();
    const std::size_t d = ds.dimension();
    std::vector<std::vector<const Record *>> by_class(ds.num_classes());
    for (const Record &r : ds.records()) {
        if (r.label) {
            by_class[*r.label].push_back(&r);
        }
    }
    const auto pairs = class_pairs(ds.num_classes());
    for (const auto &[i, j] : pairs) {
        if (by_class[i].empty() || by_class[j].empty()) {
            throw training_error{ fmt::format("cannot train pair ({}, {}): class {} has no labeled records", i, j,
                                              by_class[i].empty() ? i : j) };
        }
    }

    const auto train_pair = [&](const std::size_t k) {
        const auto [ci, cj] = pairs[k];
        std::vector<double> x;
        std::vector<int> y;
        x.reserve((by_class[ci].size() + by_class[cj].size()) * d);
        // keep dataset order within the pair
        std::vector<const Record *> members;
        members.reserve(by_class[ci].size() + by_class[cj].size());
        std::merge(by_class[ci].begin(), by_class[ci].end(), by_class[cj].begin(), by_class[cj].end(), std::back_inserter(members));
        for (const Record *r : members) {
            x.insert(x.end(), r->features.begin(), r->features.end());
            y.push_back(*r->label == ci ? -1 : 1);
        }
        return smo_train(x, d, y, params.smo);
    };

    std::vector<SvmBinaryModel> models(pairs.size());
    const std::size_t threads = std::clamp<std::size_t>(params.threads, 1, pairs.size());
    if (threads == 1) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            models[k] = train_pair(k);
        }
    } else {
        std::vector<std::future<void>> workers;
        workers.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            workers.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t k = w; k < pairs.size(); k += threads) {
                    models[k] = train_pair(k);
                }
            }));
        }
        std::exception_ptr first_error;
        for (auto &f : workers) {
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
    return OvoModel{ ds.num_classes(), d, std::move(models) };
}

OvoVotes ovo_votes(const OvoModel &model, const std::span<const double> x) {
    if (x.size() != model.dimension()) {
        throw dimension_error{ fmt::format("expected {} features, got {}", model.dimension(), x.size()) };
    }
    OvoVotes v{ std::vector<std::size_t>(model.num_classes(), 0), std::vector<double>(model.num_classes(), 0.0) };
    for (std::size_t k = 0; k < model.models().size(); ++k) {
        const double f = model.models()[k].decision(x);
        const class_index winner = f > 0.0 ? model.pairs()[k].second : model.pairs()[k].first;
        ++v.votes[winner];
        v.strength[winner] += std::abs(f);
    }
    return v;
}

class_index ovo_predict(const OvoModel &model, const std::span<const double> x) {
    const OvoVotes v = ovo_votes(model, x);
    class_index best = 0;
    for (class_index c = 1; c < model.num_classes(); ++c) {
        if (v.votes[c] > v.votes[best] || (v.votes[c] == v.votes[best] && v.strength[c] > v.strength[best])) {
            best = c;
        }
    }
    return best;
}

}  // namespace lpsvm
