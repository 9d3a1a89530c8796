#include "lpsvm/classifier.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

namespace lpsvm {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string ClassifierKind::name() const {
    return is_svm() ? "svm" : "logreg";
}

void ClassifierKind::validate() const {
    std::visit(overloaded{ [](const OvoParams &p) { p.smo.validate(); }, [](const LogregParams &p) { p.validate(); } }, params);
}

ClassifierKind classifier_kind_from_string(const std::string_view name) {
    if (name == "svm" || name == "svm_ovo") {
        return ClassifierKind::svm();
    }
    if (name == "logreg") {
        return ClassifierKind::logreg();
    }
    throw dispatch_error{ fmt::format("unknown classifier '{}'", name) };
}

TrainedModel fit_classifier(const ClassifierKind &kind, const Dataset &labeled) {
    return std::visit(overloaded{ [&](const OvoParams &p) -> TrainedModel { return ovo_train(labeled, p); },
                                  [&](const LogregParams &p) -> TrainedModel { return logreg_train(labeled, p); } },
                      kind.params);
}

class_index predict_with(const ClassifierKind &kind, const TrainedModel &model, const std::span<const double> x) {
    if (kind.params.index() != model.index()) {
        throw dispatch_error{ fmt::format("classifier kind '{}' does not match the trained model", kind.name()) };
    }
    return predict(model, x);
}

class_index predict(const TrainedModel &model, const std::span<const double> x) {
    return std::visit(overloaded{ [&](const OvoModel &m) { return ovo_predict(m, x); },
                                  [&](const LogregModel &m) { return m.predict(x); } },
                      model);
}

std::size_t model_dimension(const TrainedModel &model) {
    return std::visit([](const auto &m) { return m.dimension(); }, model);
}

}  // namespace lpsvm
