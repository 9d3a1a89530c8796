/**
 * @file
 * @brief The pluggable classifier used inside the hybrid loop: a kind (with its hyperparameters)
 *        selects how to train, and the trained model is a closed sum of the supported models.
 */

#ifndef LPSVM_CLASSIFIER_HPP_
#define LPSVM_CLASSIFIER_HPP_
#pragma once

#include "lpsvm/data.hpp"
#include "lpsvm/logreg.hpp"
#include "lpsvm/ovo.hpp"

#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace lpsvm {

struct ClassifierKind {
    std::variant<OvoParams, LogregParams> params{ OvoParams{} };

    [[nodiscard]] static ClassifierKind svm(OvoParams p = {}) { return ClassifierKind{ p }; }
    [[nodiscard]] static ClassifierKind logreg(LogregParams p = {}) { return ClassifierKind{ p }; }

    [[nodiscard]] bool is_svm() const noexcept { return std::holds_alternative<OvoParams>(params); }
    /// "svm" or "logreg".
    [[nodiscard]] std::string name() const;
    void validate() const;
};

/// Accepts "svm", "svm_ovo" and "logreg" with default hyperparameters.
/// @throws dispatch_error for any other name.
[[nodiscard]] ClassifierKind classifier_kind_from_string(std::string_view name);

using TrainedModel = std::variant<OvoModel, LogregModel>;

[[nodiscard]] TrainedModel fit_classifier(const ClassifierKind &kind, const Dataset &labeled);

/// @throws dispatch_error if @p model was not produced by @p kind.
[[nodiscard]] class_index predict_with(const ClassifierKind &kind, const TrainedModel &model, std::span<const double> x);

[[nodiscard]] class_index predict(const TrainedModel &model, std::span<const double> x);

[[nodiscard]] std::size_t model_dimension(const TrainedModel &model);

/// Versioned JSON document holding the model and its hyperparameters.
[[nodiscard]] std::string model_to_json(const TrainedModel &model);
/// @throws io_error on a malformed document or unsupported version.
[[nodiscard]] TrainedModel model_from_json(std::string_view text);

}  // namespace lpsvm

#endif  // LPSVM_CLASSIFIER_HPP_
