#ifndef LPSVM_SRC_JSON_IO_HPP_
#define LPSVM_SRC_JSON_IO_HPP_
#pragma once

#include "lpsvm/eval.hpp"
#include "lpsvm/hybrid.hpp"

#include "json.hpp"

namespace lpsvm::detail {

[[nodiscard]] nlohmann::json to_json(const IterationLog &log);
[[nodiscard]] nlohmann::json to_json(const EvalReport &report);

}  // namespace lpsvm::detail

#endif  // LPSVM_SRC_JSON_IO_HPP_
