/**
 * @file
 * @brief Gaussian blob generator for controlled experiments.
 */

#ifndef LPSVM_SYNTHETIC_HPP_
#define LPSVM_SYNTHETIC_HPP_
#pragma once

#include "lpsvm/data.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace lpsvm {

struct BlobSpec {
    std::size_t n{ 300 };
    std::size_t num_classes{ 3 };
    /// Distance between any two cluster centres, in units of cluster_sigma.
    double separation{ 6.0 };
    std::uint64_t seed{ 0 };
    /// Raised to num_classes if smaller, since equidistant centres need that many axes.
    std::size_t dimension{ 2 };
    double cluster_sigma{ 1.0 };

    void validate() const;
    /// `blobs:n=..,c=..,sep=..,d=..,seed=..`, parsable by blob_spec_from_string().
    [[nodiscard]] std::string to_string() const;
};

/// Parses `blobs:key=value,...` with keys n, c, sep, d, seed, sigma; missing keys keep defaults.
[[nodiscard]] BlobSpec blob_spec_from_string(const std::string &text);

/**
 * @brief Isotropic Gaussian clusters centred on scaled coordinate axes, so every pair of centres
 *        is exactly separation * cluster_sigma apart. Record i belongs to class i mod C, giving
 *        class sizes that differ by at most one.
 */
[[nodiscard]] Dataset gen_blobs(const BlobSpec &spec);

/// Centre of class @p c as produced by gen_blobs().
[[nodiscard]] std::vector<double> blob_center(const BlobSpec &spec, class_index c);

}  // namespace lpsvm

#endif  // LPSVM_SYNTHETIC_HPP_
