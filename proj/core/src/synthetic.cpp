#include "lpsvm/synthetic.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lpsvm {

void BlobSpec::validate() const {
    if (num_classes < 2 || n < num_classes) {
        throw config_error{ fmt::format("blobs need n >= C >= 2, got n={} C={}", n, num_classes) };
    }
    if (!(separation > 0.0) || !(cluster_sigma > 0.0)) {
        throw config_error{ "blob separation and sigma must be positive" };
    }
}

std::string BlobSpec::to_string() const {
    return fmt::format("blobs:n={},c={},sep={},d={},seed={},sigma={}", n, num_classes, separation, dimension, seed, cluster_sigma);
}

BlobSpec blob_spec_from_string(const std::string &text) {
    constexpr std::string_view prefix = "blobs:";
    if (text.rfind(prefix, 0) != 0) {
        throw config_error{ fmt::format("'{}' is not a blob specification", text) };
    }
    BlobSpec spec;
    std::stringstream fields{ text.substr(prefix.size()) };
    std::string field;
    while (std::getline(fields, field, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) {
            throw config_error{ fmt::format("blob field '{}' is not key=value", field) };
        }
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        try {
            if (key == "n") {
                spec.n = std::stoull(value);
            } else if (key == "c") {
                spec.num_classes = std::stoull(value);
            } else if (key == "sep") {
                spec.separation = std::stod(value);
            } else if (key == "d") {
                spec.dimension = std::stoull(value);
            } else if (key == "seed") {
                spec.seed = std::stoull(value);
            } else if (key == "sigma") {
                spec.cluster_sigma = std::stod(value);
            } else {
                throw config_error{ fmt::format("unknown blob field '{}'", key) };
            }
        } catch (const std::logic_error &) {
            throw config_error{ fmt::format("invalid value '{}' for blob field '{}'", value, key) };
        }
    }
    spec.validate();
    return spec;
}

std::vector<double> blob_center(const BlobSpec &spec, const class_index c) {
    const std::size_t d = std::max(spec.dimension, spec.num_classes);
    std::vector<double> center(d, 0.0);
    // basis vectors are sqrt(2) apart
    center[c] = spec.separation * spec.cluster_sigma / std::sqrt(2.0);
    return center;
}

Dataset gen_blobs(const BlobSpec &spec) {
    spec.validate();
    const std::size_t d = std::max(spec.dimension, spec.num_classes);
    std::mt19937_64 rng{ spec.seed };
    std::normal_distribution<double> noise{ 0.0, spec.cluster_sigma };
    std::vector<std::vector<double>> centers;
    for (class_index c = 0; c < spec.num_classes; ++c) {
        centers.push_back(blob_center(spec, c));
    }
    std::vector<Record> records;
    records.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const class_index c = i % spec.num_classes;
        Record r;
        r.id = i;
        r.label = c;
        r.features.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            r.features[k] = centers[c][k] + noise(rng);
        }
        records.push_back(std::move(r));
    }
    std::vector<std::string> names;
    for (class_index c = 0; c < spec.num_classes; ++c) {
        names.push_back(std::to_string(c));
    }
    return Dataset{ std::move(records), spec.num_classes, d, std::move(names) };
}

}  // namespace lpsvm
