/**
 * @file
 * @brief Records, datasets and the preparation steps applied before training: loading, shuffling,
 *        train/test splitting, label masking, min-max scaling and class-skew generation.
 */

#ifndef LPSVM_DATA_HPP_
#define LPSVM_DATA_HPP_
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lpsvm {

/// Contiguous class index in [0, num_classes).
using class_index = std::size_t;

/// A record's class. An empty optional is the "unlabeled" state; it is never encoded as a
/// negative class value.
using label_type = std::optional<class_index>;

inline constexpr label_type unlabeled = std::nullopt;

struct Record {
    std::size_t id{};
    std::vector<double> features;
    label_type label;

    [[nodiscard]] bool is_labeled() const noexcept { return label.has_value(); }
    friend bool operator==(const Record &, const Record &) = default;
};

/**
 * @brief An ordered collection of records sharing a dimension and class count.
 *
 * @p class_names keeps the original class symbols from the source file, indexed by class_index,
 * so that datasets can be written back with their original labels.
 */
class Dataset {
  public:
    Dataset() = default;
    /// Validates every record against @p num_classes and @p dimension.
    Dataset(std::vector<Record> records, std::size_t num_classes, std::size_t dimension,
            std::vector<std::string> class_names = {});

    [[nodiscard]] const std::vector<Record> &records() const noexcept { return records_; }
    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] const std::vector<std::string> &class_names() const noexcept { return class_names_; }

    [[nodiscard]] std::size_t labeled_count() const noexcept;
    [[nodiscard]] std::size_t unlabeled_count() const noexcept { return size() - labeled_count(); }

    /// Number of labeled records per class.
    [[nodiscard]] std::vector<std::size_t> class_counts() const;
    /// True if every class in [0, num_classes) has at least one labeled record.
    [[nodiscard]] bool all_classes_labeled() const;

    [[nodiscard]] std::vector<Record> labeled_records() const;
    [[nodiscard]] std::vector<Record> unlabeled_records() const;

    /// Same metadata, different records.
    [[nodiscard]] Dataset with_records(std::vector<Record> records) const;

    friend bool operator==(const Dataset &, const Dataset &) = default;

  private:
    std::vector<Record> records_;
    std::size_t num_classes_{0};
    std::size_t dimension_{0};
    std::vector<std::string> class_names_;
};

enum class file_format { csv, libsvm };

[[nodiscard]] file_format file_format_from_string(const std::string &name);

struct LoadOptions {
    file_format format{file_format::csv};
    /// CSV only: skip the first line.
    bool csv_header{false};
    /// libsvm only: force the dimension instead of inferring it from the largest index.
    std::optional<std::size_t> libsvm_dimension;
};

/**
 * @brief Parses a dataset file.
 *
 * CSV rows are `f_1,...,f_d,label`. libsvm rows are `label idx:val ...` with 1-based indices;
 * absent indices are zero. Class symbols are mapped to contiguous indices in order of first
 * appearance and each record's id is its row index.
 *
 * @throws parse_error on a malformed row, dimension_error on inconsistent row lengths,
 *         class_count_error when fewer than two distinct classes are present.
 */
[[nodiscard]] Dataset load_dataset(const std::filesystem::path &path, const LoadOptions &options = {});
[[nodiscard]] Dataset read_dataset(std::istream &in, const LoadOptions &options = {});

/// Writes all records in @p format. Unlabeled records are written with the label `?`, which the
/// reader does not accept; only fully labeled datasets round-trip.
void write_dataset(std::ostream &out, const Dataset &ds, file_format format, bool csv_header = false);
void save_dataset(const std::filesystem::path &path, const Dataset &ds, file_format format, bool csv_header = false);

struct SplitSpec {
    double train_fraction{0.7};
    double unlabeled_fraction{0.8};
    std::uint64_t seed{0};

    /// @throws config_error if a fraction is outside its range ((0,1) and [0,1) respectively).
    void validate() const;
};

struct TrainTestSplit {
    Dataset train;
    Dataset test;
};

/**
 * @brief Shuffles the records with @p seed and puts the first floor(train_fraction * N) into
 *        the training set. Record ids are preserved.
 * @throws split_error if either side would be empty.
 */
[[nodiscard]] TrainTestSplit shuffle_split(const Dataset &ds, double train_fraction, std::uint64_t seed);

/// Ground truth of masked records, keyed by record id. Only evaluation code should read it.
using ShadowLabels = std::map<std::size_t, class_index>;

struct MaskedDataset {
    Dataset dataset;
    ShadowLabels shadow;
};

/**
 * @brief Hides the labels of round(unlabeled_fraction * N) randomly chosen records.
 *
 * The draw is repeated (up to @p max_attempts) until every class keeps at least one labeled
 * record.
 *
 * @throws masking_error if that constraint cannot be met.
 */
[[nodiscard]] MaskedDataset mask_labels(const Dataset &train, double unlabeled_fraction, std::uint64_t seed,
                                        std::size_t max_attempts = 1000);

void write_shadow_labels(std::ostream &out, const ShadowLabels &shadow);
[[nodiscard]] ShadowLabels read_shadow_labels(std::istream &in);

struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;

    [[nodiscard]] static MinMaxScaler fit(const Dataset &ds);
    /// Constant features (max == min) map to 0. Values outside the fitted range are not clipped.
    [[nodiscard]] Dataset transform(const Dataset &ds) const;
};

/// Fits a scaler on @p train and applies it to both datasets.
[[nodiscard]] std::pair<Dataset, Dataset> min_max_scale(const Dataset &train, const Dataset &test);

/**
 * @brief Downsamples every class except the largest so that largest / smallest >= @p ratio.
 *
 * Non-majority classes are reduced to at most floor(max_count / ratio) records, chosen uniformly
 * with @p seed; original record order is kept. A dataset that already meets the ratio is returned
 * unchanged.
 *
 * @throws skew_error if a class would be left empty, or if @p ratio < 8.
 */
[[nodiscard]] Dataset make_skewed(const Dataset &ds, double ratio, std::uint64_t seed);

/// Dense row-major copy of the feature vectors of @p records.
[[nodiscard]] std::vector<double> feature_matrix(std::span<const Record> records);

}  // namespace lpsvm

#endif  // LPSVM_DATA_HPP_
