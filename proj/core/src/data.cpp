#include "lpsvm/data.hpp"

#include "lpsvm/exceptions.hpp"

#include "fmt/core.h"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace lpsvm {

parse_error::parse_error(const std::string &msg, const std::size_t line) :
    exception{ fmt::format("line {}: {}", line, msg) },
    line_{ line } {}

Dataset::Dataset(std::vector<Record> records, const std::size_t num_classes, const std::size_t dimension,
                 std::vector<std::string> class_names) :
    records_{ std::move(records) },
    num_classes_{ num_classes },
    dimension_{ dimension },
    class_names_{ std::move(class_names) } {
    if (num_classes_ == 0) {
        throw class_count_error{ "a dataset needs at least one class" };
    }
    if (!class_names_.empty() && class_names_.size() != num_classes_) {
        throw class_count_error{ fmt::format("{} class names given for {} classes", class_names_.size(), num_classes_) };
    }
    for (const Record &r : records_) {
        if (r.features.size() != dimension_) {
            throw dimension_error{ fmt::format("record {} has {} features, expected {}", r.id, r.features.size(), dimension_) };
        }
        if (r.label && *r.label >= num_classes_) {
            throw class_count_error{ fmt::format("record {} has class {} but the dataset has {} classes", r.id, *r.label, num_classes_) };
        }
    }
}

std::size_t Dataset::labeled_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const Record &r) { return r.is_labeled(); }));
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(num_classes_, 0);
    for (const Record &r : records_) {
        if (r.label) {
            ++counts[*r.label];
        }
    }
    return counts;
}

bool Dataset::all_classes_labeled() const {
    const std::vector<std::size_t> counts = class_counts();
    return std::all_of(counts.begin(), counts.end(), [](const std::size_t c) { return c > 0; });
}

std::vector<Record> Dataset::labeled_records() const {
    std::vector<Record> out;
    std::copy_if(records_.begin(), records_.end(), std::back_inserter(out), [](const Record &r) { return r.is_labeled(); });
    return out;
}

std::vector<Record> Dataset::unlabeled_records() const {
    std::vector<Record> out;
    std::copy_if(records_.begin(), records_.end(), std::back_inserter(out), [](const Record &r) { return !r.is_labeled(); });
    return out;
}

Dataset Dataset::with_records(std::vector<Record> records) const {
    return Dataset{ std::move(records), num_classes_, dimension_, class_names_ };
}

file_format file_format_from_string(const std::string &name) {
    if (name == "csv") {
        return file_format::csv;
    }
    if (name == "libsvm" || name == "libsvm-sparse" || name == "sparse") {
        return file_format::libsvm;
    }
    throw config_error{ fmt::format("unknown dataset format '{}'", name) };
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view token, const std::size_t line) {
    token = trim(token);
    // from_chars rejects a leading '+'
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw parse_error{ fmt::format("'{}' is not a number", token), line };
    }
    return value;
}

/// Maps raw class symbols to contiguous indices in order of first appearance.
class ClassMapper {
  public:
    class_index map(const std::string &symbol) {
        const auto [it, inserted] = index_.try_emplace(symbol, names_.size());
        if (inserted) {
            names_.push_back(symbol);
        }
        return it->second;
    }

    [[nodiscard]] std::vector<std::string> names() && { return std::move(names_); }
    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }

  private:
    std::unordered_map<std::string, class_index> index_;
    std::vector<std::string> names_;
};

Dataset finish(std::vector<Record> records, ClassMapper mapper, const std::size_t dimension) {
    if (mapper.size() < 2) {
        throw class_count_error{ fmt::format("found {} distinct class(es), at least 2 are required", mapper.size()) };
    }
    const std::size_t classes = mapper.size();
    return Dataset{ std::move(records), classes, dimension, std::move(mapper).names() };
}

Dataset read_csv(std::istream &in, const bool header) {
    std::vector<Record> records;
    ClassMapper mapper;
    std::optional<std::size_t> dimension;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (header && line_no == 1) {
            continue;
        }
        const std::string_view row = trim(line);
        if (row.empty()) {
            continue;
        }
        std::vector<std::string_view> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = row.find(',', start);
            cells.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (cells.size() < 2) {
            throw parse_error{ "expected at least one feature and a label", line_no };
        }
        const std::string_view label = trim(cells.back());
        if (label.empty()) {
            throw parse_error{ "empty class label", line_no };
        }
        Record r;
        r.id = records.size();
        r.features.reserve(cells.size() - 1);
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
            r.features.push_back(parse_double(cells[i], line_no));
        }
        if (!dimension) {
            dimension = r.features.size();
        } else if (*dimension != r.features.size()) {
            throw dimension_error{ fmt::format("line {}: {} features, expected {}", line_no, r.features.size(), *dimension) };
        }
        r.label = mapper.map(std::string{ label });
        records.push_back(std::move(r));
    }
    if (records.empty()) {
        throw parse_error{ "no data rows", line_no };
    }
    return finish(std::move(records), std::move(mapper), *dimension);
}

Dataset read_libsvm(std::istream &in, const std::optional<std::size_t> forced_dimension) {
    struct SparseRow {
        std::vector<std::pair<std::size_t, double>> entries;
        class_index label;
    };
    std::vector<SparseRow> rows;
    ClassMapper mapper;
    std::size_t max_index = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = line;
        if (const auto hash = row.find('#'); hash != std::string_view::npos) {
            row = row.substr(0, hash);
        }
        row = trim(row);
        if (row.empty()) {
            continue;
        }
        std::istringstream tokens{ std::string{ row } };
        std::string token;
        tokens >> token;
        SparseRow sparse;
        sparse.label = mapper.map(token);
        while (tokens >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos || colon == 0) {
                throw parse_error{ fmt::format("expected index:value, got '{}'", token), line_no };
            }
            const std::string_view idx_text{ token.data(), colon };
            std::size_t index{};
            const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), index);
            if (ec != std::errc{} || ptr != idx_text.data() + idx_text.size() || index == 0) {
                throw parse_error{ fmt::format("invalid 1-based feature index '{}'", idx_text), line_no };
            }
            const double value = parse_double(std::string_view{ token }.substr(colon + 1), line_no);
            if (forced_dimension && index > *forced_dimension) {
                throw dimension_error{ fmt::format("line {}: feature index {} exceeds dimension {}", line_no, index, *forced_dimension) };
            }
            max_index = std::max(max_index, index);
            sparse.entries.emplace_back(index - 1, value);
        }
        rows.push_back(std::move(sparse));
    }
    if (rows.empty()) {
        throw parse_error{ "no data rows", line_no };
    }
    const std::size_t dimension = forced_dimension.value_or(max_index);
    if (dimension == 0) {
        throw dimension_error{ "no features found" };
    }
    std::vector<Record> records;
    records.reserve(rows.size());
    for (SparseRow &row : rows) {
        Record r;
        r.id = records.size();
        r.features.assign(dimension, 0.0);
        for (const auto &[index, value] : row.entries) {
            r.features[index] = value;
        }
        r.label = row.label;
        records.push_back(std::move(r));
    }
    return finish(std::move(records), std::move(mapper), dimension);
}

std::string class_symbol(const Dataset &ds, const label_type &label) {
    if (!label) {
        return "?";
    }
    if (!ds.class_names().empty()) {
        return ds.class_names()[*label];
    }
    return std::to_string(*label);
}

}  // namespace

Dataset read_dataset(std::istream &in, const LoadOptions &options) {
    switch (options.format) {
        case file_format::csv:
            return read_csv(in, options.csv_header);
        case file_format::libsvm:
            return read_libsvm(in, options.libsvm_dimension);
    }
    throw config_error{ "unknown dataset format" };
}

Dataset load_dataset(const std::filesystem::path &path, const LoadOptions &options) {
    std::ifstream in{ path };
    if (!in) {
        throw io_error{ fmt::format("cannot open '{}'", path.string()) };
    }
    return read_dataset(in, options);
}

void write_dataset(std::ostream &out, const Dataset &ds, const file_format format, const bool csv_header) {
    if (format == file_format::csv) {
        if (csv_header) {
            for (std::size_t j = 0; j < ds.dimension(); ++j) {
                out << 'f' << j << ',';
            }
            out << "label\n";
        }
        for (const Record &r : ds.records()) {
            for (const double v : r.features) {
                out << fmt::format("{}", v) << ',';
            }
            out << class_symbol(ds, r.label) << '\n';
        }
        return;
    }
    for (const Record &r : ds.records()) {
        out << class_symbol(ds, r.label);
        for (std::size_t j = 0; j < r.features.size(); ++j) {
            if (r.features[j] != 0.0) {
                out << fmt::format(" {}:{}", j + 1, r.features[j]);
            }
        }
        out << '\n';
    }
}

void save_dataset(const std::filesystem::path &path, const Dataset &ds, const file_format format, const bool csv_header) {
    std::ofstream out{ path };
    if (!out) {
        throw io_error{ fmt::format("cannot write '{}'", path.string()) };
    }
    write_dataset(out, ds, format, csv_header);
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw config_error{ fmt::format("train_fraction must be in (0,1), got {}", train_fraction) };
    }
    if (!(unlabeled_fraction >= 0.0 && unlabeled_fraction < 1.0)) {
        throw config_error{ fmt::format("unlabeled_fraction must be in [0,1), got {}", unlabeled_fraction) };
    }
}

TrainTestSplit shuffle_split(const Dataset &ds, const double train_fraction, const std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw split_error{ fmt::format("train_fraction must be in (0,1), got {}", train_fraction) };
    }
    if (ds.unlabeled_count() != 0) {
        throw split_error{ "shuffle_split expects a fully labeled dataset" };
    }
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ds.size())));
    if (n_train == 0 || n_train == ds.size()) {
        throw split_error{ fmt::format("a {} split of {} records leaves one side empty", train_fraction, ds.size()) };
    }
    std::vector<Record> shuffled = ds.records();
    std::mt19937_64 rng{ seed };
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<Record> test(std::make_move_iterator(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train)),
                             std::make_move_iterator(shuffled.end()));
    shuffled.resize(n_train);
    return { ds.with_records(std::move(shuffled)), ds.with_records(std::move(test)) };
}

MaskedDataset mask_labels(const Dataset &train, const double unlabeled_fraction, const std::uint64_t seed,
                          const std::size_t max_attempts) {
    if (!(unlabeled_fraction >= 0.0 && unlabeled_fraction < 1.0)) {
        throw masking_error{ fmt::format("unlabeled_fraction must be in [0,1), got {}", unlabeled_fraction) };
    }
    if (train.unlabeled_count() != 0) {
        throw masking_error{ "mask_labels expects a fully labeled dataset" };
    }
    const std::size_t n = train.size();
    const auto n_masked = static_cast<std::size_t>(std::llround(unlabeled_fraction * static_cast<double>(n)));
    if (n_masked == 0) {
        return { train, {} };
    }

    const std::vector<Record> &records = train.records();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{ 0 });
    std::mt19937_64 rng{ seed };

    const std::size_t attempts = n_masked + train.num_classes() > n ? 0 : max_attempts;
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::size_t> kept(train.num_classes(), 0);
        for (std::size_t k = n_masked; k < n; ++k) {
            ++kept[*records[order[k]].label];
        }
        if (std::any_of(kept.begin(), kept.end(), [](const std::size_t c) { return c == 0; })) {
            continue;
        }
        std::vector<Record> out = records;
        ShadowLabels shadow;
        for (std::size_t k = 0; k < n_masked; ++k) {
            Record &r = out[order[k]];
            shadow.emplace(r.id, *r.label);
            r.label = unlabeled;
        }
        return { train.with_records(std::move(out)), std::move(shadow) };
    }
    throw masking_error{ fmt::format("cannot mask {} of {} records and keep all {} classes labeled", n_masked, n, train.num_classes()) };
}

void write_shadow_labels(std::ostream &out, const ShadowLabels &shadow) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto &[id, label] : shadow) {
        doc[std::to_string(id)] = label;
    }
    out << doc.dump(2) << '\n';
}

ShadowLabels read_shadow_labels(std::istream &in) {
    ShadowLabels shadow;
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        for (const auto &[key, value] : doc.items()) {
            shadow.emplace(std::stoull(key), value.get<class_index>());
        }
    } catch (const std::exception &e) {
        throw io_error{ fmt::format("invalid shadow label document: {}", e.what()) };
    }
    return shadow;
}

MinMaxScaler MinMaxScaler::fit(const Dataset &ds) {
    if (ds.empty()) {
        throw dimension_error{ "cannot fit a scaler on an empty dataset" };
    }
    MinMaxScaler s;
    s.min = ds.records().front().features;
    s.max = s.min;
    for (const Record &r : ds.records()) {
        for (std::size_t j = 0; j < r.features.size(); ++j) {
            s.min[j] = std::min(s.min[j], r.features[j]);
            s.max[j] = std::max(s.max[j], r.features[j]);
        }
    }
    return s;
}

Dataset MinMaxScaler::transform(const Dataset &ds) const {
    if (ds.dimension() != min.size()) {
        throw dimension_error{ fmt::format("scaler fitted on {} features, dataset has {}", min.size(), ds.dimension()) };
    }
    std::vector<Record> out = ds.records();
    for (Record &r : out) {
        for (std::size_t j = 0; j < r.features.size(); ++j) {
            const double range = max[j] - min[j];
            r.features[j] = range > 0.0 ? (r.features[j] - min[j]) / range : 0.0;
        }
    }
    return ds.with_records(std::move(out));
}

std::pair<Dataset, Dataset> min_max_scale(const Dataset &train, const Dataset &test) {
    const MinMaxScaler scaler = MinMaxScaler::fit(train);
    return { scaler.transform(train), scaler.transform(test) };
}

Dataset make_skewed(const Dataset &ds, const double ratio, const std::uint64_t seed) {
    if (!(ratio >= 8.0)) {
        throw skew_error{ fmt::format("skew ratio must be at least 8, got {}", ratio) };
    }
    if (ds.unlabeled_count() != 0) {
        throw skew_error{ "make_skewed expects a fully labeled dataset" };
    }
    if (ds.num_classes() < 2) {
        throw skew_error{ "make_skewed needs at least two classes" };
    }
    const std::vector<std::size_t> counts = ds.class_counts();
    const auto majority = static_cast<class_index>(std::distance(counts.begin(), std::max_element(counts.begin(), counts.end())));
    const std::size_t max_count = counts[majority];
    const std::size_t min_count = *std::min_element(counts.begin(), counts.end());
    if (min_count > 0 && static_cast<double>(max_count) / static_cast<double>(min_count) >= ratio) {
        return ds;
    }
    const auto target = static_cast<std::size_t>(std::floor(static_cast<double>(max_count) / ratio));
    if (target == 0 || min_count == 0) {
        throw skew_error{ fmt::format("largest class has {} records; a 1:{} skew leaves a class empty", max_count, ratio) };
    }

    // per class, positions of its records in dataset order
    std::vector<std::vector<std::size_t>> members(ds.num_classes());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        members[*ds.records()[i].label].push_back(i);
    }
    std::vector<bool> keep(ds.size(), true);
    std::mt19937_64 rng{ seed };
    for (class_index c = 0; c < ds.num_classes(); ++c) {
        if (c == majority || members[c].size() <= target) {
            continue;
        }
        std::vector<std::size_t> pick = members[c];
        std::shuffle(pick.begin(), pick.end(), rng);
        for (std::size_t k = target; k < pick.size(); ++k) {
            keep[pick[k]] = false;
        }
    }
    std::vector<Record> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (keep[i]) {
            out.push_back(ds.records()[i]);
        }
    }
    return ds.with_records(std::move(out));
}

std::vector<double> feature_matrix(const std::span<const Record> records) {
    std::vector<double> out;
    if (records.empty()) {
        return out;
    }
    out.reserve(records.size() * records.front().features.size());
    for (const Record &r : records) {
        out.insert(out.end(), r.features.begin(), r.features.end());
    }
    return out;
}

}  // namespace lpsvm
