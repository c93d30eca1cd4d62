#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "clustfill/harness.hpp"
#include "clustfill/rng.hpp"

namespace clustfill {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.emplace_back(trim(std::string_view(line).substr(start)));
            break;
        }
        fields.emplace_back(trim(std::string_view(line).substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

bool parse_double(std::string_view s, double& out) {
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

[[noreturn]] void bad_field(std::size_t row, std::size_t col, const std::string& field) {
    std::ostringstream msg;
    msg << "csv: row " << row << ", column " << col << ": cannot parse '" << field << "'";
    throw IngestError(msg.str());
}

}  // namespace

MaskedDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                       CsvLayout* layout) {
    std::ifstream in(path);
    if (!in) throw IngestError("csv: cannot open " + path.string());

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> header;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_fields(line);
        if (line_no == 1 && schema.has_header) {
            header = std::move(fields);
            continue;
        }
        records.push_back(std::move(fields));
    }
    if (records.empty()) throw IngestError("csv: " + path.string() + " has no data rows");

    const std::size_t ncols = records.front().size();
    for (std::size_t r = 0; r < records.size(); ++r)
        if (records[r].size() != ncols) {
            std::ostringstream msg;
            msg << "csv: ragged row " << r + 1 + (schema.has_header ? 1 : 0) << ": expected "
                << ncols << " fields, found " << records[r].size();
            throw IngestError(msg.str());
        }

    int label_col = -1;
    if (schema.label_column) {
        label_col = *schema.label_column;
        if (label_col < 0) label_col += static_cast<int>(ncols);
        if (label_col < 0 || label_col >= static_cast<int>(ncols))
            throw ConfigError("csv: label column out of range");
    }
    const std::size_t d = ncols - (label_col >= 0 ? 1 : 0);
    if (d == 0) throw IngestError("csv: no feature columns");
    const std::size_t n = records.size();

    MaskedDataset ds;
    ds.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
    ds.mask = MaskMatrix::Ones(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
    std::vector<int> labels;

    for (std::size_t r = 0; r < n; ++r) {
        std::size_t q = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            const std::string& field = records[r][c];
            const std::size_t row_1based = r + 1 + (schema.has_header ? 1 : 0);
            if (static_cast<int>(c) == label_col) {
                double value = 0.0;
                if (field.empty() || !parse_double(field, value)) bad_field(row_1based, c + 1, field);
                const long long rounded = std::llround(value);
                if (std::abs(value - static_cast<double>(rounded)) > 1e-9)
                    bad_field(row_1based, c + 1, field);
                labels.push_back(static_cast<int>(rounded));
                continue;
            }
            if (field.empty()) {
                ds.mask(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r)) = 0;
            } else {
                double value = 0.0;
                if (!parse_double(field, value)) bad_field(row_1based, c + 1, field);
                ds.values(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r)) = value;
            }
            ++q;
        }
    }

    if (schema.zeros_as_missing) {
        for (Eigen::Index j = 0; j < ds.values.cols(); ++j)
            for (Eigen::Index i = 0; i < ds.values.rows(); ++i)
                if (ds.values(i, j) == 0.0) ds.mask(i, j) = 0;
    }

    if (label_col >= 0) ds.labels = labels;
    if (layout) {
        layout->header = std::move(header);
        layout->label_column = label_col;
        layout->labels = std::move(labels);
    }
    return ds;
}

void write_instances_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                         const CsvLayout& layout) {
    std::ofstream out(path);
    if (!out) throw IoError("csv: cannot write " + path.string());

    char buffer[64];
    const auto put = [&](double v) {
        std::snprintf(buffer, sizeof buffer, "%.12g", v);
        out << buffer;
    };

    if (!layout.header.empty()) {
        for (std::size_t c = 0; c < layout.header.size(); ++c) {
            if (c) out << ',';
            out << layout.header[c];
        }
        out << '\n';
    }
    for (Eigen::Index r = 0; r < values.cols(); ++r) {
        Eigen::Index q = 0;
        const int ncols = static_cast<int>(values.rows()) + (layout.label_column >= 0 ? 1 : 0);
        for (int c = 0; c < ncols; ++c) {
            if (c) out << ',';
            if (c == layout.label_column) {
                out << layout.labels[static_cast<std::size_t>(r)];
            } else {
                put(values(q, r));
                ++q;
            }
        }
        out << '\n';
    }
    if (!out) throw IoError("csv: failed writing " + path.string());
}

MaskedDataset gen_synthetic(const SyntheticSpec& spec) {
    if (spec.clusters < 1 || spec.dims < 1 || spec.per_cluster < 1)
        throw ConfigError("gen_synthetic: counts must be at least 1");
    if (!(spec.separation > 0.0)) throw ConfigError("gen_synthetic: separation must be positive");

    Rng rng(spec.seed);
    const int c = spec.clusters;
    const int d = spec.dims;
    Eigen::MatrixXd centroids(d, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < d; ++i) centroids(i, j) = rng.normal();

    if (c >= 2) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (int a = 0; a < c; ++a)
            for (int b = a + 1; b < c; ++b)
                min_dist = std::min(min_dist, (centroids.col(a) - centroids.col(b)).norm());
        if (min_dist == 0.0) {
            for (int j = 0; j < c; ++j) centroids(0, j) += spec.separation * j;
        } else if (min_dist < spec.separation) {
            centroids *= spec.separation / min_dist;
        }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(c) * spec.per_cluster;
    Eigen::MatrixXd values(d, n);
    std::vector<int> labels(static_cast<std::size_t>(n));
    Eigen::Index col = 0;
    for (int j = 0; j < c; ++j) {
        for (int s = 0; s < spec.per_cluster; ++s, ++col) {
            for (int i = 0; i < d; ++i) values(i, col) = centroids(i, j) + rng.normal();
            labels[static_cast<std::size_t>(col)] = j;
        }
    }
    return MaskedDataset::complete(std::move(values), std::move(labels));
}

MaskedDataset apply_mcar(const MaskedDataset& ds, double fraction, std::uint64_t seed,
                         std::vector<std::string>* diagnostics) {
    if (!ds.is_complete()) throw ConfigError("apply_mcar: dataset already has missing cells");
    if (fraction < 0.0 || fraction >= 1.0) throw ConfigError("apply_mcar: fraction must be in [0, 1)");

    const Eigen::Index d = ds.dims();
    const Eigen::Index n = ds.size();
    MaskedDataset out;
    out.values = ds.values;
    out.mask = MaskMatrix::Ones(d, n);
    out.truth = ds.values;
    out.labels = ds.labels;

    const long long cells = static_cast<long long>(d) * n;
    const long long target = std::llround(fraction * static_cast<double>(cells));
    if (target == 0) return out;

    std::vector<long long> chosen;
    bool degenerate = true;
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng(seed_mix(seed, static_cast<std::uint64_t>(attempt)));
        std::vector<long long> pool(static_cast<std::size_t>(cells));
        std::iota(pool.begin(), pool.end(), 0LL);
        for (long long i = 0; i < target; ++i) {
            const long long j =
                i + static_cast<long long>(rng.uniform_index(static_cast<std::uint64_t>(cells - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(target));

        std::vector<Eigen::Index> row_hits(static_cast<std::size_t>(d), 0);
        std::vector<Eigen::Index> col_hits(static_cast<std::size_t>(n), 0);
        for (long long flat : pool) {
            ++row_hits[static_cast<std::size_t>(flat % d)];
            ++col_hits[static_cast<std::size_t>(flat / d)];
        }
        const bool full_row = std::any_of(row_hits.begin(), row_hits.end(),
                                          [n](Eigen::Index h) { return h == n; });
        const bool full_col = std::any_of(col_hits.begin(), col_hits.end(),
                                          [d](Eigen::Index h) { return h == d; });
        chosen = std::move(pool);
        if (!full_row && !full_col) {
            degenerate = false;
            break;
        }
    }
    if (degenerate && diagnostics)
        diagnostics->push_back(
            "apply_mcar: mask leaves a fully masked feature or instance after 100 redraws");

    for (long long flat : chosen) {
        const Eigen::Index i = static_cast<Eigen::Index>(flat % d);
        const Eigen::Index j = static_cast<Eigen::Index>(flat / d);
        out.mask(i, j) = 0;
        out.values(i, j) = 0.0;
    }
    return out;
}

}  // namespace clustfill
