#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clustfill/cluster.hpp"
#include "clustfill/core.hpp"
#include "clustfill/impute.hpp"
#include "clustfill/metrics.hpp"

namespace clustfill {

// ---------------------------------------------------------------------------
// dataset ingestion and generation
// ---------------------------------------------------------------------------

struct CsvSchema {
    bool has_header = false;
    std::optional<int> label_column;  // negative counts back from the last column
    bool zeros_as_missing = false;    // additionally treat exact zeros as missing
};

/// Structural details of a parsed CSV, kept so a filled matrix can be written
/// back in the source layout.
struct CsvLayout {
    std::vector<std::string> header;  // empty when the file had none
    int label_column = -1;            // resolved 0-based position, -1 = none
    std::vector<int> labels;
};

/// Reads an instances-as-rows CSV. Empty fields mark missing cells.
MaskedDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {},
                       CsvLayout* layout = nullptr);

/// Writes a feature-by-instance matrix as instances-as-rows CSV, restoring the
/// header and label column described by `layout`.
void write_instances_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                         const CsvLayout& layout);

struct SyntheticSpec {
    int clusters = 3;
    int dims = 10;
    int per_cluster = 100;
    double separation = 4.0;  // minimum centroid spacing, in within-cluster deviations
    std::uint64_t seed = 0;
};

/// Isotropic unit-variance Gaussian clusters with centroids at least
/// `separation` apart; labeled, fully observed, deterministic per seed.
MaskedDataset gen_synthetic(const SyntheticSpec& spec);

/// Masks exactly round(fraction * d * n) uniformly chosen cells of a fully
/// observed dataset, storing the originals in `truth`. Masks that wipe out an
/// entire feature or instance are redrawn up to 100 times, then tolerated
/// with a note in `diagnostics`.
MaskedDataset apply_mcar(const MaskedDataset& ds, double fraction, std::uint64_t seed,
                         std::vector<std::string>* diagnostics = nullptr);

// ---------------------------------------------------------------------------
// experiment protocol
// ---------------------------------------------------------------------------

enum class ClusterBackend { KMeans, SelfExpressive };

struct MethodSpec {
    std::string name;
    std::optional<ImputerConfig> imputer;  // nullopt: cluster raw zero-filled values
    ClusterBackend backend = ClusterBackend::KMeans;
};

struct DatasetSource {
    enum class Kind { Synthetic, Csv };
    Kind kind = Kind::Synthetic;
    std::filesystem::path csv_path;
    CsvSchema schema;
    SyntheticSpec synthetic;
};

struct ExperimentConfig {
    DatasetSource dataset;
    double missing_fraction = 0.3;
    std::vector<std::string> methods;  // empty: full default roster
    int repeats = 5;
    int clusters = 0;  // 0: synthetic cluster count; required for csv sources
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "report";
    std::vector<double> fractions;  // sweep grid

    // knobs shared by all method configurations
    double gamma = 0.1;
    int k_neighbors = 5;
    int nn_samples = 3;
    std::optional<int> rank;
    int max_iter = 50;
    double tol = 1e-6;
    std::optional<int> sample_cap;
    bool recycle = false;
    Similarity similarity = Similarity::Euclidean;
    bool wall_timing = true;  // false writes 0 runtimes for bit-reproducible reports
};

/// baseline, nnc, pcc, sec, ivpc1, ivpc2, bac1, bac2. Suffix 1 pairs the
/// imputer with self-expressive clustering, suffix 2 with k-means.
std::vector<std::string> default_method_roster();

MethodSpec method_from_name(const std::string& name, const ExperimentConfig& cfg);

struct ReportRow {
    std::string method;
    int repeat = 0;
    double fraction = 0.0;
    MetricsRecord record;
    bool failed = false;
    std::string error;
};

struct Aggregate {
    std::string method;
    double fraction = 0.0;
    int count = 0;  // rows that completed
    MetricsRecord mean;
    MetricsRecord stddev;
};

struct ExperimentReport {
    std::vector<std::string> method_order;
    std::vector<ReportRow> rows;
    std::vector<Aggregate> aggregates;
    std::vector<std::string> notes;  // masking/diagnostic messages
};

/// Parses the flat `key = value` experiment config format. Errors carry the
/// offending line number.
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Runs every configured method over `repeats` independently masked copies of
/// the dataset and aggregates the per-method metrics.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// run_experiment once per fraction with fraction-tagged sub-seeds; reports
/// are merged and keyed by fraction.
ExperimentReport sweep_missing(const ExperimentConfig& cfg, const std::vector<double>& fractions);

std::vector<Aggregate> aggregate_rows(const std::vector<ReportRow>& rows,
                                      const std::vector<std::string>& method_order);

/// Writes rows.csv, aggregates.csv and one 800x600 line-chart SVG per metric
/// (nmi, f, ri, seconds) into `output_dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& output_dir);

}  // namespace clustfill
