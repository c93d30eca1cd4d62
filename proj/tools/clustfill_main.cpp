// clustfill — cluster incomplete data by imputing missing cells first.
//
// Subcommands: impute, cluster, bench, sweep, synth. All randomness flows
// from --seed; exit codes are 0 (success), 1 (runtime failure), 2 (usage or
// config error).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "clustfill/harness.hpp"
#include "clustfill/rng.hpp"

namespace {

using namespace clustfill;

struct CsvFlags {
    bool header = false;
    std::string label = "none";
    bool zeros_as_missing = false;
};

void add_csv_flags(CLI::App* cmd, CsvFlags& flags) {
    cmd->add_flag("--header", flags.header, "First row is a header");
    cmd->add_option("--label-column", flags.label,
                    "Label column: none, last, or a 0-based index (default none)");
    cmd->add_flag("--zeros-as-missing", flags.zeros_as_missing,
                  "Also treat exact zeros as missing cells");
}

CsvSchema schema_from_flags(const CsvFlags& flags) {
    CsvSchema schema;
    schema.has_header = flags.header;
    schema.zeros_as_missing = flags.zeros_as_missing;
    if (flags.label == "none") {
        schema.label_column.reset();
    } else if (flags.label == "last") {
        schema.label_column = -1;
    } else {
        try {
            schema.label_column = std::stoi(flags.label);
        } catch (...) {
            throw ConfigError("--label-column must be none, last, or an integer");
        }
    }
    return schema;
}

ImputeMethod method_from_string(const std::string& name) {
    if (name == "mean") return ImputeMethod::Mean;
    if (name == "nn") return ImputeMethod::NearestNeighbor;
    if (name == "pc") return ImputeMethod::PrincipalComponent;
    if (name == "ivp") return ImputeMethod::InfoVolume;
    if (name == "bayes") return ImputeMethod::BayesAlign;
    throw ConfigError("unknown imputation method '" + name + "'");
}

void print_aggregate_table(const ExperimentReport& report) {
    std::printf("%-10s %-9s %-9s %-9s %-9s %-11s %-9s\n", "method", "fraction", "nmi", "f", "ri",
                "rmse", "seconds");
    for (const auto& agg : report.aggregates) {
        if (agg.count == 0) {
            std::printf("%-10s %-9.4g (all %d run(s) failed)\n", agg.method.c_str(), agg.fraction,
                        agg.count);
            continue;
        }
        std::printf("%-10s %-9.4g %-9.4f %-9.4f %-9.4f %-11s %-9.4f\n", agg.method.c_str(),
                    agg.fraction, agg.mean.nmi, agg.mean.f_score, agg.mean.rand_index,
                    agg.mean.rmse_missing ? std::to_string(*agg.mean.rmse_missing).c_str() : "-",
                    agg.mean.runtime_seconds);
    }
}

int report_epilogue(const ExperimentReport& report, const std::filesystem::path& out_dir) {
    for (const auto& note : report.notes) std::cerr << "note: " << note << "\n";
    int failed = 0;
    for (const auto& row : report.rows)
        if (row.failed) {
            ++failed;
            std::cerr << "failed: " << row.method << " repeat " << row.repeat << " fraction "
                      << row.fraction << ": " << row.error << "\n";
        }
    write_report(report, out_dir);
    print_aggregate_table(report);
    std::printf("report written to %s\n", out_dir.string().c_str());
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clustering of incomplete data via imputation"};
    app.require_subcommand(1);

    // ---- impute ----
    auto* impute_cmd = app.add_subcommand("impute", "Fill missing cells of a CSV");
    std::string in_path, out_path, method_name = "mean", similarity_name = "euclidean";
    CsvFlags impute_csv;
    std::uint64_t seed = 0;
    int k_neighbors = 5, nn_samples = 3, max_iter = 50;
    double tol = 1e-6;
    std::optional<int> rank_flag, sample_cap_flag;
    impute_cmd->add_option("input", in_path, "Input CSV (empty fields are missing)")->required();
    impute_cmd->add_option("--out", out_path, "Output CSV path")->required();
    impute_cmd->add_option("--method", method_name, "mean | nn | pc | ivp | bayes");
    impute_cmd->add_option("--seed", seed, "Random seed (default 0)");
    impute_cmd->add_option("--rank", rank_flag, "Principal-component rank")
        ->check(CLI::PositiveNumber);
    impute_cmd->add_option("--k-neighbors", k_neighbors, "Neighbor count for ivp")
        ->check(CLI::PositiveNumber);
    impute_cmd->add_option("--nn-samples", nn_samples, "Random neighbors for nn")
        ->check(CLI::PositiveNumber);
    impute_cmd->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    impute_cmd->add_option("--tol", tol, "Convergence tolerance");
    impute_cmd->add_option("--sample-cap", sample_cap_flag, "ivp instances revisited per iteration")
        ->check(CLI::PositiveNumber);
    impute_cmd->add_option("--similarity", similarity_name, "euclidean | cosine");
    add_csv_flags(impute_cmd, impute_csv);

    // ---- cluster ----
    auto* cluster_cmd = app.add_subcommand("cluster", "Partition a complete CSV");
    std::string cl_in, cl_out, cl_method = "kmeans";
    CsvFlags cluster_csv;
    int cl_clusters = 0;
    double cl_gamma = 0.1;
    std::uint64_t cl_seed = 0;
    bool allow_missing = false;
    cluster_cmd->add_option("input", cl_in, "Input CSV")->required();
    cluster_cmd->add_option("--out", cl_out, "Output CSV of cluster labels")->required();
    cluster_cmd->add_option("--method", cl_method, "kmeans | sec");
    cluster_cmd->add_option("--clusters", cl_clusters, "Cluster count")
        ->required()
        ->check(CLI::PositiveNumber);
    cluster_cmd->add_option("--gamma", cl_gamma, "Self-expressive balance weight");
    cluster_cmd->add_option("--seed", cl_seed, "Random seed (default 0)");
    cluster_cmd->add_flag("--allow-missing", allow_missing,
                          "Cluster raw values even when cells are missing (placeholder 0)");
    add_csv_flags(cluster_cmd, cluster_csv);

    // ---- bench / sweep ----
    auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark protocol from a config file");
    auto* sweep_cmd = app.add_subcommand("sweep", "Benchmark across a grid of missing fractions");
    std::string bench_config, sweep_config, sweep_fractions_flag;
    std::string bench_out_flag, sweep_out_flag;
    std::optional<std::uint64_t> bench_seed_flag, sweep_seed_flag;
    bench_cmd->add_option("config", bench_config, "Experiment config file")->required();
    bench_cmd->add_option("--out", bench_out_flag, "Override output_dir");
    bench_cmd->add_option("--seed", bench_seed_flag, "Override seed");
    sweep_cmd->add_option("config", sweep_config, "Experiment config file")->required();
    sweep_cmd->add_option("--fractions", sweep_fractions_flag,
                          "Override sweep fractions, e.g. 0.1,0.2,0.3");
    sweep_cmd->add_option("--out", sweep_out_flag, "Override output_dir");
    sweep_cmd->add_option("--seed", sweep_seed_flag, "Override seed");

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled Gaussian-mixture CSV");
    std::string synth_out;
    SyntheticSpec synth_spec;
    synth_cmd->add_option("--out", synth_out, "Output CSV path")->required();
    synth_cmd->add_option("--clusters", synth_spec.clusters, "Cluster count")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--dims", synth_spec.dims, "Feature count")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--per-cluster", synth_spec.per_cluster, "Instances per cluster")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--separation", synth_spec.separation, "Minimum centroid spacing");
    synth_cmd->add_option("--seed", synth_spec.seed, "Random seed (default 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (impute_cmd->parsed()) {
            ImputerConfig cfg;
            cfg.method = method_from_string(method_name);
            cfg.seed = seed;
            cfg.max_iter = max_iter;
            cfg.tol = tol;
            cfg.k_neighbors = k_neighbors;
            cfg.nn_samples = nn_samples;
            cfg.rank = rank_flag;
            cfg.sample_cap = sample_cap_flag;
            if (similarity_name == "euclidean") cfg.similarity = Similarity::Euclidean;
            else if (similarity_name == "cosine") cfg.similarity = Similarity::Cosine;
            else throw ConfigError("--similarity must be euclidean or cosine");

            CsvLayout layout;
            const MaskedDataset ds = load_csv(in_path, schema_from_flags(impute_csv), &layout);
            const ImputationResult result = impute(ds, cfg);
            write_instances_csv(out_path, result.filled, layout);

            std::cerr << "imputed " << ds.missing_count() << " cell(s) in " << result.iterations
                      << " iteration(s), converged=" << (result.converged ? "yes" : "no") << "\n";
            for (const auto& [key, msg] : result.diagnostics)
                std::cerr << "diagnostic: " << key << ": " << msg << "\n";
            return 0;
        }

        if (cluster_cmd->parsed()) {
            CsvLayout layout;
            const MaskedDataset ds = load_csv(cl_in, schema_from_flags(cluster_csv), &layout);
            if (!ds.is_complete() && !allow_missing)
                throw IngestError("input has missing cells; impute first or pass --allow-missing");

            Partition part;
            if (cl_method == "kmeans") part = kmeans(ds.values, cl_clusters, cl_seed);
            else if (cl_method == "sec") part = sec_cluster(ds.values, cl_clusters, cl_gamma, cl_seed);
            else throw ConfigError("--method must be kmeans or sec");

            std::ofstream out(cl_out);
            if (!out) throw IoError("cannot write " + cl_out);
            for (int label : part.labels) out << label << '\n';

            std::cerr << "inertia " << part.inertia << " after " << part.inertia_trace.size()
                      << " iteration(s)\n";
            if (ds.labels) {
                std::cerr << "vs labels: nmi " << nmi(*ds.labels, part.labels) << ", f "
                          << pairwise_f(*ds.labels, part.labels) << ", ri "
                          << rand_index(*ds.labels, part.labels) << "\n";
            }
            return 0;
        }

        if (bench_cmd->parsed()) {
            ExperimentConfig cfg = parse_config_file(bench_config);
            if (!bench_out_flag.empty()) cfg.output_dir = bench_out_flag;
            if (bench_seed_flag) cfg.seed = *bench_seed_flag;
            const ExperimentReport report = run_experiment(cfg);
            return report_epilogue(report, cfg.output_dir);
        }

        if (sweep_cmd->parsed()) {
            ExperimentConfig cfg = parse_config_file(sweep_config);
            if (!sweep_out_flag.empty()) cfg.output_dir = sweep_out_flag;
            if (sweep_seed_flag) cfg.seed = *sweep_seed_flag;
            std::vector<double> fractions = cfg.fractions;
            if (!sweep_fractions_flag.empty()) {
                fractions.clear();
                std::stringstream ss(sweep_fractions_flag);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    try {
                        fractions.push_back(std::stod(item));
                    } catch (...) {
                        throw ConfigError("--fractions: cannot parse '" + item + "'");
                    }
                }
            }
            const ExperimentReport report = sweep_missing(cfg, fractions);
            return report_epilogue(report, cfg.output_dir);
        }

        if (synth_cmd->parsed()) {
            const MaskedDataset ds = gen_synthetic(synth_spec);
            CsvLayout layout;
            layout.label_column = static_cast<int>(ds.dims());  // label appended last
            layout.labels = *ds.labels;
            write_instances_csv(synth_out, ds.values, layout);
            std::cerr << "wrote " << ds.size() << " instances (" << ds.dims() << " features, "
                      << synth_spec.clusters << " clusters) to " << synth_out << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
