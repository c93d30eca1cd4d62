#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "clustfill/harness.hpp"
#include "clustfill/rng.hpp"

namespace clustfill {

std::vector<std::string> default_method_roster() {
    return {"baseline", "nnc", "pcc", "sec", "ivpc1", "ivpc2", "bac1", "bac2"};
}

MethodSpec method_from_name(const std::string& name, const ExperimentConfig& cfg) {
    ImputerConfig base;
    base.max_iter = cfg.max_iter;
    base.tol = cfg.tol;
    base.k_neighbors = cfg.k_neighbors;
    base.nn_samples = cfg.nn_samples;
    base.rank = cfg.rank;
    base.sample_cap = cfg.sample_cap;
    base.similarity = cfg.similarity;

    const auto with = [&](ImputeMethod m) {
        ImputerConfig c = base;
        c.method = m;
        if (m == ImputeMethod::BayesAlign) c.recycle_partitions = cfg.recycle;
        return c;
    };

    if (name == "baseline") return {name, std::nullopt, ClusterBackend::KMeans};
    if (name == "sec") return {name, std::nullopt, ClusterBackend::SelfExpressive};
    if (name == "nnc") return {name, with(ImputeMethod::NearestNeighbor), ClusterBackend::KMeans};
    if (name == "pcc") return {name, with(ImputeMethod::PrincipalComponent), ClusterBackend::KMeans};
    if (name == "ivpc1") return {name, with(ImputeMethod::InfoVolume), ClusterBackend::SelfExpressive};
    if (name == "ivpc2") return {name, with(ImputeMethod::InfoVolume), ClusterBackend::KMeans};
    if (name == "bac1") return {name, with(ImputeMethod::BayesAlign), ClusterBackend::SelfExpressive};
    if (name == "bac2") return {name, with(ImputeMethod::BayesAlign), ClusterBackend::KMeans};
    throw ConfigError("unknown method '" + name + "'");
}

namespace {

Partition cluster_with(ClusterBackend backend, const Eigen::MatrixXd& data, int clusters,
                       double gamma, std::uint64_t seed) {
    return backend == ClusterBackend::KMeans ? kmeans(data, clusters, seed)
                                             : sec_cluster(data, clusters, gamma, seed);
}

MaskedDataset load_base_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset.kind == DatasetSource::Kind::Csv)
        return load_csv(cfg.dataset.csv_path, cfg.dataset.schema);
    SyntheticSpec spec = cfg.dataset.synthetic;
    spec.seed = seed_mix(cfg.seed, 0xDA7AULL);
    return gen_synthetic(spec);
}

int resolve_clusters(const ExperimentConfig& cfg) {
    if (cfg.clusters >= 1) return cfg.clusters;
    if (cfg.dataset.kind == DatasetSource::Kind::Synthetic) return cfg.dataset.synthetic.clusters;
    throw ConfigError("experiment: 'clusters' is required for csv datasets");
}

void check_experiment(const ExperimentConfig& cfg) {
    if (cfg.repeats < 1) throw ConfigError("experiment: repeats must be at least 1");
    if (cfg.missing_fraction < 0.0 || cfg.missing_fraction >= 1.0)
        throw ConfigError("experiment: missing_fraction must be in [0, 1)");
    for (double f : cfg.fractions)
        if (f < 0.0 || f >= 1.0) throw ConfigError("experiment: sweep fractions must be in [0, 1)");
    if (!(cfg.gamma > 0.0)) throw ConfigError("experiment: gamma must be positive");
}

// One fraction's worth of rows. fraction_index tags the sub-seeds so sweep
// points are independently masked.
void run_fraction(const ExperimentConfig& cfg, const MaskedDataset& base,
                  const std::vector<MethodSpec>& methods, int clusters, double fraction,
                  int fraction_index, ExperimentReport& report) {
    using clock = std::chrono::steady_clock;

    for (int rep = 0; rep < cfg.repeats; ++rep) {
        const std::uint64_t rep_seed =
            seed_mix(cfg.seed, static_cast<std::uint64_t>(fraction_index),
                     static_cast<std::uint64_t>(rep));
        std::vector<std::string> mask_notes;
        const MaskedDataset masked =
            apply_mcar(base, fraction, seed_mix(rep_seed, 0xA5ULL), &mask_notes);
        for (auto& note : mask_notes) {
            std::ostringstream tagged;
            tagged << "repeat " << rep << ", fraction " << fraction << ": " << note;
            report.notes.push_back(tagged.str());
        }
        const bool has_missing = masked.missing_count() > 0;
        const std::uint64_t impute_seed = seed_mix(rep_seed, 0x1ULL);
        const std::uint64_t cluster_seed = seed_mix(rep_seed, 0x2ULL);
        const std::uint64_t recycle_seed = seed_mix(rep_seed, 0x3ULL);

        for (const auto& method : methods) {
            ReportRow row;
            row.method = method.name;
            row.repeat = rep;
            row.fraction = fraction;
            const auto started = clock::now();
            try {
                Eigen::MatrixXd filled;
                Partition part;
                if (method.imputer) {
                    ImputerConfig icfg = *method.imputer;
                    icfg.seed = impute_seed;
                    ImputationResult res = impute(masked, icfg);
                    if (icfg.method == ImputeMethod::BayesAlign && icfg.recycle_partitions) {
                        // extra cycle: refit per-cluster parameters from the first partition
                        const Partition first =
                            cluster_with(method.backend, res.filled, clusters, cfg.gamma, cluster_seed);
                        res = impute_bayes_align(masked, icfg, &first);
                        filled = std::move(res.filled);
                        part = cluster_with(method.backend, filled, clusters, cfg.gamma, recycle_seed);
                    } else {
                        filled = std::move(res.filled);
                        part = cluster_with(method.backend, filled, clusters, cfg.gamma, cluster_seed);
                    }
                } else {
                    filled = masked.values;  // zero placeholders stay in place
                    part = cluster_with(method.backend, filled, clusters, cfg.gamma, cluster_seed);
                }
                const auto finished = clock::now();

                row.record.nmi = nmi(*base.labels, part.labels);
                row.record.f_score = pairwise_f(*base.labels, part.labels);
                row.record.rand_index = rand_index(*base.labels, part.labels);
                if (has_missing)
                    row.record.rmse_missing = rmse_missing(*masked.truth, filled, masked.mask);
                row.record.runtime_seconds =
                    cfg.wall_timing ? std::chrono::duration<double>(finished - started).count() : 0.0;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
            report.rows.push_back(std::move(row));
        }
    }
}

ExperimentReport run_prepared(const ExperimentConfig& cfg, const std::vector<double>& fractions) {
    check_experiment(cfg);

    ExperimentReport report;
    const std::vector<std::string> names =
        cfg.methods.empty() ? default_method_roster() : cfg.methods;
    std::vector<MethodSpec> methods;
    methods.reserve(names.size());
    for (const auto& name : names) methods.push_back(method_from_name(name, cfg));
    report.method_order = names;

    if (fractions.empty()) {
        report.aggregates = aggregate_rows(report.rows, report.method_order);
        return report;
    }

    const MaskedDataset base = load_base_dataset(cfg);
    if (!base.labels)
        throw ConfigError("experiment: dataset has no ground-truth labels to score against");
    if (!base.is_complete())
        throw ConfigError("experiment: dataset must be fully observed before masking");
    const int clusters = resolve_clusters(cfg);

    for (std::size_t fi = 0; fi < fractions.size(); ++fi)
        run_fraction(cfg, base, methods, clusters, fractions[fi], static_cast<int>(fi), report);

    // stable (method, repeat, fraction) order, methods in roster order
    std::map<std::string, int> method_rank;
    for (std::size_t i = 0; i < names.size(); ++i) method_rank[names[i]] = static_cast<int>(i);
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [&](const ReportRow& a, const ReportRow& b) {
                         const int ra = method_rank[a.method];
                         const int rb = method_rank[b.method];
                         if (ra != rb) return ra < rb;
                         if (a.repeat != b.repeat) return a.repeat < b.repeat;
                         return a.fraction < b.fraction;
                     });

    report.aggregates = aggregate_rows(report.rows, report.method_order);
    return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    return run_prepared(cfg, {cfg.missing_fraction});
}

ExperimentReport sweep_missing(const ExperimentConfig& cfg, const std::vector<double>& fractions) {
    return run_prepared(cfg, fractions);
}

std::vector<Aggregate> aggregate_rows(const std::vector<ReportRow>& rows,
                                      const std::vector<std::string>& method_order) {
    std::map<std::string, int> method_rank;
    for (std::size_t i = 0; i < method_order.size(); ++i)
        method_rank[method_order[i]] = static_cast<int>(i);

    // key: (method rank, fraction)
    std::map<std::pair<int, double>, std::vector<const ReportRow*>> groups;
    for (const auto& row : rows) {
        const auto it = method_rank.find(row.method);
        const int rank = it != method_rank.end() ? it->second : static_cast<int>(method_order.size());
        groups[{rank, row.fraction}].push_back(&row);
    }

    std::vector<Aggregate> aggregates;
    for (const auto& [key, members] : groups) {
        Aggregate agg;
        agg.method = members.front()->method;
        agg.fraction = key.second;

        std::vector<const MetricsRecord*> ok;
        for (const ReportRow* row : members)
            if (!row->failed) ok.push_back(&row->record);
        agg.count = static_cast<int>(ok.size());
        if (agg.count == 0) {
            aggregates.push_back(std::move(agg));
            continue;
        }

        const auto mean_of = [&](auto select) {
            double acc = 0.0;
            for (const auto* r : ok) acc += select(*r);
            return acc / static_cast<double>(ok.size());
        };
        const auto std_of = [&](auto select, double mean) {
            if (ok.size() < 2) return 0.0;
            double acc = 0.0;
            for (const auto* r : ok) {
                const double dev = select(*r) - mean;
                acc += dev * dev;
            }
            return std::sqrt(acc / static_cast<double>(ok.size() - 1));
        };

        agg.mean.nmi = mean_of([](const MetricsRecord& r) { return r.nmi; });
        agg.stddev.nmi = std_of([](const MetricsRecord& r) { return r.nmi; }, agg.mean.nmi);
        agg.mean.f_score = mean_of([](const MetricsRecord& r) { return r.f_score; });
        agg.stddev.f_score = std_of([](const MetricsRecord& r) { return r.f_score; }, agg.mean.f_score);
        agg.mean.rand_index = mean_of([](const MetricsRecord& r) { return r.rand_index; });
        agg.stddev.rand_index =
            std_of([](const MetricsRecord& r) { return r.rand_index; }, agg.mean.rand_index);
        agg.mean.runtime_seconds = mean_of([](const MetricsRecord& r) { return r.runtime_seconds; });
        agg.stddev.runtime_seconds =
            std_of([](const MetricsRecord& r) { return r.runtime_seconds; }, agg.mean.runtime_seconds);

        std::vector<double> rmse;
        for (const auto* r : ok)
            if (r->rmse_missing) rmse.push_back(*r->rmse_missing);
        if (!rmse.empty()) {
            double acc = 0.0;
            for (double v : rmse) acc += v;
            const double mean = acc / static_cast<double>(rmse.size());
            agg.mean.rmse_missing = mean;
            double var = 0.0;
            for (double v : rmse) var += (v - mean) * (v - mean);
            agg.stddev.rmse_missing =
                rmse.size() < 2 ? 0.0 : std::sqrt(var / static_cast<double>(rmse.size() - 1));
        }
        aggregates.push_back(std::move(agg));
    }
    return aggregates;
}

// ---------------------------------------------------------------------------
// config file parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_fail(std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << "config: line " << line << ": " << what;
    throw ConfigError(msg.str());
}

std::string trim_copy(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, std::size_t line) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) config_fail(line, "expected a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& v, std::size_t line) {
    long long out = 0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) config_fail(line, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    config_fail(line, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim_copy(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());

    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim_copy(line);
        if (text.empty() || text.front() == '#') continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) config_fail(line_no, "expected 'key = value'");
        const std::string key = trim_copy(text.substr(0, eq));
        const std::string value = trim_copy(text.substr(eq + 1));
        if (key.empty()) config_fail(line_no, "empty key");

        if (key == "dataset") {
            if (value == "synthetic") cfg.dataset.kind = DatasetSource::Kind::Synthetic;
            else if (value == "csv") cfg.dataset.kind = DatasetSource::Kind::Csv;
            else config_fail(line_no, "dataset must be 'synthetic' or 'csv'");
        } else if (key == "csv_path") {
            cfg.dataset.csv_path = value;
        } else if (key == "csv_has_header") {
            cfg.dataset.schema.has_header = to_bool(value, line_no);
        } else if (key == "csv_label_column") {
            if (value == "none") cfg.dataset.schema.label_column.reset();
            else if (value == "last") cfg.dataset.schema.label_column = -1;
            else cfg.dataset.schema.label_column = static_cast<int>(to_int(value, line_no));
        } else if (key == "csv_zeros_as_missing") {
            cfg.dataset.schema.zeros_as_missing = to_bool(value, line_no);
        } else if (key == "synth_clusters") {
            cfg.dataset.synthetic.clusters = static_cast<int>(to_int(value, line_no));
        } else if (key == "synth_dims") {
            cfg.dataset.synthetic.dims = static_cast<int>(to_int(value, line_no));
        } else if (key == "synth_per_cluster") {
            cfg.dataset.synthetic.per_cluster = static_cast<int>(to_int(value, line_no));
        } else if (key == "synth_separation") {
            cfg.dataset.synthetic.separation = to_double(value, line_no);
        } else if (key == "clusters") {
            cfg.clusters = static_cast<int>(to_int(value, line_no));
        } else if (key == "methods") {
            cfg.methods = split_list(value);
            if (cfg.methods.empty()) config_fail(line_no, "methods list is empty");
        } else if (key == "repeats") {
            cfg.repeats = static_cast<int>(to_int(value, line_no));
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(to_int(value, line_no));
        } else if (key == "missing_fraction") {
            cfg.missing_fraction = to_double(value, line_no);
        } else if (key == "fractions") {
            cfg.fractions.clear();
            for (const auto& item : split_list(value)) cfg.fractions.push_back(to_double(item, line_no));
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "gamma") {
            cfg.gamma = to_double(value, line_no);
        } else if (key == "k_neighbors") {
            cfg.k_neighbors = static_cast<int>(to_int(value, line_no));
        } else if (key == "nn_samples") {
            cfg.nn_samples = static_cast<int>(to_int(value, line_no));
        } else if (key == "rank") {
            if (value == "auto") cfg.rank.reset();
            else cfg.rank = static_cast<int>(to_int(value, line_no));
        } else if (key == "max_iter") {
            cfg.max_iter = static_cast<int>(to_int(value, line_no));
        } else if (key == "tol") {
            cfg.tol = to_double(value, line_no);
        } else if (key == "sample_cap") {
            if (value == "auto") cfg.sample_cap.reset();
            else cfg.sample_cap = static_cast<int>(to_int(value, line_no));
        } else if (key == "recycle") {
            cfg.recycle = to_bool(value, line_no);
        } else if (key == "similarity") {
            if (value == "euclidean") cfg.similarity = Similarity::Euclidean;
            else if (value == "cosine") cfg.similarity = Similarity::Cosine;
            else config_fail(line_no, "similarity must be 'euclidean' or 'cosine'");
        } else if (key == "timing") {
            if (value == "wall") cfg.wall_timing = true;
            else if (value == "off") cfg.wall_timing = false;
            else config_fail(line_no, "timing must be 'wall' or 'off'");
        } else {
            config_fail(line_no, "unknown key '" + key + "'");
        }
    }
    return cfg;
}

}  // namespace clustfill
