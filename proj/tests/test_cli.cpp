#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "clustfill/harness.hpp"
#include "test_support.hpp"

using namespace clustfill;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + CLUSTFILL_CLI_BIN + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("clustfill_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& content) {
    const fs::path path = dir / name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kMiniConfig =
    "dataset = synthetic\n"
    "synth_clusters = 2\n"
    "synth_dims = 4\n"
    "synth_per_cluster = 8\n"
    "synth_separation = 6\n"
    "missing_fraction = 0.3\n"
    "methods = baseline, bac2\n"
    "repeats = 2\n"
    "seed = 5\n"
    "timing = off\n";

}  // namespace

TEST_CASE("help exits 0 on every subcommand") {
    CHECK(run_cli("--help") == 0);
    for (const char* sub : {"impute", "cluster", "bench", "sweep", "synth"})
        CHECK(run_cli(std::string(sub) + " --help") == 0);
}

TEST_CASE("unknown flags and missing subcommands are usage errors") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("--bogus") == 2);
    const auto dir = scratch_dir("usage");
    const auto csv = write_file(dir, "in.csv", "1,2\n3,4\n5,6\n7,8\n");
    CHECK(run_cli("impute " + csv.string() + " --out " + (dir / "o.csv").string() + " --bogus") == 2);
}

TEST_CASE("impute fills a csv and preserves complete input") {
    const auto dir = scratch_dir("impute");
    const auto incomplete = write_file(dir, "in.csv", "1,2\n,4\n5,6\n7,\n");
    const auto out = dir / "filled.csv";
    CHECK(run_cli("impute " + incomplete.string() + " --out " + out.string() +
                  " --method mean --seed 7") == 0);
    const MaskedDataset filled = load_csv(out);
    CHECK(filled.is_complete());
    CHECK(filled.values(0, 0) == 1.0);
    CHECK(filled.values(0, 1) == doctest::Approx((1.0 + 5 + 7) / 3));  // feature mean

    const auto complete = write_file(dir, "full.csv", "1,2\n3,4\n5,6\n7,8\n");
    const auto out2 = dir / "full_out.csv";
    CHECK(run_cli("impute " + complete.string() + " --out " + out2.string() + " --method bayes") == 0);
    CHECK(testsupport::bit_equal(load_csv(out2).values, load_csv(complete).values));
}

TEST_CASE("impute rejects a non-positive rank before reading anything") {
    const auto dir = scratch_dir("rank");
    const auto csv = write_file(dir, "in.csv", "1,2\n3,4\n");
    CHECK(run_cli("impute " + csv.string() + " --out " + (dir / "o.csv").string() +
                  " --method pc --rank 0") == 2);
}

TEST_CASE("cluster writes one label per instance") {
    const auto dir = scratch_dir("cluster");
    CHECK(run_cli("synth --out " + (dir / "data.csv").string() +
                  " --clusters 2 --dims 3 --per-cluster 10 --separation 8 --seed 3") == 0);
    const auto labels_path = dir / "labels.csv";
    CHECK(run_cli("cluster " + (dir / "data.csv").string() + " --out " + labels_path.string() +
                  " --method kmeans --clusters 2 --seed 4 --label-column last") == 0);
    std::ifstream in(labels_path);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 20);

    // incomplete input is refused unless explicitly allowed
    const auto gaps = write_file(dir, "gaps.csv", "1,\n2,3\n4,5\n");
    CHECK(run_cli("cluster " + gaps.string() + " --out " + (dir / "l2.csv").string() +
                  " --clusters 2") == 1);
    CHECK(run_cli("cluster " + gaps.string() + " --out " + (dir / "l2.csv").string() +
                  " --clusters 2 --allow-missing") == 0);
}

TEST_CASE("bench runs a config and is byte-deterministic with timing off") {
    const auto dir = scratch_dir("bench");
    const auto config = write_file(dir, "bench.cfg", kMiniConfig);
    const auto out_a = dir / "a";
    const auto out_b = dir / "b";
    CHECK(run_cli("bench " + config.string() + " --out " + out_a.string()) == 0);
    CHECK(run_cli("bench " + config.string() + " --out " + out_b.string()) == 0);

    const std::string rows = slurp(out_a / "rows.csv");
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 5);  // header + 2x2 rows
    CHECK(rows == slurp(out_b / "rows.csv"));
    CHECK(slurp(out_a / "aggregates.csv") == slurp(out_b / "aggregates.csv"));
    CHECK(slurp(out_a / "nmi.svg") == slurp(out_b / "nmi.svg"));
    CHECK(slurp(out_a / "seconds.svg") == slurp(out_b / "seconds.svg"));

    // a different seed changes the report
    const auto out_c = dir / "c";
    CHECK(run_cli("bench " + config.string() + " --out " + out_c.string() + " --seed 99") == 0);
    CHECK(rows != slurp(out_c / "rows.csv"));
}

TEST_CASE("bench rejects bad configs with exit 2") {
    const auto dir = scratch_dir("badcfg");
    CHECK(run_cli("bench " + (dir / "missing.cfg").string()) == 2);
    const auto bad = write_file(dir, "bad.cfg", "dataset = synthetic\nwhat = 1\n");
    CHECK(run_cli("bench " + bad.string()) == 2);
}

TEST_CASE("sweep emits fraction polylines") {
    const auto dir = scratch_dir("sweep");
    const auto config = write_file(dir, "sweep.cfg", kMiniConfig + "fractions = 0.1, 0.3, 0.5\n");
    const auto out = dir / "report";
    CHECK(run_cli("sweep " + config.string() + " --out " + out.string()) == 0);

    const std::string rows = slurp(out / "rows.csv");
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 1 + 2 * 2 * 3);

    const std::string svg = slurp(out / "f.svg");
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    CHECK(polylines == 2);
}

TEST_CASE("synth output is reproducible per seed") {
    const auto dir = scratch_dir("synth");
    CHECK(run_cli("synth --out " + (dir / "a.csv").string() +
                  " --clusters 3 --dims 5 --per-cluster 4 --seed 11") == 0);
    CHECK(run_cli("synth --out " + (dir / "b.csv").string() +
                  " --clusters 3 --dims 5 --per-cluster 4 --seed 11") == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    const std::string data = slurp(dir / "a.csv");
    CHECK(std::count(data.begin(), data.end(), '\n') == 12);
}
