#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "clustfill/harness.hpp"

namespace clustfill {

namespace {

std::string fmt(double v, const char* spec = "%.12g") {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, spec, v);
    return buffer;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("report: cannot write " + path.string());
    return out;
}

void write_rows_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "method,repeat,fraction,nmi,f,ri,rmse,seconds\n";
    for (const auto& row : report.rows) {
        out << row.method << ',' << row.repeat << ',' << fmt(row.fraction) << ',';
        if (row.failed) {
            out << ",,,,";
        } else {
            out << fmt(row.record.nmi) << ',' << fmt(row.record.f_score) << ','
                << fmt(row.record.rand_index) << ',';
            if (row.record.rmse_missing) out << fmt(*row.record.rmse_missing);
            out << ',' << fmt(row.record.runtime_seconds);
        }
        out << '\n';
    }
    if (!out) throw IoError("report: failed writing " + path.string());
}

void write_aggregates_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "method,fraction,count,nmi_mean,nmi_std,f_mean,f_std,ri_mean,ri_std,"
           "rmse_mean,rmse_std,seconds_mean,seconds_std\n";
    for (const auto& agg : report.aggregates) {
        out << agg.method << ',' << fmt(agg.fraction) << ',' << agg.count << ',';
        if (agg.count == 0) {
            out << ",,,,,,,,,\n";
            continue;
        }
        out << fmt(agg.mean.nmi) << ',' << fmt(agg.stddev.nmi) << ',' << fmt(agg.mean.f_score)
            << ',' << fmt(agg.stddev.f_score) << ',' << fmt(agg.mean.rand_index) << ','
            << fmt(agg.stddev.rand_index) << ',';
        if (agg.mean.rmse_missing) out << fmt(*agg.mean.rmse_missing);
        out << ',';
        if (agg.stddev.rmse_missing) out << fmt(*agg.stddev.rmse_missing);
        out << ',' << fmt(agg.mean.runtime_seconds) << ',' << fmt(agg.stddev.runtime_seconds)
            << '\n';
    }
    if (!out) throw IoError("report: failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// SVG line charts
// ---------------------------------------------------------------------------

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;  // x, y
};

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 630.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 550.0;

const char* const kPalette[8] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) { return fmt(v, "%.6g"); }

void render_chart(const std::filesystem::path& path, const std::string& title,
                  const std::string& x_label, const std::vector<Series>& series,
                  const std::vector<std::pair<double, std::string>>& x_ticks) {
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();
    double xmin = ymin, xmax = ymax;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
    }
    if (!std::isfinite(ymin)) {
        ymin = 0.0;
        ymax = 1.0;
        xmin = 0.0;
        xmax = 1.0;
    }
    if (ymin == ymax) {
        const double pad = std::max(0.5, std::abs(ymin) * 0.1);
        ymin -= pad;
        ymax += pad;
    } else {
        const double pad = (ymax - ymin) * 0.05;
        ymin -= pad;
        ymax += pad;
    }
    if (xmin == xmax) {
        xmin -= 0.5;
        xmax += 0.5;
    }

    const auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * (kRight - kLeft); };
    const auto sy = [&](double y) { return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop); };

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    out << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    out << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"28\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"18\">" << title << "</text>\n";

    // axes
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(kRight)
        << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
        << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"590\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"13\">" << x_label << "</text>\n";

    for (const auto& [x, label] : x_ticks) {
        const double px = sx(x);
        out << "<line x1=\"" << num(px) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(px)
            << "\" y2=\"" << num(kBottom + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(px) << "\" y=\"" << num(kBottom + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label
            << "</text>\n";
    }
    for (int t = 0; t <= 5; ++t) {
        const double y = ymin + (ymax - ymin) * t / 5.0;
        const double py = sy(y);
        out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft)
            << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kRight)
            << "\" y2=\"" << num(py) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << num(y) << "</text>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].points.empty()) continue;
        const char* color = kPalette[s % 8];
        if (series[s].points.size() == 1) {
            const auto& [x, y] = series[s].points.front();
            out << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y))
                << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (const auto& [x, y] : series[s].points) out << num(sx(x)) << ',' << num(sy(y)) << ' ';
            out << "\"/>\n";
        }
        for (const auto& [x, y] : series[s].points)
            out << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
    }

    // legend
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
        out << "<line x1=\"650\" y1=\"" << num(ly) << "\" x2=\"680\" y2=\"" << num(ly)
            << "\" stroke=\"" << kPalette[s % 8] << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"686\" y=\"" << num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("report: failed writing " + path.string());
}

void write_metric_chart(const ExperimentReport& report, const std::filesystem::path& path,
                        const std::string& metric_name,
                        double (*select)(const MetricsRecord&)) {
    std::set<double> fraction_set;
    for (const auto& agg : report.aggregates) fraction_set.insert(agg.fraction);

    std::vector<Series> series;
    std::vector<std::pair<double, std::string>> ticks;

    if (fraction_set.size() >= 2) {
        // one polyline per method across the masking sweep
        for (const auto& method : report.method_order) {
            Series s;
            s.name = method;
            for (const auto& agg : report.aggregates)
                if (agg.method == method && agg.count > 0)
                    s.points.emplace_back(agg.fraction, select(agg.mean));
            std::sort(s.points.begin(), s.points.end());
            series.push_back(std::move(s));
        }
        for (double f : fraction_set) ticks.emplace_back(f, fmt(f, "%.4g"));
        render_chart(path, metric_name, "missing fraction", series, ticks);
    } else {
        // single fraction: the metric across the method roster
        Series s;
        s.name = metric_name;
        for (std::size_t i = 0; i < report.method_order.size(); ++i) {
            for (const auto& agg : report.aggregates)
                if (agg.method == report.method_order[i] && agg.count > 0)
                    s.points.emplace_back(static_cast<double>(i), select(agg.mean));
            ticks.emplace_back(static_cast<double>(i), report.method_order[i]);
        }
        series.push_back(std::move(s));
        render_chart(path, metric_name, "method", series, ticks);
    }
}

}  // namespace

void write_report(const ExperimentReport& report, const std::filesystem::path& output_dir) {
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) throw IoError("report: cannot create directory " + output_dir.string());

    write_rows_csv(report, output_dir / "rows.csv");
    write_aggregates_csv(report, output_dir / "aggregates.csv");
    write_metric_chart(report, output_dir / "nmi.svg", "nmi",
                       [](const MetricsRecord& r) { return r.nmi; });
    write_metric_chart(report, output_dir / "f.svg", "f",
                       [](const MetricsRecord& r) { return r.f_score; });
    write_metric_chart(report, output_dir / "ri.svg", "ri",
                       [](const MetricsRecord& r) { return r.rand_index; });
    write_metric_chart(report, output_dir / "seconds.svg", "seconds",
                       [](const MetricsRecord& r) { return r.runtime_seconds; });
}

}  // namespace clustfill
