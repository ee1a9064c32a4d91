#include "agentlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "agentlab/errors.hpp"

namespace agentlab {

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

const std::array<const char*, 6> kPalette = {"#4878a8", "#e1812c", "#3a923a",
                                             "#c03d3e", "#9372b2", "#7f7f7f"};

// Maps data coordinates into one pixel-space plot rectangle.
struct Axes {
  double px, py, pw, ph;      // pixel rect (y grows downward)
  double x0, x1, y0, y1;      // data range

  double X(double x) const { return px + (x - x0) / (x1 - x0) * pw; }
  double Y(double y) const { return py + ph - (y - y0) / (y1 - y0) * ph; }
};

class Svg {
 public:
  Svg(int width, int height) : w_(width), h_(height) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\""
          << h_ << "\" viewBox=\"0 0 " << w_ << ' ' << h_ << "\">\n"
          << "<rect width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0, const std::string& dash = "") {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
          << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(width, "%.1f") << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width = 1.5, const std::string& dash = "") {
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(width, "%.1f") << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << " points=\"";
    for (const auto& [x, y] : pts) body_ << fmt(x) << ',' << fmt(y) << ' ';
    body_ << "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill,
               double opacity) {
    body_ << "<polygon fill=\"" << fill << "\" fill-opacity=\"" << fmt(opacity, "%.2f")
          << "\" stroke=\"none\" points=\"";
    for (const auto& [x, y] : pts) body_ << fmt(x) << ',' << fmt(y) << ' ';
    body_ << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0) {
    body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
          << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\" fill-opacity=\""
          << fmt(opacity, "%.2f") << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill,
              const std::string& title = "") {
    body_ << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\""
          << fmt(r, "%.1f") << "\" fill=\"" << fill << "\" fill-opacity=\"0.8\">";
    if (!title.empty()) body_ << "<title>" << title << "</title>";
    body_ << "</circle>\n";
  }

  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start", const std::string& fill = "#333333") {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\""
          << " font-size=\"" << size << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill
          << "\">" << s << "</text>\n";
  }

  std::string finish() {
    body_ << "</svg>\n";
    return body_.str();
  }

 private:
  int w_, h_;
  std::ostringstream body_;
};

// Round axis limits outward to a tidy step so tick labels stay short.
std::pair<double, double> padded_range(double lo, double hi) {
  if (lo > hi) std::swap(lo, hi);
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = (hi - lo) * 0.08;
  return {lo - pad, hi + pad};
}

void draw_axes(Svg& svg, const Axes& ax, const std::string& xlabel,
               const std::string& ylabel, int n_ticks = 5) {
  svg.line(ax.px, ax.py + ax.ph, ax.px + ax.pw, ax.py + ax.ph, "#555555");
  svg.line(ax.px, ax.py, ax.px, ax.py + ax.ph, "#555555");
  for (int i = 0; i <= n_ticks; ++i) {
    const double xv = ax.x0 + (ax.x1 - ax.x0) * i / n_ticks;
    const double yv = ax.y0 + (ax.y1 - ax.y0) * i / n_ticks;
    svg.line(ax.X(xv), ax.py + ax.ph, ax.X(xv), ax.py + ax.ph + 4, "#555555");
    svg.text(ax.X(xv), ax.py + ax.ph + 16, fmt(xv, "%.0f"), 10, "middle");
    svg.line(ax.px - 4, ax.Y(yv), ax.px, ax.Y(yv), "#555555");
    svg.text(ax.px - 6, ax.Y(yv) + 3, fmt(yv, "%.1f"), 10, "end");
    svg.line(ax.px, ax.Y(yv), ax.px + ax.pw, ax.Y(yv), "#eeeeee");
  }
  svg.text(ax.px + ax.pw / 2, ax.py + ax.ph + 32, xlabel, 11, "middle");
  svg.text(ax.px - 40, ax.py - 8, ylabel, 11, "start");
}

void draw_series_with_band(Svg& svg, const Axes& ax, const std::vector<double>& mean,
                           const std::vector<double>& sd, const std::string& color,
                           const std::string& dash = "") {
  std::vector<std::pair<double, double>> line;
  std::vector<std::pair<double, double>> band;
  for (std::size_t x = 0; x < mean.size(); ++x)
    line.emplace_back(ax.X(static_cast<double>(x)), ax.Y(mean[x]));
  for (std::size_t x = 0; x < mean.size(); ++x)
    band.emplace_back(ax.X(static_cast<double>(x)), ax.Y(mean[x] + sd[x]));
  for (std::size_t x = mean.size(); x-- > 0;)
    band.emplace_back(ax.X(static_cast<double>(x)), ax.Y(mean[x] - sd[x]));
  svg.polygon(band, color, 0.15);
  svg.polyline(line, color, 1.8, dash);
}

std::pair<double, double> band_extent(const std::vector<double>& mean,
                                      const std::vector<double>& sd) {
  double lo = mean.front() - sd.front();
  double hi = mean.front() + sd.front();
  for (std::size_t i = 0; i < mean.size(); ++i) {
    lo = std::min(lo, mean[i] - sd[i]);
    hi = std::max(hi, mean[i] + sd[i]);
  }
  return {lo, hi};
}

}  // namespace

RunSeries series_from_run(const LoadedRun& run) {
  if (run.records.empty())
    throw IoError("run '" + run.manifest.run_id + "' has no records to plot");
  const BatteryConfig& cfg = run.manifest.spec.cfg;
  const int T = cfg.horizon_days;

  // Rebuild per-repetition trajectories; x = number of completed days.
  std::map<int, std::vector<const DayRecord*>> by_rep;
  for (const DayRecord& r : run.records) by_rep[r.repetition].push_back(&r);

  const auto n_x = static_cast<std::size_t>(T) + 1;
  std::vector<std::vector<double>> soc_rows;
  std::vector<std::vector<double>> cum_rows;
  RunSeries s;
  for (auto& [rep, recs] : by_rep) {
    (void)rep;
    std::sort(recs.begin(), recs.end(),
              [](const DayRecord* a, const DayRecord* b) { return a->day < b->day; });
    if (recs.size() != static_cast<std::size_t>(T))
      throw SchemaViolation("repetition with " + std::to_string(recs.size()) +
                            " records, expected " + std::to_string(T));
    std::vector<double> soc(n_x, 0.0);
    std::vector<double> cum(n_x, 0.0);
    soc[0] = recs.front()->soc_before_kwh;
    for (int d = 1; d <= T; ++d) {
      soc[static_cast<std::size_t>(d)] = recs[static_cast<std::size_t>(d - 1)]->soc_after_kwh;
      cum[static_cast<std::size_t>(d)] =
          static_cast<double>(recs[static_cast<std::size_t>(d - 1)]->cum_reward_cents);
    }
    soc_rows.push_back(std::move(soc));
    cum_rows.push_back(std::move(cum));
  }

  s.run_id = run.manifest.run_id;
  s.who = run.records.front().persona;
  s.horizon_days = T;
  s.reps = static_cast<int>(soc_rows.size());
  s.blackout_arm = !run.manifest.spec.intervention.blackout_days.empty();
  s.level_kwh = static_cast<double>(cfg.unit_wh) / 1000.0;

  const auto reduce = [&](const std::vector<std::vector<double>>& rows,
                          std::vector<double>& mean, std::vector<double>& sd) {
    mean.assign(n_x, 0.0);
    sd.assign(n_x, 0.0);
    for (const auto& row : rows)
      for (std::size_t x = 0; x < n_x; ++x) mean[x] += row[x];
    for (double& v : mean) v /= static_cast<double>(rows.size());
    if (rows.size() > 1) {
      for (const auto& row : rows)
        for (std::size_t x = 0; x < n_x; ++x) {
          const double d = row[x] - mean[x];
          sd[x] += d * d;
        }
      for (double& v : sd) v = std::sqrt(v / static_cast<double>(rows.size() - 1));
    }
  };
  reduce(soc_rows, s.mean_soc_kwh, s.sd_soc_kwh);
  reduce(cum_rows, s.mean_cum_reward_cents, s.sd_cum_reward_cents);

  s.terminal_soc_histogram.assign(static_cast<std::size_t>(cfg.levels()), 0);
  for (const auto& row : soc_rows) {
    const auto wh = static_cast<WattHours>(std::llround(row.back() * 1000.0));
    s.terminal_soc_histogram[static_cast<std::size_t>(cfg.level_of(wh))]++;
  }
  return s;
}

std::string series_csv(const RunSeries& s) {
  std::ostringstream csv;
  csv << "run_id,who,days_elapsed,mean_soc_kwh,sd_soc_kwh,mean_cum_reward_cents,"
         "sd_cum_reward_cents\n";
  for (std::size_t x = 0; x < s.mean_soc_kwh.size(); ++x) {
    csv << s.run_id << ',' << s.who << ',' << x << ',' << fmt(s.mean_soc_kwh[x], "%.6f")
        << ',' << fmt(s.sd_soc_kwh[x], "%.6f") << ','
        << fmt(s.mean_cum_reward_cents[x], "%.6f") << ','
        << fmt(s.sd_cum_reward_cents[x], "%.6f") << "\n";
  }
  return csv.str();
}

std::string histogram_csv(const RunSeries& s) {
  std::ostringstream csv;
  csv << "run_id,soc_kwh,count\n";
  for (std::size_t level = 0; level < s.terminal_soc_histogram.size(); ++level)
    csv << s.run_id << ',' << fmt(static_cast<double>(level) * s.level_kwh, "%.3f") << ','
        << s.terminal_soc_histogram[level] << "\n";
  return csv.str();
}

namespace {

// One run's soc + cumulative-reward subplots inside the given column.
void draw_panel(Svg& svg, const RunSeries& s, double left, double top, double width,
                const std::string& color) {
  const double plot_w = width - 90.0;
  auto [soc_lo, soc_hi] = band_extent(s.mean_soc_kwh, s.sd_soc_kwh);
  std::tie(soc_lo, soc_hi) = padded_range(soc_lo, soc_hi);
  Axes soc_ax{left + 60.0, top + 28.0, plot_w, 140.0, 0.0,
              static_cast<double>(s.horizon_days), soc_lo, soc_hi};
  draw_axes(svg, soc_ax, "day", "SoC (kWh)");
  draw_series_with_band(svg, soc_ax, s.mean_soc_kwh, s.sd_soc_kwh, color);

  auto [rw_lo, rw_hi] = band_extent(s.mean_cum_reward_cents, s.sd_cum_reward_cents);
  std::tie(rw_lo, rw_hi) = padded_range(rw_lo, rw_hi);
  Axes rw_ax{left + 60.0, top + 238.0, plot_w, 140.0, 0.0,
             static_cast<double>(s.horizon_days), rw_lo, rw_hi};
  draw_axes(svg, rw_ax, "day", "cumulative reward (cents)");
  draw_series_with_band(svg, rw_ax, s.mean_cum_reward_cents, s.sd_cum_reward_cents, color);

  svg.text(left + width / 2.0, top + 16.0, s.run_id + " (" + s.who + ")", 13, "middle");
}

}  // namespace

std::string render_comparison_svg(const std::vector<RunSeries>& runs) {
  if (runs.empty()) throw IoError("no runs to render");
  const double panel_w = 420.0;
  const int width = static_cast<int>(panel_w * static_cast<double>(runs.size())) + 20;
  Svg svg(width, 430);
  for (std::size_t i = 0; i < runs.size(); ++i)
    draw_panel(svg, runs[i], 10.0 + panel_w * static_cast<double>(i), 10.0,
               panel_w, kPalette[i % kPalette.size()]);
  return svg.finish();
}

std::string render_overlay_svg(const std::vector<RunSeries>& runs) {
  if (runs.empty()) throw IoError("no runs to render");
  int T = 0;
  double soc_lo = 1e300, soc_hi = -1e300, rw_lo = 1e300, rw_hi = -1e300;
  for (const RunSeries& s : runs) {
    T = std::max(T, s.horizon_days);
    const auto se = band_extent(s.mean_soc_kwh, s.sd_soc_kwh);
    const auto re = band_extent(s.mean_cum_reward_cents, s.sd_cum_reward_cents);
    soc_lo = std::min(soc_lo, se.first);
    soc_hi = std::max(soc_hi, se.second);
    rw_lo = std::min(rw_lo, re.first);
    rw_hi = std::max(rw_hi, re.second);
  }
  std::tie(soc_lo, soc_hi) = padded_range(soc_lo, soc_hi);
  std::tie(rw_lo, rw_hi) = padded_range(rw_lo, rw_hi);

  Svg svg(900, 480);
  Axes soc_ax{70.0, 40.0, 790.0, 160.0, 0.0, static_cast<double>(T), soc_lo, soc_hi};
  draw_axes(svg, soc_ax, "day", "SoC (kWh)");
  Axes rw_ax{70.0, 280.0, 790.0, 160.0, 0.0, static_cast<double>(T), rw_lo, rw_hi};
  draw_axes(svg, rw_ax, "day", "cumulative reward (cents)");

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string color = kPalette[i % kPalette.size()];
    draw_series_with_band(svg, soc_ax, runs[i].mean_soc_kwh, runs[i].sd_soc_kwh, color);
    draw_series_with_band(svg, rw_ax, runs[i].mean_cum_reward_cents,
                          runs[i].sd_cum_reward_cents, color);
    const double lx = 80.0 + 200.0 * static_cast<double>(i);
    svg.rect(lx, 12.0, 12.0, 12.0, color);
    svg.text(lx + 18.0, 22.0, runs[i].run_id + " (" + runs[i].who + ")", 11);
  }
  return svg.finish();
}

std::string render_intervention_svg(const RunSeries& treatment, const RunSeries& control) {
  const int T = std::max(treatment.horizon_days, control.horizon_days);
  auto te = band_extent(treatment.mean_soc_kwh, treatment.sd_soc_kwh);
  auto ce = band_extent(control.mean_soc_kwh, control.sd_soc_kwh);
  auto [soc_lo, soc_hi] = padded_range(std::min(te.first, ce.first),
                                       std::max(te.second, ce.second));

  Svg svg(900, 520);
  Axes soc_ax{70.0, 40.0, 790.0, 180.0, 0.0, static_cast<double>(T), soc_lo, soc_hi};
  draw_axes(svg, soc_ax, "day", "SoC (kWh)");
  draw_series_with_band(svg, soc_ax, treatment.mean_soc_kwh, treatment.sd_soc_kwh,
                        kPalette[3]);
  draw_series_with_band(svg, soc_ax, control.mean_soc_kwh, control.sd_soc_kwh, kPalette[0]);
  svg.rect(80.0, 12.0, 12.0, 12.0, kPalette[3]);
  svg.text(98.0, 22.0, "treatment: " + treatment.run_id, 11);
  svg.rect(420.0, 12.0, 12.0, 12.0, kPalette[0]);
  svg.text(438.0, 22.0, "control: " + control.run_id, 11);

  // Terminal-soc histograms, grouped bars per level.
  const std::size_t levels =
      std::max(treatment.terminal_soc_histogram.size(), control.terminal_soc_histogram.size());
  int max_count = 1;
  for (std::size_t l = 0; l < levels; ++l) {
    if (l < treatment.terminal_soc_histogram.size())
      max_count = std::max(max_count, treatment.terminal_soc_histogram[l]);
    if (l < control.terminal_soc_histogram.size())
      max_count = std::max(max_count, control.terminal_soc_histogram[l]);
  }
  Axes bar_ax{70.0, 290.0, 790.0, 180.0, -0.5, static_cast<double>(levels) - 0.5, 0.0,
              static_cast<double>(max_count) * 1.1};
  draw_axes(svg, bar_ax, "terminal SoC (kWh)", "repetitions", std::min<int>(5, int(levels)));
  const double slot = bar_ax.pw / static_cast<double>(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    const double cx = bar_ax.X(static_cast<double>(l));
    const int tc = l < treatment.terminal_soc_histogram.size()
                       ? treatment.terminal_soc_histogram[l]
                       : 0;
    const int cc =
        l < control.terminal_soc_histogram.size() ? control.terminal_soc_histogram[l] : 0;
    const double base = bar_ax.py + bar_ax.ph;
    svg.rect(cx - slot * 0.35, bar_ax.Y(tc), slot * 0.3, base - bar_ax.Y(tc), kPalette[3],
             0.85);
    svg.rect(cx + slot * 0.05, bar_ax.Y(cc), slot * 0.3, base - bar_ax.Y(cc), kPalette[0],
             0.85);
  }
  return svg.finish();
}

std::string render_scatter_svg(const std::vector<Document>& corpus,
                               const std::vector<std::array<double, 2>>& coords,
                               const std::vector<int>& labels) {
  if (coords.size() != corpus.size() || labels.size() != corpus.size())
    throw ConfigError("scatter rows misaligned with corpus");
  if (coords.empty()) throw IoError("no points to render");
  double x_lo = coords.front()[0], x_hi = x_lo, y_lo = coords.front()[1], y_hi = y_lo;
  for (const auto& c : coords) {
    x_lo = std::min(x_lo, c[0]);
    x_hi = std::max(x_hi, c[0]);
    y_lo = std::min(y_lo, c[1]);
    y_hi = std::max(y_hi, c[1]);
  }
  std::tie(x_lo, x_hi) = padded_range(x_lo, x_hi);
  std::tie(y_lo, y_hi) = padded_range(y_lo, y_hi);

  Svg svg(700, 620);
  Axes ax{60.0, 50.0, 600.0, 520.0, x_lo, x_hi, y_lo, y_hi};
  draw_axes(svg, ax, "dimension 1", "dimension 2");
  svg.text(350.0, 20.0, "layout of daily reflections, colored by cluster", 13, "middle");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const std::string color =
        kPalette[static_cast<std::size_t>(labels[i]) % kPalette.size()];
    svg.circle(ax.X(coords[i][0]), ax.Y(coords[i][1]), 3.0, color,
               corpus[i].doc_id + " " + corpus[i].persona);
  }
  return svg.finish();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("short write: " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> write_report(
    const std::vector<std::filesystem::path>& run_dirs,
    const std::filesystem::path& out_dir) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  std::vector<LoadedRun> runs;
  std::vector<RunSeries> series;
  for (const auto& dir : run_dirs) {
    runs.push_back(load_run(dir));
    series.push_back(series_from_run(runs.back()));
  }

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = out_dir / name;
    write_file(path, text);
    written.push_back(path);
  };

  for (const RunSeries& s : series) {
    emit("timeseries_" + s.run_id + ".csv", series_csv(s));
    emit("terminal_histogram_" + s.run_id + ".csv", histogram_csv(s));
  }
  emit("comparison.svg", render_comparison_svg(series));
  emit("overlay.svg", render_overlay_svg(series));

  // Any blackout-arm run paired with a schedule-free partner gets the
  // treatment/control figure; the first such pair wins.
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series[i].blackout_arm) continue;
    for (std::size_t j = 0; j < series.size(); ++j) {
      if (series[j].blackout_arm) continue;
      emit("intervention.svg", render_intervention_svg(series[i], series[j]));
      i = series.size();  // done
      break;
    }
    if (i == series.size()) break;
  }
  return written;
}

}  // namespace agentlab

