#include "gridars/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridars/safety.hpp"

namespace gridars {
namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const RolloutResult& result,
                          const GridConfig& grid,
                          const std::optional<double>& t_clear) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open trajectory file: " + path);
  out << "t";
  for (int b : grid.observed_buses) out << ",v_bus" << b + 1;
  for (int b : grid.load_buses) out << ",p_bus" << b + 1;
  for (int b : grid.load_buses) out << ",a_bus" << b + 1;
  for (int b : grid.load_buses) out << ",dp_bus" << b + 1;
  out << ",u_ivld,r,f,B,combined,t_clear\n";
  const double clear = t_clear ? *t_clear : -1.0;
  for (const auto& rec : result.trajectory) {
    out << num(rec.t);
    for (double v : rec.observed_voltage) out << ',' << num(v);
    for (double p : rec.remaining) out << ',' << num(p);
    for (double a : rec.action) out << ',' << num(a);
    for (double s : rec.shed) out << ',' << num(s);
    out << ',' << rec.invalid_count << ',' << num(rec.reward) << ','
        << num(rec.safety) << ',' << num(rec.barrier) << ','
        << num(rec.combined) << ',' << num(clear) << '\n';
  }
}

void write_verdicts_csv(const std::string& path,
                        const std::vector<Verdict>& verdicts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open verdicts file: " + path);
  out << "fault_bus,fault_duration,violated,min_safety,total_shed,"
         "plain_return\n";
  for (const auto& v : verdicts) {
    out << v.fault_bus + 1 << ',' << num(v.fault_duration) << ','
        << (v.violated ? "yes" : "no") << ',' << num(v.min_safety) << ','
        << num(v.total_shed) << ',' << num(v.plain_return) << '\n';
  }
}

std::vector<Verdict> read_verdicts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open verdicts file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty verdicts file: " + path);
  std::vector<Verdict> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_line(line);
    if (cols.size() != 6)
      throw std::runtime_error("malformed verdicts row: " + line);
    Verdict v;
    v.fault_bus = std::stoi(cols[0]) - 1;
    v.fault_duration = std::stod(cols[1]);
    v.violated = cols[2] == "yes";
    v.min_safety = std::stod(cols[3]);
    v.total_shed = std::stod(cols[4]);
    v.plain_return = std::stod(cols[5]);
    out.push_back(v);
  }
  return out;
}

std::string write_comparison_csv(const std::string& path,
                                 const std::vector<Verdict>& rl,
                                 const std::vector<Verdict>& uvls) {
  std::ostringstream table;
  table << "fault_bus,fault_duration,rl_violated,uvls_violated,rl_shed,"
           "uvls_shed\n";
  for (const auto& r : rl) {
    const auto it = std::find_if(uvls.begin(), uvls.end(), [&](const Verdict& u) {
      return u.fault_bus == r.fault_bus &&
             u.fault_duration == r.fault_duration;
    });
    if (it == uvls.end()) continue;
    table << r.fault_bus + 1 << ',' << num(r.fault_duration) << ','
          << (r.violated ? "yes" : "no") << ',' << (it->violated ? "yes" : "no")
          << ',' << num(r.total_shed) << ',' << num(it->total_shed) << '\n';
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open comparison file: " + path);
  out << table.str();
  return table.str();
}

int TrajectoryData::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1
                             : static_cast<int>(it - columns.begin());
}

TrajectoryData read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty trajectory file: " + path);
  TrajectoryData data;
  data.columns = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_line(line);
    if (cols.size() != data.columns.size())
      throw std::runtime_error("malformed trajectory row: " + line);
    std::vector<double> row(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
      row[i] = std::strtod(cols[i].c_str(), nullptr);
    data.rows.push_back(std::move(row));
  }
  return data;
}

void write_svg_plot(const std::string& path, const TrajectoryData& data,
                    const RewardConfig& reward) {
  if (data.rows.empty())
    throw std::runtime_error("trajectory has no rows to plot");
  const int t_col = data.column("t");
  const int clear_col = data.column("t_clear");
  if (t_col < 0) throw std::runtime_error("trajectory has no 't' column");
  std::vector<int> v_cols;
  for (std::size_t i = 0; i < data.columns.size(); ++i) {
    if (data.columns[i].rfind("v_bus", 0) == 0)
      v_cols.push_back(static_cast<int>(i));
  }
  if (v_cols.empty())
    throw std::runtime_error("trajectory has no voltage columns");

  const double t_min = data.rows.front()[t_col];
  const double t_max = data.rows.back()[t_col];
  double v_min = 0.6, v_max = 1.1;
  for (const auto& row : data.rows) {
    for (int c : v_cols) {
      v_min = std::min(v_min, row[c] - 0.02);
      v_max = std::max(v_max, row[c] + 0.02);
    }
  }
  const double w = 760, h = 420, ml = 60, mr = 20, mt = 20, mb = 40;
  auto sx = [&](double t) {
    return ml + (t - t_min) / (t_max - t_min) * (w - ml - mr);
  };
  auto sy = [&](double v) {
    return h - mb - (v - v_min) / (v_max - v_min) * (h - mt - mb);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open plot file: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  for (double v = 0.6; v <= v_max + 1e-9; v += 0.1) {
    if (v < v_min) continue;
    out << "<text x=\"8\" y=\"" << sy(v) + 4 << "\" font-size=\"11\">" << v
        << "</text>\n";
  }
  out << "<text x=\"" << (w / 2) << "\" y=\"" << h - 8
      << "\" font-size=\"12\">t (s)</text>\n";

  // Stepped envelope lower bound from the clearance time onward.
  const double t_clear =
      clear_col >= 0 ? data.rows.front()[clear_col] : -1.0;
  if (t_clear >= 0.0) {
    std::vector<std::pair<double, double>> knots;
    knots.emplace_back(t_clear, reward.levels[0]);
    for (std::size_t i = 0; i < reward.tau_breaks.size(); ++i) {
      knots.emplace_back(t_clear + reward.tau_breaks[i], reward.levels[i]);
      knots.emplace_back(t_clear + reward.tau_breaks[i], reward.levels[i + 1]);
    }
    knots.emplace_back(t_max, reward.levels.back());
    out << "<polyline fill=\"none\" stroke=\"red\" stroke-dasharray=\"5,3\" "
           "points=\"";
    for (auto [t, v] : knots) {
      if (t > t_max) break;
      out << sx(t) << ',' << sy(v) << ' ';
    }
    out << "\"/>\n";
  }

  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                                  "#8c564b", "#17becf"};
  for (std::size_t k = 0; k < v_cols.size(); ++k) {
    out << "<polyline fill=\"none\" stroke=\"" << kColors[k % 6]
        << "\" points=\"";
    for (const auto& row : data.rows)
      out << sx(row[t_col]) << ',' << sy(row[v_cols[k]]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << w - mr - 70 << "\" y=\"" << mt + 14 * (k + 1)
        << "\" font-size=\"11\" fill=\"" << kColors[k % 6] << "\">"
        << data.columns[v_cols[k]] << "</text>\n";
    // Envelope crossing markers.
    if (t_clear >= 0.0) {
      for (const auto& row : data.rows) {
        const double t = row[t_col];
        if (t <= t_clear) continue;
        if (row[v_cols[k]] < envelope_lower(t - t_clear, reward)) {
          out << "<circle cx=\"" << sx(t) << "\" cy=\"" << sy(row[v_cols[k]])
              << "\" r=\"3\" fill=\"red\"/>\n";
        }
      }
    }
  }
  out << "</svg>\n";
}

}  // namespace gridars
