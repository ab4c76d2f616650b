#include "fracdrift/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace fracdrift {

using nlohmann::ordered_json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string paths_csv(const PathBundle& bundle) {
  std::string text = "t";
  for (int i = 0; i < bundle.size(); ++i) text += ",path_" + std::to_string(i + 1);
  text += '\n';
  for (int j = 0; j <= bundle.grid.steps(); ++j) {
    text += format_number(bundle.grid.node(j));
    for (int i = 0; i < bundle.size(); ++i) text += ',' + format_number(bundle.values(i, j));
    text += '\n';
  }
  return text;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(cell, &used);
    if (used == cell.size()) return x;
  } catch (const std::exception&) {
  }
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": bad number '" + cell + "'");
}

}  // namespace

PathBundle read_paths_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t")
    throw ValidationError(path.string() + ": header must be t,path_1,...");
  const std::size_t n_paths = header.size() - 1;

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    times.push_back(parse_cell(cells[0], path, line_no));
    std::vector<double> row(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) row[i] = parse_cell(cells[i + 1], path, line_no);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ValidationError(path.string() + ": need at least two time nodes");
  if (times.front() != 0.0) throw ValidationError(path.string() + ": first node must be t = 0");

  const Grid grid(times.back(), static_cast<int>(rows.size()) - 1);
  for (int j = 0; j <= grid.steps(); ++j)
    if (std::abs(times[j] - grid.node(j)) > 1e-9 * grid.horizon())
      throw ValidationError(path.string() + ": time nodes must be uniform");

  RowMatrix values(static_cast<Eigen::Index>(n_paths), grid.steps() + 1);
  for (int j = 0; j <= grid.steps(); ++j)
    for (std::size_t i = 0; i < n_paths; ++i) values(static_cast<Eigen::Index>(i), j) = rows[j][i];
  return PathBundle(grid, std::move(values), BundleKind::solution);
}

ordered_json estimate_record(const EstimateFBM& est) {
  ordered_json r;
  r["theta_tilde"] = est.theta_tilde;
  r["R_N"] = est.r_n;
  r["iterations"] = est.iterations;
  r["residual"] = est.residual;
  r["D_N"] = est.d_n;
  r["I_N"] = est.i_n;
  r["M_N"] = est.m_n;
  r["omega_holds"] = est.omega_holds;
  r["theta_tilde_c"] = est.theta_tilde_c;
  r["theta_tilde_cd"] = est.theta_tilde_cd;
  r["c"] = est.contraction;
  r["d"] = est.threshold;
  r["ybar"] = est.ybar ? ordered_json(*est.ybar) : ordered_json(nullptr);
  r["aci_lower"] = est.aci ? ordered_json(est.aci->lower) : ordered_json(nullptr);
  r["aci_upper"] = est.aci ? ordered_json(est.aci->upper) : ordered_json(nullptr);
  return r;
}

ordered_json estimate_record(const EstimateBM& est) {
  ordered_json r;
  r["theta_hat"] = est.theta_hat;
  r["theta_hat_d"] = est.theta_hat_d;
  r["D_Nn"] = est.d_nn;
  r["V_Nn"] = est.v_nn;
  r["ybar"] = est.ybar;
  r["aci_lower"] = est.aci ? ordered_json(est.aci->lower) : ordered_json(nullptr);
  r["aci_upper"] = est.aci ? ordered_json(est.aci->upper) : ordered_json(nullptr);
  return r;
}

namespace {

std::string cell(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string optional_number(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

}  // namespace

std::string record_csv(const ordered_json& record) {
  std::string header, row;
  bool first = true;
  for (const auto& item : record.items()) {
    if (!first) {
      header += ',';
      row += ',';
    }
    first = false;
    header += item.key();
    row += cell(item.value());
  }
  return header + '\n' + row + '\n';
}

std::string summary_csv(const RunConfig& config, const SummaryReport& report,
                        std::optional<double> seconds) {
  const ExperimentConfig& e = config.experiment;
  std::string text = "model,H,N_max,replications,mean_error,std_error,coverage,seconds\n";
  text += e.model + ',' + format_number(e.hurst) + ',' + std::to_string(e.n_max) + ',' +
          std::to_string(e.replications) + ',' + format_number(report.mean_error) + ',' +
          format_number(report.std_error) + ',' + format_number(report.coverage) + ',' +
          optional_number(seconds) + '\n';
  return text;
}

ordered_json summary_json(const RunConfig& config, const SummaryReport& report,
                          std::optional<double> seconds) {
  const ExperimentConfig& e = config.experiment;
  ordered_json r;
  r["model"] = e.model;
  r["H"] = e.hurst;
  r["N_max"] = e.n_max;
  r["replications"] = e.replications;
  r["mean_error"] = report.mean_error;
  r["std_error"] = report.std_error;
  r["coverage"] = report.coverage;
  r["truncated_mean_error"] = report.truncated_mean_error;
  r["failed_trials"] = report.failed_trials;
  r["seconds"] = seconds ? ordered_json(*seconds) : ordered_json(nullptr);
  return r;
}

std::string trajectories_csv(std::span<const TrialResult> trials) {
  std::string text = "trial,N,estimate,aci_lower,aci_upper\n";
  for (const TrialResult& trial : trials)
    for (std::size_t k = 0; k < trial.points.size(); ++k) {
      text += std::to_string(trial.trial) + ',' + std::to_string(trial.sizes[k]) + ',';
      const auto& p = trial.points[k];
      if (p) {
        text += format_number(p->estimate) + ',';
        text += p->has_aci ? format_number(p->aci_lower) + ',' + format_number(p->aci_upper) : ",";
      } else {
        text += ",,";
      }
      text += '\n';
    }
  return text;
}

ordered_json trajectories_json(std::span<const TrialResult> trials) {
  ordered_json rows = ordered_json::array();
  for (const TrialResult& trial : trials)
    for (std::size_t k = 0; k < trial.points.size(); ++k) {
      const auto& p = trial.points[k];
      ordered_json row;
      row["trial"] = trial.trial;
      row["N"] = trial.sizes[k];
      row["estimate"] = p ? ordered_json(p->estimate) : ordered_json(nullptr);
      row["aci_lower"] = p && p->has_aci ? ordered_json(p->aci_lower) : ordered_json(nullptr);
      row["aci_upper"] = p && p->has_aci ? ordered_json(p->aci_upper) : ordered_json(nullptr);
      rows.push_back(std::move(row));
    }
  return rows;
}

std::string sweep_csv(const SummaryReport& report) {
  std::string text = "threshold,mean_error\n";
  for (std::size_t k = 0; k < report.thresholds.size(); ++k)
    text += format_number(report.thresholds[k]) + ',' +
            format_number(report.threshold_mean_errors[k]) + '\n';
  return text;
}

ordered_json sweep_json(const SummaryReport& report) {
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < report.thresholds.size(); ++k)
    rows.push_back({{"threshold", report.thresholds[k]}, {"mean_error", report.threshold_mean_errors[k]}});
  return rows;
}

}  // namespace fracdrift
