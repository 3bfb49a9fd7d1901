#include "icluster/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "icluster/error.hpp"

namespace icluster {

namespace {

// Shortest representation that round-trips, matching the JSON writer.
std::string number(double v) {
  return nlohmann::json(v).dump();
}

}  // namespace

std::string to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::Auto: return "auto";
    case SolveMode::Lut: return "lut";
    case SolveMode::OnDemand: return "on_demand";
  }
  return "unknown";
}

nlohmann::json clustering_to_json(const Clustering& clustering,
                                  const CostModel& model, SolveMode mode) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const Cluster& c : clustering.clusters) {
    clusters.push_back({{"left", c.left},
                        {"right", c.right},
                        {"size", c.size()},
                        {"prototype", c.prototype},
                        {"cost", c.cost}});
  }
  return {{"n", clustering.n()},
          {"k", clustering.k()},
          {"method", model.method_string()},
          {"mode", to_string(mode)},
          {"total_cost", clustering.total_cost},
          {"delimiters", clustering.delimiters()},
          {"clusters", clusters}};
}

std::vector<Index> delimiters_from_json(const nlohmann::json& j) {
  try {
    auto delims = j.at("delimiters").get<std::vector<Index>>();
    const Index n = j.at("n").get<Index>();
    for (std::size_t m = 0; m < delims.size(); ++m) {
      const bool ok = m == 0 ? delims[m] == 1 : delims[m] > delims[m - 1];
      if (!ok || delims[m] > n) {
        throw Error(ErrorKind::ParseError, "delimiters are not a valid encoding");
      }
    }
    return delims;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

nlohmann::json fit_report_to_json(const FitReport& report) {
  const auto names = report.model.family.parameter_names();
  nlohmann::json thetas = nlohmann::json::array();
  for (const Theta& t : report.model.thetas) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t p = 0; p < names.size(); ++p) obj[names[p]] = t[p];
    thetas.push_back(obj);
  }
  return {{"family", report.model.family.name()},
          {"k", report.model.k()},
          {"alphas", report.model.alphas},
          {"thetas", thetas},
          {"complete_loglik", report.complete_loglik},
          {"avg_complete_loglik", report.avg_complete_loglik},
          {"aic", std::isnan(report.aic) ? nlohmann::json(nullptr)
                                         : nlohmann::json(report.aic)},
          {"iterations", report.iterations},
          {"converged", report.converged},
          {"optimality_guaranteed", report.optimality_guaranteed},
          {"warnings", report.warnings}};
}

nlohmann::json gmm_comparison_to_json(const GmmComparison& cmp) {
  return {{"gmm1", fit_report_to_json(cmp.gmm1)},
          {"gmm2", fit_report_to_json(cmp.gmm2)},
          {"delta_avg_complete_loglik", cmp.delta_avg_loglik}};
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "k,e_k,m_k,regularized\n";
  for (const SweepRow& r : sweep.rows) {
    out << r.k << ',' << number(r.cost) << ',' << number(r.ratio) << ','
        << number(r.regularized) << '\n';
  }
}

void write_density_csv(std::ostream& out, const Eigen::MatrixXd& table) {
  out << 'x';
  for (Eigen::Index c = 1; c + 1 < table.cols(); ++c) out << ",comp_" << c;
  out << ",total\n";
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      if (c) out << ',';
      out << number(table(r, c));
    }
    out << '\n';
  }
}

void write_scaling_csv(std::ostream& out, const ScalingReport& report) {
  out << "n,k,mode,median_seconds\n";
  for (const ScalingRow& r : report.rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", r.median_seconds);
    out << r.n << ',' << r.k << ',' << to_string(r.mode) << ',' << buf << '\n';
  }
}

}  // namespace icluster
