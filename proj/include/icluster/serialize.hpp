#pragma once

#include <json.hpp>
#include <ostream>
#include <string>

#include "icluster/mixtures.hpp"
#include "icluster/oracle.hpp"
#include "icluster/solver.hpp"

namespace icluster {

std::string to_string(SolveMode mode);

/// {n, k, method, mode, total_cost, delimiters,
///  clusters: [{left, right, size, prototype, cost}]}, 1-based indices.
nlohmann::json clustering_to_json(const Clustering& clustering,
                                  const CostModel& model, SolveMode mode);

/// Delimiters read back from clustering JSON (validated against n).
std::vector<Index> delimiters_from_json(const nlohmann::json& j);

/// {family, k, alphas, thetas, complete_loglik, avg_complete_loglik, aic,
///  iterations, converged, warnings}; thetas are objects keyed by
/// parameter name, a NaN aic is written as null.
nlohmann::json fit_report_to_json(const FitReport& report);

nlohmann::json gmm_comparison_to_json(const GmmComparison& cmp);

/// `k,e_k,m_k,regularized`
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
/// `x,comp_1,...,comp_k,total`
void write_density_csv(std::ostream& out, const Eigen::MatrixXd& table);
/// `n,k,mode,median_seconds`
void write_scaling_csv(std::ostream& out, const ScalingReport& report);

}  // namespace icluster
