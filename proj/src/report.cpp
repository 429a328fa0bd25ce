#include "perfou/report.hpp"

#include <fstream>

#include "perfou/errors.hpp"

namespace perfou {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json discretization(const SamplePath& path) {
    return {{"step", path.step()},
            {"steps_per_period", path.steps_per_period},
            {"n_periods", path.n_periods},
            {"n_steps", path.n_steps()},
            {"burn_in_steps", path.burn_in_steps},
            {"scheme", "euler_left_endpoint"}};
}

json design_part(const DesignMatrices& design) {
    return {{"Lambda_n", to_json(design.lambda_n)},
            {"b_over_n", design.b / static_cast<double>(design.n)},
            {"residual_variance", design.residual_variance},
            {"gamma_n", optional_number(design.gamma_n)},
            {"degenerate", design.degenerate()}};
}

}  // namespace

std::string mode_name(EstimatorMode mode) {
    return mode == EstimatorMode::naive_pathwise ? "naive_pathwise" : "oracle_divergence";
}

std::string trace_name(TraceRule rule) {
    return rule == TraceRule::discrete_exact ? "discrete_exact" : "continuous";
}

json to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return out;
}

json estimate_report(const SamplePath& path, const EstimateResult& result) {
    json doc = design_part(result.design);
    doc["components"] = component_names(path.model);
    doc["theta_hat"] = to_json(result.theta_hat);
    doc["mode"] = mode_name(result.mode);
    doc["P"] = to_json(result.P);
    doc["R_n"] = result.R_n ? to_json(*result.R_n) : json(nullptr);
    if (result.mode == EstimatorMode::oracle_divergence) {
        doc["trace_rule"] = trace_name(result.trace);
        doc["trace_correction"] = result.trace_correction;
        doc["alpha_used_for_correction"] = optional_number(result.alpha_used_for_correction);
    }
    if (result.dense_solve_discrepancy) doc["dense_solve_discrepancy"] = *result.dense_solve_discrepancy;
    doc["discretization"] = discretization(path);
    return doc;
}

json degenerate_estimate_report(const SamplePath& path, const DesignMatrices& design, EstimatorMode mode) {
    json doc = design_part(design);
    doc["components"] = component_names(path.model);
    doc["theta_hat"] = nullptr;
    doc["mode"] = mode_name(mode);
    doc["degenerate"] = true;
    doc["discretization"] = discretization(path);
    return doc;
}

json limits_report(const FouModel& model, const LimitMatrices& limits) {
    return {{"components", component_names(model)},
            {"Lambda", to_json(limits.Lambda)},
            {"gamma", limits.gamma},
            {"C", to_json(limits.C)},
            {"Sigma0", to_json(limits.Sigma0)},
            {"asym_cov", to_json(limits.asym_cov)},
            {"alpha_H", limits.alpha_H},
            {"tilde_h_square_mean", limits.tilde_h_square_mean},
            {"stationary_variance", limits.stationary_variance},
            {"sigma0_minus_c_inverse_frobenius", limits.sigma0_minus_c_inverse},
            {"flags", {{"clt_valid", limits.clt_valid}, {"degenerate_limit", limits.degenerate_limit}}}};
}

json experiment_report(const ExperimentReport& report) {
    json aggregates = json::array();
    for (const auto& a : report.aggregates) {
        json entry = {{"n", a.n},
                      {"included", a.included},
                      {"excluded", a.excluded},
                      {"mean", to_json(a.mean)},
                      {"bias", to_json(a.bias)},
                      {"bias_standard_error", to_json(a.bias_standard_error)},
                      {"rmse", to_json(a.rmse)},
                      {"scaled_error_cov", to_json(a.scaled_error_cov)},
                      {"skewness", to_json(a.skewness)},
                      {"excess_kurtosis", to_json(a.excess_kurtosis)},
                      {"ecdf_distance", to_json(a.ecdf_distance)}};
        entry["scaled_noise_variance"] =
            a.scaled_noise_variance.size() > 0 ? to_json(a.scaled_noise_variance) : json(nullptr);
        aggregates.push_back(std::move(entry));
    }
    std::vector<std::uint64_t> seeds;
    for (const auto& r : report.records) seeds.push_back(r.seed);

    json doc = {{"kind", report.kind},
                {"components", report.components},
                {"theta", to_json(report.theta)},
                {"aggregates", std::move(aggregates)},
                {"seeds", std::move(seeds)},
                {"pass", report.pass}};
    if (report.reference.C.size() > 0) {
        doc["reference"] = {{"asym_cov", to_json(report.reference.asym_cov)},
                            {"clt_valid", report.reference.clt_valid},
                            {"degenerate_limit", report.reference.degenerate_limit}};
    }
    doc["mu_block_distance"] = optional_number(report.mu_block_distance);
    doc["full_distance"] = optional_number(report.full_distance);
    return doc;
}

json coupling_report(const CouplingReport& report) {
    json times = json::array(), gaps = json::array();
    for (double t : report.times) times.push_back(t);
    for (double g : report.gaps) gaps.push_back(g);
    return {{"alpha", report.alpha},
            {"times", std::move(times)},
            {"gaps", std::move(gaps)},
            {"log_slope", optional_number(report.log_slope)},
            {"points_fitted", report.points_fitted},
            {"exact_match", report.exact_match},
            {"pass", report.pass}};
}

void write_json(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace perfou
