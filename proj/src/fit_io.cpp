#include "qcost/fit_io.hpp"

#include <fstream>
#include <json.hpp>
#include <map>

#include "qcost/errors.hpp"

namespace qcost {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd json_to_vec(const json& arr, Eigen::Index expected,
                            const char* name) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != expected)
    throw Error(ErrorKind::data,
                std::string("fit file: bad length for ") + name);
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i)
    v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json convergence_to_json(const FitConvergence& c) {
  return json{{"converged", c.converged},
              {"iterations", c.iterations},
              {"evaluations", c.evaluations},
              {"objective", c.objective},
              {"grad_norm", c.grad_norm},
              {"starts", c.starts}};
}

FitConvergence convergence_from_json(const json& j) {
  FitConvergence c;
  c.converged = j.at("converged").get<bool>();
  c.iterations = j.at("iterations").get<int>();
  c.evaluations = j.at("evaluations").get<int>();
  c.objective = j.at("objective").get<double>();
  c.grad_norm = j.at("grad_norm").get<double>();
  c.starts = j.at("starts").get<int>();
  return c;
}

json effects_to_json(const Eigen::VectorXd& fe,
                     const std::vector<std::string>& bank_ids) {
  json obj = json::object();
  for (std::size_t i = 0; i < bank_ids.size(); ++i)
    obj[bank_ids[i]] = fe[static_cast<Eigen::Index>(i)];
  return obj;
}

Eigen::VectorXd effects_from_json(const json& obj,
                                  const std::vector<std::string>& bank_ids,
                                  const char* name) {
  Eigen::VectorXd fe(static_cast<Eigen::Index>(bank_ids.size()));
  for (std::size_t i = 0; i < bank_ids.size(); ++i) {
    auto it = obj.find(bank_ids[i]);
    if (it == obj.end())
      throw Error(ErrorKind::data, std::string("fit file: missing ") + name +
                                       " for bank " + bank_ids[i]);
    fe[static_cast<Eigen::Index>(i)] = it->get<double>();
  }
  return fe;
}

}  // namespace

void write_model_fit(const std::filesystem::path& path, const ModelFit& fit,
                     const TranslogDesign& design) {
  json j;
  j["format"] = "qcost-fit-v1";
  j["taus"] = fit.taus;
  j["q_taus"] = fit.q_taus;
  j["years"] = {{"min", fit.year_min}, {"T", fit.T}};
  j["banks"] = fit.bank_ids;
  j["normalizations"] = {{"eta_1", 0.0},
                         {"theta_1", 0.0},
                         {"beta0_star", 1.0},
                         {"gamma0_star", 1.0},
                         {"sum_lambda", 0.0},
                         {"sum_sigma", 0.0},
                         {"intercept_recovery", "unweighted bank means"}};

  json loc;
  loc["beta0"] = fit.location.beta0;
  loc["eta"] = vec_to_json(fit.location.eta);
  loc["beta1"] = vec_to_json(fit.location.beta1);
  loc["beta1_star"] = vec_to_json(fit.location.beta1_star);
  loc["beta2"] = vec_to_json(fit.location.beta2);
  loc["beta2_star"] = vec_to_json(fit.location.beta2_star);
  loc["lambda"] = effects_to_json(fit.location.lambda, fit.bank_ids);
  loc["convergence"] = convergence_to_json(fit.location.convergence);
  j["location"] = std::move(loc);

  json sc;
  sc["gamma0"] = fit.scale.gamma0;
  sc["theta"] = vec_to_json(fit.scale.theta);
  sc["gamma1"] = vec_to_json(fit.scale.gamma1);
  sc["gamma1_star"] = vec_to_json(fit.scale.gamma1_star);
  sc["gamma2"] = vec_to_json(fit.scale.gamma2);
  sc["gamma2_star"] = vec_to_json(fit.scale.gamma2_star);
  sc["sigma"] = effects_to_json(fit.scale.sigma, fit.bank_ids);
  sc["positivity_violations"] =
      static_cast<int>(fit.scale.positivity_violations.size());
  sc["convergence"] = convergence_to_json(fit.scale.convergence);
  j["scale"] = std::move(sc);

  json resid = json::array();
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    resid.push_back(
        json{{"bank", design.bank_ids[static_cast<std::size_t>(
                  design.group[static_cast<std::size_t>(i)])]},
             {"year", design.year_of(i)},
             {"u", fit.location.residuals[i]},
             {"scale", fit.scale.scale_values[i]}});
  }
  j["residuals"] = std::move(resid);

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::io, "cannot write fit file: " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

ModelFit read_model_fit(const std::filesystem::path& path,
                        const TranslogDesign& design) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io,
                "cannot open fit file (run `estimate` first): " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::data,
                "fit file is not valid JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != std::string("qcost-fit-v1"))
    throw Error(ErrorKind::data, "fit file format mismatch");

  ModelFit fit;
  fit.taus = j.at("taus").get<std::vector<double>>();
  fit.q_taus = j.at("q_taus").get<std::vector<double>>();
  fit.year_min = j.at("years").at("min").get<int>();
  fit.T = j.at("years").at("T").get<int>();
  fit.bank_ids = j.at("banks").get<std::vector<std::string>>();
  if (fit.bank_ids != design.bank_ids)
    throw Error(ErrorKind::data,
                "fit file does not match the panel (bank set differs)");
  if (fit.T != design.T || fit.year_min != design.year_min)
    throw Error(ErrorKind::data,
                "fit file does not match the panel (year range differs)");

  const auto& loc = j.at("location");
  fit.location.beta0 = loc.at("beta0").get<double>();
  fit.location.eta = json_to_vec(loc.at("eta"), design.T - 1, "eta");
  fit.location.beta1 = json_to_vec(loc.at("beta1"), kNumRegressors, "beta1");
  fit.location.beta1_star =
      json_to_vec(loc.at("beta1_star"), kNumRegressors, "beta1_star");
  fit.location.beta2 = json_to_vec(loc.at("beta2"), kNumQuad, "beta2");
  fit.location.beta2_star =
      json_to_vec(loc.at("beta2_star"), kNumQuad, "beta2_star");
  fit.location.lambda =
      effects_from_json(loc.at("lambda"), fit.bank_ids, "lambda");
  fit.location.convergence = convergence_from_json(loc.at("convergence"));

  const auto& sc = j.at("scale");
  fit.scale.gamma0 = sc.at("gamma0").get<double>();
  fit.scale.theta = json_to_vec(sc.at("theta"), design.T - 1, "theta");
  fit.scale.gamma1 = json_to_vec(sc.at("gamma1"), kNumRegressors, "gamma1");
  fit.scale.gamma1_star =
      json_to_vec(sc.at("gamma1_star"), kNumRegressors, "gamma1_star");
  fit.scale.gamma2 = json_to_vec(sc.at("gamma2"), kNumQuad, "gamma2");
  fit.scale.gamma2_star =
      json_to_vec(sc.at("gamma2_star"), kNumQuad, "gamma2_star");
  fit.scale.sigma = effects_from_json(sc.at("sigma"), fit.bank_ids, "sigma");
  fit.scale.convergence = convergence_from_json(sc.at("convergence"));

  // Residuals and scale values realigned to the design rows by (bank, year).
  std::map<std::pair<std::string, int>, std::pair<double, double>> by_key;
  for (const auto& r : j.at("residuals")) {
    by_key[{r.at("bank").get<std::string>(), r.at("year").get<int>()}] = {
        r.at("u").get<double>(), r.at("scale").get<double>()};
  }
  if (static_cast<Eigen::Index>(by_key.size()) != design.rows())
    throw Error(ErrorKind::data,
                "fit file does not match the panel (observation count differs)");
  fit.location.residuals.resize(design.rows());
  fit.scale.scale_values.resize(design.rows());
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const auto key = std::make_pair(
        design.bank_ids[static_cast<std::size_t>(
            design.group[static_cast<std::size_t>(i)])],
        design.year_of(i));
    auto it = by_key.find(key);
    if (it == by_key.end())
      throw Error(ErrorKind::data,
                  "fit file does not match the panel (missing observation " +
                      key.first + "/" + std::to_string(key.second) + ")");
    fit.location.residuals[i] = it->second.first;
    fit.scale.scale_values[i] = it->second.second;
    if (!(fit.scale.scale_values[i] > 0.0))
      fit.scale.positivity_violations.push_back(i);
  }
  return fit;
}

}  // namespace qcost
