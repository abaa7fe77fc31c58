#include "ipmm/trace.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ipmm {

namespace {

void format_double(std::ostream& os, double v) {
  os << std::setprecision(17) << v;
}

}  // namespace

std::string Trace::to_csv() const {
  std::ostringstream os;
  os << "k,theta,jk,gamma,alpha,mu,tau,lbfgs_iters,gap,step_norm\n";
  for (const TraceRow& r : rows) {
    os << r.k << ',';
    format_double(os, r.theta);
    os << ',' << r.jk << ',';
    format_double(os, r.gamma);
    os << ',';
    format_double(os, r.alpha);
    os << ',';
    format_double(os, r.mu);
    os << ',';
    format_double(os, r.tau);
    os << ',' << r.lbfgs_iters << ',';
    format_double(os, r.gap);
    os << ',';
    format_double(os, r.step_norm);
    os << '\n';
  }
  return os.str();
}

std::string Trace::to_json() const {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const TraceRow& r : rows) {
    j["rows"].push_back({{"k", r.k},
                         {"theta", r.theta},
                         {"jk", r.jk},
                         {"gamma", r.gamma},
                         {"alpha", r.alpha},
                         {"mu", r.mu},
                         {"tau", r.tau},
                         {"lbfgs_iters", r.lbfgs_iters},
                         {"gap", r.gap},
                         {"step_norm", r.step_norm},
                         {"majorant", r.majorant},
                         {"forced", r.forced}});
  }
  j["final_theta"] = final_theta;
  j["data_norm"] = data_norm;
  j["converged"] = converged;
  j["outer_iterations"] = rows.size();
  j["varrho"] = varrho;
  j["gamma_hi"] = gamma_hi;
  return j.dump(2) + "\n";
}

Trace Trace::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("trace JSON parse error: ") + e.what());
  }
  Trace t;
  if (!j.contains("rows") || !j["rows"].is_array())
    throw std::invalid_argument("trace JSON: missing rows array");
  for (const auto& rj : j["rows"]) {
    TraceRow r;
    r.k = rj.at("k").get<int>();
    r.theta = rj.at("theta").get<double>();
    r.jk = rj.at("jk").get<int>();
    r.gamma = rj.at("gamma").get<double>();
    r.alpha = rj.at("alpha").get<double>();
    r.mu = rj.at("mu").get<double>();
    r.tau = rj.at("tau").get<double>();
    r.lbfgs_iters = rj.at("lbfgs_iters").get<int>();
    r.gap = rj.at("gap").get<double>();
    r.step_norm = rj.at("step_norm").get<double>();
    r.majorant = rj.at("majorant").get<double>();
    r.forced = rj.at("forced").get<bool>();
    t.rows.push_back(r);
  }
  t.final_theta = j.at("final_theta").get<double>();
  t.data_norm = j.at("data_norm").get<double>();
  t.converged = j.at("converged").get<bool>();
  t.varrho = j.value("varrho", 2.0);
  t.gamma_hi = j.value("gamma_hi", 1e6);
  return t;
}

std::vector<std::string> verify_trace(const Trace& trace) {
  std::vector<std::string> bad;
  auto complain = [&bad](int k, const std::string& what) {
    bad.push_back("row " + std::to_string(k) + ": " + what);
  };
  const double gamma_cap = trace.gamma_hi * trace.varrho * (1.0 + 1e-12);
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& r = trace.rows[i];
    const double theta_next =
        (i + 1 < trace.rows.size()) ? trace.rows[i + 1].theta : trace.final_theta;
    if (!std::isfinite(r.theta) || !std::isfinite(theta_next)) {
      complain(r.k, "non-finite objective");
      continue;
    }
    const double slack = 1e-9 * std::max(1.0, std::abs(r.theta));
    if (theta_next > r.theta + slack)
      complain(r.k, "objective increased");
    if (r.jk < 0 || r.jk > 40)
      complain(r.k, "backtracking count out of range");
    if (!(r.gamma > 0.0) || r.gamma > gamma_cap)
      complain(r.k, "accepted curvature out of range");
    if (r.gap < -1e-8 * std::max(1.0, std::abs(r.theta)))
      complain(r.k, "negative duality gap");
    if (!r.forced) {
      // Replay the two acceptance clauses from the logged quantities:
      // majorant < theta, and gap <= (mu/2) (theta - majorant).
      if (!(r.majorant < r.theta + slack))
        complain(r.k, "surrogate did not decrease the objective");
      const double budget = 0.5 * r.mu * (r.theta - r.majorant);
      if (r.gap > budget + 1e-9 * std::max(1.0, std::abs(budget)))
        complain(r.k, "gap exceeds the inexactness budget");
      if (theta_next > r.majorant + slack)
        complain(r.k, "objective exceeds its surrogate at the accepted point");
    }
  }
  return bad;
}

}  // namespace ipmm
