#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fadecv/channel.hpp"
#include "fadecv/montecarlo.hpp"
#include "fadecv/postselect.hpp"
#include "fadecv/security.hpp"

namespace fadecv::io {

using nlohmann::json;

// Distribution file: {"delta_eta": w, "bins": [{"eta": e, "p": p}, ...]}.
// Mild normalization drift (up to 1e-6) is renormalized with a warning.
inline TransmittanceDistribution distribution_from_json(const json& j,
                                                        std::ostream* warn = &std::cerr) {
  if (!j.is_object() || !j.contains("delta_eta") || !j.contains("bins")) {
    throw std::invalid_argument("distribution JSON needs 'delta_eta' and 'bins'");
  }
  const double width = j.at("delta_eta").get<double>();
  std::vector<TransmittanceBin> bins;
  double total = 0.0;
  for (const auto& e : j.at("bins")) {
    bins.push_back({e.at("eta").get<double>(), e.at("p").get<double>()});
    total += bins.back().p;
  }
  if (bins.empty()) throw std::invalid_argument("distribution JSON has no bins");
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("distribution probabilities sum to " + std::to_string(total));
  }
  if (std::abs(total - 1.0) > 1e-9 && warn != nullptr) {
    *warn << "warning: renormalizing distribution (sum of p = " << total << ")\n";
  }
  for (auto& b : bins) b.p /= total;
  return TransmittanceDistribution(std::move(bins), width, Provenance::empirical);
}

inline json distribution_to_json(const TransmittanceDistribution& d) {
  json bins = json::array();
  for (const auto& b : d.bins()) bins.push_back({{"eta", b.eta}, {"p", b.p}});
  return json{{"delta_eta", d.delta_eta()}, {"bins", std::move(bins)}};
}

inline TransmittanceDistribution load_distribution(const std::string& path,
                                                   std::ostream* warn = &std::cerr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distribution file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return distribution_from_json(j, warn);
}

inline void save_distribution(const std::string& path, const TransmittanceDistribution& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write distribution file: " + path);
  out << distribution_to_json(d).dump(2) << '\n';
}

// Samples file: one transmittance per line, '#' starts a comment, blank lines
// ignored. Parse errors carry the line number.
inline std::vector<double> parse_samples(std::istream& in, const std::string& name) {
  std::vector<double> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double value;
    if (ss >> value) {
      std::string rest;
      if (ss >> rest) {
        throw std::runtime_error(name + ":" + std::to_string(line_no) + ": trailing content '" +
                                 rest + "'");
      }
      if (!(value >= 0.0 && value <= 1.0)) {
        throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                 ": transmittance out of [0,1]");
      }
      samples.push_back(value);
    } else if (!ss.eof()) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": not a number");
    }
  }
  return samples;
}

inline std::vector<double> load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open samples file: " + path);
  return parse_samples(in, path);
}

inline json to_json(const ChannelMoments& m) {
  return json{{"mean_sqrt", m.mean_sqrt},
              {"mean", m.mean},
              {"mean_sqrt_sq", m.mean_sqrt_sq()},
              {"var_sqrt", m.var_sqrt()}};
}

inline json to_json(const KeyRateReport& r) {
  return json{{"i_ab", r.i_ab},
              {"chi_be", r.chi_be},
              {"k", r.k},
              {"lambda1", r.lambda1},
              {"lambda2", r.lambda2},
              {"lambda3", r.lambda3},
              {"moments", to_json(r.moments)},
              {"ps_success", r.ps_success},
              {"k_weighted", r.k_weighted}};
}

inline json to_json(const PSOptimum& o) {
  json j{{"eta_min", o.eta_min},
         {"k_weighted", o.k_weighted},
         {"success_probability", o.success_probability},
         {"report", to_json(o.report)}};
  if (std::isfinite(o.sigma_opt)) j["sigma_opt"] = o.sigma_opt;
  return j;
}

inline json to_json(const SimConfig& cfg) {
  return json{{"v", cfg.v},           {"squeezing", cfg.squeezing()},
              {"chi", cfg.chi},       {"n_points", cfg.n_points},
              {"eta_min", cfg.eta_min}, {"sigma_eta", cfg.sigma_eta},
              {"seed", cfg.seed}};
}

inline json to_json(const SimResult& r, const SimConfig& cfg) {
  json cov = json::array();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) cov.push_back(r.sample.entries(i, j));
  }
  json out{{"config", to_json(cfg)},
           {"retained_count", r.sample.retained},
           {"covariance", std::move(cov)},
           {"physical", r.sample.physical}};
  out["key_rate_report"] = r.report ? to_json(*r.report) : json(nullptr);
  return out;
}

// Round-trip-exact decimal formatting for CSV cells.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Sweep output: '#' metadata lines, one header row, then data rows.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void meta(const std::string& key, const std::string& value) {
    out_ << "# " << key << " = " << value << '\n';
  }
  void meta(const std::string& key, double value) { meta(key, format_double(value)); }

  void header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out_ << (i ? "," : "") << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      out_ << (i ? "," : "") << format_double(values[i]);
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

}  // namespace fadecv::io
