#include "sqmz/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "config.hpp"
#include "sqmz/errors.hpp"
#include "sqmz/experiments.hpp"
#include "sqmz/verification.hpp"

namespace sqmz::cli {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

struct CommonOptions {
  std::uint64_t seed = 1;
  std::string config;
  std::string out_dir = ".";
  std::string threads = "1";
};

struct PhotonOptions {
  std::optional<double> mean_photons;
  std::optional<double> squeeze;
};

struct SurfaceOptions {
  CommonOptions common;
  PhotonOptions photons;
  double eta = 1.0;
  std::vector<double> beta_range{-kHalfPi, kHalfPi};
  std::vector<double> phi_range{-kHalfPi, kHalfPi};
  std::size_t nodes = 101;
  int channel = 1;
  std::string quantity = "probability";
  std::int64_t trials = 10000;
};

struct DiameterOptions {
  CommonOptions common;
  double p0 = 0.9;
  double eta = 1.0;
  std::vector<double> log_range{1.0, 4.0};
  int per_decade = 8;
};

struct EstimateOptions {
  CommonOptions common;
  PhotonOptions photons;
  double eta = 1.0;
  std::string target = "beta";
  double offset = 0.01;
  std::int64_t trials = 10000;
  std::int64_t experiments = 500;
  double theta_in = 0.0;
  double theta_out = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  bool unsafe_offset = false;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::vector<std::string> groups;
};

void add_common(ConfigBinder& binder, CommonOptions& c) {
  binder.option("--seed", c.seed, "Master seed for every random stream");
  binder.option("--config", c.config, "Flat JSON file with snake_case keys");
  binder.option("--out-dir", c.out_dir, "Directory for output files");
  binder.option("--threads", c.threads, "Worker threads, or 'auto'");
  binder.mark_environment("--out-dir");
  binder.mark_environment("--threads");
}

void add_photons(CLI::App& app, ConfigBinder& binder, PhotonOptions& p) {
  CLI::Option* n = binder.option("--N", p.mean_photons, "Mean photon number per mode");
  CLI::Option* r = binder.option("--r", p.squeeze, "Squeeze parameter; N = sinh^2 r");
  n->excludes(r);
  (void)app;
}

unsigned parse_threads(const std::string& text) {
  if (text == "auto") {
    return 0;
  }
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used == text.size() && v >= 1 && v <= 1024) {
      return static_cast<unsigned>(v);
    }
  } catch (const std::exception&) {
  }
  throw ArgumentError("--threads expects a positive integer or 'auto'");
}

/// Resolves N from --N or --r. A flag given on the command line wins over the
/// other one coming from the config file.
double resolve_photons(const CLI::App& app, PhotonOptions& p, double fallback) {
  const bool cmd_n = app.count("--N") > 0;
  const bool cmd_r = app.count("--r") > 0;
  if (cmd_r && !cmd_n) {
    p.mean_photons.reset();
  } else if (cmd_n && !cmd_r) {
    p.squeeze.reset();
  }
  if (p.mean_photons && p.squeeze) {
    throw ArgumentError("N and r are mutually exclusive");
  }
  if (p.squeeze) {
    if (!std::isfinite(*p.squeeze) || *p.squeeze < 0.0) {
      throw ArgumentError("r must be finite and non-negative");
    }
    p.mean_photons = mean_photons_from_squeeze(*p.squeeze);
  } else {
    if (!p.mean_photons) {
      p.mean_photons = fallback;
    }
    if (!std::isfinite(*p.mean_photons) || *p.mean_photons < 0.0) {
      throw ArgumentError("N must be finite and non-negative");
    }
    p.squeeze = squeeze_from_mean_photons(*p.mean_photons);
  }
  return *p.mean_photons;
}

void require_pair(const std::vector<double>& v, const char* name) {
  if (v.size() != 2) {
    throw ArgumentError(std::string(name) + " expects exactly two values");
  }
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const json& resolved,
                    std::uint64_t seed, const std::vector<std::filesystem::path>& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = resolved;
  manifest["config_digest"] = sha256_hex(resolved.dump());
  manifest["master_seed"] = seed;
  manifest["tool_version"] = std::string(tool_version());
  json paths = json::array();
  for (const auto& p : outputs) {
    paths.push_back(p.generic_string());
  }
  manifest["output_paths"] = paths;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

json fit_json(const LogLogFit& fit) {
  return json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"rms_residual", fit.rms_residual},
              {"residuals", fit.residuals}};
}

int cmd_surface(CLI::App& app, ConfigBinder& binder, SurfaceOptions& o, std::ostream& out) {
  const double n = resolve_photons(app, o.photons, 1.0);
  require_pair(o.beta_range, "beta-range");
  require_pair(o.phi_range, "phi-range");
  if (o.channel != 1 && o.channel != 2) {
    throw ArgumentError("channel must be 1 or 2");
  }
  if (o.quantity != "probability" && o.quantity != "rescaled-beta" && o.quantity != "rescaled-phi-minus") {
    throw ArgumentError("quantity must be probability, rescaled-beta or rescaled-phi-minus");
  }
  const unsigned threads = parse_threads(o.common.threads);

  GridSpec grid;
  grid.beta = {o.beta_range[0], o.beta_range[1], o.nodes};
  grid.phi_minus = {o.phi_range[0], o.phi_range[1], o.nodes};

  std::vector<SurfaceNode> nodes;
  std::string column = "P";
  if (o.quantity == "probability") {
    nodes = probability_surface(grid, n, o.eta, channel_from_index(o.channel), threads);
  } else {
    if (o.channel != 1) {
      throw ArgumentError("rescaled variance surfaces use channel 1");
    }
    const Target target = o.quantity == "rescaled-beta" ? Target::beta : Target::phi_minus;
    nodes = rescaled_variance_surface(grid, n, o.eta, o.trials, target, threads);
    column = target == Target::beta ? "rescaled_precision_beta" : "rescaled_precision_phi_minus";
  }

  std::string csv = "beta,phi_minus," + column + "\n";
  csv.reserve(nodes.size() * 64);
  for (const auto& node : nodes) {
    csv += format_number(node.beta);
    csv += ',';
    csv += format_number(node.phi_minus);
    csv += ',';
    csv += format_number(node.value);
    csv += '\n';
  }

  const auto dir = prepare_out_dir(o.common.out_dir);
  const auto path = dir / "surface.csv";
  write_file_atomic(path, csv);
  write_manifest(dir, "surface", binder.resolved(), o.common.seed, {path});
  out << "surface.csv: " << nodes.size() << " rows\n";
  return kExitOk;
}

int cmd_diameters(ConfigBinder& binder, DiameterOptions& o, std::ostream& out) {
  require_pair(o.log_range, "N-log-range");
  if (o.per_decade < 1) {
    throw ArgumentError("per-decade must be at least 1");
  }
  ScalingStudy study;
  study.mean_photons = log_spaced(o.log_range[0], o.log_range[1], o.per_decade);
  study.eta = o.eta;
  study.p0 = o.p0;
  const DiameterScaling result = diameter_scaling(study);

  std::string csv = "N,beta_star,phi_star,error\n";
  std::size_t valid = 0;
  for (const auto& row : result.rows) {
    csv += format_number(row.mean_photons);
    csv += ',';
    if (row.diameters) {
      ++valid;
      csv += format_number(row.diameters->beta_star);
      csv += ',';
      csv += format_number(row.diameters->phi_star);
      csv += ",\n";
    } else {
      csv += ",," + row.error + "\n";
    }
  }

  json slopes;
  slopes["valid_rows"] = valid;
  slopes["total_rows"] = result.rows.size();
  slopes["beta_star"] = result.beta_fit ? fit_json(*result.beta_fit) : json(nullptr);
  slopes["phi_star"] = result.phi_fit ? fit_json(*result.phi_fit) : json(nullptr);

  const auto dir = prepare_out_dir(o.common.out_dir);
  const auto csv_path = dir / "diameters.csv";
  const auto slopes_path = dir / "slopes.json";
  write_file_atomic(csv_path, csv);
  write_file_atomic(slopes_path, slopes.dump(2) + "\n");
  write_manifest(dir, "diameters", binder.resolved(), o.common.seed, {csv_path, slopes_path});

  out << "diameters.csv: " << result.rows.size() << " rows, " << valid << " valid\n";
  if (valid < 2) {
    throw DomainError("fewer than two rows are inside the level-curve domain");
  }
  out << "beta_star slope " << format_number(result.beta_fit->slope) << ", phi_star slope "
      << format_number(result.phi_fit->slope) << "\n";
  return kExitOk;
}

int cmd_estimate(CLI::App& app, ConfigBinder& binder, EstimateOptions& o, std::ostream& out) {
  CampaignSpec spec;
  spec.config.mean_photons = resolve_photons(app, o.photons, 20.0);
  spec.config.eta = o.eta;
  spec.config.theta_in = o.theta_in;
  spec.config.theta_out = o.theta_out;
  spec.config.phi1 = o.phi1;
  spec.config.phi2 = o.phi2;
  spec.target = target_from_string(o.target);
  spec.offset = o.offset;
  spec.trials = o.trials;
  spec.experiments = o.experiments;
  spec.master_seed = o.common.seed;
  spec.threads = parse_threads(o.common.threads);

  if (!o.unsafe_offset && !offset_is_safe(spec)) {
    std::ostringstream msg;
    msg << "offset " << format_number(spec.offset) << " is closer than 5 predicted standard deviations ("
        << format_number(predicted_standard_deviation(spec))
        << ") to the peak, where sign folding biases the estimator; pass --unsafe-offset to run anyway";
    throw ArgumentError(msg.str());
  }

  const CampaignSummary s = mc_campaign(spec);

  std::string csv = "experiment_id,estimate,observed_fraction,status\n";
  for (const auto& rec : s.records) {
    csv += std::to_string(rec.id);
    csv += ',';
    csv += format_number(rec.result.estimate);
    csv += ',';
    csv += format_number(rec.result.observed_fraction);
    csv += ',';
    csv += std::string(to_string(rec.result.status));
    csv += '\n';
  }

  json summary;
  summary["target"] = std::string(to_string(spec.target));
  summary["mean_photons"] = spec.config.mean_photons;
  summary["eta"] = spec.config.eta;
  summary["trials"] = spec.trials;
  summary["experiments"] = spec.experiments;
  summary["true_value"] = s.true_value;
  summary["nuisance"] = s.nuisance;
  summary["detection_probability"] = s.detection_probability;
  summary["mean_estimate"] = s.mean_estimate;
  summary["sample_variance"] = s.sample_variance;
  summary["predicted_variance"] = s.predicted_variance;
  summary["variance_ratio"] = s.variance_ratio;
  summary["standard_error"] = s.standard_error;
  summary["clamped_low"] = s.clamped_low;
  summary["clamped_high"] = s.clamped_high;
  summary["clamp_count"] = s.clamped_low + s.clamped_high;
  summary["clamp_fraction"] = s.clamp_fraction;
  summary["excessive_clamping"] = s.excessive_clamping;
  summary["leading_term"] = s.leading_term;
  summary["leading_term_kind"] = spec.target == Target::beta ? "heisenberg" : "standard_quantum_limit";
  summary["loss_factor"] = s.loss_factor;
  summary["unsafe_offset"] = o.unsafe_offset;

  const auto dir = prepare_out_dir(o.common.out_dir);
  const auto csv_path = dir / "mc.csv";
  const auto summary_path = dir / "mc_summary.json";
  write_file_atomic(csv_path, csv);
  write_file_atomic(summary_path, summary.dump(2) + "\n");
  write_manifest(dir, "estimate", binder.resolved(), o.common.seed, {csv_path, summary_path});

  out << "mc.csv: " << s.records.size() << " experiments\n"
      << "sample variance " << format_number(s.sample_variance) << ", predicted "
      << format_number(s.predicted_variance) << ", ratio " << format_number(s.variance_ratio) << "\n";
  if (s.excessive_clamping) {
    out << "warning: " << (s.clamped_low + s.clamped_high) << " experiments clamped at the domain boundary\n";
  }
  return kExitOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  const auto& known = verification_groups();
  std::vector<std::string> selected = o.groups.empty() ? known : o.groups;
  for (const auto& g : selected) {
    if (std::find(known.begin(), known.end(), g) == known.end()) {
      throw ArgumentError("unknown verification group '" + g + "'");
    }
  }
  bool all = true;
  out << std::left << std::setw(22) << "group" << std::setw(8) << "result" << std::setw(8) << "cases"
      << std::setw(24) << "max_deviation" << "tolerance\n";
  for (const auto& g : selected) {
    const GroupReport r = run_verification_group(g, o.seed);
    all = all && r.passed;
    out << std::left << std::setw(22) << r.name << std::setw(8) << (r.passed ? "PASS" : "FAIL") << std::setw(8)
        << r.cases << std::setw(24) << format_number(r.max_deviation) << format_number(r.tolerance) << "\n";
  }
  return all ? kExitOk : kExitVerification;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Squeezed-light Mach-Zehnder phase estimation"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  SurfaceOptions surface;
  CLI::App* surface_cmd = app.add_subcommand("surface", "Detection probability or rescaled precision on a grid");
  ConfigBinder surface_binder(*surface_cmd);
  add_common(surface_binder, surface.common);
  add_photons(*surface_cmd, surface_binder, surface.photons);
  surface_binder.option("--eta", surface.eta, "Detector efficiency in (0, 1]");
  surface_binder.option("--beta-range", surface.beta_range, "beta axis bounds (radians)")->expected(2);
  surface_binder.option("--phi-range", surface.phi_range, "phi_minus axis bounds (radians)")->expected(2);
  surface_binder.option("--nodes", surface.nodes, "Nodes per axis");
  surface_binder.option("--channel", surface.channel, "Anti-squeezed channel, 1 or 2");
  surface_binder.option("--quantity", surface.quantity, "probability | rescaled-beta | rescaled-phi-minus");
  surface_binder.option("--trials", surface.trials, "Trials per experiment for rescaled quantities");

  DiameterOptions diam;
  CLI::App* diam_cmd = app.add_subcommand("diameters", "Level-curve diameters against N");
  ConfigBinder diam_binder(*diam_cmd);
  add_common(diam_binder, diam.common);
  diam_binder.option("--P0", diam.p0, "Level of the curve, in (0, 1)");
  diam_binder.option("--eta", diam.eta, "Detector efficiency in (0, 1]");
  diam_binder.option("--N-log-range", diam.log_range, "log10 bounds of N")->expected(2);
  diam_binder.option("--per-decade", diam.per_decade, "Points per decade of N");

  EstimateOptions est;
  CLI::App* est_cmd = app.add_subcommand("estimate", "Monte Carlo maximum-likelihood campaign");
  ConfigBinder est_binder(*est_cmd);
  add_common(est_binder, est.common);
  add_photons(*est_cmd, est_binder, est.photons);
  est_binder.option("--eta", est.eta, "Detector efficiency in (0, 1]");
  est_binder.option("--target", est.target, "beta | phi-minus");
  est_binder.option("--offset", est.offset, "True target value, measured from the peak");
  est_binder.option("--trials", est.trials, "Trials per experiment");
  est_binder.option("--experiments", est.experiments, "Independent experiments");
  est_binder.option("--theta-in", est.theta_in, "Input squeezing angle (radians)");
  est_binder.option("--theta-out", est.theta_out, "Projection squeezing angle (radians)");
  est_binder.option("--phi1", est.phi1, "Arm-1 phase (radians)");
  est_binder.option("--phi2", est.phi2, "Arm-2 phase (radians)");
  est_binder.flag("--unsafe-offset", est.unsafe_offset, "Run even if the offset violates the safety rule");

  VerifyOptions verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the numerical oracle suites");
  verify_cmd->add_option("--seed", verify.seed, "Seed for randomized cases")->capture_default_str();
  verify_cmd->add_option("--group", verify.groups, "Run only the named group (repeatable)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (surface_cmd->parsed()) {
      if (!surface.common.config.empty()) {
        surface_binder.apply_config_file(surface.common.config);
      }
      return cmd_surface(*surface_cmd, surface_binder, surface, out);
    }
    if (diam_cmd->parsed()) {
      if (!diam.common.config.empty()) {
        diam_binder.apply_config_file(diam.common.config);
      }
      return cmd_diameters(diam_binder, diam, out);
    }
    if (est_cmd->parsed()) {
      if (!est.common.config.empty()) {
        est_binder.apply_config_file(est.common.config);
      }
      return cmd_estimate(*est_cmd, est_binder, est, out);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(verify, out);
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace sqmz::cli
