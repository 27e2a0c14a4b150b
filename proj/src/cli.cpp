#include "dgue/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dgue/edges.hpp"
#include "dgue/errors.hpp"
#include "dgue/kernels.hpp"
#include "dgue/measure.hpp"
#include "dgue/rmt.hpp"
#include "dgue/subordination.hpp"

namespace dgue {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = DGUE_VERSION;
constexpr int kDensityPoints = 801;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::string csv_preamble(const RunConfig& cfg) {
  return "# version=" + std::string(kVersion) + "\n# config=" + cfg.to_json().dump() + "\n";
}

nlohmann::json envelope(const RunConfig& cfg) {
  return {{"version", kVersion}, {"config", cfg.to_json()}};
}

DeformationModel load(const RunConfig& cfg) {
  if (cfg.model.empty()) throw ValidationError("--model is required");
  const fs::path path(cfg.model);
  if (path.extension() == ".csv") {
    if (!cfg.n) throw ValidationError("CSV models need --N");
    std::optional<fs::path> spikes;
    if (!cfg.spikes.empty()) spikes = fs::path(cfg.spikes);
    return load_model_csv(path, spikes, *cfg.n);
  }
  auto model = load_model_file(path);
  if (cfg.n && *cfg.n != model.n()) model = model.with_n(*cfg.n);
  return model;
}

std::vector<EdgeReport> select_reports(const std::vector<EdgeReport>& all, const RunConfig& cfg) {
  std::vector<EdgeReport> out;
  for (const auto& r : all) {
    const bool match = (cfg.kind == "edge" && (r.kind == EdgeKind::kRightEdge || r.kind == EdgeKind::kLeftEdge)) ||
                       (cfg.kind == "outlier" && r.kind == EdgeKind::kOutlier) ||
                       (cfg.kind == "merge" && r.kind == EdgeKind::kMergePoint);
    if (match) out.push_back(r);
  }
  if (out.empty()) throw ValidationError("the model has no boundary feature of kind '" + cfg.kind + "'");
  if (cfg.select) {
    if (*cfg.select < 0 || static_cast<std::size_t>(*cfg.select) >= out.size()) {
      throw ValidationError("--select " + std::to_string(*cfg.select) + " is out of range (" +
                            std::to_string(out.size()) + " candidates)");
    }
    return {out[*cfg.select]};
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (n && (*n < 1 || *n > 5000)) throw ValidationError("--N must lie in [1, 5000]");
  if (trials > 1000000) throw ValidationError("--trials must not exceed 1e6");
  if (k < 1 || k > 6) throw ValidationError("--k must lie in [1, 6]");
  if (window < 0.0 || window > 20.0) throw ValidationError("--window must lie in [0, 20]");
  if (!(epsilon > 0.0)) throw ValidationError("--epsilon must be positive");
  if (threshold && !(*threshold > 0.0 && *threshold <= 1.0)) throw ValidationError("--threshold must lie in (0, 1]");
  if (quartic && !(*quartic > 0.0)) throw ValidationError("--quartic must be positive");
  if (m < 10 || m > 400) throw ValidationError("--m must lie in [10, 400]");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["model"] = model;
  j["spikes"] = spikes;
  j["out"] = out;
  j["seed"] = seed;
  j["trials"] = trials;
  j["N"] = n ? nlohmann::json(*n) : nlohmann::json(nullptr);
  j["kind"] = kind;
  j["id"] = id;
  j["k"] = k;
  j["grid"] = grid;
  j["window"] = window;
  j["threshold"] = threshold ? nlohmann::json(*threshold) : nlohmann::json(nullptr);
  j["epsilon"] = epsilon;
  j["quartic"] = quartic ? nlohmann::json(*quartic) : nlohmann::json(nullptr);
  j["select"] = select ? nlohmann::json(*select) : nlohmann::json(nullptr);
  j["m"] = m;
  return j;
}

int cmd_analyze(const RunConfig& cfg) {
  cfg.validate();
  const auto model = load(cfg);
  const BianeMap limit(model.nu());
  const BianeMap finite(model.spectral_measure());
  const auto reports = analyze_edges(model);
  const fs::path out(cfg.out);

  auto edges = envelope(cfg);
  edges["model"] = to_json(model);
  edges["max_bulk_distance"] = model.max_bulk_distance();
  edges["edges"] = nlohmann::json::array();
  for (const auto& r : reports) edges["edges"].push_back(to_json(r));
  write_file(out / "edges.json", edges.dump(2) + "\n");
  write_file(out / "edges.csv", csv_preamble(cfg) + edges_csv(reports));

  auto support = envelope(cfg);
  support["support"] = support_to_json(limit);
  support["finite_n_support"] = support_to_json(finite);
  write_file(out / "support.json", support.dump(2) + "\n");

  const auto& comps = limit.support_components();
  const double lo = comps.front().u_range.lo;
  const double hi = comps.back().u_range.hi;
  const double margin = 0.1 * (hi - lo);
  std::vector<double> us(kDensityPoints), ps(kDensityPoints);
  for (int i = 0; i < kDensityPoints; ++i) us[i] = lo - margin + (hi - lo + 2.0 * margin) * i / (kDensityPoints - 1);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < kDensityPoints; ++i) ps[i] = limit.density_at(us[i]);
  std::string csv = csv_preamble(cfg) + "u,p\n";
  for (int i = 0; i < kDensityPoints; ++i) csv += fmt17(us[i]) + "," + fmt17(ps[i]) + "\n";
  write_file(out / "density.csv", csv);

  std::cout << "analyze: " << reports.size() << " boundary features, " << comps.size()
            << " support component(s); reports in " << out.string() << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  cfg.validate();
  const auto model = load(cfg);
  const fs::path out(cfg.out);
  auto summary = envelope(cfg);
  summary["results"] = nlohmann::json::array();
  bool all_passed = true;

  auto emit = [&](const std::string& tag, const nlohmann::json& body, const std::string* samples) {
    auto doc = envelope(cfg);
    doc["result"] = body;
    write_file(out / ("result_" + tag + ".json"), doc.dump(2) + "\n");
    if (samples) write_file(out / ("samples_" + tag + ".csv"), csv_preamble(cfg) + *samples);
    summary["results"].push_back({{"tag", tag}, {"passed", body["passed"]}});
    all_passed = all_passed && body["passed"].get<bool>();
  };

  if (cfg.kind == "localization") {
    const auto res = localization_check(model, cfg.trials, cfg.epsilon, cfg.seed);
    const double need = cfg.threshold.value_or(0.99);
    nlohmann::json body = {{"statistic", "localization"},
                           {"fraction", res.fraction},
                           {"epsilon", cfg.epsilon},
                           {"required_fraction", need},
                           {"trials", cfg.trials},
                           {"seed", cfg.seed},
                           {"passed", res.fraction >= need}};
    std::string csv = "trial,max_distance\n";
    for (std::size_t t = 0; t < res.max_distance.size(); ++t) {
      csv += std::to_string(t) + "," + fmt17(res.max_distance[t]) + "\n";
    }
    emit("localization", body, &csv);
    std::cout << "localization: fraction " << fmt17(res.fraction) << " within " << cfg.epsilon << "\n";
  } else if (cfg.kind == "edge" || cfg.kind == "outlier" || cfg.kind == "merge") {
    const auto reports = select_reports(analyze_edges(model), cfg);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& rep = reports[i];
      ExperimentResult res;
      if (cfg.kind == "edge") {
        res = run_edge_experiment(model, rep, cfg.k, cfg.trials, cfg.seed, cfg.threshold.value_or(0.05));
      } else if (cfg.kind == "outlier") {
        res = run_outlier_experiment(model, rep, cfg.trials, cfg.seed, cfg.threshold.value_or(0.05));
      } else {
        res = run_merge_experiment(model, rep, cfg.window, cfg.trials, cfg.seed, cfg.threshold.value_or(0.15),
                                   cfg.quartic.value_or(-1.0));
      }
      auto body = to_json(res);
      body["report"] = to_json(rep);
      const std::string csv = samples_csv(res);
      const std::string tag = cfg.kind + "_" + std::to_string(i);
      emit(tag, body, &csv);
      std::cout << tag << ": " << (res.passed ? "pass" : "FAIL");
      for (double d : res.ks) std::cout << " ks=" << fmt17(d);
      if (cfg.kind == "merge") {
        std::cout << " mean=" << fmt17(res.details["mean_count"].get<double>())
                  << " integral=" << fmt17(res.details["kernel_integral"].get<double>());
      }
      std::cout << "\n";
    }
  } else {
    throw ValidationError("--kind must be edge, outlier, merge or localization");
  }
  summary["passed"] = all_passed;
  write_file(out / "verify.json", summary.dump(2) + "\n");
  return all_passed ? kExitOk : kExitThreshold;
}

int cmd_kernel(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.grid.empty()) throw ValidationError("--grid lo:hi:step is required");
  const auto grid = parse_grid(cfg.grid);
  KernelTable table;
  if (cfg.id == "airy") {
    table = tabulate_airy(grid);
  } else if (cfg.id == "tw") {
    if (cfg.k > 4) throw ValidationError("tw supports k <= 4");
    table = tabulate_tw(grid, cfg.k, cfg.m);
  } else if (cfg.id == "gk") {
    table = tabulate_gk(grid, cfg.k);
  } else if (cfg.id == "pearcey") {
    if (std::max(std::abs(grid.lo), std::abs(grid.hi)) > 20.0) throw ValidationError("pearcey grid must lie in [-20, 20]");
    table = tabulate_pearcey(grid, cfg.quartic.value_or(1.0));
  } else {
    throw ValidationError("--id must be airy, tw, gk or pearcey");
  }
  const fs::path out = fs::path(cfg.out).extension() == ".csv" ? fs::path(cfg.out)
                                                               : fs::path(cfg.out) / ("kernel_" + cfg.id + ".csv");
  write_file(out, csv_preamble(cfg) + table.to_csv());
  std::cout << "kernel " << cfg.id << ": " << table.rows.size() << " rows written to " << out.string() << "\n";
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Deformed GUE spectral edges: analysis, limiting kernels and Monte Carlo verification"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "model JSON (or measure CSV with --N)");
    sub->add_option("--spikes", cfg.spikes, "theta,k sidecar for CSV models");
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    sub->add_option("--N", cfg.n, "override the matrix size N");
  };
  auto* analyze = app.add_subcommand("analyze", "support, density and edge reports");
  add_common(analyze);
  auto* verify = app.add_subcommand("verify", "Monte Carlo check of one regime");
  add_common(verify);
  verify->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  verify->add_option("--trials", cfg.trials, "number of matrices")->capture_default_str();
  verify->add_option("--kind", cfg.kind, "edge | outlier | merge | localization")->capture_default_str();
  verify->add_option("--k", cfg.k, "number of extreme eigenvalues (edge)")->capture_default_str();
  verify->add_option("--window", cfg.window, "Pearcey window half-width s")->capture_default_str();
  verify->add_option("--threshold", cfg.threshold, "KS bound, relative tolerance or required fraction");
  verify->add_option("--epsilon", cfg.epsilon, "localization distance")->capture_default_str();
  verify->add_option("--quartic", cfg.quartic, "Pearcey quartic coefficient (default kappa^8/24)");
  verify->add_option("--select", cfg.select, "run only the i-th feature of the kind");
  auto* kernel = app.add_subcommand("kernel", "tabulate a limiting kernel or distribution");
  kernel->add_option("--id", cfg.id, "airy | tw | gk | pearcey")->capture_default_str();
  kernel->add_option("--grid", cfg.grid, "lo:hi:step");
  kernel->add_option("--k", cfg.k, "order for tw / gk")->capture_default_str();
  kernel->add_option("--quartic", cfg.quartic, "Pearcey quartic coefficient (default 1)");
  kernel->add_option("--m", cfg.m, "Nystrom nodes for tw")->capture_default_str();
  kernel->add_option("--out", cfg.out, "output directory or .csv path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (analyze->parsed()) {
      cfg.command = "analyze";
      return cmd_analyze(cfg);
    }
    if (verify->parsed()) {
      cfg.command = "verify";
      return cmd_verify(cfg);
    }
    cfg.command = "kernel";
    return cmd_kernel(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IllConditionedError& e) {
    std::cerr << "ill-conditioned: " << e.what() << "\n";
    return kExitIllConditioned;
  } catch (const ConvergenceError& e) {
    std::cerr << "ill-conditioned: " << e.what() << "\n";
    return kExitIllConditioned;
  } catch (const NotFoundError& e) {
    std::cerr << "ill-conditioned: " << e.what() << "\n";
    return kExitIllConditioned;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace dgue
