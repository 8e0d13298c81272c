#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lse/lse.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> tol;
};

struct Failure {
  int code;
  std::string what;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Failure{LSE_ERR_IO, "cannot read " + p.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Failure{LSE_ERR_IO, "cannot write " + tmp.string()};
    out << text;
    if (!out) throw Failure{LSE_ERR_IO, "write failed for " + tmp.string()};
  }
  fs::rename(tmp, p);
}

void check(lse_status s) {
  if (s != LSE_OK) throw Failure{s, lse_last_error()};
}

std::string take(char* s) {
  std::string out(s ? s : "");
  lse_string_free(s);
  return out;
}

json load_config(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Failure{LSE_ERR_INVALID_ARGUMENT, path.string() + ": " + e.what()};
  }
}

void apply_tol(json& cfg, const Overrides& ov) {
  if (!ov.tol) return;
  cfg["solver"]["tol"] = *ov.tol;
  if (cfg.contains("grid") && cfg["grid"].is_object()) cfg["grid"]["tol"] = *ov.tol;
}

using ObsPtr = std::unique_ptr<lse_observation, decltype(&lse_observation_free)>;

// "signal" (CSV path, relative to the config), "observation" (JSON path), "data" (inline
// observation JSON) or "generate" (generator config).
ObsPtr load_observation(const json& cfg, const fs::path& base, const Overrides& ov) {
  lse_observation* h = nullptr;
  if (cfg.contains("signal")) {
    const fs::path p = base / cfg.at("signal").get<std::string>();
    check(lse_observation_from_csv(read_text(p).c_str(), cfg.value("M", 0), &h));
  } else if (cfg.contains("observation")) {
    const fs::path p = base / cfg.at("observation").get<std::string>();
    check(lse_observation_from_json(read_text(p).c_str(), &h));
  } else if (cfg.contains("data")) {
    check(lse_observation_from_json(cfg.at("data").dump().c_str(), &h));
  } else if (cfg.contains("generate")) {
    const json& g = cfg.at("generate");
    const std::uint64_t seed = ov.seed.value_or(g.value("seed", std::uint64_t{1}));
    check(lse_observation_generate(g.dump().c_str(), seed, &h));
  } else {
    throw Failure{LSE_ERR_INVALID_ARGUMENT, "config needs \"signal\", \"observation\", \"data\" or \"generate\""};
  }
  return ObsPtr(h, lse_observation_free);
}

using Call = lse_status (*)(const lse_observation*, const char*, char**);

int run_single(const fs::path& config, const fs::path& out, const Overrides& ov, Call call,
               const std::string& name) {
  json cfg = load_config(config);
  apply_tol(cfg, ov);
  const ObsPtr obs = load_observation(cfg, config.parent_path(), ov);
  char* result = nullptr;
  check(call(obs.get(), cfg.dump().c_str(), &result));
  const json j = json::parse(take(result));
  write_text(out / (name + ".json"), j.dump(1) + "\n");
  std::cout << "wrote " << (out / (name + ".json")).string() << "\n";
  return 0;
}

int cmd_gen(const fs::path& config, const fs::path& out, const Overrides& ov) {
  json cfg = load_config(config);
  if (cfg.contains("generate")) cfg = cfg.at("generate");
  const std::uint64_t seed = ov.seed.value_or(cfg.value("seed", std::uint64_t{1}));
  lse_observation* h = nullptr;
  check(lse_observation_generate(cfg.dump().c_str(), seed, &h));
  const ObsPtr obs(h, lse_observation_free);
  char* csv = nullptr;
  char* js = nullptr;
  check(lse_observation_to_csv(obs.get(), &csv));
  const std::string csv_text = take(csv);
  check(lse_observation_to_json(obs.get(), &js));
  const std::string json_text = take(js);
  write_text(out / "signal.csv", csv_text);
  write_text(out / "observation.json", json::parse(json_text).dump(1) + "\n");
  int M = 0, L = 0;
  check(lse_observation_size(obs.get(), &M, &L));
  std::cout << "M=" << M << " L=" << L << " seed=" << seed << " -> " << out.string() << "\n";
  return 0;
}

int cmd_certify(const fs::path& config, const fs::path& out, const Overrides& ov) {
  json cfg = load_config(config);
  apply_tol(cfg, ov);
  const ObsPtr obs = load_observation(cfg, config.parent_path(), ov);
  char* result = nullptr;
  check(lse_certify(obs.get(), cfg.dump().c_str(), &result));
  const json j = json::parse(take(result));
  write_text(out / "certificate.json", j.dump(1) + "\n");
  const bool ok = j.at("dual_ok").get<bool>() && j.at("psd_ok").get<bool>();
  std::printf("dual max %.6g, Q eig min %.3g max %.3g: %s\n", j.at("dual_max").get<double>(),
              j.at("q_min_eig").get<double>(), j.at("q_max_eig").get<double>(),
              ok ? "certified" : "NOT certified");
  return ok ? 0 : 3;
}

// One experiment config, or {"experiments": [path | object, ...]}.
int cmd_bench(const fs::path& config, const fs::path& out, const Overrides& ov, bool large) {
  json cfg = load_config(config);
  std::vector<std::pair<json, fs::path>> experiments;
  if (cfg.contains("experiments")) {
    for (const auto& e : cfg.at("experiments")) {
      if (e.is_string()) {
        const fs::path p = config.parent_path() / e.get<std::string>();
        experiments.emplace_back(load_config(p), p);
      } else {
        experiments.emplace_back(e, config);
      }
    }
  } else {
    experiments.emplace_back(cfg, config);
  }

  bool all_pass = true;
  int ran = 0;
  for (auto& [e, path] : experiments) {
    if (e.value("profile", "default") == "large" && !large) {
      std::cout << "skip " << e.value("scenario", path.stem().string()) << " (needs --large)\n";
      continue;
    }
    if (ov.seed) e["seed"] = *ov.seed;
    if (ov.trials) e["trials"] = *ov.trials;
    apply_tol(e, ov);
    const std::string scenario = e.value("scenario", path.stem().string());
    e["scenario"] = scenario;
    const fs::path dir = experiments.size() > 1 ? out / scenario : out;
    char* summary = nullptr;
    int passed = 0;
    check(lse_run_experiment(e.dump().c_str(), dir.string().c_str(), &passed, &summary));
    const json s = json::parse(take(summary));
    ++ran;
    std::cout << "== " << scenario << "\n";
    for (const auto& row : s.at("summary")) {
      auto num = [&](const char* k) {
        if (row.at(k).is_null()) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", row.at(k).get<double>());
        return std::string(buf);
      };
      std::printf("  x=%-8g %-28s n=%-3d mse=%-12s order=%-9s resolve=%-9s %.0f ms\n",
                  row.at("x").get<double>(), row.at("method").get<std::string>().c_str(),
                  row.at("n").get<int>(), num("mse_mean").c_str(), num("order_rate").c_str(),
                  num("resolve_rate").c_str(), row.at("wall_ms_mean").get<double>());
    }
    for (const auto& c : s.at("checks")) {
      const bool pass = c.at("pass").get<bool>();
      const bool acc = c.at("acceptance").get<bool>();
      std::cout << "  " << (pass ? "PASS" : "FAIL") << (acc ? "" : " (info)") << "  "
                << c.at("name").get<std::string>() << ": " << c.at("detail").get<std::string>() << "\n";
    }
    all_pass = all_pass && passed == 1;
  }
  std::cout << ran << " experiment(s); acceptance " << (all_pass ? "passed" : "FAILED") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gridless line spectral estimation"};
  app.set_version_flag("--version", std::string(lse_version()));
  app.require_subcommand(1);

  Overrides ov;
  std::uint64_t seed = 0;
  int trials = 0;
  double tol = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* trials_opt = app.add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
  auto* tol_opt = app.add_option("--tol", tol, "Override the solver tolerances")->check(CLI::PositiveNumber);
  for (auto* o : {seed_opt, trials_opt, tol_opt}) o->configurable(false);

  std::string config;
  std::string out = "out";
  bool large = false;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"gen", "Generate a signal (signal.csv, observation.json)"},
      {"solve", "Gridless atomic-norm denoising"},
      {"gls", "Gridless SPICE estimate, optionally with the equivalence check"},
      {"post", "Covariance cleaning, SORTE and root-MUSIC"},
      {"grid", "Grid l1 baseline"},
      {"bench", "Monte-Carlo experiments with checks"},
      {"certify", "Dual certificate of a Lasso solve"},
  };
  for (const Sub& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    if (std::string(s.name) == "bench") sub->add_flag("--large", large, "Also run large-profile experiments");
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count()) ov.seed = seed;
  if (trials_opt->count()) ov.trials = trials;
  if (tol_opt->count()) ov.tol = tol;

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "gen") return cmd_gen(config, out, ov);
    if (cmd == "solve") return run_single(config, out, ov, lse_solve, "solve");
    if (cmd == "gls") return run_single(config, out, ov, lse_gls, "gls");
    if (cmd == "post") return run_single(config, out, ov, lse_postprocess, "post");
    if (cmd == "grid") return run_single(config, out, ov, lse_grid, "grid");
    if (cmd == "certify") return cmd_certify(config, out, ov);
    if (cmd == "bench") return cmd_bench(config, out, ov, large);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what << "\n";
    return f.code == 0 ? 1 : 10 + f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
