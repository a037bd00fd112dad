#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "snake/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"snakectl: run a named experiment, write CSVs and manifest.txt"};
  std::string config_path;
  snake::RunOptions opts;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  bool nondeterministic = false;
  app.add_option("--config", config_path, "key = value config file (supports include)");
  app.add_option("--seed", opts.seed, "root seed")->capture_default_str();
  app.add_option("--workers", opts.workers, "OpenMP threads (0 = default)")->capture_default_str();
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  app.add_option("--set", overrides, "override a config key, key=value");
  auto* det = app.add_flag("--deterministic", opts.deterministic, "ordered reductions (default on)");
  app.add_flag("--fast", nondeterministic, "allow unordered reductions")->excludes(det);

  std::string name;
  app.add_option("experiment", name, "experiment name, or 'list'")->required();

  CLI11_PARSE(app, argc, argv);
  if (nondeterministic) opts.deterministic = false;
  opts.out_dir = out_dir;

  if (name == "list") {
    for (const auto& n : snake::experiment_names()) {
      std::cout << n << ":";
      for (const auto& k : snake::experiment_keys(n)) std::cout << " " << k;
      std::cout << "\n";
    }
    return 0;
  }

  try {
    snake::Config cfg = config_path.empty() ? snake::Config{} : snake::Config::from_file(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + o + "'");
      cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    const snake::RunManifest m = snake::run(name, cfg, opts);
    for (const auto& c : m.criteria)
      std::printf("%s %s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::printf("wall %.1fs, manifest %s\n", m.wall_seconds, (opts.out_dir / "manifest.txt").c_str());
    return m.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
