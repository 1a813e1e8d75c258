#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fieldperc/harness.hpp"

// Command-line front end. Flags mirror the flat key-value spec format
// one-to-one (--h-grid <-> h_grid), so a flag set can be replayed from a
// file via `run` and a --config file can be overridden flag by flag.

namespace {

using fieldperc::harness::KeyValueConfig;

// Binds CLI11 options to config keys, remembering which were given so only
// explicit flags override the config file.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> opts;

  void add(CLI::App* app, const std::string& key, const std::string& flag,
           const std::string& desc) {
    opts.emplace_back(key, app->add_option(flag, values[key], desc));
  }

  // flag that stores a fixed value when present (e.g. --no-mc -> mc=0)
  void add_switch(CLI::App* app, const std::string& key,
                  const std::string& fixed, const std::string& flag,
                  const std::string& desc) {
    values[key] = fixed;
    opts.emplace_back(key, app->add_flag(flag, desc));
  }

  void collect_into(KeyValueConfig& cfg) const {
    for (const auto& [key, opt] : opts)
      if (opt->count()) cfg.set(key, values.at(key));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Gaussian free field sampling, excursion-set percolation estimates, "
      "and renormalization certificates on the integer lattice"};
  app.set_version_flag("--version", fieldperc::harness::kVersion);
  // long-only help everywhere, freeing --h for the level flag
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "flat key = value file providing defaults; explicit flags "
                 "override it");
  FlagSet global;
  global.add(&app, "workers", "--workers",
             "worker threads for grid tasks (results do not depend on this)");
  global.add(&app, "out_dir", "--out-dir",
             "directory for artifacts (default $FIELDPERC_OUT_DIR or .)");

  std::map<std::string, FlagSet> flags;

  CLI::App* greens = app.add_subcommand(
      "greens", "lattice Green function at a point, by quadrature, by a "
                "windowed solve, or both");
  {
    FlagSet& f = flags["greens"];
    f.add(greens, "dim", "--dim", "lattice dimension (>= 3)");
    f.add(greens, "point", "--point", "comma-separated coordinates");
    f.add(greens, "tol", "--tol", "quadrature tolerance");
    f.add(greens, "method", "--method", "quadrature | box | both");
  }

  CLI::App* sample = app.add_subcommand(
      "sample", "draw zero-boundary field samples and write a binary dump");
  {
    FlagSet& f = flags["sample"];
    f.add(sample, "dim", "--dim", "lattice dimension");
    f.add(sample, "window", "--window",
          "dump window extents, one value or one per axis");
    f.add(sample, "margin", "--margin",
          "extra boundary sites sampled around the window");
    f.add(sample, "n", "--n", "number of samples");
    f.add(sample, "seed", "--seed", "master seed");
    f.add(sample, "out", "--out", "dump file path");
  }

  CLI::App* estimate = app.add_subcommand(
      "estimate", "Monte Carlo excursion-set estimates over (L, h) grids, "
                  "CSV to stdout");
  {
    FlagSet& f = flags["estimate"];
    f.add(estimate, "dim", "--dim", "lattice dimension");
    f.add(estimate, "what", "--what",
          "crossing | connectivity | hstar | plane");
    f.add(estimate, "L", "--L", "comma-separated window sizes");
    f.add(estimate, "h", "--h", "comma-separated levels");
    f.add(estimate, "h_grid", "--h-grid", "levels as start:step:stop");
    f.add(estimate, "n", "--n", "samples per estimate");
    f.add(estimate, "seed", "--seed",
          "master seed; grid tasks use (seed, task index) streams");
    f.add(estimate, "margin", "--margin",
          "sampling margin in sites, or auto");
    f.add(estimate, "point", "--point",
          "connectivity target, comma-separated");
    f.add(estimate, "plot", "--plot", "write an SVG of curves and fits here");
    f.add(estimate, "out", "--out", "write the CSV here instead of stdout");
  }

  CLI::App* renorm = app.add_subcommand(
      "renorm", "run the level recursion from a seed bound, JSON trace");
  {
    FlagSet& f = flags["renorm"];
    f.add(renorm, "dim", "--dim", "lattice dimension (>= 3)");
    f.add(renorm, "L0", "--L0", "base scale");
    f.add(renorm, "l0", "--l0", "scale ratio (>= 100)");
    f.add(renorm, "h0", "--h0", "seed level");
    f.add(renorm, "nmax", "--nmax", "recursion depth");
    f.add(renorm, "ledger", "--ledger",
          "key = value file overriding ledger constants");
    f.add(renorm, "p0", "--p0",
          "seed bound: analytic, or mc:<n>:<seed> for a crossing estimate "
          "entering at its (k+2)/(n+2) upper edge");
    f.add(renorm, "out", "--out", "write the JSON here instead of stdout");
  }

  CLI::App* slab = app.add_subcommand(
      "slab-cert", "dimension search and gate report for the slab argument");
  {
    FlagSet& f = flags["slab-cert"];
    f.add(slab, "h0", "--h0", "level the dominant field must hold");
    f.add(slab, "L0", "--L0", "block scale");
    f.add(slab, "pcsite", "--pcsite",
          "site percolation threshold; estimated when omitted");
    f.add(slab, "pc_sizes", "--pc-sizes",
          "window sizes for the threshold estimate");
    f.add(slab, "pc_samples", "--pc-samples",
          "samples per size for the threshold estimate");
    f.add(slab, "mc_samples", "--mc-samples", "samples per empirical gate");
    f.add(slab, "seed", "--seed", "master seed for the empirical gates");
    f.add(slab, "mc_dim_cap", "--mc-dim-cap",
          "skip the perturbation gate above this dimension");
    f.add_switch(slab, "mc", "0", "--no-mc", "analytic gates only");
    f.add(slab, "out", "--out", "write the JSON here instead of stdout");
  }

  CLI::App* recipe = app.add_subcommand(
      "recipe", "write a pre-baked experiment spec into the output "
                "directory");
  {
    FlagSet& f = flags["recipe"];
    f.add(recipe, "name", "name",
          "d3-hstar | decay-scan | slab-probe | renorm-trace");
  }

  CLI::App* run = app.add_subcommand(
      "run", "execute a spec file and append a result record to "
             "results.jsonl");
  {
    FlagSet& f = flags["run"];
    f.add(run, "spec", "spec", "spec file produced by hand or by recipe");
    f.add(run, "out", "--out",
          "write the record JSON here instead of stdout");
  }
  std::vector<std::string> overrides;
  run->add_option("--set", overrides,
                  "key=value overriding the spec, repeatable");

  // let --workers / --out-dir / --config appear after the subcommand name
  for (CLI::App* s : {greens, sample, estimate, renorm, slab, recipe, run})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    std::cerr << app.help();
    return 2;
  }
  const std::string name = subs[0]->get_name();

  KeyValueConfig cfg;
  try {
    if (!config_path.empty())
      cfg = KeyValueConfig::parse_file(config_path);
    global.collect_into(cfg);
    flags[name].collect_into(cfg);
    for (const auto& kv : overrides) {
      const auto merged = KeyValueConfig::parse_text(kv);
      cfg.merge_from(merged);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  // --out redirects the payload for every text-emitting subcommand; for
  // `sample` the same key names the binary dump instead and the JSON
  // summary stays on stdout
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  const std::string out_path = cfg.get("out");
  if (name != "sample" && !out_path.empty() && out_path != "-") {
    out_file.open(out_path, std::ios::binary | std::ios::trunc);
    if (!out_file) {
      std::cerr << "error: cannot open for writing: " << out_path << '\n';
      return 2;
    }
    out = &out_file;
  }

  return fieldperc::harness::run_command(name, cfg, *out, std::cerr);
}
