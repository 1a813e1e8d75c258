#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldperc/gff.hpp"
#include "fieldperc/greens.hpp"
#include "fieldperc/harness.hpp"
#include "fieldperc/lattice.hpp"
#include "fieldperc/perc.hpp"
#include "fieldperc/renorm.hpp"
#include "json.hpp"

// Subcommand implementations. Each handler reads a flat key-value config
// whose keys mirror the long command-line flags, writes its payload (JSON
// or CSV) to `out`, and returns a process exit code. Grid commands fan out
// over a work pool with per-task seeds derived from (seed, task index), so
// the payload bytes are independent of the worker count.

namespace fieldperc::harness {

namespace {

using nlohmann::ordered_json;

std::string iso_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string output_dir(const KeyValueConfig& cfg) {
  if (cfg.has("out_dir")) return cfg.get("out_dir");
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

std::string joined(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("short write: " + path);
}

std::string hex_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

lattice::Point parse_point(const std::string& text, int d) {
  const auto coords = parse_long_list(text);
  if (coords.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("point needs exactly " + std::to_string(d) +
                                " coordinates, got " +
                                std::to_string(coords.size()));
  return lattice::Point(coords.begin(), coords.end());
}

// Levels from `h` (comma list) or `h_grid` (start:step:stop), never both.
std::vector<double> parse_levels(const KeyValueConfig& cfg) {
  const bool has_h = cfg.has("h");
  const bool has_grid = cfg.has("h_grid");
  if (has_h && has_grid)
    throw std::invalid_argument("give either h or h_grid, not both");
  if (has_h) return parse_double_list(cfg.get("h"));
  if (has_grid) return parse_grid(cfg.get("h_grid"));
  return {};
}

std::vector<long> parse_sizes(const KeyValueConfig& cfg) {
  if (!cfg.has("L")) return {};
  return parse_long_list(cfg.get("L"));
}

void emit_json(std::ostream& out, const ordered_json& j) {
  out << j.dump(2) << '\n';
}

// --- greens -----------------------------------------------------------------

int cmd_greens(const KeyValueConfig& cfg, std::ostream& out, std::ostream&) {
  const int d = static_cast<int>(cfg.get_long("dim", 3));
  if (d < 3) throw std::invalid_argument("greens: need dim >= 3");
  lattice::Point x(d, 0);
  if (cfg.has("point")) x = parse_point(cfg.get("point"), d);
  const double tol = cfg.get_double("tol", 1e-10);
  const std::string method = cfg.get("method", "quadrature");
  if (method != "quadrature" && method != "box" && method != "both")
    throw std::invalid_argument("method must be quadrature, box, or both");

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "greens";
  j["d"] = d;
  j["point"] = std::vector<long long>(x.begin(), x.end());
  j["method"] = method;
  if (method == "quadrature" || method == "both") {
    const auto q = greens::green_quadrature(d, x, tol);
    if (method == "both") {
      j["quadrature"] = {{"value", q.value}, {"error", q.error}};
    } else {
      j["value"] = q.value;
      j["error"] = q.error;
    }
  }
  if (method == "box" || method == "both") {
    const auto b = greens::green_boxsolve(d, x);
    if (method == "both") {
      j["box"] = {{"value", b.value}, {"error", b.error}};
      j["difference"] = j["quadrature"]["value"].get<double>() - b.value;
    } else {
      j["value"] = b.value;
      j["error"] = b.error;
    }
  }
  emit_json(out, j);
  return 0;
}

// --- sample -----------------------------------------------------------------

int cmd_sample(const KeyValueConfig& cfg, std::ostream& out, std::ostream&) {
  const int d = static_cast<int>(cfg.get_long("dim", 3));
  if (d < 1) throw std::invalid_argument("sample: need dim >= 1");
  auto extents = parse_long_list(cfg.get("window", "20"));
  if (extents.size() == 1) extents.assign(d, extents[0]);
  if (extents.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("window needs 1 or dim extents");
  for (const long e : extents)
    if (e < 1) throw std::invalid_argument("window extents must be >= 1");
  const long margin = cfg.get_long("margin", 8);
  if (margin < 0) throw std::invalid_argument("margin must be >= 0");
  const std::uint64_t n = cfg.get_u64("n", 1);
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::string path =
      cfg.has("out") ? cfg.get("out") : joined(output_dir(cfg), "sample.gff");

  // Field with zero boundary on the window grown by `margin` on every side;
  // the dump keeps the restriction to the requested box.
  lattice::Box big;
  lattice::Box report;
  for (int a = 0; a < d; ++a) {
    big.lo.push_back(0);
    big.hi.push_back(extents[a] + 2 * margin - 1);
    report.lo.push_back(margin);
    report.hi.push_back(margin + extents[a] - 1);
  }
  const lattice::Window window(big);
  const lattice::Window view(report);
  gff::BoxSampler sampler(window);

  FieldDump dump;
  dump.d = d;
  dump.extents.assign(extents.begin(), extents.end());
  dump.count = n;
  dump.seed = seed;
  dump.values.reserve(view.size() * n);
  double sum = 0.0;
  lattice::Point p(d);
  for (std::uint64_t k = 0; k < n; ++k) {
    const gff::ScalarField field = sampler.draw(seed, k);
    view.for_each([&](std::size_t, const lattice::Coord* c) {
      std::copy(c, c + d, p.begin());
      const double v = field.value(p);
      dump.values.push_back(v);
      sum += v;
    });
  }
  write_field_dump(path, dump);

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "sample";
  j["d"] = d;
  j["window"] = extents;
  j["margin"] = margin;
  j["n"] = n;
  j["seed"] = seed;
  j["out"] = path;
  j["sites_per_sample"] = view.size();
  j["mean"] = sum / static_cast<double>(dump.values.size());
  emit_json(out, j);
  return 0;
}

// --- estimate ---------------------------------------------------------------

struct EstimateRow {
  int d = 0;
  lattice::Coord L = 0;
  double h = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double se = 0.0;
};

std::string row_to_csv(const EstimateRow& r) {
  return csv_join({std::to_string(r.d), std::to_string(r.L), fmt_double(r.h),
                   std::to_string(r.n), std::to_string(r.seed),
                   fmt_double(r.estimate), fmt_double(r.se)});
}

lattice::Coord auto_margin(const std::string& what, lattice::Coord L) {
  if (what == "crossing") return L - 1;
  if (what == "plane") return 8;
  return 16;  // connectivity
}

lattice::Coord margin_for(const KeyValueConfig& cfg, const std::string& what,
                          lattice::Coord L) {
  const std::string m = cfg.get("margin", "auto");
  if (m == "auto") return auto_margin(what, L);
  return cfg.get_long("margin", 0);
}

// Dense overlay curve for the winning decay shape; empty when the fit does
// not identify a usable decay (saturated or degenerate input).
PlotSeries fit_overlay(const perc::DecayFit& fit, double L_min, double L_max,
                       const std::string& label) {
  PlotSeries s;
  if (fit.tag == "saturated") return s;
  s.label = label + " (" + fit.tag + ")";
  const int n_pts = 60;
  for (int i = 0; i <= n_pts; ++i) {
    const double L = L_min + (L_max - L_min) * i / n_pts;
    const double y = fit.tag == "polynomial-like"
                         ? fit.poly_c * std::pow(L, -fit.poly_exponent)
                         : fit.c * std::exp(-fit.cprime *
                                            std::pow(L, fit.rho));
    s.x.push_back(L);
    s.y.push_back(y);
  }
  return s;
}

int cmd_estimate(const KeyValueConfig& cfg, std::ostream& out,
                 std::ostream& err,
                 std::vector<std::string>* task_errors_out) {
  const int d = static_cast<int>(cfg.get_long("dim", 3));
  if (d < 2) throw std::invalid_argument("estimate: need dim >= 2");
  const std::string what = cfg.get("what", "crossing");
  if (what != "crossing" && what != "connectivity" && what != "hstar" &&
      what != "plane")
    throw std::invalid_argument(
        "what must be crossing, connectivity, hstar, or plane");
  const std::uint64_t n = cfg.get_u64("n", 1000);
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const int workers = static_cast<int>(cfg.get_long("workers", 1));
  const auto Ls = parse_sizes(cfg);
  auto hs = parse_levels(cfg);

  std::vector<EstimateRow> rows;
  std::vector<std::string> errors;
  std::vector<std::string> notes;
  WorkPool pool(workers);

  if (what == "crossing") {
    if (Ls.empty()) throw std::invalid_argument("crossing needs L");
    if (hs.empty()) throw std::invalid_argument("crossing needs h or h_grid");
    // one task per size; a task evaluates the whole level grid on common
    // draws, preserving the monotone coupling across levels
    std::vector<std::vector<perc::McEstimate>> curves(Ls.size());
    errors = pool.run(Ls.size(), [&](std::size_t i) {
      curves[i] = perc::estimate_crossing_curve(
          d, Ls[i], hs, n, task_seed(seed, i), margin_for(cfg, what, Ls[i]));
    });
    for (std::size_t i = 0; i < Ls.size(); ++i) {
      if (!errors[i].empty()) continue;
      for (const auto& e : curves[i])
        rows.push_back({e.d, e.L, e.h, e.n_samples, e.seed, e.value, e.se});
    }
  } else if (what == "plane") {
    if (cfg.has("dim") && d != 3)
      throw std::invalid_argument("plane estimates live in d = 3");
    if (Ls.empty()) throw std::invalid_argument("plane needs L");
    if (hs.empty()) throw std::invalid_argument("plane needs h or h_grid");
    std::vector<std::vector<perc::McEstimate>> curves(Ls.size());
    errors = pool.run(Ls.size(), [&](std::size_t i) {
      const std::uint64_t s = task_seed(seed, i);
      curves[i].reserve(hs.size());
      for (const double h : hs)
        curves[i].push_back(perc::estimate_plane_crossing(
            Ls[i], h, n, s, margin_for(cfg, what, Ls[i])));
    });
    for (std::size_t i = 0; i < Ls.size(); ++i) {
      if (!errors[i].empty()) continue;
      for (const auto& e : curves[i])
        rows.push_back({3, e.L, e.h, e.n_samples, e.seed, e.value, e.se});
    }
  } else if (what == "connectivity") {
    if (hs.empty())
      throw std::invalid_argument("connectivity needs h or h_grid");
    lattice::Point x;
    if (cfg.has("point")) {
      x = parse_point(cfg.get("point"), d);
    } else if (!Ls.empty()) {
      x.assign(d, 0);
      x[0] = Ls[0];
    } else {
      throw std::invalid_argument("connectivity needs point or L");
    }
    const lattice::Coord Lx = lattice::linf(x);
    if (Lx == 0) throw std::invalid_argument("connectivity target is 0");
    std::vector<perc::McEstimate> es(hs.size());
    errors = pool.run(hs.size(), [&](std::size_t j) {
      es[j] = perc::estimate_connectivity(d, x, hs[j], n, task_seed(seed, j),
                                          margin_for(cfg, what, Lx));
    });
    for (std::size_t j = 0; j < hs.size(); ++j) {
      if (!errors[j].empty()) continue;
      const auto& e = es[j];
      rows.push_back({e.d, Lx, e.h, e.n_samples, e.seed, e.value, e.se});
    }
  } else {  // hstar
    if (Ls.empty()) throw std::invalid_argument("hstar needs L");
    if (hs.empty()) hs = parse_grid("0:0.05:3.2");
    if (hs.size() < 2 || !(hs.back() > hs.front()))
      throw std::invalid_argument("hstar needs a level bracket (h_grid)");
    std::vector<lattice::Coord> sizes(Ls.begin(), Ls.end());
    perc::HstarReport rep;
    errors = pool.run(1, [&](std::size_t) {
      rep = perc::estimate_hstar(d, sizes, hs.front(), hs.back(), n, seed);
    });
    if (errors[0].empty()) {
      for (std::size_t i = 0; i < rep.sizes.size(); ++i)
        rows.push_back({d, rep.sizes[i], rep.locus[i], rep.n_samples, rep.seed,
                        rep.locus[i], rep.locus_se[i]});
      notes.push_back("hstar_point=" + fmt_double(rep.hstar_point));
      notes.push_back("tail_prob=" + fmt_double(rep.tail_prob));
      notes.push_back("h_lo=" + fmt_double(rep.h_lo));
      notes.push_back("h_hi=" + fmt_double(rep.h_hi));
    }
  }

  // payload: header, data rows in task order, then summary comments
  out << "d,L,h,n,seed,estimate,se\n";
  for (const auto& r : rows) out << row_to_csv(r) << '\n';
  for (const auto& note : notes) out << "# " << note << '\n';
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    ++n_failed;
    out << "# task " << i << " error: " << errors[i] << '\n';
    err << "estimate: task " << i << " failed: " << errors[i] << '\n';
  }
  if (task_errors_out) {
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (!errors[i].empty())
        task_errors_out->push_back("task " + std::to_string(i) + ": " +
                                   errors[i]);
  }

  if (cfg.has("plot") && !rows.empty()) {
    PlotSpec plot;
    plot.title = what + " estimates, d=" + std::to_string(d);
    if (what == "hstar") {
      plot.xlabel = "window size";
      plot.ylabel = "median crossing level";
      PlotSeries s;
      s.label = "level locus";
      for (const auto& r : rows) {
        s.x.push_back(static_cast<double>(r.L));
        s.y.push_back(r.estimate);
        s.se.push_back(r.se);
      }
      plot.series.push_back(std::move(s));
    } else if (Ls.size() >= 3 && what != "connectivity") {
      // decay view: one curve per level over the sizes, log scale, with the
      // winning fitted shape dashed on top
      plot.xlabel = "L";
      plot.ylabel = "estimate";
      plot.log_y = true;
      for (const double h : hs) {
        PlotSeries s;
        s.label = "h=" + fmt_double(h);
        std::vector<std::pair<lattice::Coord, perc::McEstimate>> curve;
        for (const auto& r : rows) {
          if (r.h != h) continue;
          s.x.push_back(static_cast<double>(r.L));
          s.y.push_back(r.estimate);
          s.se.push_back(r.se);
          perc::McEstimate e;
          e.value = r.estimate;
          e.se = r.se;
          e.L = r.L;
          e.h = r.h;
          e.d = r.d;
          e.n_samples = r.n;
          e.seed = r.seed;
          curve.emplace_back(r.L, e);
        }
        if (s.x.empty()) continue;
        if (curve.size() >= 3) {
          try {
            const auto fit = perc::fit_decay(curve);
            auto overlay = fit_overlay(fit, s.x.front(), s.x.back(), s.label);
            if (!overlay.x.empty()) plot.overlays.push_back(std::move(overlay));
          } catch (const std::exception&) {
            // degenerate curve: plot the data without a fitted shape
          }
        }
        plot.series.push_back(std::move(s));
      }
    } else {
      plot.xlabel = "h";
      plot.ylabel = "estimate";
      for (const long L : Ls.empty() ? std::vector<long>{0} : Ls) {
        PlotSeries s;
        s.label = Ls.empty() ? "" : ("L=" + std::to_string(L));
        for (const auto& r : rows) {
          if (!Ls.empty() && r.L != L) continue;
          s.x.push_back(r.h);
          s.y.push_back(r.estimate);
          s.se.push_back(r.se);
        }
        if (!s.x.empty()) plot.series.push_back(std::move(s));
        if (Ls.empty()) break;
      }
    }
    const std::string path = cfg.get("plot");
    write_text_file(path, render_svg(plot));
    out << "# plot=" << path << '\n';
  }

  if (!errors.empty() && n_failed == errors.size()) return 1;
  return n_failed ? 3 : 0;
}

// --- renorm -----------------------------------------------------------------

ordered_json ledger_entry_json(const renorm::LedgerEntry& e) {
  return {{"value", e.value}, {"provenance", e.provenance}, {"note", e.note}};
}

int cmd_renorm(const KeyValueConfig& cfg, std::ostream& out, std::ostream&) {
  const int d = static_cast<int>(cfg.get_long("dim", 3));
  const long L0 = cfg.get_long("L0", 10);
  const long l0 = cfg.get_long("l0", 100);
  if (!cfg.has("h0")) throw std::invalid_argument("renorm needs h0");
  const double h0 = cfg.get_double("h0", 0.0);
  const int n_max = static_cast<int>(cfg.get_long("nmax", 16));

  renorm::ConstantsLedger ledger = renorm::ConstantsLedger::defaults(d, L0, l0);
  if (cfg.has("ledger")) {
    const std::string path = cfg.get("ledger");
    const KeyValueConfig over = KeyValueConfig::parse_file(path);
    const auto apply = [&](const char* key, renorm::LedgerEntry& e) {
      if (!over.has(key)) return;
      e.value = over.get_double(key, e.value);
      e.provenance = "user-supplied";
      e.note = "override from " + path;
    };
    for (const auto& [key, value] : over.items) {
      (void)value;
      if (key != "c0" && key != "c1" && key != "c2" && key != "B" &&
          key != "g0" && key != "cap_ratio" && key != "green_sup" &&
          key != "separation")
        throw std::invalid_argument("ledger file: unknown constant '" + key +
                                    "'");
    }
    apply("c0", ledger.c0);
    apply("c1", ledger.c1);
    apply("c2", ledger.c2);
    apply("B", ledger.B);
    apply("g0", ledger.g0);
    apply("cap_ratio", ledger.cap_ratio);
    apply("green_sup", ledger.green_sup);
    apply("separation", ledger.separation);
  }

  renorm::RenormConfig rc;
  rc.d = d;
  rc.L0 = L0;
  rc.l0 = l0;
  rc.h0 = h0;
  rc.ledger = &ledger;

  const std::string p0_spec = cfg.get("p0", "analytic");
  renorm::SeedBound seed_bound;
  ordered_json seed_json;
  if (p0_spec == "analytic") {
    seed_bound.log_p0 = std::log(renorm::p0_upper_bound(rc));
    seed_bound.provenance = "analytic";
    seed_json = {{"log_p0", seed_bound.log_p0}, {"provenance", "analytic"}};
  } else if (p0_spec.rfind("mc:", 0) == 0) {
    // mc:<n>:<seed>, a crossing estimate at the base scale; the bound uses
    // the add-two upper edge (k+2)/(n+2), which is positive even at zero
    // observed successes
    const auto rest = p0_spec.substr(3);
    const auto sep = rest.find(':');
    if (sep == std::string::npos)
      throw std::invalid_argument("p0 mc form is mc:<n>:<seed>");
    const long n_mc = std::stol(rest.substr(0, sep));
    const auto seed_mc = static_cast<std::uint64_t>(
        std::stoll(rest.substr(sep + 1)));
    if (n_mc < 1) throw std::invalid_argument("p0 mc sample count must be >= 1");
    const auto est = perc::estimate_crossing(
        d, L0, h0, static_cast<std::size_t>(n_mc), seed_mc, 2 * L0);
    const auto k = static_cast<long long>(std::llround(est.value * n_mc));
    const double upper = static_cast<double>(k + 2) / (n_mc + 2);
    seed_bound.log_p0 = std::log(upper);
    seed_bound.provenance = "mc";
    seed_json = {{"log_p0", seed_bound.log_p0},
                 {"provenance", "mc"},
                 {"n", n_mc},
                 {"seed", seed_mc},
                 {"estimate", est.value},
                 {"upper_edge", upper}};
  } else {
    throw std::invalid_argument("p0 must be analytic or mc:<n>:<seed>");
  }

  const renorm::RecursionTrace trace =
      renorm::certify_from_seed(rc, seed_bound, n_max);

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "renorm";
  j["d"] = d;
  j["L0"] = L0;
  j["l0"] = l0;
  j["h0"] = h0;
  j["n_max"] = n_max;
  j["ledger"] = {{"c0", ledger_entry_json(ledger.c0)},
                 {"c1", ledger_entry_json(ledger.c1)},
                 {"c2", ledger_entry_json(ledger.c2)},
                 {"B", ledger_entry_json(ledger.B)},
                 {"g0", ledger_entry_json(ledger.g0)},
                 {"cap_ratio", ledger_entry_json(ledger.cap_ratio)},
                 {"green_sup", ledger_entry_json(ledger.green_sup)},
                 {"separation", ledger_entry_json(ledger.separation)}};
  j["seed_bound"] = seed_json;
  ordered_json t;
  t["Ln"] = trace.L_n;
  t["Mn"] = trace.M_n;
  t["beta_n"] = trace.beta_n;
  t["h_n"] = trace.h_n;
  t["K_n"] = trace.K_n;
  t["pn_bound"] = trace.log_p_n;
  t["pn_bound_scale"] = "log";
  t["K0"] = trace.K0;
  t["log_p0"] = trace.log_p0;
  t["h_infinity"] = trace.h_infinity;
  t["valid"] = trace.valid;
  t["provenance"] = trace.provenance;
  j["trace"] = t;
  emit_json(out, j);
  return 0;
}

// --- slab-cert --------------------------------------------------------------

int cmd_slab_cert(const KeyValueConfig& cfg, std::ostream& out,
                  std::ostream&) {
  if (!cfg.has("h0")) throw std::invalid_argument("slab-cert needs h0");
  if (!cfg.has("L0")) throw std::invalid_argument("slab-cert needs L0");
  const double h0 = cfg.get_double("h0", 0.0);
  const long L0 = cfg.get_long("L0", 0);

  renorm::SlabOptions opts;
  if (cfg.has("pcsite")) opts.pc_site = cfg.get_double("pcsite", 0.0);
  if (cfg.has("pc_sizes")) {
    const auto sizes = parse_long_list(cfg.get("pc_sizes"));
    opts.pc_sizes.assign(sizes.begin(), sizes.end());
  }
  opts.pc_samples =
      static_cast<std::size_t>(cfg.get_u64("pc_samples", opts.pc_samples));
  opts.mc_samples =
      static_cast<std::size_t>(cfg.get_u64("mc_samples", opts.mc_samples));
  opts.seed = cfg.get_u64("seed", opts.seed);
  opts.run_mc = cfg.get_bool("mc", true);
  opts.mc_dim_cap =
      static_cast<int>(cfg.get_long("mc_dim_cap", opts.mc_dim_cap));

  const renorm::SlabReport rep = renorm::slab_pipeline(h0, L0, opts);

  const auto gate_json = [](const renorm::SlabGate& g) {
    return ordered_json{{"name", g.name},
                        {"value", g.value},
                        {"threshold", g.threshold},
                        {"satisfied", g.satisfied},
                        {"note", g.note}};
  };
  ordered_json gates = ordered_json::array();
  ordered_json empirical = ordered_json::array();
  for (const auto& g : rep.gates)
    (g.kind == "empirical" ? empirical : gates).push_back(gate_json(g));

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "slab-cert";
  j["h0"] = rep.h0;
  j["L0"] = rep.L0;
  j["d0"] = rep.d0;
  j["pc_site"] = rep.pc_site;
  j["pc_site_provenance"] = rep.pc_site_provenance;
  j["target_p"] = rep.target_p;
  j["seed_level_p"] = rep.seed_level_p;
  j["message"] = rep.message;
  j["gates"] = gates;
  j["empirical_checks"] = empirical;
  emit_json(out, j);
  return 0;
}

// --- recipe -----------------------------------------------------------------

int cmd_recipe(const KeyValueConfig& cfg, std::ostream& out, std::ostream&) {
  const std::string name = cfg.get("name");
  if (name.empty()) throw std::invalid_argument("recipe needs a name");
  const auto bundle = recipe_bundle(name);
  const std::string dir = output_dir(cfg);
  std::vector<std::string> paths;
  for (const auto& file : bundle) {
    const std::string path = joined(dir, file.filename);
    write_text_file(path, file.text);
    paths.push_back(path);
  }
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "recipe";
  j["name"] = name;
  j["files"] = paths;
  emit_json(out, j);
  return 0;
}

// --- run --------------------------------------------------------------------

int dispatch(const std::string& name, const KeyValueConfig& cfg,
             std::ostream& out, std::ostream& err,
             std::vector<std::string>* task_errors);

int cmd_run(const KeyValueConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string spec_path = cfg.get("spec");
  if (spec_path.empty()) throw std::invalid_argument("run needs a spec file");
  KeyValueConfig merged = KeyValueConfig::parse_file(spec_path);
  // command-line keys override the spec file
  for (const auto& [k, v] : cfg.items)
    if (k != "spec") merged.set(k, v);
  const std::string sub = merged.get("subcommand");
  if (sub.empty())
    throw std::invalid_argument("spec is missing the 'subcommand' key");
  if (sub == "run") throw std::invalid_argument("specs cannot nest 'run'");
  bool known = false;
  for (const auto& c : command_names()) known = known || c == sub;
  if (!known) throw std::invalid_argument("unknown subcommand: " + sub);

  ResultRecord rec;
  rec.name = merged.get(
      "name", std::filesystem::path(spec_path).stem().string());
  rec.command = sub;
  rec.spec_hash = hex_hash(fnv1a64(merged.normalized()));
  rec.started_at = iso_now();
  std::ostringstream payload;
  int code = 0;
  try {
    code = dispatch(sub, merged, payload, err, &rec.task_errors);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    rec.task_errors.push_back(e.what());
    code = 2;
  }
  rec.finished_at = iso_now();
  rec.exit_code = code;
  rec.payload_format = sub == "estimate" ? "csv" : "json";
  rec.payload = payload.str();
  append_record(joined(output_dir(cfg), "results.jsonl"), rec);
  out << record_to_json(rec) << '\n';
  return code;
}

int dispatch(const std::string& name, const KeyValueConfig& cfg,
             std::ostream& out, std::ostream& err,
             std::vector<std::string>* task_errors) {
  if (name == "greens") return cmd_greens(cfg, out, err);
  if (name == "sample") return cmd_sample(cfg, out, err);
  if (name == "estimate") return cmd_estimate(cfg, out, err, task_errors);
  if (name == "renorm") return cmd_renorm(cfg, out, err);
  if (name == "slab-cert") return cmd_slab_cert(cfg, out, err);
  if (name == "recipe") return cmd_recipe(cfg, out, err);
  if (name == "run") return cmd_run(cfg, out, err);
  throw std::invalid_argument("unknown command: " + name);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "greens", "sample", "estimate", "renorm", "slab-cert", "recipe", "run"};
  return names;
}

int run_command(const std::string& name, const KeyValueConfig& cfg,
                std::ostream& out, std::ostream& err) {
  try {
    return dispatch(name, cfg, out, err, nullptr);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

std::vector<RecipeFile> recipe_bundle(const std::string& name) {
  if (name == "d3-hstar") {
    return {{"d3-hstar.spec",
             "# median crossing level on three window sizes\n"
             "name = d3-hstar\n"
             "subcommand = estimate\n"
             "what = hstar\n"
             "dim = 3\n"
             "L = 16,32,64\n"
             "h_grid = 0:0.05:3.2\n"
             "n = 200\n"
             "seed = 101\n"}};
  }
  if (name == "decay-scan") {
    return {{"decay-scan.spec",
             "# crossing probability decay over sizes at four levels\n"
             "name = decay-scan\n"
             "subcommand = estimate\n"
             "what = crossing\n"
             "dim = 3\n"
             "L = 8,16,32\n"
             "h = 1.5,2.0,2.5,3.0\n"
             "n = 2000\n"
             "seed = 202\n"
             "margin = auto\n"}};
  }
  if (name == "slab-probe") {
    return {{"slab-probe.spec",
             "# dimension search for the slab argument at a moderate level\n"
             "name = slab-probe\n"
             "subcommand = slab-cert\n"
             "h0 = 1.0\n"
             "L0 = 1\n"
             "mc_samples = 800\n"
             "seed = 7\n"}};
  }
  if (name == "renorm-trace") {
    return {{"renorm-trace.spec",
             "# certification trace from the analytic seed bound\n"
             "name = renorm-trace\n"
             "subcommand = renorm\n"
             "dim = 3\n"
             "L0 = 10\n"
             "l0 = 100\n"
             "h0 = 16\n"
             "nmax = 16\n"
             "p0 = analytic\n"}};
  }
  throw std::invalid_argument(
      "unknown recipe '" + name +
      "': expected d3-hstar, decay-scan, slab-probe, or renorm-trace");
}

}  // namespace fieldperc::harness
