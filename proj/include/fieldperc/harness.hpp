#ifndef FIELDPERC_HARNESS_HPP
#define FIELDPERC_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fieldperc/lattice.hpp"

// Command harness: flat key-value experiment specs, a deterministic task
// pool, and the writers (JSON, CSV, SVG, binary field dumps) shared by the
// command-line tool and the acceptance suite. Every emitted number is
// printed with enough digits to round-trip exactly, and every computation
// is a pure function of (spec, seed), independent of worker count.

namespace fieldperc::harness {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Environment variable naming the default output directory ("." if unset).
inline constexpr const char* kOutDirEnv = "FIELDPERC_OUT_DIR";

// Per-task seed: a fixed bijective mix of (master, index), so tasks get
// decorrelated streams that depend only on their position in the task
// list, never on scheduling.
std::uint64_t task_seed(std::uint64_t master, std::uint64_t index);

// FNV-1a over the bytes; used to fingerprint normalized specs.
std::uint64_t fnv1a64(std::string_view bytes);

// Doubles as shortest text that parses back to the identical bit pattern.
std::string fmt_double(double v);

// ---------------------------------------------------------------------------
// Flat key-value configuration: one `key = value` pair per line, `#` starts
// a comment. The same keys appear as long command-line flags; flags override
// file entries. Last assignment of a key wins.

struct KeyValueConfig {
  std::vector<std::pair<std::string, std::string>> items;

  bool has(std::string_view key) const;
  std::string get(std::string_view key, std::string_view fallback = "") const;
  double get_double(std::string_view key, double fallback) const;
  long get_long(std::string_view key, long fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  void set(std::string_view key, std::string_view value);
  void merge_from(const KeyValueConfig& overrides);  // overrides win

  // Canonical form: unique keys sorted, `key=value` lines. Hashing this
  // makes the spec fingerprint independent of ordering and comments.
  std::string normalized() const;

  static KeyValueConfig parse_text(std::string_view text);
  static KeyValueConfig parse_file(const std::string& path);
};

// Comma-separated parsers; throw std::invalid_argument on malformed input.
std::vector<long> parse_long_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);
// "start:step:stop", inclusive of both ends (up to rounding slack).
std::vector<double> parse_grid(std::string_view text);

// ---------------------------------------------------------------------------
// Work pool: runs tasks 0..n-1 on `workers` threads pulling from a shared
// counter. Each task writes only its own output slot, so results are
// identical for any worker count. Returns one error string per task, empty
// on success; a throwing task never takes down its siblings.

class WorkPool {
 public:
  explicit WorkPool(int workers);
  int workers() const { return workers_; }
  std::vector<std::string> run(std::size_t n_tasks,
                               const std::function<void(std::size_t)>& task);

 private:
  int workers_;
};

// ---------------------------------------------------------------------------
// CSV helpers. Rows are plain comma joins; `parse_csv` splits a document
// into rows of cells, skipping blank lines and `#` comments.

std::string csv_join(const std::vector<std::string>& cells);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Binary field dumps: little-endian, magic "GFFDUMP1", u32 dimension,
// u64 extent per axis, u64 sample count, u64 seed, then count * volume
// doubles, samples consecutive, sites row-major (last axis fastest).

struct FieldDump {
  int d = 0;
  std::vector<std::uint64_t> extents;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

void write_field_dump(const std::string& path, const FieldDump& dump);
FieldDump read_field_dump(const std::string& path);

// ---------------------------------------------------------------------------
// Minimal static SVG plots: one polyline per series with +-1 SE whiskers,
// optional smooth overlay curves (fits), linear or log-10 y axis.

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> se;  // may be empty: no whiskers
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<PlotSeries> overlays;  // drawn dashed, no markers
};

std::string render_svg(const PlotSpec& spec);

// ---------------------------------------------------------------------------
// Result records: every `run` invocation appends one JSON line to
// results.jsonl in the output directory. The payload is the exact text the
// command would print, so re-running an identical spec appends a record
// whose numeric payload is byte-identical.

struct ResultRecord {
  std::string name;
  std::string command;
  std::string spec_hash;      // hex fnv1a64 of the normalized spec
  std::string started_at;     // ISO 8601 UTC
  std::string finished_at;
  std::string software_version = kVersion;
  int exit_code = 0;
  std::string payload_format;  // "json" or "csv"
  std::string payload;
  std::vector<std::string> task_errors;
};

std::string record_to_json(const ResultRecord& rec);
void append_record(const std::string& path, const ResultRecord& rec);

// ---------------------------------------------------------------------------
// Command entry points. `name` is one of command_names(); the config holds
// the merged spec (file under flags). Payload text goes to `out`,
// diagnostics to `err`. Returns 0 on success, 1 when nothing succeeded,
// 2 on configuration errors, 3 when some grid tasks failed.

int run_command(const std::string& name, const KeyValueConfig& cfg,
                std::ostream& out, std::ostream& err);

const std::vector<std::string>& command_names();

struct RecipeFile {
  std::string filename;
  std::string text;
};

// Pre-baked experiment specs by name: d3-hstar, decay-scan, slab-probe,
// renorm-trace. Throws std::invalid_argument on an unknown name.
std::vector<RecipeFile> recipe_bundle(const std::string& name);

}  // namespace fieldperc::harness

#endif  // FIELDPERC_HARNESS_HPP
