#include "fieldperc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace fieldperc::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(s.substr(pos));
      return parts;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

[[noreturn]] void bad_number(std::string_view what, std::string_view text) {
  throw std::invalid_argument(std::string(what) + ": expected a number, got '" +
                              std::string(text) + "'");
}

double to_double(std::string_view text, std::string_view what) {
  const std::string s(trim(text));
  if (s.empty()) bad_number(what, text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) bad_number(what, text);
  return v;
}

long long to_ll(std::string_view text, std::string_view what) {
  const std::string s(trim(text));
  if (s.empty()) bad_number(what, text);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) bad_number(what, text);
  return v;
}

}  // namespace

std::uint64_t task_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the pair; bijective in the mixed word, so
  // distinct (master, index) pairs cannot collide by construction of the
  // pre-mix alone for a fixed master.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// --- KeyValueConfig ---------------------------------------------------------

bool KeyValueConfig::has(std::string_view key) const {
  return std::any_of(items.begin(), items.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

std::string KeyValueConfig::get(std::string_view key,
                                std::string_view fallback) const {
  for (auto it = items.rbegin(); it != items.rend(); ++it)
    if (it->first == key) return it->second;
  return std::string(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  if (!has(key)) return fallback;
  return to_double(get(key), key);
}

long KeyValueConfig::get_long(std::string_view key, long fallback) const {
  if (!has(key)) return fallback;
  return static_cast<long>(to_ll(get(key), key));
}

std::uint64_t KeyValueConfig::get_u64(std::string_view key,
                                      std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const long long v = to_ll(get(key), key);
  if (v < 0)
    throw std::invalid_argument(std::string(key) + ": must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument(std::string(key) + ": expected a boolean, got '" +
                              v + "'");
}

void KeyValueConfig::set(std::string_view key, std::string_view value) {
  items.emplace_back(std::string(key), std::string(value));
}

void KeyValueConfig::merge_from(const KeyValueConfig& overrides) {
  items.insert(items.end(), overrides.items.begin(), overrides.items.end());
}

std::string KeyValueConfig::normalized() const {
  std::map<std::string, std::string> last;
  for (const auto& [k, v] : items) last[k] = v;
  std::string out;
  for (const auto& [k, v] : last) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse_text(std::string_view text) {
  KeyValueConfig cfg;
  std::size_t lineno = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has no '=': '" + std::string(line) + "'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has an empty key");
    cfg.set(key, value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

std::vector<long> parse_long_list(std::string_view text) {
  std::vector<long> out;
  for (const auto part : split(text, ','))
    out.push_back(static_cast<long>(to_ll(part, "list entry")));
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto part : split(text, ','))
    out.push_back(to_double(part, "list entry"));
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

std::vector<double> parse_grid(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3)
    throw std::invalid_argument("grid must be start:step:stop, got '" +
                                std::string(text) + "'");
  const double start = to_double(parts[0], "grid start");
  const double step = to_double(parts[1], "grid step");
  const double stop = to_double(parts[2], "grid stop");
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (stop < start - 1e-12)
    throw std::invalid_argument("grid stop must not precede start");
  const auto count = static_cast<std::size_t>((stop - start) / step + 1e-9);
  std::vector<double> out;
  out.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i)
    out.push_back(start + static_cast<double>(i) * step);
  return out;
}

// --- WorkPool ---------------------------------------------------------------

WorkPool::WorkPool(int workers) : workers_(std::max(1, workers)) {}

std::vector<std::string> WorkPool::run(
    std::size_t n_tasks, const std::function<void(std::size_t)>& task) {
  std::vector<std::string> errors(n_tasks);
  if (n_tasks == 0) return errors;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_tasks) return;
      try {
        task(i);
      } catch (const std::exception& e) {
        errors[i] = e.what()[0] ? e.what() : "task failed";
      } catch (...) {
        errors[i] = "task failed";
      }
    }
  };
  const auto n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(workers_), n_tasks);
  if (n_threads <= 1) {
    worker();
    return errors;
  }
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  return errors;
}

// --- CSV --------------------------------------------------------------------

std::string csv_join(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  return row;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  for (std::string_view raw : split(text, '\n')) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    for (const auto cell : split(line, ','))
      cells.emplace_back(trim(cell));
    rows.push_back(std::move(cells));
  }
  return rows;
}

// --- Binary field dumps -----------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "field dumps are written little-endian by plain memory copy");

namespace {

constexpr char kDumpMagic[8] = {'G', 'F', 'F', 'D', 'U', 'M', 'P', '1'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("field dump truncated");
  return v;
}

}  // namespace

void write_field_dump(const std::string& path, const FieldDump& dump) {
  if (dump.d <= 0 || dump.extents.size() != static_cast<std::size_t>(dump.d))
    throw std::invalid_argument("field dump: extents must match dimension");
  std::uint64_t volume = 1;
  for (const auto e : dump.extents) volume *= e;
  if (dump.values.size() != volume * dump.count)
    throw std::invalid_argument("field dump: value count mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kDumpMagic, sizeof kDumpMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dump.d));
  for (const auto e : dump.extents) put<std::uint64_t>(out, e);
  put<std::uint64_t>(out, dump.count);
  put<std::uint64_t>(out, dump.seed);
  out.write(reinterpret_cast<const char*>(dump.values.data()),
            static_cast<std::streamsize>(dump.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write: " + path);
}

FieldDump read_field_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open field dump: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDumpMagic, sizeof magic) != 0)
    throw std::runtime_error("not a field dump: " + path);
  FieldDump dump;
  dump.d = static_cast<int>(take<std::uint32_t>(in));
  if (dump.d <= 0 || dump.d > 64)
    throw std::runtime_error("field dump: implausible dimension");
  dump.extents.resize(dump.d);
  std::uint64_t volume = 1;
  for (auto& e : dump.extents) {
    e = take<std::uint64_t>(in);
    volume *= e;
  }
  dump.count = take<std::uint64_t>(in);
  dump.seed = take<std::uint64_t>(in);
  dump.values.resize(volume * dump.count);
  in.read(reinterpret_cast<char*>(dump.values.data()),
          static_cast<std::streamsize>(dump.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("field dump truncated: " + path);
  return dump;
}

// --- Result records ---------------------------------------------------------

std::string record_to_json(const ResultRecord& rec) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["record"] = "result";
  j["name"] = rec.name;
  j["command"] = rec.command;
  j["spec_hash"] = rec.spec_hash;
  j["started_at"] = rec.started_at;
  j["finished_at"] = rec.finished_at;
  j["software_version"] = rec.software_version;
  j["exit_code"] = rec.exit_code;
  j["payload_format"] = rec.payload_format;
  j["payload"] = rec.payload;
  j["task_errors"] = rec.task_errors;
  return j.dump();
}

void append_record(const std::string& path, const ResultRecord& rec) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path);
  out << record_to_json(rec) << '\n';
  if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace fieldperc::harness
