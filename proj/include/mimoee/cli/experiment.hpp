#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <openssl/evp.h>

#include "mimoee/channel_mc.hpp"
#include "mimoee/core.hpp"
#include "mimoee/error.hpp"

namespace mimoee::cli {

inline constexpr const char* kLibraryVersion = "0.3.0";

/// Bad user configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File-system failure with the offending path in the message (exit code 3).
class IoError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitConfig = 2, kExitRuntime = 3 };

/// Parameter overrides from one source (flags or config file). Unset fields
/// fall through to the next source.
struct Overrides {
  std::optional<long long> n_t;
  std::optional<long long> n_r;
  std::optional<double> rho_db;
  std::optional<double> rate;
  std::optional<double> p_max;
  std::optional<std::uint64_t> seed;
  std::optional<long long> trials;
  std::optional<long long> grid_points;
  std::optional<std::string> out;
  std::map<std::string, std::string> extra;  // command-specific keys
};

/// Flags win over the config file.
inline Overrides merge(const Overrides& flags, const Overrides& file) {
  Overrides o = file;
  auto pick = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  pick(o.n_t, flags.n_t);
  pick(o.n_r, flags.n_r);
  pick(o.rho_db, flags.rho_db);
  pick(o.rate, flags.rate);
  pick(o.p_max, flags.p_max);
  pick(o.seed, flags.seed);
  pick(o.trials, flags.trials);
  pick(o.grid_points, flags.grid_points);
  pick(o.out, flags.out);
  for (const auto& [k, v] : flags.extra) o.extra[k] = v;
  return o;
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("invalid value for '" + key + "': '" + text + "'");
  return value;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string normalize_key(std::string k) {
  for (char& ch : k)
    if (ch == '-') ch = '_';
  return k;
}

}  // namespace detail

/// Sets one key (flag name or config key, '-' and '_' interchangeable).
inline void set_override(Overrides& o, const std::string& raw_key, const std::string& value) {
  const std::string key = detail::normalize_key(raw_key);
  if (key == "nt" || key == "n_t") o.n_t = detail::parse_number<long long>(key, value);
  else if (key == "nr" || key == "n_r") o.n_r = detail::parse_number<long long>(key, value);
  else if (key == "rho_db") o.rho_db = detail::parse_number<double>(key, value);
  else if (key == "rate") o.rate = detail::parse_number<double>(key, value);
  else if (key == "pmax" || key == "p_max") o.p_max = detail::parse_number<double>(key, value);
  else if (key == "seed") o.seed = detail::parse_number<std::uint64_t>(key, value);
  else if (key == "trials") o.trials = detail::parse_number<long long>(key, value);
  else if (key == "grid_points") o.grid_points = detail::parse_number<long long>(key, value);
  else if (key == "out") o.out = value;
  else o.extra[key] = value;
}

/// Line-oriented key=value config. '#' starts a comment.
inline Overrides parse_config_text(const std::string& text) {
  Overrides o;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    set_override(o, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return o;
}

inline Overrides parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Built-in scenario constants for a command, before overrides.
struct Defaults {
  long long n_t = 2;
  long long n_r = 2;
  double rho_db = 10.0;
  double rate = 1.0;
  double p_max = 1.0;
  std::uint64_t seed = 20100101;
  long long trials = 100000;
  long long grid_points = 64;
};

/// Fully resolved configuration for one command invocation.
struct ExperimentConfig {
  std::string command;
  SystemParams params;
  double rho_db = 0.0;
  std::uint64_t seed = 0;
  long long trials = 0;
  long long grid_points = 0;
  std::filesystem::path out;
  std::map<std::string, std::string> extra;

  bool has(const std::string& key) const { return extra.count(key) > 0; }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    const auto it = extra.find(key);
    if (it == extra.end()) return fallback;
    if constexpr (std::is_same_v<T, std::string>) {
      return it->second;
    } else {
      return detail::parse_number<T>(key, it->second);
    }
  }

  McConfig mc() const { return McConfig{seed, trials, static_cast<unsigned>(get<long long>("threads", 0))}; }
};

/// Applies overrides on top of defaults and validates through validate_params.
inline ExperimentConfig resolve(const std::string& command, const Overrides& o,
                                const Defaults& d) {
  ExperimentConfig cfg{command, make_params(1, 1, 1.0, 1.0, 1.0), 0.0, 0, 0, 0, {}, {}};
  cfg.rho_db = o.rho_db.value_or(d.rho_db);
  if (!std::isfinite(cfg.rho_db)) throw ConfigError("rho_db must be finite");
  try {
    cfg.params = validate_params(RawParams{o.n_t.value_or(d.n_t), o.n_r.value_or(d.n_r),
                                           sigma2_from_rho_db(cfg.rho_db), o.rate.value_or(d.rate),
                                           o.p_max.value_or(d.p_max)});
  } catch (const NonPositiveField& e) {
    throw ConfigError(e.what());
  }
  cfg.seed = o.seed.value_or(d.seed);
  cfg.trials = o.trials.value_or(d.trials);
  cfg.grid_points = o.grid_points.value_or(d.grid_points);
  if (cfg.trials < 1) throw ConfigError("trials must be positive");
  if (cfg.grid_points < 16) throw ConfigError("grid_points must be >= 16");
  cfg.out = o.out.value_or(".");
  cfg.extra = o.extra;
  return cfg;
}

// ---------------------------------------------------------------------------
// CSV output.

/// Fixed 17-significant-digit decimal form, independent of locale.
inline std::string format_csv_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

/// Shortest round-trip decimal form (used for key=value query output).
inline std::string format_shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct CsvTable {
  std::string name;  // file name, e.g. "fig1.csv"
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string render() const {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) s += ',';
      s += header[i];
    }
    s += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) s += ',';
        s += format_csv_number(row[i]);
      }
      s += '\n';
    }
    return s;
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(detail::parse_number<double>("csv", cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Digests and manifests.

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

struct ResultManifest {
  std::vector<std::pair<std::string, std::string>> config;  // echo, in order
  std::string version = kLibraryVersion;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> digests;  // file -> sha256
  std::vector<std::pair<std::string, std::string>> summary;

  std::string render() const {
    std::string s = "version=" + version + "\n";
    for (const auto& [k, v] : config) s += "config." + k + "=" + v + "\n";
    s += "wall_seconds=" + format_shortest(wall_seconds) + "\n";
    for (const auto& [k, v] : summary) s += "summary." + k + "=" + v + "\n";
    for (const auto& [f, d] : digests) s += "sha256." + f + "=" + d + "\n";
    return s;
  }
};

inline std::vector<std::pair<std::string, std::string>> echo_config(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> e{
      {"command", c.command},
      {"nt", std::to_string(c.params.n_t())},
      {"nr", std::to_string(c.params.n_r())},
      {"rho_db", format_shortest(c.rho_db)},
      {"sigma2", format_shortest(c.params.sigma2())},
      {"rate", format_shortest(c.params.rate())},
      {"pmax", format_shortest(c.params.p_max())},
      {"seed", std::to_string(c.seed)},
      {"trials", std::to_string(c.trials)},
      {"grid_points", std::to_string(c.grid_points)},
  };
  for (const auto& [k, v] : c.extra) e.emplace_back(k, v);
  return e;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace mimoee::cli
