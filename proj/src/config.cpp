#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "fbcoord/errors.hpp"
#include "fbcoord/experiment.hpp"

namespace fbc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, int line, std::string_view key) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view text, int line, std::string_view key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError(line, "expected true/false for " + std::string(key));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Seq, typename Fn>
std::string join(const Seq& seq, Fn&& to_text) {
  std::string out;
  for (const auto& item : seq) {
    if (!out.empty()) out += ", ";
    out += to_text(item);
  }
  return out;
}

struct Entry {
  std::string value;
  int line;
};

using Section = std::map<std::string, Entry, std::less<>>;

}  // namespace

std::vector<double> ExperimentSpec::snr_points() const {
  if (const auto* iid = std::get_if<IidChannelSpec>(&channel)) return iid->snr_db;
  return {std::get<DenseChannelSpec>(channel).target_snr_db};
}

void ExperimentSpec::validate() const {
  NetworkConfig probe = network;
  probe.set_noise(1.0, reverse_noise_factor);
  probe.validate();
  if (!(reverse_noise_factor > 0.0)) throw ValidationError("reverse_noise_factor must be positive");
  if (realizations < 1) throw ValidationError("realizations must be >= 1");
  if (algos.empty()) throw ValidationError("algos must not be empty");
  if (iteration_list.empty()) throw ValidationError("iterations must not be empty");
  for (int t : iteration_list)
    if (t < 0) throw ValidationError("iteration counts must be non-negative");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  for (double s : snr_points())
    if (!std::isfinite(s)) throw ValidationError("SNR points must be finite");
  if (const auto* dense = std::get_if<DenseChannelSpec>(&channel)) dense->deployment.validate(network.cells);
  if (std::get_if<IidChannelSpec>(&channel) && snr_points().empty()) {
    throw ValidationError("snr_db must list at least one point");
  }
}

ExperimentSpec parse_experiment(std::string_view text) {
  std::map<std::string, Section, std::less<>> sections;
  std::string current;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (current != "network" && current != "channel" && current != "run") {
        throw ParseError(line_no, "unknown section [" + current + "]");
      }
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    if (current.empty()) throw ParseError(line_no, "key outside of a section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    auto [it, inserted] = sections[current].try_emplace(key, Entry{value, line_no});
    if (!inserted) throw ParseError(line_no, "duplicate key " + key);
  }

  ExperimentSpec spec;
  // Consumed keys are removed so leftovers can be reported as unknown.
  auto get = [&](std::string_view section, std::string_view key) -> std::optional<Entry> {
    auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    auto e = s->second.find(key);
    if (e == s->second.end()) return std::nullopt;
    Entry found = e->second;
    s->second.erase(e);
    return found;
  };
  auto required_int = [&](std::string_view section, std::string_view key) {
    auto e = get(section, key);
    if (!e) throw ParseError(line_no, "missing required key " + std::string(key) + " in [" + std::string(section) + "]");
    return parse_number<int>(e->value, e->line, key);
  };
  auto optional_double = [&](std::string_view section, std::string_view key, double fallback) {
    auto e = get(section, key);
    return e ? parse_number<double>(e->value, e->line, key) : fallback;
  };

  NetworkConfig& net = spec.network;
  net.cells = required_int("network", "cells");
  net.users_per_cell = required_int("network", "users_per_cell");
  net.tx_antennas = required_int("network", "tx_antennas");
  net.rx_antennas = required_int("network", "rx_antennas");
  net.streams = required_int("network", "streams");
  net.tx_power = optional_double("network", "tx_power", 1.0);
  net.rx_filter_power = optional_double("network", "rx_filter_power", 1.0);
  spec.reverse_noise_factor = optional_double("network", "reverse_noise_factor", 1.0);

  std::string model = "iid";
  int model_line = 0;
  if (auto e = get("channel", "model")) {
    model = e->value;
    model_line = e->line;
  }
  if (model == "iid") {
    IidChannelSpec iid;
    if (auto e = get("channel", "snr_db")) {
      iid.snr_db.clear();
      for (auto item : split_list(e->value)) iid.snr_db.push_back(parse_number<double>(item, e->line, "snr_db"));
    }
    spec.channel = iid;
  } else if (model == "dense") {
    DenseChannelSpec dense;
    DeploymentSpec& dep = dense.deployment;
    dep.cell_radius = optional_double("channel", "cell_radius", dep.cell_radius);
    dep.carrier_freq = optional_double("channel", "carrier_freq", dep.carrier_freq);
    dep.pathloss_exponent = optional_double("channel", "pathloss_exponent", dep.pathloss_exponent);
    dep.shadowing_std = optional_double("channel", "shadowing_std", dep.shadowing_std);
    dep.min_distance = optional_double("channel", "min_distance", dep.min_distance);
    dep.rician_k = optional_double("channel", "rician_k", dep.rician_k);
    dense.target_snr_db = optional_double("channel", "target_snr_db", dense.target_snr_db);
    spec.channel = dense;
  } else {
    throw ParseError(model_line, "unknown channel model '" + model + "' (iid or dense)");
  }

  if (auto e = get("run", "algos")) {
    for (auto item : split_list(e->value)) {
      const auto algo = parse_algorithm(item);
      if (!algo) throw ParseError(e->line, "unknown algorithm '" + std::string(item) + "'");
      spec.algos.push_back(*algo);
    }
  }
  if (auto e = get("run", "iterations")) {
    spec.iteration_list.clear();
    for (auto item : split_list(e->value)) spec.iteration_list.push_back(parse_number<int>(item, e->line, "iterations"));
  }
  if (auto e = get("run", "realizations")) spec.realizations = parse_number<int>(e->value, e->line, "realizations");
  if (auto e = get("run", "seed")) spec.master_seed = parse_number<std::uint64_t>(e->value, e->line, "seed");
  if (auto e = get("run", "init")) {
    const auto policy = parse_init_policy(e->value);
    if (!policy) throw ParseError(e->line, "init must be eigen or random");
    spec.init = *policy;
  }
  if (auto e = get("run", "ra_last_iteration_only")) {
    spec.ra_last_iteration_only = parse_bool(e->value, e->line, "ra_last_iteration_only");
  }
  if (auto e = get("run", "output")) spec.output_path = e->value;
  if (auto e = get("run", "workers")) spec.workers = parse_number<int>(e->value, e->line, "workers");

  for (const auto& [name, section] : sections) {
    if (!section.empty()) {
      const auto& [key, entry] = *section.begin();
      throw ParseError(entry.line, "unknown key " + key + " in [" + name + "]");
    }
  }

  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment(text.str());
}

std::string serialize_experiment(const ExperimentSpec& spec) {
  std::ostringstream out;
  const NetworkConfig& net = spec.network;
  out << "[network]\n"
      << "cells = " << net.cells << "\n"
      << "users_per_cell = " << net.users_per_cell << "\n"
      << "tx_antennas = " << net.tx_antennas << "\n"
      << "rx_antennas = " << net.rx_antennas << "\n"
      << "streams = " << net.streams << "\n"
      << "tx_power = " << fmt(net.tx_power) << "\n"
      << "rx_filter_power = " << fmt(net.rx_filter_power) << "\n"
      << "reverse_noise_factor = " << fmt(spec.reverse_noise_factor) << "\n\n";

  out << "[channel]\n";
  if (const auto* iid = std::get_if<IidChannelSpec>(&spec.channel)) {
    out << "model = iid\n"
        << "snr_db = " << join(iid->snr_db, fmt) << "\n\n";
  } else {
    const auto& dense = std::get<DenseChannelSpec>(spec.channel);
    const DeploymentSpec& dep = dense.deployment;
    out << "model = dense\n"
        << "cell_radius = " << fmt(dep.cell_radius) << "\n"
        << "carrier_freq = " << fmt(dep.carrier_freq) << "\n"
        << "pathloss_exponent = " << fmt(dep.pathloss_exponent) << "\n"
        << "shadowing_std = " << fmt(dep.shadowing_std) << "\n"
        << "min_distance = " << fmt(dep.min_distance) << "\n"
        << "rician_k = " << fmt(dep.rician_k) << "\n"
        << "target_snr_db = " << fmt(dense.target_snr_db) << "\n\n";
  }

  out << "[run]\n"
      << "algos = " << join(spec.algos, [](AlgorithmId a) { return std::string(to_string(a)); }) << "\n"
      << "iterations = " << join(spec.iteration_list, [](int t) { return std::to_string(t); }) << "\n"
      << "realizations = " << spec.realizations << "\n"
      << "seed = " << spec.master_seed << "\n"
      << "init = " << to_string(spec.init) << "\n"
      << "ra_last_iteration_only = " << (spec.ra_last_iteration_only ? "true" : "false") << "\n"
      << "output = " << spec.output_path << "\n"
      << "workers = " << spec.workers << "\n";
  return out.str();
}

}  // namespace fbc
