#include "dualgen/config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "dualgen/chem.hpp"
#include "dualgen/error.hpp"

namespace dualgen {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_value(std::string_view value, std::size_t line, std::string_view key) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError(line, "malformed value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view value, std::size_t line, std::string_view key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError(line, "expected a boolean for " + std::string(key));
}

}  // namespace

diffusion::NoiseSchedule Config::make_schedule() const {
  return diffusion::make_schedule(schedule, steps, beta_min, beta_max);
}

egnn::NetworkConfig Config::network() const {
  egnn::NetworkConfig c;
  c.hidden = hidden;
  c.layers = layers;
  return c;
}

diffusion::TrainOptions Config::train_options() const {
  diffusion::TrainOptions o;
  o.epochs = epochs;
  o.steps_per_epoch = steps_per_epoch;
  o.batch = batch;
  o.learning_rate = learning_rate;
  o.final_learning_rate = final_learning_rate;
  o.lambda_v = lambda_v;
  o.k = k;
  return o;
}

Config parse_config(std::string_view text) {
  Config c;
  using Setter = std::function<void(std::string_view, std::size_t, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"schedule", [&](auto v, auto line, auto) {
         try {
           c.schedule = diffusion::parse_schedule_kind(v);
         } catch (const Error& e) {
           throw ParseError(line, e.what());
         }
       }},
      {"T", [&](auto v, auto line, auto key) { c.steps = parse_value<int>(v, line, key); }},
      {"beta_min", [&](auto v, auto line, auto key) { c.beta_min = parse_value<double>(v, line, key); }},
      {"beta_max", [&](auto v, auto line, auto key) { c.beta_max = parse_value<double>(v, line, key); }},
      {"k", [&](auto v, auto line, auto key) { c.k = parse_value<std::size_t>(v, line, key); }},
      {"hidden", [&](auto v, auto line, auto key) { c.hidden = parse_value<int>(v, line, key); }},
      {"layers", [&](auto v, auto line, auto key) { c.layers = parse_value<int>(v, line, key); }},
      {"eta", [&](auto v, auto line, auto key) { c.eta = parse_value<double>(v, line, key); }},
      {"tempered_types", [&](auto v, auto line, auto key) { c.tempered_types = parse_bool(v, line, key); }},
      {"epsilon_form", [&](auto v, auto line, auto key) { c.epsilon_form = parse_bool(v, line, key); }},
      {"argmax_final", [&](auto v, auto line, auto key) { c.argmax_final = parse_bool(v, line, key); }},
      {"n_atoms_min", [&](auto v, auto line, auto key) { c.n_atoms_min = parse_value<std::size_t>(v, line, key); }},
      {"n_atoms_max", [&](auto v, auto line, auto key) { c.n_atoms_max = parse_value<std::size_t>(v, line, key); }},
      {"seed", [&](auto v, auto line, auto key) { c.seed = parse_value<std::uint64_t>(v, line, key); }},
      {"epochs", [&](auto v, auto line, auto key) { c.epochs = parse_value<int>(v, line, key); }},
      {"steps_per_epoch", [&](auto v, auto line, auto key) { c.steps_per_epoch = parse_value<int>(v, line, key); }},
      {"batch", [&](auto v, auto line, auto key) { c.batch = parse_value<int>(v, line, key); }},
      {"learning_rate", [&](auto v, auto line, auto key) { c.learning_rate = parse_value<double>(v, line, key); }},
      {"final_learning_rate",
       [&](auto v, auto line, auto key) { c.final_learning_rate = parse_value<double>(v, line, key); }},
      {"lambda_v", [&](auto v, auto line, auto key) { c.lambda_v = parse_value<double>(v, line, key); }},
  };

  chem::LineReader reader(text);
  while (!reader.done()) {
    const std::size_t line = reader.line_number();
    std::string_view raw = reader.take();
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw ParseError(line, "expected 'key = value'");
    const std::string_view key = trim(raw.substr(0, eq));
    const std::string_view value = trim(raw.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ParseError(line, "unknown key '" + std::string(key) + "'");
    if (value.empty()) throw ParseError(line, "missing value for " + std::string(key));
    it->second(value, line, key);
  }

  if (c.n_atoms_min < 1 || c.n_atoms_min > c.n_atoms_max) throw ParseError(1, "need 1 <= n_atoms_min <= n_atoms_max");
  if (!(c.eta > 0.0 && c.eta <= 1.0)) throw ParseError(1, "eta must lie in (0, 1]");
  if (c.steps < 1 || c.hidden < 1 || c.layers < 0 || c.k < 1) {
    throw ParseError(1, "T, hidden and k must be positive, layers non-negative");
  }
  return c;
}

Config load_config(const std::string& path) {
  try {
    return parse_config(chem::read_text_file(path));
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace dualgen
