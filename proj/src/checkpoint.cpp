#include <charconv>
#include <sstream>

#include "dualgen/chem.hpp"
#include "dualgen/egnn.hpp"
#include "dualgen/error.hpp"

namespace dualgen::egnn {

namespace {

constexpr std::string_view kMagic = "DUALGEN-CHECKPOINT 1";

void append_double(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::vector<std::string> tokens_of(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(line, "bad number '" + tok + "'");
  return v;
}

int to_int(const std::string& tok, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(line, "bad integer '" + tok + "'");
  return v;
}

}  // namespace

std::string serialize_checkpoint(const NetworkParams& params) {
  const auto& c = params.config();
  std::string out(kMagic);
  out += "\nconfig ligand_types " + std::to_string(c.ligand_types) + " protein_types " +
         std::to_string(c.protein_types) + " hidden " + std::to_string(c.hidden) + " layers " +
         std::to_string(c.layers) + " rbf_count " + std::to_string(c.rbf_count) + " rbf_max ";
  append_double(out, c.rbf_max);
  out += " time_features " + std::to_string(c.time_features) + " gate_clip ";
  append_double(out, c.gate_clip);
  out += '\n';
  const auto values = params.values();
  for (const auto& t : params.tensors()) {
    out += "tensor " + std::to_string(t.layer) + ' ' + t.name + ' ' + std::to_string(t.rows) + ' ' +
           std::to_string(t.cols) + '\n';
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index col = 0; col < t.cols; ++col) {
        if (col) out += ' ';
        append_double(out, values[t.offset + static_cast<std::size_t>(r * t.cols + col)]);
      }
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

NetworkParams parse_checkpoint(std::string_view text) {
  chem::LineReader reader(text);
  if (reader.done() || reader.peek() != kMagic) throw ParseError(1, "not a checkpoint (missing header)");
  reader.take();

  const std::size_t config_line = reader.line_number();
  if (reader.done()) throw ParseError(config_line, "missing config line");
  const auto ct = tokens_of(reader.take());
  if (ct.size() != 17 || ct[0] != "config") throw ParseError(config_line, "malformed config line");
  NetworkConfig c;
  for (std::size_t i = 1; i + 1 < ct.size(); i += 2) {
    const auto& key = ct[i];
    const auto& val = ct[i + 1];
    if (key == "ligand_types") c.ligand_types = to_int(val, config_line);
    else if (key == "protein_types") c.protein_types = to_int(val, config_line);
    else if (key == "hidden") c.hidden = to_int(val, config_line);
    else if (key == "layers") c.layers = to_int(val, config_line);
    else if (key == "rbf_count") c.rbf_count = to_int(val, config_line);
    else if (key == "rbf_max") c.rbf_max = to_double(val, config_line);
    else if (key == "time_features") c.time_features = to_int(val, config_line);
    else if (key == "gate_clip") c.gate_clip = to_double(val, config_line);
    else throw ParseError(config_line, "unknown config key '" + key + "'");
  }

  NetworkParams params(c);
  auto values = params.values();
  for (const auto& t : params.tensors()) {
    const std::size_t line = reader.line_number();
    if (reader.done()) throw ParseError(line, "missing tensor " + t.name);
    const auto head = tokens_of(reader.take());
    if (head.size() != 5 || head[0] != "tensor" || to_int(head[1], line) != t.layer || head[2] != t.name ||
        to_int(head[3], line) != t.rows || to_int(head[4], line) != t.cols) {
      throw ParseError(line, "expected tensor " + std::to_string(t.layer) + " " + t.name);
    }
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      const std::size_t row_line = reader.line_number();
      if (reader.done()) throw ParseError(row_line, "truncated tensor " + t.name);
      const auto row = tokens_of(reader.take());
      if (static_cast<Eigen::Index>(row.size()) != t.cols) throw ParseError(row_line, "wrong row width in " + t.name);
      for (Eigen::Index col = 0; col < t.cols; ++col) {
        values[t.offset + static_cast<std::size_t>(r * t.cols + col)] = to_double(row[static_cast<std::size_t>(col)], row_line);
      }
    }
  }
  if (reader.done() || reader.take() != "end") throw ParseError(reader.line_number(), "missing 'end'");
  return params;
}

void save_checkpoint(const std::string& path, const NetworkParams& params) {
  chem::write_text_file(path, serialize_checkpoint(params));
}

NetworkParams load_checkpoint(const std::string& path) {
  try {
    return parse_checkpoint(chem::read_text_file(path));
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace dualgen::egnn
