#include <charconv>
#include <cmath>
#include <sstream>

#include "dualgen/compose.hpp"
#include "dualgen/error.hpp"

namespace dualgen::compose {

namespace {

bool parse_double(std::string_view token, double& value) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(value);
}

chem::Molecule read_pose(chem::LineReader& reader, const chem::AtomTypeVocab& vocab) {
  const std::size_t start = reader.line_number();
  auto block = chem::read_structure_block(reader, vocab, chem::AtomTypeVocab::protein_default());
  if (!std::holds_alternative<chem::Molecule>(block)) {
    throw ParseError(start, "prober pose must be a molecule, found a pocket");
  }
  return std::get<chem::Molecule>(std::move(block));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<ProberPosePair> parse_probers(std::string_view text, const chem::AtomTypeVocab& vocab) {
  chem::LineReader reader(text);
  std::vector<ProberPosePair> out;
  reader.skip_blank();
  while (!reader.done()) {
    const std::size_t header_line = reader.line_number();
    std::istringstream header{std::string(reader.take())};
    std::string tag, id, s1, s2, extra;
    header >> tag >> id >> s1 >> s2;
    ProberPosePair p;
    if (tag != "PROBER" || s2.empty() || (header >> extra) || !parse_double(s1, p.score1) ||
        !parse_double(s2, p.score2)) {
      throw ParseError(header_line, "expected 'PROBER <id> <score1> <score2>'");
    }
    p.id = id;
    p.pose1 = read_pose(reader, vocab);
    p.pose2 = read_pose(reader, vocab);
    if (p.pose1.atoms.size() != p.pose2.atoms.size()) {
      throw ParseError(header_line, "prober '" + id + "' poses differ in atom count");
    }
    for (std::size_t i = 0; i < p.pose1.atoms.size(); ++i) {
      if (p.pose1.atoms[i].type_index() != p.pose2.atoms[i].type_index()) {
        throw ParseError(header_line, "prober '" + id + "' poses differ in atom types");
      }
    }
    out.push_back(std::move(p));
    reader.skip_blank();
  }
  return out;
}

std::string serialize_probers(std::span<const ProberPosePair> probers, const chem::AtomTypeVocab& vocab) {
  std::string out;
  for (const auto& p : probers) {
    out += "PROBER " + p.id + ' ' + format_double(p.score1) + ' ' + format_double(p.score2) + '\n';
    out += chem::serialize_structure(p.pose1, vocab);
    out += chem::serialize_structure(p.pose2, vocab);
  }
  return out;
}

std::vector<ProberPosePair> read_probers_file(const std::string& path, const chem::AtomTypeVocab& vocab) {
  try {
    return parse_probers(chem::read_text_file(path), vocab);
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string serialize_transform(const geom::RigidTransform& transform) {
  std::string out;
  for (int r = 0; r < 3; ++r) {
    out += "rotation";
    for (int c = 0; c < 3; ++c) out += ' ' + format_double(transform.rotation(r, c));
    out += '\n';
  }
  out += "translation";
  for (int c = 0; c < 3; ++c) out += ' ' + format_double(transform.translation(c));
  out += '\n';
  return out;
}

}  // namespace dualgen::compose
