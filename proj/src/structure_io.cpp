#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dualgen/chem.hpp"
#include "dualgen/error.hpp"

namespace dualgen::chem {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

bool is_bond_line(std::string_view line) {
  const auto tokens = split_ws(line);
  if (tokens.size() != 3) return false;
  long long v = 0;
  return std::all_of(tokens.begin(), tokens.end(), [&](auto t) { return parse_number(t, v); });
}

void append_double(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::string serialize_atoms(std::string_view name, const std::vector<Atom>& atoms, const AtomTypeVocab& vocab) {
  std::string out = std::to_string(atoms.size());
  out += '\n';
  out += name;
  out += '\n';
  for (const auto& atom : atoms) {
    out += vocab.element(atom.type_index());
    for (int c = 0; c < 3; ++c) {
      out += ' ';
      append_double(out, atom.position(c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

LineReader::LineReader(std::string_view text) {
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines_.push_back(line);
    start = end + 1;
  }
}

void LineReader::skip_blank() {
  while (!done() && split_ws(peek()).empty()) ++next_;
}

Structure read_structure_block(LineReader& reader, const AtomTypeVocab& ligand_vocab,
                               const AtomTypeVocab& protein_vocab) {
  reader.skip_blank();
  if (reader.done()) throw ParseError(reader.line_number(), "expected atom count, found end of input");

  const std::size_t count_line = reader.line_number();
  const auto count_tokens = split_ws(reader.take());
  std::size_t count = 0;
  if (count_tokens.size() != 1 || !parse_number(count_tokens[0], count)) {
    throw ParseError(count_line, "expected a single non-negative atom count");
  }
  if (reader.done()) throw ParseError(reader.line_number(), "missing name line");
  const std::string name(reader.take());

  const bool is_pocket = name.starts_with(kPocketPrefix);
  const AtomTypeVocab& vocab = is_pocket ? protein_vocab : ligand_vocab;

  std::vector<Atom> atoms;
  atoms.reserve(count);
  for (std::size_t a = 0; a < count; ++a) {
    if (reader.done()) throw ParseError(reader.line_number(), "expected " + std::to_string(count) + " atom lines");
    const std::size_t line_no = reader.line_number();
    const auto tokens = split_ws(reader.take());
    if (tokens.size() != 4) throw ParseError(line_no, "atom line needs 'ELEMENT x y z'");

    std::optional<std::size_t> type = vocab.index_of(tokens[0]);
    if (!type && is_pocket && is_element_symbol(tokens[0])) type = vocab.other_index();
    if (!type) throw ParseError(line_no, "unknown element symbol '" + std::string(tokens[0]) + "'");

    Atom atom;
    for (int c = 0; c < 3; ++c) {
      double v = 0.0;
      if (!parse_number(tokens[static_cast<std::size_t>(c) + 1], v) || !std::isfinite(v)) {
        throw ParseError(line_no, "malformed coordinate '" + std::string(tokens[static_cast<std::size_t>(c) + 1]) + "'");
      }
      atom.position(c) = v;
    }
    atom.type = vocab.one_hot(*type);
    atoms.push_back(std::move(atom));
  }

  std::optional<std::vector<Bond>> bonds;
  reader.skip_blank();
  if (!reader.done() && split_ws(reader.peek()) == std::vector<std::string_view>{"BONDS"}) {
    if (is_pocket) throw ParseError(reader.line_number(), "pockets cannot carry bonds");
    reader.take();
    bonds.emplace();
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (!reader.done() && is_bond_line(reader.peek())) {
      const std::size_t line_no = reader.line_number();
      const auto tokens = split_ws(reader.take());
      long long i = 0, j = 0, order = 0;
      parse_number(tokens[0], i);
      parse_number(tokens[1], j);
      parse_number(tokens[2], order);
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= count || static_cast<std::size_t>(j) >= count) {
        throw ParseError(line_no, "bond endpoint out of range");
      }
      if (i == j) throw ParseError(line_no, "bond joins an atom to itself");
      if (order < 1) throw ParseError(line_no, "bond order must be positive");
      const std::pair<std::size_t, std::size_t> key = std::minmax(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (!seen.insert(key).second) throw ParseError(line_no, "duplicate bond");
      bonds->push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<int>(order)});
    }
  }

  if (is_pocket) {
    if (atoms.empty()) throw ParseError(count_line, "pocket has no atoms");
    return Pocket{name.substr(kPocketPrefix.size()), std::move(atoms)};
  }
  return Molecule{name, std::move(atoms), std::move(bonds)};
}

Structure parse_structure(std::string_view text, const AtomTypeVocab& ligand_vocab,
                          const AtomTypeVocab& protein_vocab) {
  LineReader reader(text);
  Structure out = read_structure_block(reader, ligand_vocab, protein_vocab);
  reader.skip_blank();
  if (!reader.done()) throw ParseError(reader.line_number(), "unexpected trailing content");
  return out;
}

std::string serialize_structure(const Molecule& mol, const AtomTypeVocab& vocab) {
  std::string out = serialize_atoms(mol.name, mol.atoms, vocab);
  if (mol.bonds) {
    out += "BONDS\n";
    for (const auto& b : *mol.bonds) {
      out += std::to_string(b.i) + ' ' + std::to_string(b.j) + ' ' + std::to_string(b.order) + '\n';
    }
  }
  return out;
}

std::string serialize_structure(const Pocket& pocket, const AtomTypeVocab& vocab) {
  return serialize_atoms(std::string(kPocketPrefix) + pocket.identifier, pocket.atoms, vocab);
}

Molecule parse_molecule(std::string_view text, const AtomTypeVocab& ligand_vocab) {
  auto s = parse_structure(text, ligand_vocab, AtomTypeVocab::protein_default());
  if (!std::holds_alternative<Molecule>(s)) throw ParseError(2, "expected a molecule, found a pocket");
  return std::get<Molecule>(std::move(s));
}

Pocket parse_pocket(std::string_view text, const AtomTypeVocab& protein_vocab) {
  auto s = parse_structure(text, AtomTypeVocab::ligand_default(), protein_vocab);
  if (!std::holds_alternative<Pocket>(s)) throw ParseError(2, "expected a pocket (name prefix POCKET:)");
  return std::get<Pocket>(std::move(s));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Molecule read_file_molecule(const std::string& path, const AtomTypeVocab& vocab) {
  try {
    return parse_molecule(read_text_file(path), vocab);
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

Pocket read_file_pocket(const std::string& path, const AtomTypeVocab& vocab) {
  try {
    return parse_pocket(read_text_file(path), vocab);
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace dualgen::chem
