#include "dualgen/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "dualgen/chem.hpp"
#include "dualgen/compose.hpp"
#include "dualgen/config.hpp"
#include "dualgen/diffusion.hpp"
#include "dualgen/egnn.hpp"
#include "dualgen/error.hpp"
#include "dualgen/harness.hpp"
#include "dualgen/synergy.hpp"

namespace dualgen {

namespace {

namespace fs = std::filesystem;

// Raised for invalid flag combinations that CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string model_path;
};

Config load(const Common& common) {
  Config c = common.config_path.empty() ? Config{} : load_config(common.config_path);
  if (common.seed_given) c.seed = common.seed;
  return c;
}

egnn::NetworkParams load_model(const Common& common, const Config& config, std::ostream& err) {
  if (!common.model_path.empty()) return egnn::load_checkpoint(common.model_path);
  err << "warning: no --model given, using randomly initialized weights (seed " << config.seed << ")\n";
  Rng rng(config.seed);
  return egnn::NetworkParams::random(config.network(), rng);
}

std::size_t draw_atom_count(const Config& config, std::size_t fixed, Rng& rng) {
  if (fixed > 0) return fixed;
  return config.n_atoms_min + rng.index(config.n_atoms_max - config.n_atoms_min + 1);
}

std::string mol_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mol_%03zu", i);
  return buf;
}

void write_molecule(const fs::path& dir, std::size_t i, chem::Molecule mol) {
  mol.name = mol_name(i);
  chem::write_text_file((dir / (mol.name + ".txt")).string(),
                        chem::serialize_structure(mol, chem::AtomTypeVocab::ligand_default()));
}

diffusion::SamplingOptions sampling_options(const Config& c) {
  diffusion::SamplingOptions o;
  o.k = c.k;
  o.argmax_final = c.argmax_final;
  return o;
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config_path, "key = value settings file")->check(CLI::ExistingFile);
  sub->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { common.seed = s, common.seed_given = true; }, "base random seed");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-target, pocket-conditioned molecule generation by compositional diffusion"};
  app.require_subcommand(1);
  Common common;

  // train
  std::vector<std::string> train_pockets, train_ligands;
  std::string train_out;
  auto* train = app.add_subcommand("train", "fit the denoising network on pocket/ligand pairs");
  add_common(train, common);
  train->add_option("--pocket", train_pockets, "pocket file (repeat, paired with --ligand)")->required();
  train->add_option("--ligand", train_ligands, "ligand file (repeat, paired with --pocket)")->required();
  train->add_option("--out", train_out, "checkpoint to write")->required();
  train->add_option("--model", common.model_path, "checkpoint to start from");

  // sample-single
  std::string single_pocket, single_out = ".";
  std::size_t single_n = 1, single_atoms = 0;
  auto* single = app.add_subcommand("sample-single", "sample ligands for one pocket");
  add_common(single, common);
  single->add_option("--pocket", single_pocket, "pocket file")->required()->check(CLI::ExistingFile);
  single->add_option("--n", single_n, "number of molecules")->check(CLI::PositiveNumber);
  single->add_option("--atoms", single_atoms, "atoms per molecule (default: drawn from the config range)");
  single->add_option("--out", single_out, "output directory");
  single->add_option("--model", common.model_path, "checkpoint")->check(CLI::ExistingFile);

  // sample-dual
  std::string dual_p1, dual_p2, dual_probers, dual_criterion = "center", dual_mode = "dualdiff", dual_out = ".";
  std::size_t dual_n = 1, dual_atoms = 0;
  auto* dual = app.add_subcommand("sample-dual", "sample dual-target ligands for two pockets");
  add_common(dual, common);
  dual->add_option("--p1", dual_p1, "first pocket")->required()->check(CLI::ExistingFile);
  dual->add_option("--p2", dual_p2, "second pocket")->required()->check(CLI::ExistingFile);
  dual->add_option("--probers", dual_probers, "prober pose pairs")->check(CLI::ExistingFile);
  dual->add_option("--criterion", dual_criterion, "center, rmsd or score")
      ->check(CLI::IsMember({"center", "rmsd", "score"}));
  dual->add_option("--mode", dual_mode, "compdiff or dualdiff")->check(CLI::IsMember({"compdiff", "dualdiff"}));
  dual->add_option("--n", dual_n, "number of molecules")->check(CLI::PositiveNumber);
  dual->add_option("--atoms", dual_atoms, "atoms per molecule (default: drawn from the config range)");
  dual->add_option("--out", dual_out, "output directory");
  dual->add_option("--model", common.model_path, "checkpoint")->check(CLI::ExistingFile);

  // align
  std::string align_p1, align_p2, align_probers, align_criterion = "center";
  auto* align = app.add_subcommand("align", "rigid transform taking P2 into the P1 frame");
  add_common(align, common);
  align->add_option("--p1", align_p1, "first pocket")->required()->check(CLI::ExistingFile);
  align->add_option("--p2", align_p2, "second pocket")->required()->check(CLI::ExistingFile);
  align->add_option("--probers", align_probers, "prober pose pairs")->check(CLI::ExistingFile);
  align->add_option("--criterion", align_criterion, "center, rmsd or score")
      ->check(CLI::IsMember({"center", "rmsd", "score"}));

  // synergy
  std::string synergy_table, synergy_out;
  auto* syn = app.add_subcommand("synergy", "score drug combinations and list synergistic pairs");
  add_common(syn, common);
  syn->add_option("--table", synergy_table, "combination table")->required()->check(CLI::ExistingFile);
  syn->add_option("--out", synergy_out, "manifest file (default: stdout)");

  // fragment
  std::string frag_m1, frag_m2, frag_p1, frag_p2, frag_mode = "joint", frag_host = "p2", frag_out = ".";
  auto* frag = app.add_subcommand("fragment", "select a fragment pair for linker design");
  add_common(frag, common);
  frag->add_option("--m1", frag_m1, "reference ligand of P1")->required()->check(CLI::ExistingFile);
  frag->add_option("--m2", frag_m2, "reference ligand of P2")->required()->check(CLI::ExistingFile);
  frag->add_option("--p1", frag_p1, "first pocket")->required()->check(CLI::ExistingFile);
  frag->add_option("--p2", frag_p2, "second pocket")->required()->check(CLI::ExistingFile);
  frag->add_option("--mode", frag_mode, "joint or self")->check(CLI::IsMember({"joint", "self"}));
  frag->add_option("--host", frag_host, "pocket hosting joint scoring: p1 or p2")
      ->check(CLI::IsMember({"p1", "p2"}));
  frag->add_option("--out", frag_out, "output directory");

  // evaluate
  std::string eval_p1, eval_p2, eval_ref1, eval_ref2, eval_out;
  std::vector<std::string> eval_mols;
  auto* eval = app.add_subcommand("evaluate", "score molecules against both pockets");
  add_common(eval, common);
  eval->add_option("--p1", eval_p1, "first pocket")->required()->check(CLI::ExistingFile);
  eval->add_option("--p2", eval_p2, "second pocket")->required()->check(CLI::ExistingFile);
  eval->add_option("--ref1", eval_ref1, "reference ligand of P1")->required()->check(CLI::ExistingFile);
  eval->add_option("--ref2", eval_ref2, "reference ligand of P2")->required()->check(CLI::ExistingFile);
  eval->add_option("molecules", eval_mols, "molecule files")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "report file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  const auto ligand_vocab = chem::AtomTypeVocab::ligand_default();
  const auto protein_vocab = chem::AtomTypeVocab::protein_default();

  try {
    const Config config = load(common);
    const auto schedule = config.make_schedule();

    if (train->parsed()) {
      if (train_pockets.size() != train_ligands.size()) {
        throw UsageError("--pocket and --ligand must be given the same number of times");
      }
      std::vector<diffusion::TrainingExample> data;
      for (std::size_t i = 0; i < train_pockets.size(); ++i) {
        data.push_back(diffusion::TrainingExample::from(chem::read_file_pocket(train_pockets[i], protein_vocab),
                                                        chem::read_file_molecule(train_ligands[i], ligand_vocab)));
      }
      Rng rng(config.seed);
      egnn::NetworkParams params = common.model_path.empty() ? egnn::NetworkParams::random(config.network(), rng)
                                                             : egnn::load_checkpoint(common.model_path);
      diffusion::train(params, data, schedule, config.train_options(), rng,
                       [&](int epoch, double loss) { out << "epoch " << epoch + 1 << " loss " << loss << '\n'; });
      egnn::save_checkpoint(train_out, params);
    } else if (single->parsed()) {
      const auto pocket = chem::read_file_pocket(single_pocket, protein_vocab);
      const auto params = load_model(common, config, err);
      fs::create_directories(single_out);
      for (std::size_t i = 0; i < single_n; ++i) {
        Rng rng(config.seed + i);
        const std::size_t n_atoms = draw_atom_count(config, single_atoms, rng);
        write_molecule(single_out, i,
                       diffusion::sample_single(params, pocket, n_atoms, schedule, rng, sampling_options(config)));
      }
      out << "wrote " << single_n << " molecules to " << single_out << '\n';
    } else if (dual->parsed()) {
      const auto criterion = compose::parse_criterion(dual_criterion);
      if (criterion != compose::AlignmentCriterion::Center && dual_probers.empty()) {
        throw UsageError("--criterion " + dual_criterion + " requires --probers");
      }
      const auto p1 = chem::read_file_pocket(dual_p1, protein_vocab);
      const auto p2 = chem::read_file_pocket(dual_p2, protein_vocab);
      std::vector<compose::ProberPosePair> probers;
      if (!dual_probers.empty()) probers = compose::read_probers_file(dual_probers, ligand_vocab);
      const auto params = load_model(common, config, err);

      compose::CompositionMode mode;
      mode.kind = compose::parse_composition_kind(dual_mode);
      mode.eta = config.eta;
      mode.tempered_types = config.tempered_types;
      mode.epsilon_form = config.epsilon_form;

      const auto alignment = compose::align_pockets(p1, p2, probers, criterion);
      const auto p2_aligned = compose::transform_pocket(p2, alignment.transform);
      fs::create_directories(dual_out);
      for (std::size_t i = 0; i < dual_n; ++i) {
        Rng rng(config.seed + i);
        const std::size_t n_atoms = draw_atom_count(config, dual_atoms, rng);
        write_molecule(dual_out, i,
                       compose::sample_dual_aligned(params, p1, p2_aligned, n_atoms, schedule, mode, rng,
                                                    sampling_options(config)));
      }
      std::string record = "criterion " + dual_criterion + "\nprober " +
                           (alignment.prober_id.empty() ? "-" : alignment.prober_id) + '\n' +
                           compose::serialize_transform(alignment.transform);
      chem::write_text_file((fs::path(dual_out) / "transform.txt").string(), record);
      out << "wrote " << dual_n << " molecules and transform.txt to " << dual_out << '\n';
    } else if (align->parsed()) {
      const auto criterion = compose::parse_criterion(align_criterion);
      if (criterion != compose::AlignmentCriterion::Center && align_probers.empty()) {
        throw UsageError("--criterion " + align_criterion + " requires --probers");
      }
      const auto p1 = chem::read_file_pocket(align_p1, protein_vocab);
      const auto p2 = chem::read_file_pocket(align_p2, protein_vocab);
      std::vector<compose::ProberPosePair> probers;
      if (!align_probers.empty()) probers = compose::read_probers_file(align_probers, ligand_vocab);
      const auto alignment = compose::align_pockets(p1, p2, probers, criterion);
      out << "prober " << (alignment.prober_id.empty() ? "-" : alignment.prober_id) << '\n'
          << compose::serialize_transform(alignment.transform);
    } else if (syn->parsed()) {
      const auto records = synergy::parse_combination_table(chem::read_text_file(synergy_table));
      const auto pairs = synergy::score_table(records);
      for (const auto& pair : pairs) {
        for (const auto& c : pair.cell_lines) {
          if (!c.scores) err << "warning: " << pair.drug_a << '/' << pair.drug_b << '/' << c.cell_line << ": " << c.error << '\n';
        }
      }
      const std::string manifest = synergy::synergy_manifest(pairs);
      if (synergy_out.empty()) {
        out << manifest;
      } else {
        chem::write_text_file(synergy_out, manifest);
      }
    } else if (frag->parsed()) {
      const auto m1 = chem::read_file_molecule(frag_m1, ligand_vocab);
      const auto m2 = chem::read_file_molecule(frag_m2, ligand_vocab);
      const auto p1 = chem::read_file_pocket(frag_p1, protein_vocab);
      const auto p2 = chem::read_file_pocket(frag_p2, protein_vocab);
      const auto mode = harness::parse_pair_mode(frag_mode);
      const harness::MockScorer scorer;
      const chem::Pocket& host = frag_host == "p1" ? p1 : p2;
      const auto with_bonds = [&](const chem::Molecule& m) { return m.bonds ? m : chem::infer_bonds(m, ligand_vocab); };
      const auto f1 = harness::score_fragments(with_bonds(m1), mode == harness::PairMode::Joint ? host : p1, scorer);
      const auto f2 = harness::score_fragments(with_bonds(m2), mode == harness::PairMode::Joint ? host : p2, scorer);
      const auto pick = harness::select_fragment_pair(f1, f2, mode);
      fs::create_directories(frag_out);
      const auto dump = [&](const harness::ScoredFragment& f, const std::string& name) {
        chem::Molecule m{name, f.fragment.atoms, std::nullopt};
        chem::write_text_file((fs::path(frag_out) / (name + ".txt")).string(),
                              chem::serialize_structure(m, ligand_vocab));
      };
      dump(f1[pick.first], "fragment1");
      dump(f2[pick.second], "fragment2");
      out << "fragment1 " << pick.first << " score " << f1[pick.first].score << '\n'
          << "fragment2 " << pick.second << " score " << f2[pick.second].score << '\n'
          << "score_sum " << pick.score_sum << '\n';
    } else if (eval->parsed()) {
      const auto p1 = chem::read_file_pocket(eval_p1, protein_vocab);
      const auto p2 = chem::read_file_pocket(eval_p2, protein_vocab);
      const auto r1 = chem::read_file_molecule(eval_ref1, ligand_vocab);
      const auto r2 = chem::read_file_molecule(eval_ref2, ligand_vocab);
      std::vector<chem::Molecule> mols;
      std::vector<std::string> names;
      for (const auto& path : eval_mols) {
        mols.push_back(chem::read_file_molecule(path, ligand_vocab));
        names.push_back(fs::path(path).filename().string());
      }
      const harness::MockScorer scorer;
      const std::string report = harness::format_report(harness::evaluate(mols, p1, p2, r1, r2, scorer), names);
      if (eval_out.empty()) {
        out << report;
      } else {
        chem::write_text_file(eval_out, report);
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dualgen
