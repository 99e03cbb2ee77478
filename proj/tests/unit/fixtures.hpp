#pragma once

#include <Eigen/Dense>

#include "dualgen/chem.hpp"
#include "dualgen/geom.hpp"
#include "dualgen/graph.hpp"
#include "dualgen/rng.hpp"

namespace dualgen::testing {

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Vector4d q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return Eigen::Quaterniond(q.normalized()).toRotationMatrix();
}

inline geom::RigidTransform random_transform(Rng& rng, double spread = 10.0) {
  geom::RigidTransform t;
  t.rotation = random_rotation(rng);
  t.translation = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * spread;
  return t;
}

inline geom::Point3 random_point(Rng& rng, double scale = 1.0) {
  return geom::Point3(rng.normal(), rng.normal(), rng.normal()) * scale;
}

inline chem::Pocket random_pocket(Rng& rng, std::size_t n, double scale = 4.0) {
  const auto vocab = chem::AtomTypeVocab::protein_default();
  chem::Pocket p;
  p.identifier = "test";
  for (std::size_t i = 0; i < n; ++i) {
    chem::Atom a;
    a.position = random_point(rng, scale);
    a.type = vocab.one_hot(rng.index(vocab.size()));
    p.atoms.push_back(a);
  }
  return p;
}

inline graph::LigandNodes random_ligand(Rng& rng, std::size_t n, int types = 7, double scale = 2.0) {
  graph::LigandNodes l;
  l.x.resize(static_cast<Eigen::Index>(n), 3);
  l.v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), types);
  for (Eigen::Index i = 0; i < l.x.rows(); ++i) {
    l.x.row(i) = random_point(rng, scale).transpose();
    l.v(i, static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(types)))) = 1.0;
  }
  return l;
}

inline chem::Molecule random_molecule(Rng& rng, std::size_t n, double scale = 2.0) {
  const auto vocab = chem::AtomTypeVocab::ligand_default();
  chem::Molecule m;
  m.name = "mol";
  for (std::size_t i = 0; i < n; ++i) {
    chem::Atom a;
    a.position = random_point(rng, scale);
    a.type = vocab.one_hot(rng.index(3));
    m.atoms.push_back(a);
  }
  return m;
}

inline graph::Positions transform_rows(const graph::Positions& x, const geom::RigidTransform& t) {
  graph::Positions out = (x * t.rotation.transpose()).rowwise() + t.translation.transpose();
  return out;
}

inline chem::Pocket transformed(const chem::Pocket& p, const geom::RigidTransform& t) {
  chem::Pocket out = p;
  for (auto& a : out.atoms) a.position = t.apply(a.position);
  return out;
}

inline chem::Molecule transformed(const chem::Molecule& m, const geom::RigidTransform& t) {
  chem::Molecule out = m;
  for (auto& a : out.atoms) a.position = t.apply(a.position);
  return out;
}

}  // namespace dualgen::testing
