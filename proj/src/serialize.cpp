// Copyright 2026 The Stokes Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "stokes/serialize.hpp"

#include <cmath>

namespace stokes {

namespace {

Json complex_pair(cplx z) { return Json::array({z.real(), z.imag()}); }

cplx complex_from(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Json vector_to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_pair(v[i]));
  return out;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_pair(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (j.at(i).size() != j.size()) throw std::invalid_argument("matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = complex_from(j.at(i).at(k));
  }
  return m;
}

Json to_json(const ManifoldOperator& op) {
  return Json{{"N", op.photons()}, {"rows", matrix_to_json(op.matrix())}};
}

Json state_to_json(const BlockDiagonalState& state, const std::string& type, const Json& params) {
  Json blocks = Json::array();
  for (const auto& b : state.blocks()) {
    Json jb{{"N", b.N}, {"pN", b.probability}};
    if (b.state.is_pure()) {
      jb["vector"] = vector_to_json(*b.state.amplitudes());
    } else {
      jb["matrix"] = matrix_to_json(b.state.density());
    }
    blocks.push_back(std::move(jb));
  }
  Json out{{"type", type}, {"params", params}, {"blocks", std::move(blocks)}};
  if (state.truncation_deficit() > 0.0) out["truncation_deficit"] = state.truncation_deficit();
  return out;
}

BlockDiagonalState state_from_json(const Json& j) {
  std::vector<Block> blocks;
  for (const auto& jb : j.at("blocks")) {
    const int N = jb.at("N").get<int>();
    const double p = jb.at("pN").get<double>();
    if (jb.contains("vector")) {
      const auto& v = jb.at("vector");
      CVector psi(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) psi[i] = complex_from(v.at(i));
      blocks.push_back(Block{N, p, ManifoldState::pure(N, psi)});
    } else {
      blocks.push_back(Block{N, p, ManifoldState::mixed(N, matrix_from_json(jb.at("matrix")))});
    }
  }
  return BlockDiagonalState(std::move(blocks));
}

Json to_json(const PolarizationTensor& t) {
  Json el = Json::array();
  for (const auto& z : t.elements()) el.push_back(complex_pair(z));
  Json out{{"order", t.order()}, {"index_order", "leftmost-slowest"}, {"elements", std::move(el)}};
  out["N"] = t.photons() ? Json(*t.photons()) : Json(nullptr);
  return out;
}

Json to_json(const MomentComponents& m) {
  Json comps = Json::array();
  for (int k = 0; k <= m.order(); ++k) {
    for (int l = 0; l <= m.order() - k; ++l) comps.push_back(Json{{"k", k}, {"l", l}, {"value", m(k, l)}});
  }
  Json out{{"order", m.order()}, {"components", std::move(comps)}};
  out["N"] = m.photons() ? Json(*m.photons()) : Json(nullptr);
  return out;
}

Json to_json(const MeasurementRecord& rec) {
  const auto& d = rec.setting.direction;
  Json counts = Json::array();
  for (const auto& [key, c] : rec.counts) counts.push_back(Json{{"N", key.first}, {"s", key.second}, {"count", c}});
  return Json{{"direction", Json::array({d[0], d[1], d[2]})},
              {"shots", rec.setting.shots},
              {"seed", rec.setting.seed},
              {"counts", std::move(counts)}};
}

MeasurementRecord record_from_json(const Json& j) {
  const auto& d = j.at("direction");
  MeasurementRecord rec{MeasurementSetting{Direction::normalized(Eigen::Vector3d(d.at(0), d.at(1), d.at(2))),
                                           j.at("shots").get<std::uint64_t>(), j.at("seed").get<std::uint64_t>()},
                        {}};
  for (const auto& c : j.at("counts")) {
    rec.counts[{c.at("N").get<int>(), c.at("s").get<int>()}] += c.at("count").get<std::uint64_t>();
  }
  if (rec.total() != rec.setting.shots) throw std::invalid_argument("record counts do not sum to shots");
  return rec;
}

Json to_json(const DirectionSet& set) {
  Json dirs = Json::array();
  for (const auto& d : set.directions) dirs.push_back(Json::array({d[0], d[1], d[2]}));
  return Json{{"order", set.order},
              {"tag", set.tag()},
              {"rank", set.rank},
              {"condition_number", finite_or_null(set.condition_number)},
              {"directions", std::move(dirs)}};
}

Json to_json(const ManifoldReconstruction& m) {
  Json comps = Json::array();
  for (const auto& c : m.components) comps.push_back(to_json(c));
  Json tensors = Json::array();
  for (const auto& t : m.tensors) tensors.push_back(to_json(t));
  Json out{{"N", m.N}, {"pN", m.probability}, {"moment_components", std::move(comps)},
           {"tensors", std::move(tensors)}};
  if (m.density) {
    out["rho"] = matrix_to_json(m.density->state.density());
    out["diagnostics"] = Json{{"condition_number", finite_or_null(std::max(m.condition_number, 0.0))},
                              {"inversion_condition_number", m.density->condition_number},
                              {"projection_distance", m.density->projection_distance},
                              {"residual", m.residual}};
  }
  return out;
}

Json to_json(const ReconstructionResult& r) {
  Json manifolds = Json::array();
  for (const auto& m : r.manifolds) manifolds.push_back(to_json(m));
  Json sets = Json::array();
  for (const auto& s : r.direction_sets) sets.push_back(to_json(s));
  return Json{{"manifolds", std::move(manifolds)}, {"direction_sets", std::move(sets)}};
}

}  // namespace stokes
