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


#ifndef STOKES_SERIALIZE_HPP
#define STOKES_SERIALIZE_HPP

#include <json.hpp>

#include "stokes/fock_core.hpp"
#include "stokes/menagerie.hpp"
#include "stokes/moments.hpp"
#include "stokes/tomography.hpp"

namespace stokes {

using Json = nlohmann::json;

/// {N, rows}: each row a list of [re, im] pairs.
Json to_json(const ManifoldOperator& op);
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);

/// {type, params, blocks: [{N, pN, vector | matrix}]}. Pure blocks carry
/// amplitudes, mixed blocks a density matrix.
Json state_to_json(const BlockDiagonalState& state, const std::string& type, const Json& params);
BlockDiagonalState state_from_json(const Json& j);

/// Elements flattened with the leftmost index slowest.
Json to_json(const PolarizationTensor& t);
Json to_json(const MomentComponents& m);
Json to_json(const MeasurementRecord& rec);
MeasurementRecord record_from_json(const Json& j);
Json to_json(const DirectionSet& set);
Json to_json(const ManifoldReconstruction& m);
Json to_json(const ReconstructionResult& r);

}  // namespace stokes

#endif  // STOKES_SERIALIZE_HPP
