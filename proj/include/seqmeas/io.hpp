#pragma once

// JSON and CSV serialization. Doubles are written with 17 significant
// digits so that they read back exactly.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "seqmeas/crooks.hpp"
#include "seqmeas/prob_model.hpp"
#include "seqmeas/quantum.hpp"
#include "seqmeas/wavepacket.hpp"

namespace seqmeas {

using json = nlohmann::json;

std::string format_double(double x);

// {"dim": n, "re": [[...]], "im": [[...]]}; "im" may be omitted on input.
json matrix_to_json(const CMatrix& a);
CMatrix matrix_from_json(const json& j);

json joint_model_to_json(const JointModel& m);
JointModel joint_model_from_json(const json& j);

// Header: index, E_1..E_L, d.
void write_family_csv(std::ostream& os, const SpectralFamily& fam);
// Header: w, prob, reciprocal_prob, ratio_error.
void write_work_csv(std::ostream& os, const WorkDistribution& wd);
// Header: t, S_p, S_phat, mass_deficit_p, mass_deficit_phat, N_x, N_p.
void write_entropy_curve_csv(std::ostream& os, const std::vector<EntropyCurveRow>& rows);

std::uint64_t fnv1a64(std::string_view data);
// FNV-1a of the compact JSON dump (keys sorted), as 16 hex digits.
std::string config_hash(const json& config);

}  // namespace seqmeas
