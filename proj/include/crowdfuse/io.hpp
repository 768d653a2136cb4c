#pragma once

#include <string>

#include <json.hpp>

#include "crowdfuse/crowd.hpp"
#include "crowdfuse/fusion.hpp"
#include "crowdfuse/inference.hpp"

// JSON and CSV wire formats for answer matrices, estimates and decisions.
namespace crowdfuse::io {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// AnswerMatrix <-> JSON object with fields: responses (array of strings over
// {0,1,s}, one per worker), truth (string over {0,1}), column_kind (string
// over {c,g}), seed, config_digest. worker_kind is simulation-only and is
// not serialized.
nlohmann::json matrix_to_json(const crowd::AnswerMatrix& m);
crowd::AnswerMatrix matrix_from_json(const nlohmann::json& j);

// CSV: header "worker,q1,...,qQ" plus "#kind" (c/g per column) and "#truth"
// rows; one worker per row with cells 0/1/s. Round-trips through
// matrix_from_csv.
std::string matrix_to_csv(const crowd::AnswerMatrix& m);
crowd::AnswerMatrix matrix_from_csv(const std::string& text);

nlohmann::json estimates_to_json(const inference::CrowdEstimates& e);

nlohmann::json decision_to_json(const fusion::ClassDecision& d);

std::string surface_to_csv(const std::vector<inference::SurfacePoint>& pts);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace crowdfuse::io
