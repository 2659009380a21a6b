#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "embopt/backend.hpp"

// JSON wire format of the generate-and-score service. Field names are fixed;
// decoding rejects anything that does not match with ProtocolError.
namespace embopt::protocol {

using nlohmann::json;

json encode_health(const HealthResponse& msg);
HealthResponse decode_health(const json& body);

json encode_encode_request(const std::string& prompt);
std::string decode_encode_request(const json& body);

json encode_encode_response(const EmbeddingVector& embedding);
EmbeddingVector decode_encode_response(const json& body);

json encode_generate_request(const GenerationRequest& request);
GenerationRequest decode_generate_request(const json& body);

json encode_score_response(const ScoreResponse& response);
ScoreResponse decode_score_response(const json& body);

json encode_error(std::string_view message);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on characters outside the standard alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace embopt::protocol
