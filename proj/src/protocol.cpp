#include "embopt/protocol.hpp"

#include <array>
#include <cmath>

#include "embopt/error.hpp"

namespace embopt::protocol {

namespace {

const json& field(const json& body, const char* name) {
  if (!body.is_object()) throw ProtocolError("protocol: message is not a JSON object");
  auto it = body.find(name);
  if (it == body.end()) throw ProtocolError(std::string("protocol: missing field '") + name + "'");
  return *it;
}

double number_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_number()) throw ProtocolError(std::string("protocol: field '") + name + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ProtocolError(std::string("protocol: field '") + name + "' is not finite");
  return x;
}

std::string string_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_string()) throw ProtocolError(std::string("protocol: field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::int64_t integer_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_number_integer()) throw ProtocolError(std::string("protocol: field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

std::vector<std::size_t> shape_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_array()) throw ProtocolError(std::string("protocol: field '") + name + "' must be an array");
  std::vector<std::size_t> shape;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<std::int64_t>() <= 0) {
      throw ProtocolError(std::string("protocol: field '") + name + "' must hold positive integers");
    }
    shape.push_back(e.get<std::size_t>());
  }
  return shape;
}

EmbeddingVector embedding_fields(const json& body) {
  const auto& values = field(body, "embedding");
  if (!values.is_array()) throw ProtocolError("protocol: field 'embedding' must be an array");
  std::vector<double> data;
  data.reserve(values.size());
  for (const auto& e : values) {
    if (!e.is_number()) throw ProtocolError("protocol: embedding entries must be numbers");
    data.push_back(e.get<double>());
  }
  auto shape = shape_field(body, "shape");
  try {
    return EmbeddingVector(std::move(data), std::move(shape));
  } catch (const ValidationError& e) {
    throw ProtocolError(std::string("protocol: ") + e.what());
  }
}

}  // namespace

json encode_health(const HealthResponse& msg) {
  return json{{"status", msg.status}, {"backend", msg.backend}, {"embedding_shape", msg.embedding_shape}};
}

HealthResponse decode_health(const json& body) {
  HealthResponse msg;
  msg.status = string_field(body, "status");
  msg.backend = string_field(body, "backend");
  if (msg.backend != "mock" && msg.backend != "real") throw ProtocolError("protocol: unknown backend kind");
  msg.embedding_shape = shape_field(body, "embedding_shape");
  return msg;
}

json encode_encode_request(const std::string& prompt) { return json{{"prompt", prompt}}; }

std::string decode_encode_request(const json& body) { return string_field(body, "prompt"); }

json encode_encode_response(const EmbeddingVector& embedding) {
  return json{{"embedding", embedding.data()}, {"shape", embedding.shape()}};
}

EmbeddingVector decode_encode_response(const json& body) { return embedding_fields(body); }

json encode_generate_request(const GenerationRequest& r) {
  return json{{"prompt", r.prompt},
              {"embedding", r.embedding.data()},
              {"shape", r.embedding.shape()},
              {"seed", r.seed},
              {"steps", r.inference_steps},
              {"guidance", r.guidance_scale},
              {"width", r.width},
              {"height", r.height},
              {"return_image", r.return_image}};
}

GenerationRequest decode_generate_request(const json& body) {
  GenerationRequest r;
  r.prompt = string_field(body, "prompt");
  r.embedding = embedding_fields(body);
  const auto& seed = field(body, "seed");
  if (!seed.is_number_integer()) throw ProtocolError("protocol: field 'seed' must be an integer");
  r.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>() : static_cast<std::uint64_t>(seed.get<std::int64_t>());
  r.inference_steps = static_cast<int>(integer_field(body, "steps"));
  r.guidance_scale = number_field(body, "guidance");
  r.width = static_cast<int>(integer_field(body, "width"));
  r.height = static_cast<int>(integer_field(body, "height"));
  const auto& ret = field(body, "return_image");
  if (!ret.is_boolean()) throw ProtocolError("protocol: field 'return_image' must be a boolean");
  r.return_image = ret.get<bool>();
  try {
    r.validate();
  } catch (const ValidationError& e) {
    throw ProtocolError(std::string("protocol: ") + e.what());
  }
  return r;
}

json encode_score_response(const ScoreResponse& r) {
  json body{{"aesthetic", r.aesthetic}, {"clip", r.clip}, {"image_id", r.image_id}};
  body["image_png_b64"] = r.image_png ? json(base64_encode(*r.image_png)) : json(nullptr);
  return body;
}

ScoreResponse decode_score_response(const json& body) {
  ScoreResponse r;
  r.aesthetic = number_field(body, "aesthetic");
  r.clip = number_field(body, "clip");
  r.image_id = string_field(body, "image_id");
  const auto& img = field(body, "image_png_b64");
  if (img.is_string()) {
    r.image_png = base64_decode(img.get<std::string>());
  } else if (!img.is_null()) {
    throw ProtocolError("protocol: field 'image_png_b64' must be a string or null");
  }
  return r;
}

json encode_error(std::string_view message) { return json{{"error", std::string(message)}}; }

namespace {
constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t n = bytes[i] << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> lookup{};
  lookup.fill(-1);
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);

  if (text.size() % 4 != 0) throw ProtocolError("base64: length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) throw ProtocolError("base64: misplaced padding");
        vals[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw ProtocolError("base64: data after padding");
        vals[k] = lookup[static_cast<unsigned char>(c)];
        if (vals[k] < 0) throw ProtocolError("base64: invalid character");
      }
    }
    const std::uint32_t n = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((n >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n & 0xFF));
  }
  return out;
}

}  // namespace embopt::protocol
